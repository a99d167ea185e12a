// Copyright 2026 The mechtree Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "mechtree/errors.hpp"
#include "mechtree/lp.hpp"
#include "mechtree/lp_kernel.hpp"
#include "mechtree/mechanisms.hpp"
#include "mechtree/verifier.hpp"
#include "oracles.hpp"

using namespace mechtree;
using lp_kernel::Fraction64;

namespace {

LinearConstraintSystem system_of(std::size_t n,
                                 std::vector<std::pair<std::vector<long>, long>> rows) {
  LinearConstraintSystem s(n);
  for (auto& [coefficients, bound] : rows) {
    LinearInequality in;
    for (long c : coefficients) in.coefficients.emplace_back(c);
    in.bound = bound;
    s.add(std::move(in));
  }
  return s;
}

LinearConstraintSystem random_system(std::mt19937_64& rng, std::size_t n, std::size_t m,
                                     long magnitude) {
  std::uniform_int_distribution<long> coef(-magnitude, magnitude);
  std::uniform_int_distribution<long> bound(-2 * magnitude, 2 * magnitude);
  LinearConstraintSystem s(n);
  for (std::size_t i = 0; i < m; ++i) {
    LinearInequality in;
    for (std::size_t j = 0; j < n; ++j) {
      // Sparse rows, as produced by the verifier.
      in.coefficients.emplace_back(rng() % 3 == 0 ? 0 : coef(rng));
      if (rng() % 4 == 0) in.coefficients.back() /= 2 + static_cast<long>(rng() % 3);
    }
    in.bound = oracle::fraction(bound(rng), 1 + static_cast<long>(rng() % 3));
    s.add(std::move(in));
  }
  return s;
}

}  // namespace

TEST_CASE("trivial systems") {
  const auto infeasible = system_of(1, {{{1}, 1}, {{-1}, 0}});
  CHECK_FALSE(lp_feasible(infeasible).feasible);
  CHECK(lp_feasible(infeasible).witness.empty());
  const auto feasible = system_of(2, {{{1, -1}, 1}});
  const FeasibilityResult r = lp_feasible(feasible);
  REQUIRE(r.feasible);
  CHECK(feasible.satisfied_by(r.witness));
  CHECK(lp_feasible(LinearConstraintSystem(3)).feasible);
  CHECK_FALSE(lp_feasible(system_of(2, {{{0, 0}, 1}})).feasible);
  CHECK(lp_feasible(system_of(2, {{{0, 0}, 0}})).feasible);
  CHECK_FALSE(lp_feasible(system_of(2, {{{-1, -1}, 1}})).feasible);
}

TEST_CASE("rows and systems") {
  LinearInequality in{{1, -2}, 3};
  CHECK(in.lhs({5, 1}) == 3);
  CHECK(in.satisfied_by({5, 1}));
  CHECK_FALSE(in.satisfied_by({4, 1}));
  CHECK_FALSE(in.is_zero());
  CHECK(LinearInequality{{0, 0}, 1}.is_zero());
  LinearConstraintSystem s(2);
  CHECK_THROWS_AS(s.add({{1}, 0}), UsageError);
  s.add(in);
  CHECK_FALSE(s.satisfied_by({-1, -3}));  // nonnegativity
  CHECK(s.to_string() == "v1 - 2 v2 >= 3\n");
  CHECK(s.to_string({"x1", "x2"}) == "x1 - 2 x2 >= 3\n");
}

TEST_CASE("normalization") {
  const auto s = system_of(2, {{{1, 0}, 0}, {{0, 0}, -1}, {{1, 0}, 2}, {{0, 1}, 0}, {{1, 0}, 2}});
  const auto n = s.normalized();
  CHECK(n.rows().size() == 2);
  CHECK(n == system_of(2, {{{0, 1}, 0}, {{1, 0}, 2}}));
  CHECK(n.normalized() == n);
  CHECK(lp_feasible(n).feasible == lp_feasible(s).feasible);
}

TEST_CASE("Fraction64 arithmetic") {
  const Fraction64 a = Fraction64::from(Rational(3, 4));
  const Fraction64 b = Fraction64::from(Rational(-5, 6));
  CHECK((a + b).to_rational() == Rational(-1, 12));
  CHECK((a - b).to_rational() == Rational(19, 12));
  CHECK((a * b).to_rational() == Rational(-5, 8));
  CHECK((a / b).to_rational() == Rational(-9, 10));
  CHECK(b < a);
  CHECK(Fraction64(4) == Fraction64::from(oracle::fraction(8, 2)));
  CHECK(a + (-a) == Fraction64(0));
  CHECK((a - a).to_rational() == 0);
  CHECK((Fraction64(0) * b) == Fraction64(0));
  CHECK(a.sign() == 1);
  CHECK(b.sign() == -1);
  const Fraction64 huge(std::int64_t{1} << 62);
  CHECK_THROWS_AS(huge * huge, lp_kernel::Overflow);
  CHECK_THROWS_AS(huge + huge, lp_kernel::Overflow);
  CHECK_THROWS_AS(Fraction64::from(Rational(mpz_class("100000000000000000000"))),
                  lp_kernel::Overflow);
}

TEST_CASE("median-of-three leaf pair with agent 3 deviating matches Fourier-Motzkin") {
  const DecisionTree t = median_of_three();
  const auto leaves = build_leaf_constraints(t);
  REQUIRE(leaves.size() == 6);
  const auto& first = leaves[0];
  const auto& second = leaves[1];
  for (Side s : {Side::kRight, Side::kLeft}) {
    for (Side s2 : {Side::kRight, Side::kLeft}) {
      const auto inc = utility_increase(3, t.node(first.leaf).leaf(), s,
                                        t.node(second.leaf).leaf(), s2);
      const auto system = manipulation_system(3, 3, first, second, inc);
      CHECK(lp_feasible(system).feasible == oracle::fourier_motzkin_feasible(system));
      CHECK_FALSE(lp_feasible(system).feasible);
    }
  }
}

TEST_CASE("random systems agree with Fourier-Motzkin in both arithmetic modes") {
  std::mt19937_64 rng(1234);
  int feasible = 0;
  const int total = 3000;
  for (int i = 0; i < total; ++i) {
    const std::size_t n = 1 + rng() % 5;
    const std::size_t m = 1 + rng() % 8;
    const auto s = random_system(rng, n, m, 4);
    const bool expected = oracle::fourier_motzkin_feasible(s);
    const FeasibilityResult fast = lp_feasible(s, LpArithmetic::kAuto);
    const FeasibilityResult exact = lp_feasible(s, LpArithmetic::kExact);
    CAPTURE(s.to_string());
    REQUIRE(fast.feasible == expected);
    REQUIRE(exact.feasible == expected);
    if (expected) {
      ++feasible;
      CHECK(s.satisfied_by(fast.witness));
      CHECK(s.satisfied_by(exact.witness));
    }
  }
  // Both outcomes must be exercised for the comparison to mean anything.
  CHECK(feasible > total / 10);
  CHECK(feasible < total * 9 / 10);
}

TEST_CASE("coefficients beyond 64 bits fall back to exact arithmetic") {
  std::mt19937_64 rng(99);
  const Rational big(mpz_class("1000000000000000000000"));
  for (int i = 0; i < 200; ++i) {
    auto s = random_system(rng, 3, 5, 3);
    LinearConstraintSystem scaled(3);
    for (const auto& row : s.rows()) {
      LinearInequality r = row;
      for (auto& c : r.coefficients) c *= big;
      r.bound *= big + 1;
      scaled.add(r);
    }
    const bool expected = oracle::fourier_motzkin_feasible(scaled);
    CHECK(lp_feasible(scaled).feasible == expected);
    CHECK(lp_feasible(scaled, LpArithmetic::kExact).feasible == expected);
  }
}

TEST_CASE("degenerate systems terminate") {
  // Many redundant rows through the origin invite cycling without Bland's rule.
  LinearConstraintSystem s(4);
  std::mt19937_64 rng(8);
  for (int i = 0; i < 30; ++i) {
    LinearInequality in;
    for (int j = 0; j < 4; ++j) in.coefficients.emplace_back(static_cast<long>(rng() % 7) - 3);
    in.bound = 0;
    s.add(in);
  }
  CHECK(lp_feasible(s).feasible);
  LinearInequality push{{1, 1, 1, 1}, 1};
  s.add(push);
  CHECK(lp_feasible(s).feasible == lp_feasible(s, LpArithmetic::kExact).feasible);
}
