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
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "mechtree/dsl.hpp"
#include "mechtree/errors.hpp"
#include "mechtree/mechanisms.hpp"
#include "mechtree/verifier.hpp"
#include "oracles.hpp"

using namespace mechtree;

namespace {

LinearInequality row(std::vector<long> coefficients, long bound) {
  LinearInequality in;
  for (long c : coefficients) in.coefficients.emplace_back(c);
  in.bound = bound;
  return in;
}

std::uint64_t pair_count(const DecisionTree& t) {
  const std::uint64_t l = leaf_count(t);
  return 4 * t.agent_count() * l * l;
}

VerifierOptions sequential() {
  VerifierOptions o;
  o.sequential = true;
  return o;
}

}  // namespace

TEST_CASE("leaf constraints of the median of three") {
  const auto leaves = build_leaf_constraints(median_of_three());
  REQUIRE(leaves.size() == 6);
  CHECK(leaves[0].rows == std::vector<LinearInequality>{row({1, -1, 0}, 0), row({0, 1, -1}, 0)});
  CHECK(leaves[1].rows ==
        std::vector<LinearInequality>{row({1, -1, 0}, 0), row({0, -1, 1}, 1), row({1, 0, -1}, 0)});
  CHECK(build_leaf_constraints(gen_dictator(3, 1))[0].rows.empty());
}

TEST_CASE("strict and weak operators in both directions") {
  const Mechanism m = load_mechanism(MECHTREE_FIXTURES "/strict_ops.mech");
  const auto leaves = build_leaf_constraints(std::get<DecisionTree>(m));
  REQUIRE(leaves.size() == 4);
  // a: x2 > x1 true, b: x3 <= x1 true
  CHECK(leaves[0].rows == std::vector<LinearInequality>{row({-1, 1, 0}, 1), row({1, 0, -1}, 0)});
  // a false (x2 <= x1), c: x3 < x2 false (x3 >= x2)
  CHECK(leaves[3].rows == std::vector<LinearInequality>{row({1, -1, 0}, 0), row({0, -1, 1}, 0)});
}

TEST_CASE("dictator: no sign case admits a manipulation") {
  const DecisionTree t = gen_dictator(1, 1);
  const auto leaves = build_leaf_constraints(t);
  const Leaf& leaf = t.node(t.root()).leaf();
  for (Side s : {Side::kRight, Side::kLeft}) {
    for (Side s2 : {Side::kRight, Side::kLeft}) {
      const auto inc = utility_increase(1, leaf, s, leaf, s2);
      CHECK_FALSE(exists_solution(1, 1, leaves[0], leaves[0], inc).feasible);
    }
  }
}

TEST_CASE("average of two: agent 2 can pull the facility") {
  const DecisionTree t = gen_average(2);
  const auto leaves = build_leaf_constraints(t);
  const Leaf& leaf = t.node(t.root()).leaf();
  int feasible = 0;
  for (Side s : {Side::kRight, Side::kLeft}) {
    for (Side s2 : {Side::kRight, Side::kLeft}) {
      const auto inc = utility_increase(2, leaf, s, leaf, s2);
      const FeasibilityResult r = exists_solution(2, 2, leaves[0], leaves[0], inc);
      if (!r.feasible) continue;
      ++feasible;
      // Variables are x1, x2, x2'. The deviation must help agent 2.
      const Rational before = abs(r.witness[1] - (r.witness[0] + r.witness[1]) / 2);
      const Rational after = abs(r.witness[1] - (r.witness[0] + r.witness[2]) / 2);
      CHECK(after < before);
    }
  }
  // All four: x=(0,1) with x2'=2 pulls up from the left; x=(6,4) with x2'=1
  // overshoots to 7/2; the mirrored profiles give the other two.
  CHECK(feasible == 4);
}

TEST_CASE("median of three: every combination is infeasible") {
  const DecisionTree t = median_of_three();
  const auto leaves = build_leaf_constraints(t);
  int checked = 0;
  for (std::size_t k = 1; k <= 3; ++k) {
    for (const auto& a : leaves) {
      for (const auto& b : leaves) {
        for (Side s : {Side::kRight, Side::kLeft}) {
          for (Side s2 : {Side::kRight, Side::kLeft}) {
            const auto inc = utility_increase(k, t.node(a.leaf).leaf(), s, t.node(b.leaf).leaf(), s2);
            CHECK_FALSE(exists_solution(3, k, a, b, inc).feasible);
            ++checked;
          }
        }
      }
    }
  }
  CHECK(checked == 4 * 3 * 36);
  CHECK_FALSE(oracle::grid_manipulation(t, Rational(1, 2), 2));
}

TEST_CASE("manipulation system layout") {
  const DecisionTree t = median_of_three();
  const auto leaves = build_leaf_constraints(t);
  const auto inc = utility_increase(2, t.node(leaves[0].leaf).leaf(), Side::kRight,
                                    t.node(leaves[1].leaf).leaf(), Side::kLeft);
  CHECK(inc.size() == 3);
  for (const auto& r : inc) CHECK(r.coefficients.size() == 4);
  const auto s = manipulation_system(3, 2, leaves[0], leaves[1], inc);
  CHECK(s.variable_count() == 4);
  CHECK(s.rows().size() == leaves[0].rows.size() + leaves[1].rows.size() + inc.size());
  // Deviated rows read x2' in place of x2.
  CHECK(s.rows()[2] == row({1, 0, 0, -1}, 0));
  const auto shifted = manipulation_system(3, 2, leaves[0], leaves[1], inc, true);
  CHECK(shifted.variable_count() == 5);
  CHECK(manipulation_variable_names(3, 2) == std::vector<std::string>{"x1", "x2", "x3", "x2'"});
  CHECK(manipulation_variable_names(3, 2, true).back() == "M");
}

TEST_CASE("named truthful trees") {
  for (std::size_t n = 1; n <= 8; ++n) {
    for (std::size_t i = 1; i <= n; ++i) {
      const auto r = is_truthful(gen_dictator(n, i));
      CHECK(r.verdict.truthful());
      CHECK(r.lp_calls == 4 * n);
    }
  }
  const DecisionTree m3 = median_of_three();
  const auto r3 = is_truthful(m3);
  CHECK(r3.verdict.truthful());
  CHECK(r3.lp_calls == pair_count(m3));
  CHECK(is_truthful(gen_median_first_k(6, 3)).verdict.truthful());
  CHECK(is_truthful(gen_median_tree(5)).verdict.truthful());
  CHECK(is_truthful(gen_tampered_dictator(4, 24, false)).verdict.truthful());
  CHECK(is_truthful(gen_tampered_dictator(3, 4, false)).verdict.truthful());
}

TEST_CASE("average witnesses replay") {
  for (std::size_t n : {2, 3, 5}) {
    const DecisionTree t = gen_average(n);
    const auto r = is_truthful(t);
    REQUIRE_FALSE(r.verdict.truthful());
    const ManipulationWitness& w = *r.verdict.witness;
    CHECK(oracle::replay(t, w) == "");
    CHECK(w.cost_decrease() > 0);
  }
  CHECK(oracle::grid_manipulation(gen_average(2), Rational(1, 2), 2));
}

TEST_CASE("tampered order tree: the last agent of the tampered order manipulates") {
  for (std::size_t n : {3, 4}) {
    const DecisionTree t = gen_tampered_dictator(n, n == 3 ? 6 : 24);
    const NodeIndex tampered = t.leaves().front();
    VerifierOptions o = sequential();
    o.exhaustive = true;
    const auto r = is_truthful(t, o);
    REQUIRE_FALSE(r.verdict.truthful());
    CHECK(r.lp_calls == pair_count(t));
    bool last_agent_at_tampered_leaf = false;
    for (const auto& w : r.witnesses) {
      CHECK(oracle::replay(t, w) == "");
      if (w.agent == n && w.leaf == tampered && w.deviated_leaf == tampered) {
        last_agent_at_tampered_leaf = true;
      }
    }
    CHECK(last_agent_at_tampered_leaf);
    // The first witness in iteration order is also the reported one.
    CHECK(r.witnesses.front().agent == r.verdict.witness->agent);
    CHECK(r.witnesses.front().leaf == r.verdict.witness->leaf);
  }
}

TEST_CASE("the first witness does not depend on the thread count") {
  const DecisionTree t = gen_tampered_dictator(4, 24);
  const auto one = is_truthful(t, sequential());
  for (std::size_t threads : {2, 3, 8}) {
    VerifierOptions o;
    o.threads = threads;
    const auto many = is_truthful(t, o);
    REQUIRE_FALSE(many.verdict.truthful());
    CHECK(format_witness(*many.verdict.witness) == format_witness(*one.verdict.witness));
    CHECK(many.lp_calls == one.lp_calls);
  }
  VerifierOptions all;
  all.threads = 4;
  all.exhaustive = true;
  VerifierOptions all_seq = sequential();
  all_seq.exhaustive = true;
  const auto a = is_truthful(t, all);
  const auto b = is_truthful(t, all_seq);
  REQUIRE(a.witnesses.size() == b.witnesses.size());
  CHECK(a.lp_calls == b.lp_calls);
  for (std::size_t i = 0; i < a.witnesses.size(); ++i) {
    CHECK(format_witness(a.witnesses[i]) == format_witness(b.witnesses[i]));
  }
}

TEST_CASE("shifted and exact modes give the same verdicts") {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 60; ++i) {
    const DecisionTree t = oracle::random_tree(rng, 3, 3);
    VerifierOptions base = sequential();
    VerifierOptions shifted = sequential();
    shifted.shifted = true;
    VerifierOptions exact = sequential();
    exact.arithmetic = LpArithmetic::kExact;
    const bool expected = is_truthful(t, base).verdict.truthful();
    CHECK(is_truthful(t, shifted).verdict.truthful() == expected);
    CHECK(is_truthful(t, exact).verdict.truthful() == expected);
  }
}

TEST_CASE("observer sees every system") {
  const DecisionTree t = median_of_three();
  std::uint64_t calls = 0;
  std::uint64_t feasible = 0;
  VerifierOptions o;
  o.threads = 2;
  o.observer = [&](const LinearConstraintSystem& s, const FeasibilityResult& r) {
    ++calls;
    if (r.feasible) {
      ++feasible;
      CHECK(s.satisfied_by(r.witness));
    }
  };
  const auto r = is_truthful(t, o);
  CHECK(calls == r.lp_calls);
  CHECK(feasible == 0);
}

TEST_CASE("truthful verdicts agree with the grid oracle on random trees") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 80; ++i) {
    const DecisionTree t = oracle::random_tree(rng, 3, 3);
    const auto r = is_truthful(t, sequential());
    const auto grid = oracle::grid_manipulation(t, Rational(1, 4), 2);
    if (grid) CHECK_FALSE(r.verdict.truthful());
    if (!r.verdict.truthful()) CHECK(oracle::replay(t, *r.verdict.witness) == "");
  }
}

TEST_CASE("universal truthfulness") {
  CHECK(is_universally_truthful(gen_random_dictator(5)).verdict.truthful());
  CHECK(is_universally_truthful(gen_sampled_median(9, 3)).verdict.truthful());
  CHECK(is_universally_truthful(gen_sampled_median(7, 5)).verdict.truthful());
  const Mechanism mixed = load_mechanism(MECHTREE_FIXTURES "/mixed_dictator_tampered.mech");
  const auto& mech = std::get<RandomizedMechanism>(mixed);
  const auto r = is_universally_truthful(mech);
  REQUIRE_FALSE(r.verdict.truthful());
  const ManipulationWitness& w = *r.verdict.witness;
  REQUIRE(w.branch.has_value());
  CHECK(*w.branch == 2);
  const ParamTree& pt = mech.branches()[1].tree;
  const std::vector<std::size_t> tuple = w.tuple;
  if (pt.param_count == 0) {
    CHECK(oracle::replay(pt.tree(), w) == "");
  } else {
    CHECK(oracle::replay(pt.tree(), w, tuple) == "");
  }
  CHECK_THROWS_AS(is_universally_truthful(gen_sampled_median(201, 101)), UsageError);
}

TEST_CASE("worker count") {
  VerifierOptions o;
  o.sequential = true;
  CHECK(worker_count(o) == 1);
  o.sequential = false;
  o.threads = 3;
  CHECK(worker_count(o) == 3);
  o.threads = 0;
  CHECK(worker_count(o) >= 1);
}
