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
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "mechtree/core.hpp"
#include "mechtree/errors.hpp"
#include "mechtree/rational.hpp"
#include "oracles.hpp"

using namespace mechtree;

namespace {

Rational q(const char* text) { return *parse_rational(text); }

}  // namespace

TEST_CASE("rational parsing and printing") {
  CHECK(parse_rational("3/4") == Rational(3, 4));
  CHECK(parse_rational("-7") == Rational(-7));
  CHECK(parse_rational("6/8") == Rational(3, 4));
  CHECK_FALSE(parse_rational("0.5"));
  CHECK_FALSE(parse_rational("1/0"));
  CHECK_FALSE(parse_rational(""));
  CHECK_FALSE(parse_rational("1/2/3"));
  CHECK(to_string(*parse_rational("-3/6")) == "-1/2");
  CHECK(to_string(Rational(4)) == "4");
  CHECK(to_decimal(Rational(1, 3), 4) == "0.3333");
}

TEST_CASE("extended rationals order the infinities around every finite value") {
  const auto lo = ExtendedRational::neg_inf();
  const auto hi = ExtendedRational::pos_inf();
  const ExtendedRational mid(Rational(5));
  CHECK(lo < mid);
  CHECK(mid < hi);
  CHECK(lo < hi);
  CHECK_FALSE(hi < hi);
  CHECK(parse_extended("+inf")->is_pos_inf());
  CHECK(parse_extended("-inf")->is_neg_inf());
  CHECK(parse_extended("-2/3")->value() == Rational(-2, 3));
  CHECK(to_string(hi) == "+inf");
  CHECK(to_string(mid) == "5");
}

TEST_CASE("cost") {
  CHECK(cost(3, 3) == 0);
  CHECK(cost(1, 3) == 2);
  CHECK(cost(q("-1/2"), q("1/4")) == Rational(3, 4));
}

TEST_CASE("cost is symmetric and obeys the triangle inequality") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> num(-50, 50);
  std::uniform_int_distribution<int> den(1, 9);
  for (int i = 0; i < 1000; ++i) {
    const Rational a = oracle::fraction(num(rng), den(rng));
    const Rational b = oracle::fraction(num(rng), den(rng));
    const Rational c = oracle::fraction(num(rng), den(rng));
    CHECK(cost(a, b) == cost(b, a));
    CHECK(cost(a, c) <= cost(a, b) + cost(b, c));
  }
}

TEST_CASE("social and max cost") {
  CHECK(social_cost({0, 0, 1, 1, 1}, 1) == 2);
  CHECK(social_cost({5}, 5) == 0);
  CHECK(social_cost({0, 1}, Rational(1, 2)) == 1);
  CHECK(max_cost({0, 1}, Rational(1, 2)) == Rational(1, 2));
  CHECK(max_cost({0, 0, 1}, 0) == 1);
  CHECK(max_cost({-2, 4, 1}, 0) == 4);
  CHECK(objective_value(Objective::kMaxCost, {-2, 4, 1}, 0) == 4);
  CHECK(objective_value(Objective::kSocialCost, {-2, 4, 1}, 0) == 7);
}

TEST_CASE("optima") {
  const OptimalPoint a = opt_social_cost({1, 3, 2});
  CHECK(a.location == 2);
  CHECK(a.value == 2);
  const OptimalPoint b = opt_social_cost({0, 1});
  CHECK(b.location == 0);
  CHECK(b.value == 1);
  CHECK(opt_social_cost({7}).value == 0);
  const OptimalPoint c = opt_max_cost({0, 1});
  CHECK(c.location == Rational(1, 2));
  CHECK(c.value == Rational(1, 2));
  const OptimalPoint d = opt_max_cost({q("3/2"), q("3/2"), q("3/2")});
  CHECK(d.location == Rational(3, 2));
  CHECK(d.value == 0);
  const OptimalPoint e = opt_max_cost({0, 0, 1, 10});
  CHECK(e.location == 5);
  CHECK(e.value == 5);
  CHECK(diameter({0, 1}) == 1);
  CHECK(diameter({5}) == 0);
  CHECK(diameter({-3, 4, 0}) == 7);
}

TEST_CASE("social-cost optimum matches a scan over the input points") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> num(-20, 20);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Location> peaks(1 + trial % 8);
    for (Location& p : peaks) p = oracle::fraction(num(rng), 1 + trial % 3);
    const LocationProfile profile(peaks);
    Rational best = social_cost(profile, peaks[0]);
    for (const Location& p : peaks) best = std::min(best, social_cost(profile, p));
    const OptimalPoint opt = opt_social_cost(profile);
    CHECK(opt.value == best);
    CHECK(opt.location == oracle::sort_median(peaks));
    const SocialCostIndex index(profile);
    for (int probe = -25; probe <= 25; probe += 5) {
      CHECK(index.social_cost(probe) == social_cost(profile, probe));
    }
  }
}

TEST_CASE("profiles") {
  const LocationProfile p{1, 2, 3};
  CHECK(p.size() == 3);
  CHECK(p.agent(1) == 1);
  CHECK(p.with_report(2, 9) == LocationProfile{1, 9, 3});
  CHECK(p == LocationProfile{1, 2, 3});
  CHECK_THROWS_AS(LocationProfile(std::vector<Location>{}), UsageError);
  CHECK(parse_objective("sc") == Objective::kSocialCost);
  CHECK(parse_objective("mc") == Objective::kMaxCost);
  CHECK(objective_name(Objective::kMaxCost) == "mc");
  CHECK_THROWS_AS(parse_objective("avg"), UsageError);
}

TEST_CASE("profile text") {
  const LocationProfile p = parse_profile("# comment\n1/2\n\n-3\n7/4\n");
  CHECK(p == LocationProfile{q("1/2"), -3, q("7/4")});
  CHECK(parse_profile(format_profile(p)) == p);
  CHECK(load_profile(MECHTREE_FIXTURES "/p_mixed4.prof").size() == 4);
  try {
    parse_profile("1\n0.5\n");
    FAIL("decimal accepted");
  } catch (const ParseError& e) {
    CHECK(e.span().line == 2);
  }
  CHECK_THROWS_AS(parse_profile("# nothing\n"), ParseError);
}
