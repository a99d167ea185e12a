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


#include <string>
#include <vector>

#include "doctest.h"
#include "mechtree/dsl.hpp"
#include "mechtree/errors.hpp"
#include "mechtree/mechanisms.hpp"
#include "mechtree/tree.hpp"

using namespace mechtree;

namespace {

bool mentions(const std::vector<std::string>& violations, const std::string& needle) {
  for (const auto& v : violations) {
    if (v.find(needle) != std::string::npos) return true;
  }
  return false;
}

DecisionTree single_leaf(std::vector<Rational> weights) {
  TreeBuilder b(weights.size());
  const NodeIndex l = b.leaf(std::move(weights));
  return std::move(b).build(l);
}

}  // namespace

TEST_CASE("comparison operators") {
  CHECK(holds(ComparisonOp::kGE, 2, 2));
  CHECK_FALSE(holds(ComparisonOp::kGT, 2, 2));
  CHECK(holds(ComparisonOp::kLE, 1, 2));
  CHECK_FALSE(holds(ComparisonOp::kLT, 3, 2));
  CHECK(op_symbol(ComparisonOp::kGE) == ">=");
  CHECK(op_symbol(ComparisonOp::kLT) == "<");
  CHECK(to_string(Operand::agent(3)) == "x3");
  CHECK(to_string(Operand::param(2)) == "z2");
}

TEST_CASE("the hand-written median of three is valid") {
  const DecisionTree t = median_of_three();
  CHECK(validate(t).empty());
  CHECK(leaf_count(t) == 6);
  CHECK(internal_count(t) == 5);
  CHECK(depth(t) == 3);
}

TEST_CASE("single leaf") {
  const DecisionTree t = single_leaf({1, 0, 0});
  CHECK(validate(t).empty());
  CHECK(leaf_count(t) == 1);
  CHECK(depth(t) == 0);
  CHECK(t.leaves() == std::vector<NodeIndex>{t.root()});
}

TEST_CASE("coefficient sum violation") {
  const DecisionTree t = single_leaf({Rational(1, 2), Rational(1, 2), Rational(1, 4)});
  const auto v = validate(t);
  CHECK(mentions(v, "coefficients sum 5/4"));
  CHECK_THROWS_AS(require_valid(t), ValidationError);
}

TEST_CASE("negative coefficient violation") {
  CHECK(mentions(validate(single_leaf({2, -1})), "negative coefficient"));
}

TEST_CASE("self comparison violation") {
  TreeBuilder b(2);
  const NodeIndex a = b.unit_leaf(Operand::agent(1));
  const NodeIndex c = b.unit_leaf(Operand::agent(2));
  const NodeIndex r = b.compare(Operand::agent(1), ComparisonOp::kGE, Operand::agent(1), a, c);
  CHECK(mentions(validate(std::move(b).build(r)), "i = j"));
}

TEST_CASE("operand range violation") {
  TreeBuilder b(2);
  const NodeIndex a = b.unit_leaf(Operand::agent(1));
  const NodeIndex c = b.unit_leaf(Operand::agent(2));
  const NodeIndex r = b.compare(Operand::agent(1), ComparisonOp::kGE, Operand::agent(5), a, c);
  CHECK(mentions(validate(std::move(b).build(r)), "out of range"));
}

TEST_CASE("shared child and cycle violations") {
  Leaf leaf{{1, 0}, {}};
  std::vector<TreeNode> shared{
      {"n0", Comparison{Operand::agent(1), ComparisonOp::kGE, Operand::agent(2), 1, 1}},
      {"l0", leaf}};
  CHECK(mentions(validate(DecisionTree(2, shared, 0)), "multiple parents"));
  std::vector<TreeNode> cycle{
      {"n0", Comparison{Operand::agent(1), ComparisonOp::kGE, Operand::agent(2), 1, 2}},
      {"n1", Comparison{Operand::agent(1), ComparisonOp::kLT, Operand::agent(2), 0, 2}},
      {"l0", leaf}};
  CHECK_FALSE(validate(DecisionTree(2, cycle, 0)).empty());
  std::vector<TreeNode> orphan{{"l0", leaf}, {"l1", leaf}};
  CHECK(mentions(validate(DecisionTree(2, orphan, 0)), "unreachable"));
}

TEST_CASE("preorder visits the true child first") {
  const DecisionTree t = median_of_three();
  const auto leaves = t.leaves();
  REQUIRE(leaves.size() == 6);
  std::vector<std::size_t> outputs;
  for (NodeIndex l : leaves) {
    const auto& w = t.node(l).leaf().agent_weights;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] == 1) outputs.push_back(i + 1);
    }
  }
  // x1>=x2: (x2>=x3: x2 | (x1>=x3: x3 | x1)) | (x2>=x3: (x1>=x3: x1 | x3) | x2)
  CHECK(outputs == std::vector<std::size_t>{2, 3, 1, 1, 3, 2});
  CHECK(t.preorder().front() == t.root());
  CHECK(t.preorder().size() == 11);
}

TEST_CASE("canonicalize renames in preorder and drops unreachable nodes") {
  Leaf a{{1, 0}, {}};
  Leaf c{{0, 1}, {}};
  std::vector<TreeNode> nodes{
      {"x", a},
      {"stray", c},
      {"top", Comparison{Operand::agent(1), ComparisonOp::kLT, Operand::agent(2), 3, 0}},
      {"y", c}};
  const DecisionTree raw(2, nodes, 2);
  const DecisionTree canon = canonicalize(raw);
  REQUIRE(canon.nodes().size() == 3);
  CHECK(canon.root() == 0);
  CHECK(canon.node(0).id == "n0");
  CHECK(canon.node(1).id == "l0");
  CHECK(canon.node(2).id == "l1");
  CHECK(same_structure(raw, canon));
  CHECK_FALSE(same_structure(canon, median_of_three()));
}

TEST_CASE("full order tree on three agents has 3! leaves") {
  const DecisionTree t = gen_tampered_dictator(3, 6, false);
  CHECK(validate(t).empty());
  CHECK(leaf_count(t) == 6);
}

TEST_CASE("randomized mechanism validation") {
  CHECK(validate(gen_random_dictator(4)).empty());
  CHECK(validate(gen_sampled_median(9, 3)).empty());
  CHECK(validate(gen_sampled_median(201, 101)).empty());

  ParamTree pt;
  pt.param_count = 1;
  TreeBuilder b(3, 1);
  pt.body = std::move(b).build(b.unit_leaf(Operand::param(1)));
  const RandomizedMechanism bad_mass(3, {{Rational(1, 2), pt}, {Rational(1, 3), pt}});
  CHECK(mentions(validate(bad_mass), "probabilities sum 5/6"));
  CHECK_THROWS_AS(require_valid(bad_mass), ValidationError);

  ParamTree dup = pt;
  dup.distribution = ExplicitTuples{{{{2}, Rational(1)}, {{2}, Rational(0)}}};
  dup.fixed_agents = {2};
  const RandomizedMechanism fixed_in_tuple(3, {{Rational(1), dup}});
  CHECK(mentions(validate(fixed_in_tuple), "is fixed"));

  ParamTree pair = pt;
  pair.param_count = 2;
  TreeBuilder b2(3, 2);
  pair.body = std::move(b2).build(b2.leaf({0, 0, 0}, {Rational(1, 2), Rational(1, 2)}));
  pair.distribution = ExplicitTuples{{{{1, 1}, Rational(1)}}};
  CHECK(mentions(validate(RandomizedMechanism(3, {{Rational(1), pair}})), "duplicate agent"));
}

TEST_CASE("free agents exclude the fixed set") {
  ParamTree pt;
  pt.fixed_agents = {2, 4};
  CHECK(pt.free_agents(5) == std::vector<std::size_t>{1, 3, 5});
}

TEST_CASE("Moulin scheme validation and defaults") {
  const MoulinScheme m = gen_moulin_median3();
  CHECK(validate(m).empty());
  CHECK(m.constants().size() == 8);
  CHECK(m.constant({1, 2}).is_neg_inf());
  const MoulinScheme sparse(2, {{{1}, ExtendedRational(Rational(3))}});
  CHECK(sparse.constant({}).is_pos_inf());
  CHECK(sparse.constant({2}).is_pos_inf());
  const MoulinScheme all_inf(2, {});
  CHECK(mentions(validate(all_inf), "every constant is +inf"));
  const MoulinScheme empty_neg(2, {{{}, ExtendedRational::neg_inf()}});
  CHECK(mentions(validate(empty_neg), "unbounded below"));
  const MoulinScheme bad_member(2, {{{3}, ExtendedRational(Rational(0))}});
  CHECK(mentions(validate(bad_member), "out of range"));
}

TEST_CASE("witness formatting uses exact rationals") {
  ManipulationWitness w;
  w.agent = 2;
  w.truthful = LocationProfile{0, 1};
  w.deviation = 2;
  w.facility = Rational(1, 2);
  w.deviated_facility = 1;
  w.cost_truthful = Rational(1, 2);
  w.cost_deviated = 0;
  w.leaf_id = "l0";
  w.deviated_leaf_id = "l0";
  const std::string text = format_witness(w);
  CHECK(text.find("agent: 2") != std::string::npos);
  CHECK(text.find("1/2") != std::string::npos);
  CHECK(w.cost_decrease() == Rational(1, 2));
  CHECK(w.deviated_profile() == LocationProfile{0, 2});
}
