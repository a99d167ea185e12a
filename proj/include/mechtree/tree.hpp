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

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "mechtree/core.hpp"
#include "mechtree/rational.hpp"

namespace mechtree {

/// The four pairwise comparisons a node may test. There is no equality test.
enum class ComparisonOp { kGE, kLE, kGT, kLT };

std::string_view op_symbol(ComparisonOp op);
bool holds(ComparisonOp op, const Rational& lhs, const Rational& rhs);

/// A comparison operand: agent x_i or, inside a parameterized tree, z_j.
/// Indices are 1-based.
struct Operand {
  enum class Kind { kAgent, kParam };

  Kind kind = Kind::kAgent;
  std::size_t index = 1;

  static Operand agent(std::size_t i) { return {Kind::kAgent, i}; }
  static Operand param(std::size_t j) { return {Kind::kParam, j}; }
  bool is_agent() const { return kind == Kind::kAgent; }

  friend bool operator==(const Operand&, const Operand&) = default;
};

std::string to_string(const Operand& operand);

using NodeIndex = std::size_t;

struct Comparison {
  Operand lhs;
  ComparisonOp op = ComparisonOp::kGE;
  Operand rhs;
  NodeIndex if_true = 0;
  NodeIndex if_false = 0;
};

/// Convex-combination output. `agent_weights` has one entry per agent;
/// `param_weights` is non-empty only inside parameterized trees.
struct Leaf {
  std::vector<Rational> agent_weights;
  std::vector<Rational> param_weights;
};

struct TreeNode {
  std::string id;
  std::variant<Comparison, Leaf> body;

  bool is_leaf() const { return std::holds_alternative<Leaf>(body); }
  const Leaf& leaf() const { return std::get<Leaf>(body); }
  const Comparison& comparison() const { return std::get<Comparison>(body); }
};

/// Binary comparison tree stored as a node table. Children are indices into
/// the table. A deterministic mechanism has param_count() == 0; bodies of
/// parameterized trees may also reference z_1..z_m.
class DecisionTree {
 public:
  DecisionTree(std::size_t agent_count, std::vector<TreeNode> nodes, NodeIndex root,
               std::size_t param_count = 0);

  std::size_t agent_count() const { return agent_count_; }
  std::size_t param_count() const { return param_count_; }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeNode& node(NodeIndex i) const { return nodes_.at(i); }
  NodeIndex root() const { return root_; }

  /// Leaves in preorder (true child visited before false child).
  std::vector<NodeIndex> leaves() const;
  /// All nodes reachable from the root, in preorder.
  std::vector<NodeIndex> preorder() const;

 private:
  std::size_t agent_count_;
  std::size_t param_count_;
  std::vector<TreeNode> nodes_;
  NodeIndex root_;
};

/// Incremental construction for generators. Ids are assigned on build() by
/// canonical preorder renumbering.
class TreeBuilder {
 public:
  explicit TreeBuilder(std::size_t agent_count, std::size_t param_count = 0)
      : agent_count_(agent_count), param_count_(param_count) {}

  NodeIndex leaf(std::vector<Rational> agent_weights,
                 std::vector<Rational> param_weights = {});
  /// Leaf outputting a single operand.
  NodeIndex unit_leaf(Operand operand);
  NodeIndex compare(Operand lhs, ComparisonOp op, Operand rhs, NodeIndex if_true,
                    NodeIndex if_false);
  DecisionTree build(NodeIndex root) &&;

 private:
  std::size_t agent_count_;
  std::size_t param_count_;
  std::vector<TreeNode> nodes_;
};

/// Reorders the node table into preorder and renames nodes n0,n1,... and
/// leaves l0,l1,... Unreachable nodes are dropped.
DecisionTree canonicalize(const DecisionTree& tree);

/// Structural identity up to node naming and table order.
bool same_structure(const DecisionTree& a, const DecisionTree& b);

/// Every invariant violation of a deterministic tree; empty means valid.
std::vector<std::string> validate(const DecisionTree& tree);
/// Throws ValidationError when validate() reports anything.
void require_valid(const DecisionTree& tree);

std::size_t leaf_count(const DecisionTree& tree);
std::size_t internal_count(const DecisionTree& tree);
/// Longest root-to-leaf path, in edges.
std::size_t depth(const DecisionTree& tree);

/// Symbolic tag: uniform over m-subsets of the non-fixed agents, bound in
/// ascending agent order.
struct UniformSubsets {
  friend bool operator==(const UniformSubsets&, const UniformSubsets&) = default;
};

struct ExplicitTuples {
  std::vector<std::pair<std::vector<std::size_t>, Rational>> entries;
};

using TupleDistribution = std::variant<UniformSubsets, ExplicitTuples>;

/// Body that outputs the median of its parameters. The comparison tree it
/// denotes is expanded lazily along the evaluated path (binary insertion),
/// which keeps large sample sizes representable.
struct ImplicitMedian {};

struct ParamTree {
  std::vector<std::size_t> fixed_agents;  // N_r, ascending
  std::size_t param_count = 0;            // m_r
  std::variant<ImplicitMedian, DecisionTree> body;
  TupleDistribution distribution = UniformSubsets{};

  bool is_implicit() const { return std::holds_alternative<ImplicitMedian>(body); }
  const DecisionTree& tree() const { return std::get<DecisionTree>(body); }
  /// Agents available for binding, ascending.
  std::vector<std::size_t> free_agents(std::size_t agent_count) const;
};

struct Branch {
  Rational probability;
  ParamTree tree;
};

/// Chance root over parameterized trees.
class RandomizedMechanism {
 public:
  RandomizedMechanism(std::size_t agent_count, std::vector<Branch> branches)
      : agent_count_(agent_count), branches_(std::move(branches)) {}

  std::size_t agent_count() const { return agent_count_; }
  const std::vector<Branch>& branches() const { return branches_; }

 private:
  std::size_t agent_count_;
  std::vector<Branch> branches_;
};

std::vector<std::string> validate(const RandomizedMechanism& mech);
void require_valid(const RandomizedMechanism& mech);

/// Generalized-median scheme: output is the infimum over coalitions S of
/// sup({x_i : i in S} U {a_S}). Coalitions not stored default to +inf.
class MoulinScheme {
 public:
  using Coalition = std::vector<std::size_t>;  // ascending, 1-based

  MoulinScheme(std::size_t agent_count,
               std::vector<std::pair<Coalition, ExtendedRational>> constants);

  std::size_t agent_count() const { return agent_count_; }
  /// Stored entries ordered by (size, lexicographic).
  const std::vector<std::pair<Coalition, ExtendedRational>>& constants() const {
    return constants_;
  }
  ExtendedRational constant(const Coalition& coalition) const;

 private:
  std::size_t agent_count_;
  std::vector<std::pair<Coalition, ExtendedRational>> constants_;
};

std::vector<std::string> validate(const MoulinScheme& scheme);
void require_valid(const MoulinScheme& scheme);

using Mechanism = std::variant<DecisionTree, RandomizedMechanism, MoulinScheme>;

std::size_t agent_count(const Mechanism& mech);

/// A profitable unilateral deviation. For randomized mechanisms `branch` and
/// `tuple` locate the failing bound tree.
struct ManipulationWitness {
  std::size_t agent = 1;
  LocationProfile truthful{Location(0)};
  Location deviation;
  NodeIndex leaf = 0;
  NodeIndex deviated_leaf = 0;
  std::string leaf_id;
  std::string deviated_leaf_id;
  Location facility;
  Location deviated_facility;
  Rational cost_truthful;
  Rational cost_deviated;
  std::optional<std::size_t> branch;
  std::vector<std::size_t> tuple;

  Rational cost_decrease() const { return cost_truthful - cost_deviated; }
  LocationProfile deviated_profile() const {
    return truthful.with_report(agent, deviation);
  }
};

/// Either truthful or a manipulation witness.
struct Verdict {
  std::optional<ManipulationWitness> witness;

  bool truthful() const { return !witness.has_value(); }
};

/// Plain-text witness report; every number is an exact rational.
std::string format_witness(const ManipulationWitness& witness);

}  // namespace mechtree
