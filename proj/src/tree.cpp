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

#include "mechtree/tree.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <unordered_map>

#include "mechtree/errors.hpp"

namespace mechtree {

std::string_view op_symbol(ComparisonOp op) {
  switch (op) {
    case ComparisonOp::kGE:
      return ">=";
    case ComparisonOp::kLE:
      return "<=";
    case ComparisonOp::kGT:
      return ">";
    case ComparisonOp::kLT:
      return "<";
  }
  return "?";
}

bool holds(ComparisonOp op, const Rational& lhs, const Rational& rhs) {
  switch (op) {
    case ComparisonOp::kGE:
      return lhs >= rhs;
    case ComparisonOp::kLE:
      return lhs <= rhs;
    case ComparisonOp::kGT:
      return lhs > rhs;
    case ComparisonOp::kLT:
      return lhs < rhs;
  }
  return false;
}

std::string to_string(const Operand& operand) {
  return (operand.is_agent() ? "x" : "z") + std::to_string(operand.index);
}

DecisionTree::DecisionTree(std::size_t agent_count, std::vector<TreeNode> nodes,
                           NodeIndex root, std::size_t param_count)
    : agent_count_(agent_count),
      param_count_(param_count),
      nodes_(std::move(nodes)),
      root_(root) {}

std::vector<NodeIndex> DecisionTree::preorder() const {
  std::vector<NodeIndex> order;
  if (root_ >= nodes_.size()) return order;
  std::vector<bool> seen(nodes_.size(), false);
  std::vector<NodeIndex> stack{root_};
  while (!stack.empty()) {
    const NodeIndex i = stack.back();
    stack.pop_back();
    if (i >= nodes_.size() || seen[i]) continue;
    seen[i] = true;
    order.push_back(i);
    if (!nodes_[i].is_leaf()) {
      const auto& c = nodes_[i].comparison();
      stack.push_back(c.if_false);
      stack.push_back(c.if_true);
    }
  }
  return order;
}

std::vector<NodeIndex> DecisionTree::leaves() const {
  std::vector<NodeIndex> out;
  for (NodeIndex i : preorder()) {
    if (nodes_[i].is_leaf()) out.push_back(i);
  }
  return out;
}

NodeIndex TreeBuilder::leaf(std::vector<Rational> agent_weights,
                            std::vector<Rational> param_weights) {
  agent_weights.resize(agent_count_, Rational(0));
  param_weights.resize(param_count_, Rational(0));
  nodes_.push_back({"", Leaf{std::move(agent_weights), std::move(param_weights)}});
  return nodes_.size() - 1;
}

NodeIndex TreeBuilder::unit_leaf(Operand operand) {
  std::vector<Rational> agents(agent_count_, Rational(0));
  std::vector<Rational> params(param_count_, Rational(0));
  (operand.is_agent() ? agents : params).at(operand.index - 1) = 1;
  return leaf(std::move(agents), std::move(params));
}

NodeIndex TreeBuilder::compare(Operand lhs, ComparisonOp op, Operand rhs,
                               NodeIndex if_true, NodeIndex if_false) {
  nodes_.push_back({"", Comparison{lhs, op, rhs, if_true, if_false}});
  return nodes_.size() - 1;
}

DecisionTree TreeBuilder::build(NodeIndex root) && {
  return canonicalize(DecisionTree(agent_count_, std::move(nodes_), root, param_count_));
}

DecisionTree canonicalize(const DecisionTree& tree) {
  const auto order = tree.preorder();
  std::unordered_map<NodeIndex, NodeIndex> remap;
  for (std::size_t pos = 0; pos < order.size(); ++pos) remap[order[pos]] = pos;
  std::vector<TreeNode> nodes;
  nodes.reserve(order.size());
  std::size_t next_internal = 0;
  std::size_t next_leaf = 0;
  for (NodeIndex old : order) {
    TreeNode node = tree.node(old);
    if (node.is_leaf()) {
      node.id = "l" + std::to_string(next_leaf++);
    } else {
      node.id = "n" + std::to_string(next_internal++);
      auto& c = std::get<Comparison>(node.body);
      c.if_true = remap.at(c.if_true);
      c.if_false = remap.at(c.if_false);
    }
    nodes.push_back(std::move(node));
  }
  return DecisionTree(tree.agent_count(), std::move(nodes), 0, tree.param_count());
}

namespace {

bool same_subtree(const DecisionTree& a, NodeIndex ia, const DecisionTree& b,
                  NodeIndex ib) {
  const auto& na = a.node(ia);
  const auto& nb = b.node(ib);
  if (na.is_leaf() != nb.is_leaf()) return false;
  if (na.is_leaf()) {
    return na.leaf().agent_weights == nb.leaf().agent_weights &&
           na.leaf().param_weights == nb.leaf().param_weights;
  }
  const auto& ca = na.comparison();
  const auto& cb = nb.comparison();
  return ca.lhs == cb.lhs && ca.op == cb.op && ca.rhs == cb.rhs &&
         same_subtree(a, ca.if_true, b, cb.if_true) &&
         same_subtree(a, ca.if_false, b, cb.if_false);
}

std::string node_label(const TreeNode& node, NodeIndex index) {
  if (!node.id.empty()) return node.id;
  return "#" + std::to_string(index);
}

// Structural checks shared by deterministic trees and parameterized bodies.
std::vector<std::string> validate_shape(const DecisionTree& tree) {
  std::vector<std::string> out;
  const std::size_t n = tree.agent_count();
  const std::size_t m = tree.param_count();
  if (n == 0) out.push_back("agent count must be at least 1");
  if (tree.nodes().empty()) {
    out.push_back("tree has no nodes");
    return out;
  }
  if (tree.root() >= tree.nodes().size()) {
    out.push_back("root index out of range");
    return out;
  }
  auto check_operand = [&](const Operand& op, const std::string& where) {
    const std::size_t limit = op.is_agent() ? n : m;
    if (op.index < 1 || op.index > limit) {
      out.push_back(where + ": operand " + to_string(op) + " out of range");
    }
  };
  std::vector<int> parents(tree.nodes().size(), 0);
  for (NodeIndex i = 0; i < tree.nodes().size(); ++i) {
    const auto& node = tree.node(i);
    const std::string where = (node.is_leaf() ? "leaf " : "node ") + node_label(node, i);
    if (node.is_leaf()) {
      const auto& leaf = node.leaf();
      if (leaf.agent_weights.size() != n || leaf.param_weights.size() != m) {
        out.push_back(where + ": coefficient vector has wrong length");
        continue;
      }
      Rational sum = 0;
      bool negative = false;
      for (const auto& w : leaf.agent_weights) {
        negative = negative || w < 0;
        sum += w;
      }
      for (const auto& w : leaf.param_weights) {
        negative = negative || w < 0;
        sum += w;
      }
      if (negative) out.push_back(where + ": negative coefficient");
      if (sum != 1) out.push_back(where + ": coefficients sum " + to_string(sum) + " ≠ 1");
    } else {
      const auto& c = node.comparison();
      check_operand(c.lhs, where);
      check_operand(c.rhs, where);
      if (c.lhs == c.rhs) {
        out.push_back(where + ": i = j (" + to_string(c.lhs) + " compared with itself)");
      }
      for (NodeIndex child : {c.if_true, c.if_false}) {
        if (child >= tree.nodes().size()) {
          out.push_back(where + ": child index out of range");
        } else {
          ++parents[child];
        }
      }
    }
  }
  if (parents[tree.root()] != 0) out.push_back("root has a parent (cycle)");
  for (NodeIndex i = 0; i < tree.nodes().size(); ++i) {
    if (parents[i] > 1) {
      out.push_back("node " + node_label(tree.node(i), i) + " has multiple parents");
    }
  }
  std::vector<bool> reachable(tree.nodes().size(), false);
  for (NodeIndex i : tree.preorder()) reachable[i] = true;
  for (NodeIndex i = 0; i < tree.nodes().size(); ++i) {
    if (!reachable[i]) {
      out.push_back("node " + node_label(tree.node(i), i) + " unreachable from root");
    }
  }
  return out;
}

}  // namespace

bool same_structure(const DecisionTree& a, const DecisionTree& b) {
  if (a.agent_count() != b.agent_count() || a.param_count() != b.param_count()) {
    return false;
  }
  return same_subtree(a, a.root(), b, b.root());
}

std::vector<std::string> validate(const DecisionTree& tree) {
  auto out = validate_shape(tree);
  if (tree.param_count() != 0) {
    out.insert(out.begin(), "deterministic tree must not have parameters");
  }
  return out;
}

void require_valid(const DecisionTree& tree) {
  auto violations = validate(tree);
  if (!violations.empty()) throw ValidationError(std::move(violations));
}

std::size_t leaf_count(const DecisionTree& tree) { return tree.leaves().size(); }

std::size_t internal_count(const DecisionTree& tree) {
  return tree.preorder().size() - leaf_count(tree);
}

std::size_t depth(const DecisionTree& tree) {
  std::size_t best = 0;
  if (tree.root() >= tree.nodes().size()) return 0;
  std::vector<std::pair<NodeIndex, std::size_t>> stack{{tree.root(), 0}};
  std::vector<bool> seen(tree.nodes().size(), false);
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    if (i >= tree.nodes().size() || seen[i]) continue;
    seen[i] = true;
    best = std::max(best, d);
    if (!tree.node(i).is_leaf()) {
      stack.emplace_back(tree.node(i).comparison().if_true, d + 1);
      stack.emplace_back(tree.node(i).comparison().if_false, d + 1);
    }
  }
  return best;
}

std::vector<std::size_t> ParamTree::free_agents(std::size_t agent_count) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i <= agent_count; ++i) {
    if (!std::binary_search(fixed_agents.begin(), fixed_agents.end(), i)) out.push_back(i);
  }
  return out;
}

std::vector<std::string> validate(const RandomizedMechanism& mech) {
  std::vector<std::string> out;
  const std::size_t n = mech.agent_count();
  if (n == 0) out.push_back("agent count must be at least 1");
  if (mech.branches().empty()) out.push_back("randomized mechanism has no branches");
  Rational total = 0;
  for (std::size_t r = 0; r < mech.branches().size(); ++r) {
    const auto& branch = mech.branches()[r];
    const std::string where = "branch " + std::to_string(r + 1);
    if (branch.probability <= 0) out.push_back(where + ": probability must be positive");
    total += branch.probability;
    const auto& pt = branch.tree;
    std::set<std::size_t> fixed;
    for (std::size_t a : pt.fixed_agents) {
      if (a < 1 || a > n) out.push_back(where + ": fixed agent " + std::to_string(a) + " out of range");
      if (!fixed.insert(a).second) out.push_back(where + ": duplicate fixed agent " + std::to_string(a));
    }
    if (!std::is_sorted(pt.fixed_agents.begin(), pt.fixed_agents.end())) {
      out.push_back(where + ": fixed agents must be ascending");
    }
    const std::size_t free_count = n >= fixed.size() ? n - fixed.size() : 0;
    if (pt.param_count > free_count) {
      out.push_back(where + ": " + std::to_string(pt.param_count) +
                    " parameters exceed the " + std::to_string(free_count) + " free agents");
    }
    if (pt.is_implicit()) {
      if (pt.param_count == 0) out.push_back(where + ": median body needs at least one parameter");
    } else {
      const auto& body = pt.tree();
      if (body.agent_count() != n) out.push_back(where + ": body agent count mismatch");
      if (body.param_count() != pt.param_count) out.push_back(where + ": body parameter count mismatch");
      for (auto& v : validate_shape(body)) out.push_back(where + ": " + v);
      for (const auto& node : body.nodes()) {
        if (node.is_leaf()) {
          const auto& w = node.leaf().agent_weights;
          for (std::size_t i = 0; i < w.size(); ++i) {
            if (w[i] != 0 && !fixed.count(i + 1)) {
              out.push_back(where + ": leaf " + node.id + " weights agent x" +
                            std::to_string(i + 1) + " outside the fixed set");
            }
          }
        } else {
          const auto& c = node.comparison();
          for (const auto& op : {c.lhs, c.rhs}) {
            if (op.is_agent() && !fixed.count(op.index)) {
              out.push_back(where + ": node " + node.id + " reads agent " +
                            to_string(op) + " outside the fixed set");
            }
          }
        }
      }
    }
    if (const auto* explicit_dist = std::get_if<ExplicitTuples>(&pt.distribution)) {
      Rational mass = 0;
      if (explicit_dist->entries.empty()) out.push_back(where + ": explicit distribution is empty");
      for (const auto& [tuple, p] : explicit_dist->entries) {
        mass += p;
        if (p < 0) out.push_back(where + ": negative tuple probability");
        if (tuple.size() != pt.param_count) out.push_back(where + ": tuple arity differs from parameter count");
        std::set<std::size_t> seen;
        for (std::size_t a : tuple) {
          if (a < 1 || a > n) out.push_back(where + ": tuple agent " + std::to_string(a) + " out of range");
          if (fixed.count(a)) out.push_back(where + ": tuple agent " + std::to_string(a) + " is fixed");
          if (!seen.insert(a).second) out.push_back(where + ": duplicate agent " + std::to_string(a) + " in tuple");
        }
      }
      if (mass != 1) out.push_back(where + ": tuple probabilities sum " + to_string(mass) + " ≠ 1");
    }
  }
  if (!mech.branches().empty() && total != 1) {
    out.push_back("branch probabilities sum " + to_string(total) + " ≠ 1");
  }
  return out;
}

void require_valid(const RandomizedMechanism& mech) {
  auto violations = validate(mech);
  if (!violations.empty()) throw ValidationError(std::move(violations));
}

namespace {

bool coalition_less(const MoulinScheme::Coalition& a, const MoulinScheme::Coalition& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

}  // namespace

MoulinScheme::MoulinScheme(std::size_t agent_count,
                           std::vector<std::pair<Coalition, ExtendedRational>> constants)
    : agent_count_(agent_count), constants_(std::move(constants)) {
  for (auto& [coalition, value] : constants_) std::sort(coalition.begin(), coalition.end());
  std::stable_sort(constants_.begin(), constants_.end(),
                   [](const auto& a, const auto& b) { return coalition_less(a.first, b.first); });
}

ExtendedRational MoulinScheme::constant(const Coalition& coalition) const {
  Coalition key = coalition;
  std::sort(key.begin(), key.end());
  for (const auto& [c, value] : constants_) {
    if (c == key) return value;
  }
  return ExtendedRational::pos_inf();
}

std::vector<std::string> validate(const MoulinScheme& scheme) {
  std::vector<std::string> out;
  const std::size_t n = scheme.agent_count();
  if (n == 0) out.push_back("agent count must be at least 1");
  bool any_not_pos_inf = false;
  for (std::size_t k = 0; k < scheme.constants().size(); ++k) {
    const auto& [coalition, value] = scheme.constants()[k];
    if (k > 0 && scheme.constants()[k - 1].first == coalition) {
      out.push_back("duplicate coalition entry");
    }
    for (std::size_t idx = 0; idx < coalition.size(); ++idx) {
      if (coalition[idx] < 1 || coalition[idx] > n) {
        out.push_back("coalition member " + std::to_string(coalition[idx]) + " out of range");
      }
      if (idx > 0 && coalition[idx] == coalition[idx - 1]) {
        out.push_back("coalition repeats agent " + std::to_string(coalition[idx]));
      }
    }
    if (coalition.empty() && value.is_neg_inf()) {
      out.push_back("a_{} = -inf makes the output unbounded below");
    }
    any_not_pos_inf = any_not_pos_inf || !value.is_pos_inf();
  }
  if (!any_not_pos_inf) out.push_back("every constant is +inf; the output would be unbounded");
  return out;
}

void require_valid(const MoulinScheme& scheme) {
  auto violations = validate(scheme);
  if (!violations.empty()) throw ValidationError(std::move(violations));
}

std::size_t agent_count(const Mechanism& mech) {
  return std::visit([](const auto& m) { return m.agent_count(); }, mech);
}

std::string format_witness(const ManipulationWitness& w) {
  std::ostringstream os;
  os << "verdict: non-truthful\n";
  if (w.branch) {
    os << "branch: " << *w.branch << "\n";
    os << "tuple:";
    for (std::size_t a : w.tuple) os << " " << a;
    os << "\n";
  }
  os << "agent: " << w.agent << "\n";
  os << "profile:";
  for (const auto& x : w.truthful.peaks()) os << " " << to_string(x);
  os << "\n";
  os << "deviation: " << to_string(w.deviation) << "\n";
  os << "leaf: " << w.leaf_id << "\n";
  os << "deviated_leaf: " << w.deviated_leaf_id << "\n";
  os << "facility: " << to_string(w.facility) << "\n";
  os << "deviated_facility: " << to_string(w.deviated_facility) << "\n";
  os << "cost_before: " << to_string(w.cost_truthful) << "\n";
  os << "cost_after: " << to_string(w.cost_deviated) << "\n";
  return os.str();
}

}  // namespace mechtree
