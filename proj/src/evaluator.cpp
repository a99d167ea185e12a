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

#include "mechtree/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "mechtree/errors.hpp"

namespace mechtree {
namespace {

const Location& operand_value(const Operand& op, const LocationProfile& profile,
                              const std::vector<std::size_t>& tuple) {
  if (op.is_agent()) return profile.agent(op.index);
  return profile.agent(tuple.at(op.index - 1));
}

void check_length(std::size_t expected, const LocationProfile& profile) {
  if (profile.size() != expected) {
    throw UsageError("profile has " + std::to_string(profile.size()) +
                     " locations but the mechanism has " + std::to_string(expected) + " agents");
  }
}

EvalTrace walk(const DecisionTree& tree, const LocationProfile& profile,
               const std::vector<std::size_t>& tuple) {
  EvalTrace trace;
  NodeIndex at = tree.root();
  while (!tree.node(at).is_leaf()) {
    const auto& node = tree.node(at);
    const auto& c = node.comparison();
    const bool outcome = holds(c.op, operand_value(c.lhs, profile, tuple),
                               operand_value(c.rhs, profile, tuple));
    trace.steps.push_back({at, node.id, outcome});
    at = outcome ? c.if_true : c.if_false;
  }
  trace.leaf = at;
  trace.leaf_id = tree.node(at).id;
  trace.facility = leaf_facility(tree.node(at).leaf(), profile, tuple);
  return trace;
}

EvalTrace implicit_median(const LocationProfile& profile, const std::vector<std::size_t>& tuple) {
  EvalTrace trace;
  std::vector<std::size_t> chain;
  chain.reserve(tuple.size());
  std::size_t step = 0;
  for (std::size_t agent : tuple) {
    std::size_t lo = 0;
    std::size_t hi = chain.size();
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      const bool outcome = profile.agent(agent) >= profile.agent(chain[mid]);
      trace.steps.push_back({step, "q" + std::to_string(step), outcome});
      ++step;
      if (outcome) {
        lo = mid + 1;
      } else {
        hi = mid;
      }
    }
    chain.insert(chain.begin() + static_cast<std::ptrdiff_t>(lo), agent);
  }
  trace.leaf = step;
  trace.leaf_id = "median";
  trace.facility = profile.agent(chain[(chain.size() - 1) / 2]);
  return trace;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    result = result * (n - k + i) / i;
    if (result > std::numeric_limits<std::uint64_t>::max()) {
      return std::numeric_limits<std::uint64_t>::max();
    }
  }
  return static_cast<std::uint64_t>(result);
}

// Picks index r with probability weights[r] (nonnegative, summing to 1).
std::size_t draw_index(const std::vector<Rational>& weights, RngStream& rng) {
  mpz_class common = 1;
  for (const auto& w : weights) mpz_lcm(common.get_mpz_t(), common.get_mpz_t(), w.get_den_mpz_t());
  if (mpz_sizeinbase(common.get_mpz_t(), 2) <= 62) {
    const std::uint64_t u = rng.uniform(common.get_ui());
    mpz_class cumulative = 0;
    for (std::size_t r = 0; r < weights.size(); ++r) {
      cumulative += weights[r].get_num() * (common / weights[r].get_den());
      if (mpz_class(static_cast<unsigned long>(u)) < cumulative) return r;
    }
    return weights.size() - 1;
  }
  const double u = rng.unit();
  double cumulative = 0;
  for (std::size_t r = 0; r < weights.size(); ++r) {
    cumulative += weights[r].get_d();
    if (u < cumulative) return r;
  }
  return weights.size() - 1;
}

std::vector<std::size_t> draw_tuple(const ParamTree& pt, std::size_t agent_count, RngStream& rng) {
  if (const auto* ex = std::get_if<ExplicitTuples>(&pt.distribution)) {
    std::vector<Rational> weights;
    for (const auto& e : ex->entries) weights.push_back(e.second);
    return ex->entries[draw_index(weights, rng)].first;
  }
  const auto pool = pt.free_agents(agent_count);
  std::vector<std::size_t> tuple;
  for (auto idx : sample_without_replacement(pool.size(), pt.param_count, rng)) {
    tuple.push_back(pool[idx]);
  }
  std::sort(tuple.begin(), tuple.end());
  return tuple;
}

// Calls visit(tuple, probability) for every tuple in the branch's support.
template <typename Visit>
void for_each_tuple(const ParamTree& pt, std::size_t agent_count, Visit&& visit) {
  if (const auto* ex = std::get_if<ExplicitTuples>(&pt.distribution)) {
    for (const auto& [tuple, p] : ex->entries) visit(tuple, p);
    return;
  }
  const auto pool = pt.free_agents(agent_count);
  const std::size_t m = pt.param_count;
  const Rational each(mpz_class(1), mpz_class(std::to_string(binomial(pool.size(), m)), 10));
  std::vector<std::size_t> pick(m);
  for (std::size_t j = 0; j < m; ++j) pick[j] = j;
  std::vector<std::size_t> tuple(m);
  while (true) {
    for (std::size_t j = 0; j < m; ++j) tuple[j] = pool[pick[j]];
    visit(tuple, each);
    // Advance to the next combination in lexicographic order.
    std::size_t j = m;
    while (j > 0 && pick[j - 1] == pool.size() - m + j - 1) --j;
    if (j == 0) return;
    ++pick[j - 1];
    for (std::size_t q = j; q < m; ++q) pick[q] = pick[q - 1] + 1;
  }
}

}  // namespace

Location leaf_facility(const Leaf& leaf, const LocationProfile& profile,
                       const std::vector<std::size_t>& tuple) {
  Location y = 0;
  for (std::size_t i = 0; i < leaf.agent_weights.size(); ++i) {
    if (leaf.agent_weights[i] != 0) y += leaf.agent_weights[i] * profile.agent(i + 1);
  }
  for (std::size_t j = 0; j < leaf.param_weights.size(); ++j) {
    if (leaf.param_weights[j] != 0) y += leaf.param_weights[j] * profile.agent(tuple.at(j));
  }
  return y;
}

EvalTrace eval(const DecisionTree& tree, const LocationProfile& profile) {
  check_length(tree.agent_count(), profile);
  if (tree.param_count() != 0) throw UsageError("tree has unbound parameters");
  return walk(tree, profile, {});
}

namespace {

void check_binding(const ParamTree& ptree, const std::vector<std::size_t>& tuple,
                   std::size_t agent_count) {
  if (tuple.size() != ptree.param_count) {
    throw UsageError("wrong arity: expected " + std::to_string(ptree.param_count) +
                     " agents, got " + std::to_string(tuple.size()));
  }
  std::set<std::size_t> seen;
  for (std::size_t a : tuple) {
    if (a < 1 || a > agent_count) throw UsageError("agent " + std::to_string(a) + " out of range");
    if (!seen.insert(a).second) throw UsageError("duplicate agent " + std::to_string(a));
    if (std::binary_search(ptree.fixed_agents.begin(), ptree.fixed_agents.end(), a)) {
      throw UsageError("agent " + std::to_string(a) + " belongs to the fixed set");
    }
  }
}

}  // namespace

DecisionTree bind(const ParamTree& ptree, const std::vector<std::size_t>& tuple,
                  std::size_t agent_count) {
  check_binding(ptree, tuple, agent_count);
  if (ptree.is_implicit()) {
    throw UsageError("an implicit median body has no materialized tree to bind");
  }
  const DecisionTree& body = ptree.tree();
  std::vector<TreeNode> nodes = body.nodes();
  auto rebind = [&](Operand& op) {
    if (!op.is_agent()) op = Operand::agent(tuple[op.index - 1]);
  };
  for (auto& node : nodes) {
    if (auto* c = std::get_if<Comparison>(&node.body)) {
      rebind(c->lhs);
      rebind(c->rhs);
    } else {
      auto& leaf = std::get<Leaf>(node.body);
      for (std::size_t j = 0; j < leaf.param_weights.size(); ++j) {
        leaf.agent_weights[tuple[j] - 1] += leaf.param_weights[j];
      }
      leaf.param_weights.clear();
    }
  }
  return DecisionTree(agent_count, std::move(nodes), body.root(), 0);
}

EvalTrace eval_bound(const ParamTree& ptree, const LocationProfile& profile,
                     const std::vector<std::size_t>& tuple) {
  check_binding(ptree, tuple, profile.size());
  if (ptree.is_implicit()) return implicit_median(profile, tuple);
  return walk(ptree.tree(), profile, tuple);
}

SampleOutcome sample_eval(const RandomizedMechanism& mech, const LocationProfile& profile,
                          RngStream& rng) {
  check_length(mech.agent_count(), profile);
  std::vector<Rational> probabilities;
  for (const auto& b : mech.branches()) probabilities.push_back(b.probability);
  SampleOutcome out;
  const std::size_t r = draw_index(probabilities, rng);
  out.branch = r + 1;
  const auto& pt = mech.branches()[r].tree;
  out.tuple = draw_tuple(pt, mech.agent_count(), rng);
  out.trace = eval_bound(pt, profile, out.tuple);
  return out;
}

std::uint64_t support_size(const RandomizedMechanism& mech) {
  std::uint64_t total = 0;
  for (const auto& b : mech.branches()) {
    std::uint64_t size = 0;
    if (const auto* ex = std::get_if<ExplicitTuples>(&b.tree.distribution)) {
      size = ex->entries.size();
    } else {
      size = binomial(b.tree.free_agents(mech.agent_count()).size(), b.tree.param_count);
    }
    if (total > std::numeric_limits<std::uint64_t>::max() - size) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    total += size;
  }
  return total;
}

ObjectiveIndex::ObjectiveIndex(const LocationProfile& profile, Objective objective)
    : objective_(objective), sc_(profile) {}

ObjectiveValue ObjectiveIndex::operator()(const Location& facility) const {
  if (objective_ == Objective::kSocialCost) return sc_.social_cost(facility);
  return std::max(Rational(facility - sc_.min()), Rational(sc_.max() - facility));
}

Location eval_moulin(const MoulinScheme& scheme, const LocationProfile& profile) {
  check_length(scheme.agent_count(), profile);
  std::optional<Location> best;
  for (const auto& [coalition, constant] : scheme.constants()) {
    if (constant.is_pos_inf()) continue;
    std::optional<Location> sup;
    if (constant.is_finite()) sup = constant.value();
    for (std::size_t i : coalition) {
      if (!sup || profile.agent(i) > *sup) sup = profile.agent(i);
    }
    if (!sup) continue;  // sup over nothing with a_S = -inf; excluded by validation
    if (!best || *sup < *best) best = sup;
  }
  if (!best) throw InvariantError("Moulin scheme has no finite candidate");
  return *best;
}

Location facility_of(const Mechanism& mech, const LocationProfile& profile) {
  if (const auto* tree = std::get_if<DecisionTree>(&mech)) return eval(*tree, profile).facility;
  if (const auto* scheme = std::get_if<MoulinScheme>(&mech)) return eval_moulin(*scheme, profile);
  throw UsageError("randomized mechanisms have no single facility; sample or take an expectation");
}

ExpectedObjective expected_objective(const Mechanism& mech, const LocationProfile& profile,
                                     Objective objective, const ExpectationOptions& options) {
  check_length(agent_count(mech), profile);
  const ObjectiveIndex value_at(profile, objective);
  const auto* rand = std::get_if<RandomizedMechanism>(&mech);
  if (!rand) return value_at(facility_of(mech, profile));

  if (support_size(*rand) <= options.enumeration_threshold) {
    Rational total = 0;
    for (const auto& branch : rand->branches()) {
      Rational branch_total = 0;
      for_each_tuple(branch.tree, rand->agent_count(),
                     [&](const std::vector<std::size_t>& tuple, const Rational& q) {
                       branch_total += q * value_at(eval_bound(branch.tree, profile, tuple).facility);
                     });
      total += branch.probability * branch_total;
    }
    return total;
  }

  if (!options.seed) throw UsageError("a seed is required for Monte-Carlo expectations");
  if (options.trials == 0) throw UsageError("Monte-Carlo expectation needs at least one trial");
  const RngStream base(*options.seed, options.stream);
  // Welford accumulation in trial order keeps the estimate reproducible.
  double mean = 0;
  double m2 = 0;
  for (std::uint64_t i = 0; i < options.trials; ++i) {
    RngStream rng = base.substream(i);
    const double v = value_at(sample_eval(*rand, profile, rng).trace.facility).get_d();
    const double delta = v - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (v - mean);
  }
  MonteCarloEstimate est;
  est.trials = options.trials;
  est.mean = mean;
  est.stddev = options.trials > 1 ? std::sqrt(m2 / static_cast<double>(options.trials - 1)) : 0.0;
  return est;
}

double approx_value(const ExpectedObjective& value) {
  if (const auto* exact = std::get_if<Rational>(&value)) return exact->get_d();
  return std::get<MonteCarloEstimate>(value).mean;
}

}  // namespace mechtree
