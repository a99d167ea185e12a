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
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mechtree/core.hpp"
#include "mechtree/rng.hpp"
#include "mechtree/tree.hpp"

namespace mechtree {

struct TraceStep {
  NodeIndex node;
  std::string id;
  bool outcome;
};

/// Path taken through a tree and the facility produced at its leaf.
struct EvalTrace {
  std::vector<TraceStep> steps;
  NodeIndex leaf = 0;
  std::string leaf_id;
  Location facility;
};

/// Facility of one leaf on a profile. `tuple` binds z_j to agent tuple[j-1].
Location leaf_facility(const Leaf& leaf, const LocationProfile& profile,
                       const std::vector<std::size_t>& tuple = {});

/// Runs a deterministic tree. Throws UsageError on a length mismatch.
EvalTrace eval(const DecisionTree& tree, const LocationProfile& profile);

/// Replaces every parameter z_j by agent tuple[j-1]. Throws UsageError on
/// wrong arity, a repeated agent, or an agent from the fixed set.
DecisionTree bind(const ParamTree& ptree, const std::vector<std::size_t>& tuple,
                  std::size_t agent_count);

/// Evaluates one branch body under a binding without building the bound
/// tree. Implicit median bodies run binary insertion over the bound agents.
EvalTrace eval_bound(const ParamTree& ptree, const LocationProfile& profile,
                     const std::vector<std::size_t>& tuple);

struct SampleOutcome {
  std::size_t branch = 1;  // 1-based
  std::vector<std::size_t> tuple;
  EvalTrace trace;
};

/// One run of the chance root: branch by p_r, tuple by the branch's
/// distribution, then the bound tree.
SampleOutcome sample_eval(const RandomizedMechanism& mech, const LocationProfile& profile,
                          RngStream& rng);

/// Number of (branch, tuple) outcomes, saturating at UINT64_MAX.
std::uint64_t support_size(const RandomizedMechanism& mech);

struct MonteCarloEstimate {
  std::uint64_t trials = 0;
  double mean = 0;
  double stddev = 0;  // sample standard deviation
};

using ExpectedObjective = std::variant<Rational, MonteCarloEstimate>;

struct ExpectationOptions {
  std::uint64_t enumeration_threshold = 1'000'000;
  std::uint64_t trials = 10'000;
  /// Required whenever Monte Carlo is needed.
  std::optional<std::uint64_t> seed;
  std::uint64_t stream = 0;
};

/// Exact expectation by enumeration when the support fits under the
/// threshold, otherwise a seeded Monte-Carlo estimate.
ExpectedObjective expected_objective(const Mechanism& mech, const LocationProfile& profile,
                                     Objective objective,
                                     const ExpectationOptions& options = {});

double approx_value(const ExpectedObjective& value);

/// inf over coalitions of sup({x_i : i in S} U {a_S}).
Location eval_moulin(const MoulinScheme& scheme, const LocationProfile& profile);

/// Facility for deterministic trees and Moulin schemes.
Location facility_of(const Mechanism& mech, const LocationProfile& profile);

/// Objective at many facilities of one profile; sc queries are O(log n).
class ObjectiveIndex {
 public:
  ObjectiveIndex(const LocationProfile& profile, Objective objective);
  ObjectiveValue operator()(const Location& facility) const;

 private:
  Objective objective_;
  SocialCostIndex sc_;
};

}  // namespace mechtree
