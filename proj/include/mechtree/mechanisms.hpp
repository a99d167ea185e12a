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
#include <string_view>

#include "mechtree/core.hpp"
#include "mechtree/tree.hpp"

namespace mechtree {

/// Size limits for generated trees. Violations raise UsageError.
struct GeneratorCaps {
  std::size_t max_median_size = 9;  // largest materialized median tree
  std::size_t max_leaves = 100'000;
};

DecisionTree gen_dictator(std::size_t agent_count, std::size_t agent);
DecisionTree gen_average(std::size_t agent_count);

/// Comparison tree over x1..xk whose every leaf outputs a median of them.
/// k must be odd and at most caps.max_median_size.
DecisionTree gen_median_tree(std::size_t k, const GeneratorCaps& caps = {});

/// The six-leaf median-of-three tree:
///   x1 >= x2 ? (x2 >= x3 ? x2 : (x1 >= x3 ? x3 : x1))
///            : (x2 >= x3 ? (x1 >= x3 ? x1 : x3) : x2)
DecisionTree median_of_three();

/// Median of agents 1..k inside an n-agent tree; agents past k are unread.
DecisionTree gen_median_first_k(std::size_t agent_count, std::size_t k,
                                const GeneratorCaps& caps = {});

RandomizedMechanism gen_random_dictator(std::size_t agent_count);

/// Median of a uniform random t-subset. Sample sizes above
/// caps.max_median_size get an implicit median body, which evaluates but
/// cannot be verified.
RandomizedMechanism gen_sampled_median(std::size_t agent_count, std::size_t sample_size,
                                       const GeneratorCaps& caps = {});

/// Order-refining tree with `leaves` leaves. Internal nodes test x_i < x_j
/// with i < j, splitting leaves breadth-first on the first undecided pair.
/// Every leaf outputs x1, except that with `tampered` the first leaf in
/// preorder outputs the average. Needs 2 <= n and leaves <= n!.
DecisionTree gen_tampered_dictator(std::size_t agent_count, std::size_t leaves,
                                   bool tampered = true, const GeneratorCaps& caps = {});

/// a_S = +inf for |S| <= 1 and -inf otherwise, all 8 coalitions stored.
MoulinScheme gen_moulin_median3();

enum class WorstCaseKind {
  kSingleOutlier,  // n-1 agents at a, one at a+1
  kCluster,        // agents 1..k at eps*(i-1)/n, the rest at 1
};

WorstCaseKind parse_worstcase_kind(std::string_view name);
std::string_view worstcase_kind_name(WorstCaseKind kind);

struct WorstCaseParams {
  Rational offset = 0;  // a
  std::size_t cluster_size = 0;
  Rational spread = 0;  // eps
};

LocationProfile gen_worstcase_profile(WorstCaseKind kind, std::size_t agent_count,
                                      const WorstCaseParams& params = {});

}  // namespace mechtree
