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
#include <functional>
#include <string>
#include <vector>

#include "mechtree/lp.hpp"
#include "mechtree/tree.hpp"

namespace mechtree {

/// Path constraints of one leaf over x1..xn. Strict comparisons become a
/// difference >= 1, weak ones >= 0. One row per internal node on the path.
struct LeafConstraints {
  NodeIndex leaf = 0;
  std::string id;
  std::vector<LinearInequality> rows;
};

/// One entry per leaf, in preorder.
std::vector<LeafConstraints> build_leaf_constraints(const DecisionTree& tree);

/// Which side of the facility the deviating agent's true peak lies on.
enum class Side { kRight, kLeft };  // peak >= facility, peak <= facility

/// The utility-increase rows over (x1..xn, xk'): d - d' >= 1, d >= 0,
/// d' >= 0, where d is the signed distance from the true peak x_k to the
/// facility of `leaf` at x and d' to the facility of `deviated_leaf` at x'.
std::vector<LinearInequality> utility_increase(std::size_t agent, const Leaf& leaf, Side side,
                                               const Leaf& deviated_leaf, Side deviated_side);

/// Conjunction of C_L over x, C_L' with x_k replaced by x_k', and `increase`.
/// Variables are x1..xn followed by x_k'. With `shifted`, every x is
/// written u - M for a further variable M >= 0 appended last.
LinearConstraintSystem manipulation_system(std::size_t agent_count, std::size_t agent,
                                           const LeafConstraints& truthful,
                                           const LeafConstraints& deviated,
                                           const std::vector<LinearInequality>& increase,
                                           bool shifted = false);

FeasibilityResult exists_solution(std::size_t agent_count, std::size_t agent,
                                  const LeafConstraints& truthful,
                                  const LeafConstraints& deviated,
                                  const std::vector<LinearInequality>& increase,
                                  bool shifted = false);

struct VerifierOptions {
  /// Worker count; 0 reads MECHTREE_THREADS, then falls back to the
  /// hardware concurrency.
  std::size_t threads = 0;
  bool sequential = false;
  /// Collect every witness instead of stopping at the first.
  bool exhaustive = false;
  bool shifted = false;
  /// Called for every LP with the system and its result. Calls are
  /// serialized by the verifier.
  std::function<void(const LinearConstraintSystem&, const FeasibilityResult&)> observer;
  LpArithmetic arithmetic = LpArithmetic::kAuto;
};

struct VerificationReport {
  Verdict verdict;
  /// Exhaustive mode only: every witness, ordered by
  /// (agent, leaf, side, deviated leaf, deviated side).
  std::vector<ManipulationWitness> witnesses;
  /// LPs up to and including the reported witness in iteration order, so
  /// the count does not depend on the thread count.
  std::uint64_t lp_calls = 0;
};

/// Iterates every agent, ordered leaf pair (including L = L') and the four
/// side cases. The returned witness is the first in that order and has
/// been replayed through the evaluator.
VerificationReport is_truthful(const DecisionTree& tree, const VerifierOptions& options = {});

/// Binds each branch to the smallest free agents in ascending order and
/// verifies the bound tree. The witness names the failing branch (1-based)
/// and its binding. Implicit median bodies are rejected with UsageError.
VerificationReport is_universally_truthful(const RandomizedMechanism& mech,
                                           const VerifierOptions& options = {});

/// Resolved worker count for `options`.
std::size_t worker_count(const VerifierOptions& options);

/// Variable names for a manipulation system: x1..xn, xk'[, M].
std::vector<std::string> manipulation_variable_names(std::size_t agent_count, std::size_t agent,
                                                     bool shifted = false);

}  // namespace mechtree
