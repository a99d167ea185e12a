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
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mechtree/core.hpp"
#include "mechtree/evaluator.hpp"
#include "mechtree/mechanisms.hpp"
#include "mechtree/rng.hpp"
#include "mechtree/tree.hpp"

namespace mechtree {

/// 1-based rank of values[index] in ascending order, ties broken by
/// position: |{j : v_j < v_i or (v_j == v_i and j <= i)}|.
std::size_t rank(const std::vector<Rational>& values, std::size_t index);

/// (1/2 - eps)|S| < rank < (1/2 + eps)|S|.
bool is_eps_median(std::size_t rank_value, std::size_t set_size, const Rational& epsilon);
bool is_eps_median(const std::vector<Rational>& values, std::size_t index,
                   const Rational& epsilon);

struct EpsMedianReport {
  std::uint64_t n = 0;
  std::uint64_t t = 0;
  Rational epsilon;
  Rational delta;
  std::uint64_t trials = 0;
  std::uint64_t success_count = 0;
};

/// ceil(100 ln(1/delta) / eps^2).
std::uint64_t lemma1_sample_size(const Rational& epsilon, const Rational& delta);

/// Samples t = lemma1_sample_size(eps, delta) of the values 1..n without
/// replacement, `trials` times, and counts sample medians that are
/// eps-medians of 1..n. Needs 0 < eps, delta <= 1/10 and t <= eps*n;
/// violations raise UsageError.
EpsMedianReport lemma1_experiment(std::uint64_t n, const Rational& epsilon,
                                  const Rational& delta, std::uint64_t trials,
                                  std::uint64_t seed);

enum class DistributionKind { kUniformBox, kTwoCluster, kWorstCase, kFile };

struct ProfileDistribution {
  DistributionKind kind = DistributionKind::kUniformBox;
  std::size_t agent_count = 1;
  Rational low = 0;   // uniform box
  Rational high = 1;  // uniform box
  std::size_t cluster_size = 0;  // two cluster: agents 1..k near 0
  Rational spread = Rational(1, 10);
  WorstCaseKind worst = WorstCaseKind::kSingleOutlier;
  WorstCaseParams worst_params;
  std::vector<LocationProfile> profiles;  // file; drawn in rotation
};

/// Denominator of the uniform-box grid.
inline constexpr std::uint64_t kBoxGrid = std::uint64_t{1} << 20;

ProfileDistribution file_distribution(const std::filesystem::path& path);

/// Uniform box: lo + (hi - lo) u / 2^20 per agent. Two cluster: agents 1..k
/// at spread * u, the rest at 1 - spread * u. Worst case: the fixed
/// profile. File: profile `index` modulo the list length.
LocationProfile draw_profile(const ProfileDistribution& dist, std::uint64_t index,
                             RngStream& rng);

struct RatioReport {
  std::string mechanism;
  Objective objective = Objective::kSocialCost;
  std::uint64_t trials = 0;
  std::uint64_t skipped = 0;  // zero-optimum profiles
  double mean_ratio = 0;
  double max_ratio = 0;
  std::optional<Rational> mean_ratio_exact;
  std::optional<Rational> max_ratio_exact;
  std::optional<LocationProfile> max_ratio_profile;
  std::uint64_t seed = 0;
};

/// Called with every evaluated profile that has a positive optimum and
/// its ratio (exact when the expectation was exact).
using RatioObserver =
    std::function<void(const LocationProfile&, const std::optional<Rational>&, double)>;

struct RatioOptions {
  ExpectationOptions expectation;  // seed is filled in per trial
  RatioObserver observer;
};

/// Throws UsageError if every trial was skipped.
RatioReport estimate_ratio(const Mechanism& mech, const std::string& mechanism_id,
                           const ProfileDistribution& dist, Objective objective,
                           std::uint64_t trials, std::uint64_t seed,
                           const RatioOptions& options = {});

/// Random restarts on the unit box followed by coordinate hill climbing;
/// `budget` counts evaluated profiles. The result is the worst ratio seen,
/// not a certified maximum.
RatioReport worst_case_search(const Mechanism& mech, const std::string& mechanism_id,
                              Objective objective, std::size_t agent_count,
                              std::uint64_t budget, std::uint64_t seed,
                              const RatioOptions& options = {});

/// Every profile on {0, step, ..., max}^n and every unilateral deviation on
/// the same grid; any strict cost decrease is a witness. Deterministic
/// trees and Moulin schemes only.
Verdict brute_force_truthfulness_oracle(const Mechanism& mech, const Rational& step,
                                        const Rational& max);

struct WeightedScheme {
  Rational probability;
  MoulinScheme scheme;
};

/// Builds the outlier profile (n-1 agents at a, one at a+1) far from every
/// finite constant of the likely schemes and reports the exact expected
/// max-cost ratio on it.
RatioReport moulin_mixture_ratio(const std::vector<WeightedScheme>& mixture,
                                 const Rational& epsilon);

/// Offset a used by moulin_mixture_ratio.
Rational moulin_mixture_offset(const std::vector<WeightedScheme>& mixture,
                               const Rational& epsilon);

/// CSV cell for a rational: "p/q;decimal" with 12 significant digits.
std::string rational_cell(const Rational& value);

std::string ratio_csv(const std::vector<RatioReport>& reports);
std::string eps_median_csv(const std::vector<EpsMedianReport>& reports);

void emit_report(const RatioReport& report, const std::filesystem::path& path);
void emit_report(const EpsMedianReport& report, const std::filesystem::path& path);

}  // namespace mechtree
