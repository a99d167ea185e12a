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
#include <filesystem>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mechtree/rational.hpp"

namespace mechtree {

using Location = Rational;
/// Nonnegative objective value (a distance or a sum of distances).
using ObjectiveValue = Rational;

/// Reported peaks of agents 1..n. Agent identity is the position, so the
/// order is never changed after construction.
class LocationProfile {
 public:
  explicit LocationProfile(std::vector<Location> peaks);
  LocationProfile(std::initializer_list<Location> peaks);

  std::size_t size() const { return peaks_.size(); }
  /// 1-based agent access.
  const Location& agent(std::size_t i) const { return peaks_.at(i - 1); }
  const Location& operator[](std::size_t index) const { return peaks_[index]; }
  std::span<const Location> peaks() const { return peaks_; }

  /// Copy with agent k (1-based) reporting `report` instead.
  LocationProfile with_report(std::size_t k, Location report) const;

  friend bool operator==(const LocationProfile&, const LocationProfile&) = default;

 private:
  std::vector<Location> peaks_;
};

enum class Objective { kSocialCost, kMaxCost };

std::string_view objective_name(Objective objective);
/// Accepts "sc" or "mc".
Objective parse_objective(std::string_view name);

struct OptimalPoint {
  Location location;
  ObjectiveValue value;
};

ObjectiveValue cost(const Location& peak, const Location& facility);
ObjectiveValue social_cost(const LocationProfile& profile, const Location& facility);
ObjectiveValue max_cost(const LocationProfile& profile, const Location& facility);
ObjectiveValue objective_value(Objective objective, const LocationProfile& profile,
                               const Location& facility);

/// Lower median (rank ceil(n/2) in sorted order) and its social cost.
OptimalPoint opt_social_cost(const LocationProfile& profile);
/// Midpoint of the extremes and half the diameter.
OptimalPoint opt_max_cost(const LocationProfile& profile);
OptimalPoint opt_objective(Objective objective, const LocationProfile& profile);
ObjectiveValue diameter(const LocationProfile& profile);

/// Sorted prefix sums for O(log n) social-cost queries on large profiles.
class SocialCostIndex {
 public:
  explicit SocialCostIndex(const LocationProfile& profile);
  ObjectiveValue social_cost(const Location& facility) const;
  const Location& min() const { return sorted_.front(); }
  const Location& max() const { return sorted_.back(); }

 private:
  std::vector<Location> sorted_;
  std::vector<Rational> prefix_;  // prefix_[i] = sum of sorted_[0..i)
};

/// One rational per line (`p/q` or integer); `#` lines and blank lines are
/// skipped. Throws ParseError.
LocationProfile parse_profile(std::string_view text);
LocationProfile load_profile(const std::filesystem::path& path);
std::string format_profile(const LocationProfile& profile);

}  // namespace mechtree
