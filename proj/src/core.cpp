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

#include "mechtree/core.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "mechtree/errors.hpp"

namespace mechtree {

LocationProfile::LocationProfile(std::vector<Location> peaks)
    : peaks_(std::move(peaks)) {
  if (peaks_.empty()) throw UsageError("a location profile needs at least one agent");
}

LocationProfile::LocationProfile(std::initializer_list<Location> peaks)
    : LocationProfile(std::vector<Location>(peaks)) {}

LocationProfile LocationProfile::with_report(std::size_t k, Location report) const {
  std::vector<Location> copy = peaks_;
  copy.at(k - 1) = std::move(report);
  return LocationProfile(std::move(copy));
}

std::string_view objective_name(Objective objective) {
  return objective == Objective::kSocialCost ? "sc" : "mc";
}

Objective parse_objective(std::string_view name) {
  if (name == "sc") return Objective::kSocialCost;
  if (name == "mc") return Objective::kMaxCost;
  throw UsageError("unknown objective '" + std::string(name) + "' (expected sc or mc)");
}

ObjectiveValue cost(const Location& peak, const Location& facility) {
  return abs(Rational(peak - facility));
}

ObjectiveValue social_cost(const LocationProfile& profile, const Location& facility) {
  Rational total = 0;
  for (const auto& x : profile.peaks()) total += cost(x, facility);
  return total;
}

ObjectiveValue max_cost(const LocationProfile& profile, const Location& facility) {
  Rational worst = 0;
  for (const auto& x : profile.peaks()) worst = std::max(worst, cost(x, facility));
  return worst;
}

ObjectiveValue objective_value(Objective objective, const LocationProfile& profile,
                               const Location& facility) {
  return objective == Objective::kSocialCost ? social_cost(profile, facility)
                                             : max_cost(profile, facility);
}

OptimalPoint opt_social_cost(const LocationProfile& profile) {
  std::vector<Location> sorted(profile.peaks().begin(), profile.peaks().end());
  const std::size_t lower = (sorted.size() + 1) / 2 - 1;
  std::nth_element(sorted.begin(), sorted.begin() + lower, sorted.end());
  Location median = sorted[lower];
  return {median, social_cost(profile, median)};
}

OptimalPoint opt_max_cost(const LocationProfile& profile) {
  const auto [lo, hi] = std::minmax_element(profile.peaks().begin(), profile.peaks().end());
  return {Rational((*lo + *hi) / 2), Rational((*hi - *lo) / 2)};
}

OptimalPoint opt_objective(Objective objective, const LocationProfile& profile) {
  return objective == Objective::kSocialCost ? opt_social_cost(profile)
                                             : opt_max_cost(profile);
}

ObjectiveValue diameter(const LocationProfile& profile) {
  const auto [lo, hi] = std::minmax_element(profile.peaks().begin(), profile.peaks().end());
  return *hi - *lo;
}

SocialCostIndex::SocialCostIndex(const LocationProfile& profile)
    : sorted_(profile.peaks().begin(), profile.peaks().end()) {
  std::sort(sorted_.begin(), sorted_.end());
  prefix_.reserve(sorted_.size() + 1);
  prefix_.emplace_back(0);
  for (const auto& x : sorted_) prefix_.push_back(prefix_.back() + x);
}

ObjectiveValue SocialCostIndex::social_cost(const Location& facility) const {
  // Agents strictly left of the facility contribute y - x, the rest x - y.
  const std::size_t left = static_cast<std::size_t>(
      std::lower_bound(sorted_.begin(), sorted_.end(), facility) - sorted_.begin());
  const std::size_t right = sorted_.size() - left;
  Rational total = facility * static_cast<long>(left) - prefix_[left];
  total += (prefix_.back() - prefix_[left]) - facility * static_cast<long>(right);
  return total;
}

LocationProfile parse_profile(std::string_view text) {
  std::vector<Location> peaks;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
      if (end == text.size()) break;
      continue;
    }
    const auto last = line.find_last_not_of(" \t\r");
    std::string_view token = line.substr(first, last - first + 1);
    if (token.front() == '#') continue;
    auto value = parse_rational(token);
    if (!value) {
      throw ParseError({line_no, static_cast<int>(first) + 1},
                       "malformed location '" + std::string(token) + "'",
                       "integer or p/q rational");
    }
    peaks.push_back(std::move(*value));
    if (end == text.size()) break;
  }
  if (peaks.empty()) throw ParseError({line_no, 1}, "profile has no locations");
  return LocationProfile(std::move(peaks));
}

LocationProfile load_profile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open profile " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_profile(buffer.str());
  } catch (const ParseError& e) {
    throw e.in_source(path.string());
  }
}

std::string format_profile(const LocationProfile& profile) {
  std::string out;
  for (const auto& x : profile.peaks()) out += to_string(x) + "\n";
  return out;
}

}  // namespace mechtree
