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

#include "mechtree/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mechtree/errors.hpp"

namespace mechtree {

std::size_t rank(const std::vector<Rational>& values, std::size_t index) {
  const Rational& v = values.at(index);
  std::size_t r = 0;
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (values[j] < v || (values[j] == v && j <= index)) ++r;
  }
  return r;
}

bool is_eps_median(std::size_t rank_value, std::size_t set_size, const Rational& epsilon) {
  const Rational size(static_cast<unsigned long>(set_size));
  const Rational r(static_cast<unsigned long>(rank_value));
  const Rational half(1, 2);
  return (half - epsilon) * size < r && r < (half + epsilon) * size;
}

bool is_eps_median(const std::vector<Rational>& values, std::size_t index,
                   const Rational& epsilon) {
  return is_eps_median(rank(values, index), values.size(), epsilon);
}

std::uint64_t lemma1_sample_size(const Rational& epsilon, const Rational& delta) {
  if (epsilon <= 0 || delta <= 0 || delta >= 1) {
    throw UsageError("need eps > 0 and 0 < delta < 1");
  }
  const long double eps = epsilon.get_d();
  const long double del = delta.get_d();
  return static_cast<std::uint64_t>(std::ceil(100.0L * std::log(1.0L / del) / (eps * eps)));
}

EpsMedianReport lemma1_experiment(std::uint64_t n, const Rational& epsilon,
                                  const Rational& delta, std::uint64_t trials,
                                  std::uint64_t seed) {
  const Rational tenth(1, 10);
  if (epsilon <= 0 || epsilon > tenth) throw UsageError("eps must lie in (0, 1/10]");
  if (delta <= 0 || delta > tenth) throw UsageError("delta must lie in (0, 1/10]");
  if (trials == 0) throw UsageError("need at least one trial");
  EpsMedianReport report;
  report.n = n;
  report.epsilon = epsilon;
  report.delta = delta;
  report.trials = trials;
  report.t = lemma1_sample_size(epsilon, delta);
  if (Rational(std::to_string(report.t)) > epsilon * Rational(std::to_string(n))) {
    throw UsageError("sample size t = " + std::to_string(report.t) + " exceeds eps*n = " +
                     to_string(Rational(epsilon * Rational(std::to_string(n)))));
  }
  const RngStream base(seed, 0);
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    RngStream rng = base.substream(trial);
    std::vector<std::uint64_t> sample = sample_without_replacement(n, report.t, rng);
    const auto mid = sample.begin() + static_cast<std::ptrdiff_t>((report.t - 1) / 2);
    std::nth_element(sample.begin(), mid, sample.end());
    // The set is 1..n, so a value's rank is the value itself.
    if (is_eps_median(*mid + 1, n, epsilon)) ++report.success_count;
  }
  return report;
}

ProfileDistribution file_distribution(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read profile file " + path.string());
  std::stringstream text;
  text << in.rdbuf();
  // Profiles are separated by blank lines.
  ProfileDistribution dist;
  dist.kind = DistributionKind::kFile;
  std::string block;
  std::string line;
  auto flush = [&] {
    bool any = false;
    std::istringstream lines(block);
    std::string l;
    while (std::getline(lines, l)) {
      const auto first = l.find_first_not_of(" \t\r");
      if (first != std::string::npos && l[first] != '#') any = true;
    }
    if (any) dist.profiles.push_back(parse_profile(block));
    block.clear();
  };
  while (std::getline(text, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      flush();
    } else {
      block += line + "\n";
    }
  }
  flush();
  if (dist.profiles.empty()) throw UsageError("profile file " + path.string() + " is empty");
  dist.agent_count = dist.profiles.front().size();
  for (const auto& p : dist.profiles) {
    if (p.size() != dist.agent_count) throw UsageError("profiles in a file must share a length");
  }
  return dist;
}

namespace {

Rational grid_unit(RngStream& rng) {
  Rational u(mpz_class(std::to_string(rng.uniform(kBoxGrid + 1)), 10),
             mpz_class(std::to_string(kBoxGrid), 10));
  u.canonicalize();
  return u;
}

}  // namespace

LocationProfile draw_profile(const ProfileDistribution& dist, std::uint64_t index,
                             RngStream& rng) {
  const std::size_t n = dist.agent_count;
  std::vector<Location> peaks;
  switch (dist.kind) {
    case DistributionKind::kUniformBox: {
      if (!(dist.low < dist.high)) throw UsageError("uniform box needs lo < hi");
      for (std::size_t i = 0; i < n; ++i) {
        peaks.push_back(dist.low + (dist.high - dist.low) * grid_unit(rng));
      }
      return LocationProfile(std::move(peaks));
    }
    case DistributionKind::kTwoCluster: {
      if (dist.cluster_size > n) throw UsageError("cluster size exceeds agent count");
      for (std::size_t i = 0; i < n; ++i) {
        const Rational offset = dist.spread * grid_unit(rng);
        peaks.push_back(i < dist.cluster_size ? offset : Rational(1 - offset));
      }
      return LocationProfile(std::move(peaks));
    }
    case DistributionKind::kWorstCase:
      return gen_worstcase_profile(dist.worst, n, dist.worst_params);
    case DistributionKind::kFile:
      if (dist.profiles.empty()) throw UsageError("file distribution has no profiles");
      return dist.profiles[index % dist.profiles.size()];
  }
  throw InvariantError("unknown profile distribution");
}

namespace {

// Running aggregate shared by estimate_ratio and worst_case_search.
class RatioAccumulator {
 public:
  RatioAccumulator(std::string mechanism, Objective objective, std::uint64_t seed) {
    report_.mechanism = std::move(mechanism);
    report_.objective = objective;
    report_.seed = seed;
  }

  void skip() {
    ++report_.trials;
    ++report_.skipped;
  }

  // Returns the ratio as a double.
  double add(const LocationProfile& profile, const ExpectedObjective& value,
             const ObjectiveValue& optimum, const RatioObserver& observer) {
    ++report_.trials;
    std::optional<Rational> exact;
    double ratio = 0;
    if (const auto* v = std::get_if<Rational>(&value)) {
      exact = *v / optimum;
      if (*exact < 1) throw InvariantError("ratio below 1: " + to_string(*exact));
      ratio = exact->get_d();
    } else {
      ratio = std::get<MonteCarloEstimate>(value).mean / optimum.get_d();
      all_exact_ = false;
      exact_mean_ = false;
    }
    if (observer) observer(profile, exact, ratio);

    // Kahan summation keeps the mean independent of trial count drift.
    const double y = ratio - compensation_;
    const double t = sum_ + y;
    compensation_ = (t - sum_) - y;
    sum_ = t;
    if (exact_mean_ && exact) {
      exact_sum_ += *exact;
      // Exact means are only kept while they stay small.
      if (mpz_sizeinbase(exact_sum_.get_den_mpz_t(), 2) > 512) exact_mean_ = false;
    }

    const bool better = exact && report_.max_ratio_exact ? *exact > *report_.max_ratio_exact
                                                         : ratio > report_.max_ratio;
    if (!report_.max_ratio_profile || better) {
      report_.max_ratio = ratio;
      report_.max_ratio_exact = exact;
      report_.max_ratio_profile = profile;
    }
    return ratio;
  }

  RatioReport finish() {
    const std::uint64_t counted = report_.trials - report_.skipped;
    if (counted == 0) throw UsageError("every trial had a zero optimum; no ratio defined");
    report_.mean_ratio = sum_ / static_cast<double>(counted);
    if (exact_mean_) {
      report_.mean_ratio_exact = exact_sum_ / Rational(std::to_string(counted));
      report_.mean_ratio = report_.mean_ratio_exact->get_d();
    }
    if (!all_exact_) report_.max_ratio_exact.reset();
    return report_;
  }

 private:
  RatioReport report_;
  double sum_ = 0;
  double compensation_ = 0;
  Rational exact_sum_ = 0;
  bool all_exact_ = true;
  bool exact_mean_ = true;
};

}  // namespace

RatioReport estimate_ratio(const Mechanism& mech, const std::string& mechanism_id,
                           const ProfileDistribution& dist, Objective objective,
                           std::uint64_t trials, std::uint64_t seed,
                           const RatioOptions& options) {
  if (trials == 0) throw UsageError("need at least one trial");
  if (dist.agent_count != agent_count(mech)) {
    throw UsageError("distribution has " + std::to_string(dist.agent_count) +
                     " agents but the mechanism has " + std::to_string(agent_count(mech)));
  }
  RatioAccumulator acc(mechanism_id, objective, seed);
  const RngStream base(seed, 0);
  for (std::uint64_t i = 0; i < trials; ++i) {
    RngStream rng = base.substream(i);
    const LocationProfile profile = draw_profile(dist, i, rng);
    const OptimalPoint opt = opt_objective(objective, profile);
    if (opt.value == 0) {
      acc.skip();
      continue;
    }
    ExpectationOptions eo = options.expectation;
    eo.seed = seed;
    eo.stream = i + 1;
    acc.add(profile, expected_objective(mech, profile, objective, eo), opt.value,
            options.observer);
  }
  return acc.finish();
}

RatioReport worst_case_search(const Mechanism& mech, const std::string& mechanism_id,
                              Objective objective, std::size_t agent_count,
                              std::uint64_t budget, std::uint64_t seed,
                              const RatioOptions& options) {
  if (budget == 0) throw UsageError("search budget must be positive");
  if (agent_count != mechtree::agent_count(mech)) {
    throw UsageError("agent count does not match the mechanism");
  }
  RatioAccumulator acc(mechanism_id, objective, seed);
  const RngStream base(seed, 0);
  std::uint64_t evals = 0;
  // Returns the ratio, or -1 for a zero optimum.
  auto evaluate = [&](const LocationProfile& profile) -> double {
    const std::uint64_t index = evals++;
    const OptimalPoint opt = opt_objective(objective, profile);
    if (opt.value == 0) {
      acc.skip();
      return -1;
    }
    ExpectationOptions eo = options.expectation;
    eo.seed = seed;
    eo.stream = index + 1;
    return acc.add(profile, expected_objective(mech, profile, objective, eo), opt.value,
                   options.observer);
  };

  ProfileDistribution box;
  box.agent_count = agent_count;
  const Rational finest(1, 1u << 20);
  for (std::uint64_t restart = 0; evals < budget; ++restart) {
    RngStream rng = base.substream(restart);
    LocationProfile current = draw_profile(box, restart, rng);
    double best = evaluate(current);
    Rational step(1, 4);
    while (evals < budget && step >= finest) {
      bool improved = false;
      for (std::size_t i = 1; i <= agent_count && evals < budget; ++i) {
        for (int dir : {1, -1}) {
          if (evals >= budget) break;
          const LocationProfile candidate =
              current.with_report(i, current.agent(i) + (dir > 0 ? step : Rational(-step)));
          const double r = evaluate(candidate);
          if (r > best) {
            best = r;
            current = candidate;
            improved = true;
          }
        }
      }
      if (!improved) step /= 2;
    }
  }
  return acc.finish();
}

Verdict brute_force_truthfulness_oracle(const Mechanism& mech, const Rational& step,
                                        const Rational& max) {
  if (std::holds_alternative<RandomizedMechanism>(mech)) {
    throw UsageError("the grid oracle checks deterministic mechanisms only");
  }
  if (step <= 0 || max < 0) throw UsageError("grid needs step > 0 and max >= 0");
  const Rational count_q = max / step;
  if (count_q.get_den() != 1) throw UsageError("grid max must be a multiple of the step");
  const std::size_t g = count_q.get_num().get_ui() + 1;
  const std::size_t n = agent_count(mech);
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (total > 5'000'000 / g) throw UsageError("grid oracle would enumerate too many profiles");
    total *= g;
  }
  std::vector<Rational> grid(g);
  for (std::size_t v = 0; v < g; ++v) grid[v] = step * Rational(static_cast<unsigned long>(v));

  // Profile index: agent 1 is the most significant digit.
  std::vector<std::size_t> place(n);
  for (std::size_t i = n; i-- > 0;) place[i] = i + 1 == n ? 1 : place[i + 1] * g;
  auto profile_at = [&](std::size_t index) {
    std::vector<Location> peaks(n);
    for (std::size_t i = 0; i < n; ++i) peaks[i] = grid[(index / place[i]) % g];
    return LocationProfile(std::move(peaks));
  };
  std::vector<Location> facility(total);
  for (std::size_t idx = 0; idx < total; ++idx) facility[idx] = facility_of(mech, profile_at(idx));

  for (std::size_t idx = 0; idx < total; ++idx) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t own = (idx / place[i]) % g;
      const Location& peak = grid[own];
      const Rational before = cost(peak, facility[idx]);
      for (std::size_t v = 0; v < g; ++v) {
        if (v == own) continue;
        const std::size_t dev = idx - own * place[i] + v * place[i];
        const Rational after = cost(peak, facility[dev]);
        if (after >= before) continue;
        ManipulationWitness w;
        w.agent = i + 1;
        w.truthful = profile_at(idx);
        w.deviation = grid[v];
        w.facility = facility[idx];
        w.deviated_facility = facility[dev];
        w.cost_truthful = before;
        w.cost_deviated = after;
        if (const auto* tree = std::get_if<DecisionTree>(&mech)) {
          const EvalTrace a = eval(*tree, w.truthful);
          const EvalTrace b = eval(*tree, w.deviated_profile());
          w.leaf = a.leaf;
          w.leaf_id = a.leaf_id;
          w.deviated_leaf = b.leaf;
          w.deviated_leaf_id = b.leaf_id;
        }
        return Verdict{std::move(w)};
      }
    }
  }
  return Verdict{};
}

namespace {

void check_mixture(const std::vector<WeightedScheme>& mixture) {
  if (mixture.empty()) throw UsageError("mixture needs at least one scheme");
  Rational total = 0;
  for (const auto& ws : mixture) {
    if (ws.probability <= 0) throw UsageError("mixture probabilities must be positive");
    if (ws.scheme.agent_count() != mixture.front().scheme.agent_count()) {
      throw UsageError("mixture schemes must share an agent count");
    }
    require_valid(ws.scheme);
    total += ws.probability;
  }
  if (total != 1) throw UsageError("mixture probabilities sum " + to_string(total) + " ≠ 1");
  if (mixture.front().scheme.agent_count() < 2) throw UsageError("mixture needs at least 2 agents");
}

}  // namespace

Rational moulin_mixture_offset(const std::vector<WeightedScheme>& mixture,
                               const Rational& epsilon) {
  check_mixture(mixture);
  if (epsilon <= 0) throw UsageError("eps must be positive");
  // Smallest T whose likely set (p >= 2^-T) carries mass > 1 - eps/2.
  unsigned long threshold = 0;
  mpz_class scale = 1;  // 2^T
  while (true) {
    Rational mass = 0;
    for (const auto& ws : mixture) {
      if (ws.probability * scale >= 1) mass += ws.probability;
    }
    if (mass > 1 - epsilon / 2) break;
    ++threshold;
    scale *= 2;
  }
  std::optional<Rational> highest;
  for (const auto& ws : mixture) {
    if (ws.probability * scale < 1) continue;
    for (const auto& [coalition, constant] : ws.scheme.constants()) {
      if (constant.is_finite() && (!highest || constant.value() > *highest)) {
        highest = constant.value();
      }
    }
  }
  if (!highest) return Rational(0);
  return *highest + Rational(scale) + 1;
}

RatioReport moulin_mixture_ratio(const std::vector<WeightedScheme>& mixture,
                                 const Rational& epsilon) {
  const Rational a = moulin_mixture_offset(mixture, epsilon);
  const std::size_t n = mixture.front().scheme.agent_count();
  const LocationProfile profile =
      gen_worstcase_profile(WorstCaseKind::kSingleOutlier, n, {a, 0, 0});
  Rational expected = 0;
  for (const auto& ws : mixture) {
    expected += ws.probability * max_cost(profile, eval_moulin(ws.scheme, profile));
  }
  const Rational ratio = expected / opt_max_cost(profile).value;
  RatioReport report;
  report.mechanism = "moulin_mixture";
  report.objective = Objective::kMaxCost;
  report.trials = 1;
  report.mean_ratio = report.max_ratio = ratio.get_d();
  report.mean_ratio_exact = report.max_ratio_exact = ratio;
  report.max_ratio_profile = profile;
  return report;
}

std::string rational_cell(const Rational& value) {
  return to_string(value) + ";" + to_decimal(value, 12);
}

namespace {

std::string decimal_cell(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

std::string profile_cell(const std::optional<LocationProfile>& profile) {
  if (!profile) return "";
  std::string out;
  for (std::size_t i = 1; i <= profile->size(); ++i) {
    if (i > 1) out += ' ';
    out += to_string(profile->agent(i));
  }
  return out;
}

}  // namespace

std::string ratio_csv(const std::vector<RatioReport>& reports) {
  std::ostringstream os;
  os << "mechanism,objective,trials,skipped,mean_ratio,max_ratio,max_ratio_profile,seed\n";
  for (const auto& r : reports) {
    os << r.mechanism << ',' << objective_name(r.objective) << ',' << r.trials << ','
       << r.skipped << ','
       << (r.mean_ratio_exact ? rational_cell(*r.mean_ratio_exact) : decimal_cell(r.mean_ratio))
       << ','
       << (r.max_ratio_exact ? rational_cell(*r.max_ratio_exact) : decimal_cell(r.max_ratio))
       << ',' << profile_cell(r.max_ratio_profile) << ',' << r.seed << '\n';
  }
  return os.str();
}

std::string eps_median_csv(const std::vector<EpsMedianReport>& reports) {
  std::ostringstream os;
  os << "n,t,epsilon,delta,trials,success_count\n";
  for (const auto& r : reports) {
    os << r.n << ',' << r.t << ',' << rational_cell(r.epsilon) << ',' << rational_cell(r.delta)
       << ',' << r.trials << ',' << r.success_count << '\n';
  }
  return os.str();
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path.string());
  out << text;
}

}  // namespace

void emit_report(const RatioReport& report, const std::filesystem::path& path) {
  write_file(path, ratio_csv({report}));
}

void emit_report(const EpsMedianReport& report, const std::filesystem::path& path) {
  write_file(path, eps_median_csv({report}));
}

}  // namespace mechtree
