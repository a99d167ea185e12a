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

#include "mechtree/mechanisms.hpp"

#include <bit>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <unordered_map>

#include "mechtree/errors.hpp"

namespace mechtree {

DecisionTree gen_dictator(std::size_t agent_count, std::size_t agent) {
  if (agent < 1 || agent > agent_count) {
    throw UsageError("dictator agent " + std::to_string(agent) + " not in 1.." +
                     std::to_string(agent_count));
  }
  TreeBuilder b(agent_count);
  return std::move(b).build(b.unit_leaf(Operand::agent(agent)));
}

DecisionTree gen_average(std::size_t agent_count) {
  if (agent_count < 1) throw UsageError("average needs at least one agent");
  TreeBuilder b(agent_count);
  const Rational share(1, static_cast<unsigned long>(agent_count));
  return std::move(b).build(b.leaf(std::vector<Rational>(agent_count, share)));
}

namespace {

// Weak order knowledge over k <= 16 elements: bit b of below_eq[a] means
// x_a <= x_b is known. Kept reflexive and transitively closed.
struct Knowledge {
  std::vector<std::uint16_t> below_eq;

  explicit Knowledge(std::size_t k) : below_eq(k) {
    for (std::size_t a = 0; a < k; ++a) below_eq[a] = static_cast<std::uint16_t>(1u << a);
  }

  bool knows(std::size_t a, std::size_t b) const { return (below_eq[a] >> b) & 1u; }

  Knowledge with(std::size_t a, std::size_t b) const {  // adds x_a <= x_b
    Knowledge out = *this;
    for (std::size_t p = 0; p < out.below_eq.size(); ++p) {
      if (knows(p, a)) out.below_eq[p] |= below_eq[b];
    }
    return out;
  }

  std::size_t above(std::size_t m) const { return std::popcount(below_eq[m]) - 1u; }
  std::size_t below(std::size_t m) const {
    std::size_t c = 0;
    for (std::size_t b = 0; b < below_eq.size(); ++b) c += (b != m && knows(b, m));
    return c;
  }

  // Smallest element known to be a median, or -1.
  int median() const {
    const std::size_t h = (below_eq.size() - 1) / 2;
    for (std::size_t m = 0; m < below_eq.size(); ++m) {
      if (below(m) >= h && above(m) >= h) return static_cast<int>(m);
    }
    return -1;
  }

  std::size_t deficit() const {
    const std::size_t h = (below_eq.size() - 1) / 2;
    std::size_t best = below_eq.size();
    for (std::size_t m = 0; m < below_eq.size(); ++m) {
      const std::size_t lo = below(m);
      const std::size_t hi = above(m);
      best = std::min(best, (lo < h ? h - lo : 0) + (hi < h ? h - hi : 0));
    }
    return best;
  }

  std::uint64_t key() const {
    std::uint64_t k = 0;
    for (auto mask : below_eq) k = k * (1u << below_eq.size()) + mask;
    return k;
  }

  std::vector<std::pair<std::size_t, std::size_t>> open_pairs() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < below_eq.size(); ++i) {
      for (std::size_t j = i + 1; j < below_eq.size(); ++j) {
        if (!knows(i, j) && !knows(j, i)) out.emplace_back(i, j);
      }
    }
    return out;
  }
};

// Node x_i >= x_j: true adds x_j <= x_i, false adds x_i <= x_j.
class MedianSearch {
 public:
  MedianSearch(std::vector<Operand> operands, std::size_t agent_count, std::size_t param_count,
               std::size_t max_leaves)
      : operands_(std::move(operands)),
        builder_(agent_count, param_count),
        max_leaves_(max_leaves),
        exact_(operands_.size() <= 5) {}

  DecisionTree run() && {
    const NodeIndex root = build(Knowledge(operands_.size()));
    return std::move(builder_).build(root);
  }

 private:
  using Pair = std::pair<std::size_t, std::size_t>;

  // Minimum leaf count below `s`, memoized with the pair achieving it.
  std::size_t optimum(const Knowledge& s) {
    if (s.median() >= 0) return 1;
    const auto key = s.key();
    if (auto it = memo_.find(key); it != memo_.end()) return it->second.first;
    std::size_t best = SIZE_MAX;
    Pair best_pair{};
    for (const auto& [i, j] : s.open_pairs()) {
      const std::size_t total = optimum(s.with(j, i)) + optimum(s.with(i, j));
      if (total < best) {
        best = total;
        best_pair = {i, j};
      }
    }
    memo_.emplace(key, std::make_pair(best, best_pair));
    return best;
  }

  Pair greedy(const Knowledge& s) const {
    Pair best_pair{};
    std::pair<std::size_t, std::size_t> best_score{SIZE_MAX, SIZE_MAX};
    for (const auto& [i, j] : s.open_pairs()) {
      const std::size_t yes = s.with(j, i).deficit();
      const std::size_t no = s.with(i, j).deficit();
      const std::pair<std::size_t, std::size_t> score{std::max(yes, no), yes + no};
      if (score < best_score) {
        best_score = score;
        best_pair = {i, j};
      }
    }
    return best_pair;
  }

  NodeIndex build(const Knowledge& s) {
    if (const int m = s.median(); m >= 0) {
      if (++leaves_ > max_leaves_) {
        throw UsageError("median tree exceeds the leaf cap of " + std::to_string(max_leaves_));
      }
      return builder_.unit_leaf(operands_[static_cast<std::size_t>(m)]);
    }
    Pair p;
    if (exact_) {
      optimum(s);
      p = memo_.at(s.key()).second;
    } else {
      p = greedy(s);
    }
    const auto [i, j] = p;
    const NodeIndex yes = build(s.with(j, i));
    const NodeIndex no = build(s.with(i, j));
    return builder_.compare(operands_[i], ComparisonOp::kGE, operands_[j], yes, no);
  }

  std::vector<Operand> operands_;
  TreeBuilder builder_;
  std::size_t max_leaves_;
  bool exact_;
  std::size_t leaves_ = 0;
  std::unordered_map<std::uint64_t, std::pair<std::size_t, Pair>> memo_;
};

void check_median_size(std::size_t k, const GeneratorCaps& caps, const char* what) {
  if (k == 0 || k % 2 == 0) throw UsageError(std::string(what) + " must be odd, got " + std::to_string(k));
  if (k > caps.max_median_size) {
    throw UsageError(std::string(what) + " " + std::to_string(k) + " exceeds the cap of " +
                     std::to_string(caps.max_median_size));
  }
}

}  // namespace

DecisionTree gen_median_tree(std::size_t k, const GeneratorCaps& caps) {
  return gen_median_first_k(k, k, caps);
}

DecisionTree median_of_three() {
  TreeBuilder b(3);
  const auto x = [](std::size_t i) { return Operand::agent(i); };
  const auto ge = ComparisonOp::kGE;
  const NodeIndex left = b.compare(x(2), ge, x(3), b.unit_leaf(x(2)),
                                   b.compare(x(1), ge, x(3), b.unit_leaf(x(3)), b.unit_leaf(x(1))));
  const NodeIndex right =
      b.compare(x(2), ge, x(3), b.compare(x(1), ge, x(3), b.unit_leaf(x(1)), b.unit_leaf(x(3))),
                b.unit_leaf(x(2)));
  return std::move(b).build(b.compare(x(1), ge, x(2), left, right));
}

DecisionTree gen_median_first_k(std::size_t agent_count, std::size_t k,
                                const GeneratorCaps& caps) {
  check_median_size(k, caps, "median size");
  if (k > agent_count) {
    throw UsageError("median size " + std::to_string(k) + " exceeds agent count " +
                     std::to_string(agent_count));
  }
  std::vector<Operand> operands;
  for (std::size_t i = 1; i <= k; ++i) operands.push_back(Operand::agent(i));
  return MedianSearch(std::move(operands), agent_count, 0, caps.max_leaves).run();
}

RandomizedMechanism gen_random_dictator(std::size_t agent_count) {
  if (agent_count < 1) throw UsageError("random dictator needs at least one agent");
  TreeBuilder b(agent_count, 1);
  ParamTree pt;
  pt.param_count = 1;
  pt.body = std::move(b).build(b.unit_leaf(Operand::param(1)));
  return RandomizedMechanism(agent_count, {{Rational(1), std::move(pt)}});
}

RandomizedMechanism gen_sampled_median(std::size_t agent_count, std::size_t sample_size,
                                       const GeneratorCaps& caps) {
  if (sample_size == 0 || sample_size % 2 == 0) {
    throw UsageError("sample size must be odd, got " + std::to_string(sample_size));
  }
  if (sample_size > agent_count) {
    throw UsageError("sample size " + std::to_string(sample_size) + " exceeds agent count " +
                     std::to_string(agent_count));
  }
  ParamTree pt;
  pt.param_count = sample_size;
  if (sample_size > caps.max_median_size) {
    pt.body = ImplicitMedian{};
  } else {
    std::vector<Operand> operands;
    for (std::size_t j = 1; j <= sample_size; ++j) operands.push_back(Operand::param(j));
    pt.body = MedianSearch(std::move(operands), agent_count, sample_size, caps.max_leaves).run();
  }
  return RandomizedMechanism(agent_count, {{Rational(1), std::move(pt)}});
}

namespace {

// Strict/weak order knowledge over up to 64 elements.
struct OrderKnowledge {
  std::vector<std::uint64_t> le;  // bit b of le[a]: x_a <= x_b
  std::vector<std::uint64_t> lt;  // bit b of lt[a]: x_a < x_b

  explicit OrderKnowledge(std::size_t n) : le(n), lt(n) {
    for (std::size_t a = 0; a < n; ++a) le[a] = std::uint64_t{1} << a;
  }

  OrderKnowledge with(std::size_t a, std::size_t b, bool strict) const {
    OrderKnowledge out = *this;
    for (std::size_t p = 0; p < le.size(); ++p) {
      if (!((le[p] >> a) & 1u)) continue;
      out.le[p] |= le[b];
      out.lt[p] |= (strict || ((lt[p] >> a) & 1u)) ? le[b] : lt[b];
    }
    return out;
  }

  // First pair i < j whose test x_i < x_j is not yet forced.
  std::optional<std::pair<std::size_t, std::size_t>> open_pair() const {
    for (std::size_t i = 0; i < le.size(); ++i) {
      for (std::size_t j = i + 1; j < le.size(); ++j) {
        const bool forced_true = (lt[i] >> j) & 1u;
        const bool forced_false = (le[j] >> i) & 1u;
        if (!forced_true && !forced_false) return std::make_pair(i, j);
      }
    }
    return std::nullopt;
  }
};

}  // namespace

DecisionTree gen_tampered_dictator(std::size_t agent_count, std::size_t leaves, bool tampered,
                                   const GeneratorCaps& caps) {
  const std::size_t n = agent_count;
  if (n < 2) throw UsageError("tampered dictator needs at least 2 agents");
  if (n > 64) throw UsageError("tampered dictator supports at most 64 agents");
  if (leaves < 1) throw UsageError("leaf count must be positive");
  if (leaves > caps.max_leaves) {
    throw UsageError("leaf count " + std::to_string(leaves) + " exceeds the cap of " +
                     std::to_string(caps.max_leaves));
  }
  std::size_t orders = 1;
  for (std::size_t i = 2; i <= n && orders < leaves; ++i) orders *= i;
  if (leaves > orders) {
    throw UsageError("leaf count " + std::to_string(leaves) + " exceeds " + std::to_string(n) +
                     "! = " + std::to_string(orders));
  }

  struct Draft {
    OrderKnowledge state;
    std::size_t i = 0, j = 0;
    std::size_t if_true = 0, if_false = 0;
    bool split = false;
  };
  std::vector<Draft> drafts{{OrderKnowledge(n)}};
  std::deque<std::size_t> frontier{0};
  std::size_t count = 1;
  while (count < leaves) {
    const std::size_t d = frontier.front();
    frontier.pop_front();
    const auto pair = drafts[d].state.open_pair();
    if (!pair) continue;  // a total order; stays a leaf
    const auto [i, j] = *pair;
    OrderKnowledge yes = drafts[d].state.with(i, j, true);
    OrderKnowledge no = drafts[d].state.with(j, i, false);
    drafts[d].split = true;
    drafts[d].i = i;
    drafts[d].j = j;
    drafts[d].if_true = drafts.size();
    drafts.push_back({std::move(yes)});
    drafts[d].if_false = drafts.size();
    drafts.push_back({std::move(no)});
    frontier.push_back(drafts[d].if_true);
    frontier.push_back(drafts[d].if_false);
    ++count;
  }

  TreeBuilder b(n);
  bool designated = false;
  // Preorder over drafts; children built before their parent.
  std::function<NodeIndex(std::size_t)> emit = [&](std::size_t d) -> NodeIndex {
    const Draft& draft = drafts[d];
    if (!draft.split) {
      if (tampered && !designated) {
        designated = true;
        return b.leaf(std::vector<Rational>(n, Rational(1, static_cast<unsigned long>(n))));
      }
      return b.unit_leaf(Operand::agent(1));
    }
    const NodeIndex yes = emit(draft.if_true);
    const NodeIndex no = emit(draft.if_false);
    return b.compare(Operand::agent(draft.i + 1), ComparisonOp::kLT, Operand::agent(draft.j + 1),
                     yes, no);
  };
  const NodeIndex root = emit(0);
  return std::move(b).build(root);
}

MoulinScheme gen_moulin_median3() {
  const auto inf = ExtendedRational::pos_inf();
  const auto neg = ExtendedRational::neg_inf();
  return MoulinScheme(3, {{{}, inf},
                          {{1}, inf},
                          {{2}, inf},
                          {{3}, inf},
                          {{1, 2}, neg},
                          {{1, 3}, neg},
                          {{2, 3}, neg},
                          {{1, 2, 3}, neg}});
}

WorstCaseKind parse_worstcase_kind(std::string_view name) {
  if (name == "outlier") return WorstCaseKind::kSingleOutlier;
  if (name == "cluster") return WorstCaseKind::kCluster;
  throw UsageError("unknown worst-case profile kind '" + std::string(name) +
                   "' (expected outlier or cluster)");
}

std::string_view worstcase_kind_name(WorstCaseKind kind) {
  return kind == WorstCaseKind::kSingleOutlier ? "outlier" : "cluster";
}

LocationProfile gen_worstcase_profile(WorstCaseKind kind, std::size_t agent_count,
                                      const WorstCaseParams& params) {
  const std::size_t n = agent_count;
  if (n < 1) throw UsageError("profile needs at least one agent");
  std::vector<Location> peaks;
  if (kind == WorstCaseKind::kSingleOutlier) {
    if (n < 2) throw UsageError("outlier profile needs at least 2 agents");
    peaks.assign(n - 1, params.offset);
    peaks.push_back(params.offset + 1);
    return LocationProfile(std::move(peaks));
  }
  if (params.cluster_size > n) {
    throw UsageError("cluster size " + std::to_string(params.cluster_size) +
                     " exceeds agent count " + std::to_string(n));
  }
  if (params.spread < 0) throw UsageError("cluster spread must be nonnegative");
  for (std::size_t i = 0; i < n; ++i) {
    if (i < params.cluster_size) {
      peaks.push_back(params.spread * Rational(static_cast<unsigned long>(i)) /
                      Rational(static_cast<unsigned long>(n)));
    } else {
      peaks.push_back(Rational(1));
    }
  }
  return LocationProfile(std::move(peaks));
}

}  // namespace mechtree
