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

#include "mechtree/verifier.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <thread>

#include "mechtree/errors.hpp"
#include "mechtree/evaluator.hpp"
#include "mechtree/lp_kernel.hpp"

namespace mechtree {
namespace {

// Row "x_a - x_b >= bound" over `width` variables (indices 1-based).
LinearInequality difference(std::size_t width, std::size_t a, std::size_t b, int bound) {
  LinearInequality row{std::vector<Rational>(width, Rational(0)), Rational(bound)};
  row.coefficients[a - 1] = 1;
  row.coefficients[b - 1] = -1;
  return row;
}

// Path row for taking `outcome` at comparison c.
LinearInequality path_row(std::size_t n, const Comparison& c, bool outcome) {
  const std::size_t l = c.lhs.index;
  const std::size_t r = c.rhs.index;
  // Outcome false negates the test: >= becomes <, > becomes <=, and so on.
  switch (c.op) {
    case ComparisonOp::kGE: return outcome ? difference(n, l, r, 0) : difference(n, r, l, 1);
    case ComparisonOp::kGT: return outcome ? difference(n, l, r, 1) : difference(n, r, l, 0);
    case ComparisonOp::kLE: return outcome ? difference(n, r, l, 0) : difference(n, l, r, 1);
    case ComparisonOp::kLT: return outcome ? difference(n, r, l, 1) : difference(n, l, r, 0);
  }
  throw InvariantError("unknown comparison operator");
}

// Coefficients of s * (x_k - facility) over (x1..xn, xk'), where the
// facility reads x_k' in place of x_k when `deviated`.
std::vector<Rational> signed_distance(std::size_t agent, const Leaf& leaf, Side side,
                                      bool deviated) {
  const std::size_t n = leaf.agent_weights.size();
  const int s = side == Side::kRight ? 1 : -1;
  std::vector<Rational> c(n + 1, Rational(0));
  for (std::size_t i = 0; i < n; ++i) {
    if (leaf.agent_weights[i] == 0) continue;
    const std::size_t column = (deviated && i + 1 == agent) ? n : i;
    c[column] -= s * leaf.agent_weights[i];
  }
  c[agent - 1] += s;
  return c;
}

void require_bound(const DecisionTree& tree) {
  if (tree.param_count() != 0) throw UsageError("tree has unbound parameters");
  for (const auto& node : tree.nodes()) {
    if (node.is_leaf()) continue;
    const auto& c = node.comparison();
    if (!c.lhs.is_agent() || !c.rhs.is_agent()) throw UsageError("tree has unbound parameters");
  }
}

}  // namespace

std::vector<LeafConstraints> build_leaf_constraints(const DecisionTree& tree) {
  require_bound(tree);
  const std::size_t n = tree.agent_count();
  std::vector<LeafConstraints> out;
  std::vector<LinearInequality> path;
  // Iterative preorder with an explicit path so deep trees do not recurse.
  struct Frame {
    NodeIndex node;
    int stage;  // 0 = enter, 1 = true child done, 2 = both done
  };
  std::vector<Frame> stack{{tree.root(), 0}};
  while (!stack.empty()) {
    Frame& top = stack.back();
    const TreeNode& node = tree.node(top.node);
    if (node.is_leaf()) {
      out.push_back({top.node, node.id, path});
      stack.pop_back();
      continue;
    }
    const Comparison& c = node.comparison();
    if (top.stage == 0) {
      top.stage = 1;
      path.push_back(path_row(n, c, true));
      stack.push_back({c.if_true, 0});
    } else if (top.stage == 1) {
      top.stage = 2;
      path.back() = path_row(n, c, false);
      stack.push_back({c.if_false, 0});
    } else {
      path.pop_back();
      stack.pop_back();
    }
  }
  return out;
}

std::vector<LinearInequality> utility_increase(std::size_t agent, const Leaf& leaf, Side side,
                                               const Leaf& deviated_leaf, Side deviated_side) {
  const auto d = signed_distance(agent, leaf, side, false);
  const auto d_dev = signed_distance(agent, deviated_leaf, deviated_side, true);
  std::vector<Rational> gap(d.size());
  for (std::size_t j = 0; j < d.size(); ++j) gap[j] = d[j] - d_dev[j];
  return {{std::move(gap), Rational(1)}, {d, Rational(0)}, {d_dev, Rational(0)}};
}

LinearConstraintSystem manipulation_system(std::size_t agent_count, std::size_t agent,
                                           const LeafConstraints& truthful,
                                           const LeafConstraints& deviated,
                                           const std::vector<LinearInequality>& increase,
                                           bool shifted) {
  const std::size_t n = agent_count;
  const std::size_t width = n + 1 + (shifted ? 1 : 0);
  LinearConstraintSystem system(width);
  auto emit = [&](std::vector<Rational> c, const Rational& bound) {
    c.resize(width, Rational(0));
    if (shifted) {
      // x = u - M contributes -sum(c) to M's coefficient.
      Rational total = 0;
      for (std::size_t j = 0; j + 1 < width; ++j) total += c[j];
      c[width - 1] = -total;
    }
    system.add({std::move(c), bound});
  };
  for (const auto& row : truthful.rows) emit(row.coefficients, row.bound);
  for (const auto& row : deviated.rows) {
    std::vector<Rational> c = row.coefficients;
    c.resize(n + 1, Rational(0));
    std::swap(c[agent - 1], c[n]);
    emit(std::move(c), row.bound);
  }
  for (const auto& row : increase) emit(row.coefficients, row.bound);
  return system;
}

FeasibilityResult exists_solution(std::size_t agent_count, std::size_t agent,
                                  const LeafConstraints& truthful,
                                  const LeafConstraints& deviated,
                                  const std::vector<LinearInequality>& increase,
                                  bool shifted) {
  return lp_feasible(manipulation_system(agent_count, agent, truthful, deviated, increase, shifted));
}

std::vector<std::string> manipulation_variable_names(std::size_t agent_count, std::size_t agent,
                                                     bool shifted) {
  std::vector<std::string> names;
  for (std::size_t i = 1; i <= agent_count; ++i) names.push_back("x" + std::to_string(i));
  names.push_back("x" + std::to_string(agent) + "'");
  if (shifted) names.push_back("M");
  return names;
}

std::size_t worker_count(const VerifierOptions& options) {
  if (options.sequential) return 1;
  if (options.threads > 0) return options.threads;
  if (const char* env = std::getenv("MECHTREE_THREADS")) {
    char* end = nullptr;
    const unsigned long value = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && value > 0) return value;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

ManipulationWitness replay(const DecisionTree& tree, std::size_t agent, NodeIndex leaf,
                           NodeIndex deviated_leaf, const std::vector<Rational>& point,
                           bool shifted) {
  const std::size_t n = tree.agent_count();
  const Rational offset = shifted ? point[n + 1] : Rational(0);
  std::vector<Location> peaks(n);
  for (std::size_t i = 0; i < n; ++i) peaks[i] = point[i] - offset;

  ManipulationWitness w;
  w.agent = agent;
  w.truthful = LocationProfile(std::move(peaks));
  w.deviation = point[n] - offset;
  const EvalTrace before = eval(tree, w.truthful);
  const EvalTrace after = eval(tree, w.deviated_profile());
  if (before.leaf != leaf || after.leaf != deviated_leaf) {
    throw InvariantError("manipulation witness does not reach the leaves it was built for");
  }
  w.leaf = leaf;
  w.deviated_leaf = deviated_leaf;
  w.leaf_id = before.leaf_id;
  w.deviated_leaf_id = after.leaf_id;
  w.facility = before.facility;
  w.deviated_facility = after.facility;
  const Location& peak = w.truthful.agent(agent);
  w.cost_truthful = cost(peak, w.facility);
  w.cost_deviated = cost(peak, w.deviated_facility);
  if (w.cost_decrease() < 1) {
    throw InvariantError("manipulation witness does not decrease cost by at least 1");
  }
  return w;
}

}  // namespace

namespace {

using lp_kernel::Fraction64;

// Leaf data converted once for the 64-bit kernel.
struct FastLeaf {
  std::vector<Fraction64> rows;     // flat, n + 1 entries per row (bound last)
  std::vector<Fraction64> weights;  // n
};

// Everything one is_truthful call shares across its LPs.
class PairSolver {
 public:
  PairSolver(const DecisionTree& tree, std::vector<LeafConstraints> leaves,
             const VerifierOptions& options)
      : tree_(tree), n_(tree.agent_count()), leaves_(std::move(leaves)), options_(options) {
    fast_ = options.arithmetic == LpArithmetic::kAuto;
    if (!fast_) return;
    try {
      for (const auto& lc : leaves_) {
        FastLeaf f;
        for (const auto& row : lc.rows) {
          for (const auto& c : row.coefficients) f.rows.push_back(Fraction64::from(c));
          f.rows.push_back(Fraction64::from(row.bound));
        }
        for (const auto& w : tree.node(lc.leaf).leaf().agent_weights) {
          f.weights.push_back(Fraction64::from(w));
        }
        fast_leaves_.push_back(std::move(f));
      }
    } catch (const lp_kernel::Overflow&) {
      fast_ = false;
      fast_leaves_.clear();
    }
  }

  const std::vector<LeafConstraints>& leaves() const { return leaves_; }

  FeasibilityResult decide(std::size_t agent, std::size_t leaf, Side side,
                           std::size_t deviated_leaf, Side deviated_side) const {
    std::optional<std::vector<Rational>> point;
    bool decided = false;
    if (fast_) {
      try {
        point = solve_fast(agent, leaf, side, deviated_leaf, deviated_side);
        decided = true;
      } catch (const lp_kernel::Overflow&) {
      }
    }
    const bool need_system = !decided || point.has_value() || options_.observer;
    FeasibilityResult result;
    if (!need_system) return result;

    const Leaf& l = tree_.node(leaves_[leaf].leaf).leaf();
    const Leaf& dl = tree_.node(leaves_[deviated_leaf].leaf).leaf();
    const auto system =
        manipulation_system(n_, agent, leaves_[leaf], leaves_[deviated_leaf],
                            utility_increase(agent, l, side, dl, deviated_side), options_.shifted);
    if (!decided) {
      result = lp_feasible(system, LpArithmetic::kExact);
    } else if (point) {
      if (!system.satisfied_by(*point)) {
        throw InvariantError("simplex witness fails substitution check");
      }
      result.feasible = true;
      result.witness = std::move(*point);
    }
    if (options_.observer) {
      std::lock_guard<std::mutex> lock(observer_mutex_);
      options_.observer(system, result);
    }
    return result;
  }

 private:
  std::optional<std::vector<Rational>> solve_fast(std::size_t agent, std::size_t leaf, Side side,
                                                  std::size_t deviated_leaf,
                                                  Side deviated_side) const {
    const std::size_t base = n_ + 1;
    const std::size_t width = base + (options_.shifted ? 1 : 0);
    thread_local lp_kernel::DenseSystem<Fraction64> dense;
    thread_local std::vector<Fraction64> d;
    thread_local std::vector<Fraction64> d_dev;
    dense.reset(width);

    auto finish = [&](Fraction64* row) {
      if (!options_.shifted) return;
      Fraction64 total;
      for (std::size_t j = 0; j < base; ++j) total = total + row[j];
      row[base] = -total;
    };
    auto copy_rows = [&](const FastLeaf& f, bool swap_agent) {
      for (std::size_t r = 0; r * (n_ + 1) < f.rows.size(); ++r) {
        const Fraction64* src = f.rows.data() + r * (n_ + 1);
        Fraction64* dst = dense.add_row();
        std::copy(src, src + n_, dst);
        if (swap_agent) std::swap(dst[agent - 1], dst[n_]);
        dst[width] = src[n_];
        finish(dst);
      }
    };
    auto distance = [&](std::vector<Fraction64>& c, const FastLeaf& f, Side s, bool deviated) {
      const Fraction64 unit(s == Side::kRight ? 1 : -1);
      c.assign(base, Fraction64());
      for (std::size_t i = 0; i < n_; ++i) {
        if (f.weights[i].sign() == 0) continue;
        const std::size_t column = (deviated && i + 1 == agent) ? n_ : i;
        c[column] = c[column] - unit * f.weights[i];
      }
      c[agent - 1] = c[agent - 1] + unit;
    };

    const FastLeaf& truthful = fast_leaves_[leaf];
    const FastLeaf& deviated = fast_leaves_[deviated_leaf];
    copy_rows(truthful, false);
    copy_rows(deviated, true);
    distance(d, truthful, side, false);
    distance(d_dev, deviated, deviated_side, true);
    Fraction64* gap = dense.add_row();
    for (std::size_t j = 0; j < base; ++j) gap[j] = d[j] - d_dev[j];
    gap[width] = Fraction64(1);
    finish(gap);
    Fraction64* own = dense.add_row();
    std::copy(d.begin(), d.end(), own);
    finish(own);
    Fraction64* other = dense.add_row();
    std::copy(d_dev.begin(), d_dev.end(), other);
    finish(other);

    if (!dense.normalize()) return std::nullopt;
    auto point = lp_kernel::phase_one(dense);
    if (!point) return std::nullopt;
    std::vector<Rational> out;
    out.reserve(point->size());
    for (const auto& v : *point) out.push_back(v.to_rational());
    return out;
  }

  const DecisionTree& tree_;
  std::size_t n_;
  std::vector<LeafConstraints> leaves_;
  const VerifierOptions& options_;
  bool fast_ = false;
  std::vector<FastLeaf> fast_leaves_;
  mutable std::mutex observer_mutex_;
};

}  // namespace

VerificationReport is_truthful(const DecisionTree& tree, const VerifierOptions& options) {
  require_valid(tree);
  const std::size_t n = tree.agent_count();
  std::vector<LeafConstraints> leaves = build_leaf_constraints(tree);
  // Duplicate path rows do not change a leaf's region; dropping them keeps
  // each system small regardless of depth.
  for (auto& lc : leaves) {
    LinearConstraintSystem s(n);
    for (auto& row : lc.rows) s.add(std::move(row));
    lc.rows = s.normalized().rows();
  }
  const PairSolver solver(tree, std::move(leaves), options);
  const std::size_t leaf_total = solver.leaves().size();
  const std::size_t task_total = n * leaf_total;
  constexpr Side kSides[] = {Side::kRight, Side::kLeft};
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  std::vector<std::vector<ManipulationWitness>> found(task_total);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> first_hit{kNone};
  std::vector<std::uint64_t> task_calls(task_total, 0);
  std::mutex error_mutex;
  std::exception_ptr error;

  auto run_task = [&](std::size_t task) {
    const std::size_t agent = task / leaf_total + 1;
    const std::size_t leaf = task % leaf_total;
    std::uint64_t calls = 0;
    for (Side side : kSides) {
      for (std::size_t deviated = 0; deviated < leaf_total; ++deviated) {
        for (Side deviated_side : kSides) {
          const FeasibilityResult result = solver.decide(agent, leaf, side, deviated, deviated_side);
          ++calls;
          if (!result.feasible) continue;
          found[task].push_back(replay(tree, agent, solver.leaves()[leaf].leaf,
                                       solver.leaves()[deviated].leaf, result.witness,
                                       options.shifted));
          if (!options.exhaustive) {
            task_calls[task] = calls;
            std::size_t current = first_hit.load();
            while (task < current && !first_hit.compare_exchange_weak(current, task)) {
            }
            return;
          }
        }
      }
    }
    task_calls[task] = calls;
  };

  // Tasks are claimed in increasing order and only tasks past the earliest
  // hit are skipped, so the reported witness does not depend on scheduling.
  auto worker = [&] {
    try {
      while (true) {
        const std::size_t task = next.fetch_add(1);
        if (task >= task_total) return;
        if (!options.exhaustive && task > first_hit.load()) return;
        run_task(task);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
      first_hit.store(0);
    }
  };

  const std::size_t workers = std::min<std::size_t>(worker_count(options), task_total);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  VerificationReport report;
  const std::size_t counted = first_hit.load() == kNone ? task_total : first_hit.load() + 1;
  for (std::size_t t = 0; t < counted; ++t) report.lp_calls += task_calls[t];
  if (options.exhaustive) {
    for (auto& per_task : found) {
      for (auto& w : per_task) report.witnesses.push_back(std::move(w));
    }
    if (!report.witnesses.empty()) report.verdict.witness = report.witnesses.front();
  } else if (first_hit.load() != kNone) {
    report.verdict.witness = std::move(found[first_hit.load()].front());
  }
  return report;
}

VerificationReport is_universally_truthful(const RandomizedMechanism& mech,
                                           const VerifierOptions& options) {
  require_valid(mech);
  VerificationReport total;
  const auto& branches = mech.branches();
  for (std::size_t r = 0; r < branches.size(); ++r) {
    const ParamTree& pt = branches[r].tree;
    if (pt.is_implicit()) {
      throw UsageError("branch " + std::to_string(r + 1) +
                       " has an implicit median body; materialize it to verify");
    }
    const auto pool = pt.free_agents(mech.agent_count());
    const std::vector<std::size_t> tuple(pool.begin(),
                                         pool.begin() + static_cast<std::ptrdiff_t>(pt.param_count));
    VerificationReport part = is_truthful(bind(pt, tuple, mech.agent_count()), options);
    total.lp_calls += part.lp_calls;
    for (auto& w : part.witnesses) {
      w.branch = r + 1;
      w.tuple = tuple;
      total.witnesses.push_back(std::move(w));
    }
    if (part.verdict.witness && !total.verdict.witness) {
      total.verdict.witness = std::move(part.verdict.witness);
      total.verdict.witness->branch = r + 1;
      total.verdict.witness->tuple = tuple;
      if (!options.exhaustive) return total;
    }
  }
  return total;
}

}  // namespace mechtree
