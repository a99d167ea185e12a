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
#include <string>
#include <vector>

#include "mechtree/rational.hpp"

namespace mechtree {

/// sum_j coefficients[j] * v_j >= bound
struct LinearInequality {
  std::vector<Rational> coefficients;
  Rational bound;

  Rational lhs(const std::vector<Rational>& point) const;
  bool satisfied_by(const std::vector<Rational>& point) const { return lhs(point) >= bound; }
  bool is_zero() const;
  friend bool operator==(const LinearInequality&, const LinearInequality&) = default;
};

/// Conjunction of inequalities over nonnegative variables.
class LinearConstraintSystem {
 public:
  explicit LinearConstraintSystem(std::size_t variable_count);

  std::size_t variable_count() const { return variable_count_; }
  const std::vector<LinearInequality>& rows() const { return rows_; }
  bool empty() const { return rows_.empty(); }

  /// Throws UsageError on arity mismatch.
  void add(LinearInequality row);

  /// Nonnegativity plus every row.
  bool satisfied_by(const std::vector<Rational>& point) const;

  /// Same feasible set with exact duplicates removed; among rows with equal
  /// coefficients only the largest bound survives, and all-zero rows with a
  /// nonpositive bound are dropped. Row order is deterministic.
  LinearConstraintSystem normalized() const;

  /// One row per line, e.g. "x1 - x2 >= 1". Names default to v1..vN.
  std::string to_string(const std::vector<std::string>& names = {}) const;

  friend bool operator==(const LinearConstraintSystem&, const LinearConstraintSystem&) = default;

 private:
  std::size_t variable_count_;
  std::vector<LinearInequality> rows_;
};

struct FeasibilityResult {
  bool feasible = false;
  std::vector<Rational> witness;  // empty iff infeasible
};

enum class LpArithmetic {
  kAuto,   // 64-bit fractions with overflow checks, GMP on overflow
  kExact,  // GMP throughout
};

/// Phase-I simplex with Bland's rule. A feasible witness is re-checked by
/// substitution; a failed check throws InvariantError.
FeasibilityResult lp_feasible(const LinearConstraintSystem& system,
                              LpArithmetic arithmetic = LpArithmetic::kAuto);

}  // namespace mechtree
