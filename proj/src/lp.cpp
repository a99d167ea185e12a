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

#include "mechtree/lp.hpp"

#include <algorithm>
#include <optional>
#include <sstream>

#include "mechtree/errors.hpp"
#include "mechtree/lp_kernel.hpp"

namespace mechtree {

Rational LinearInequality::lhs(const std::vector<Rational>& point) const {
  Rational total = 0;
  for (std::size_t j = 0; j < coefficients.size(); ++j) {
    if (coefficients[j] != 0) total += coefficients[j] * point.at(j);
  }
  return total;
}

bool LinearInequality::is_zero() const {
  return std::all_of(coefficients.begin(), coefficients.end(),
                     [](const Rational& c) { return c == 0; });
}

LinearConstraintSystem::LinearConstraintSystem(std::size_t variable_count)
    : variable_count_(variable_count) {}

void LinearConstraintSystem::add(LinearInequality row) {
  if (row.coefficients.size() != variable_count_) {
    throw UsageError("inequality has " + std::to_string(row.coefficients.size()) +
                     " coefficients, system has " + std::to_string(variable_count_) +
                     " variables");
  }
  rows_.push_back(std::move(row));
}

bool LinearConstraintSystem::satisfied_by(const std::vector<Rational>& point) const {
  if (point.size() != variable_count_) return false;
  for (const auto& v : point) {
    if (v < 0) return false;
  }
  return std::all_of(rows_.begin(), rows_.end(),
                     [&](const LinearInequality& row) { return row.satisfied_by(point); });
}

namespace {

bool coefficients_less(const LinearInequality& a, const LinearInequality& b) {
  return std::lexicographical_compare(a.coefficients.begin(), a.coefficients.end(),
                                      b.coefficients.begin(), b.coefficients.end());
}

}  // namespace

LinearConstraintSystem LinearConstraintSystem::normalized() const {
  std::vector<LinearInequality> sorted = rows_;
  std::stable_sort(sorted.begin(), sorted.end(), coefficients_less);
  LinearConstraintSystem out(variable_count_);
  for (auto& row : sorted) {
    if (row.is_zero() && row.bound <= 0) continue;
    if (!out.rows_.empty() && out.rows_.back().coefficients == row.coefficients) {
      if (row.bound > out.rows_.back().bound) out.rows_.back().bound = row.bound;
      continue;
    }
    out.rows_.push_back(std::move(row));
  }
  return out;
}

std::string LinearConstraintSystem::to_string(const std::vector<std::string>& names) const {
  std::ostringstream os;
  for (const auto& row : rows_) {
    bool first = true;
    for (std::size_t j = 0; j < variable_count_; ++j) {
      const Rational& c = row.coefficients[j];
      if (c == 0) continue;
      const std::string name = j < names.size() ? names[j] : "v" + std::to_string(j + 1);
      const Rational magnitude = abs(c);
      if (first) {
        if (c < 0) os << "-";
      } else {
        os << (c < 0 ? " - " : " + ");
      }
      if (magnitude != 1) os << mechtree::to_string(magnitude) << " ";
      os << name;
      first = false;
    }
    if (first) os << "0";
    os << " >= " << mechtree::to_string(row.bound) << "\n";
  }
  return os.str();
}

namespace {

template <typename T>
std::optional<std::vector<Rational>> solve(const LinearConstraintSystem& system) {
  lp_kernel::DenseSystem<T> dense(system.variable_count());
  for (const auto& row : system.rows()) {
    T* out = dense.add_row();
    for (std::size_t j = 0; j < row.coefficients.size(); ++j) {
      out[j] = lp_kernel::from_rational<T>(row.coefficients[j]);
    }
    out[system.variable_count()] = lp_kernel::from_rational<T>(row.bound);
  }
  if (!dense.normalize()) return std::nullopt;
  auto point = lp_kernel::phase_one(dense);
  if (!point) return std::nullopt;
  std::vector<Rational> out;
  out.reserve(point->size());
  for (const auto& v : *point) out.push_back(lp_kernel::to_rational(v));
  return out;
}

}  // namespace

FeasibilityResult lp_feasible(const LinearConstraintSystem& system, LpArithmetic arithmetic) {
  std::optional<std::vector<Rational>> point;
  bool solved = false;
  if (arithmetic == LpArithmetic::kAuto) {
    try {
      point = solve<lp_kernel::Fraction64>(system);
      solved = true;
    } catch (const lp_kernel::Overflow&) {
    }
  }
  if (!solved) point = solve<Rational>(system);

  FeasibilityResult result;
  if (!point) return result;
  if (!system.satisfied_by(*point)) {
    throw InvariantError("simplex witness fails substitution check");
  }
  result.feasible = true;
  result.witness = std::move(*point);
  return result;
}

}  // namespace mechtree
