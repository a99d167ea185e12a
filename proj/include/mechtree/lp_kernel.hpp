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

// Dense phase-I simplex shared by lp_feasible and the verifier's hot loop.
// Instantiated with Fraction64 first and with Rational when that overflows.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <type_traits>
#include <vector>

#include "mechtree/errors.hpp"
#include "mechtree/rational.hpp"

namespace mechtree::lp_kernel {

struct Overflow {};

/// Reduced fraction over int64. Any overflow throws Overflow; INT64_MIN is
/// never produced, so negation is always safe.
class Fraction64 {
 public:
  Fraction64() = default;
  explicit Fraction64(std::int64_t value) : num_(checked(value)) {}

  static Fraction64 from(const Rational& r) {
    if (!r.get_num().fits_slong_p() || !r.get_den().fits_slong_p()) throw Overflow{};
    return Fraction64(checked(r.get_num().get_si()), r.get_den().get_si());
  }

  Rational to_rational() const {
    return Rational(mpz_class(static_cast<long>(num_)), mpz_class(static_cast<long>(den_)));
  }

  int sign() const { return (num_ > 0) - (num_ < 0); }

  Fraction64 operator-() const { return Fraction64(-num_, den_); }

  friend Fraction64 operator+(const Fraction64& a, const Fraction64& b) {
    if (a.den_ == 1 && b.den_ == 1) return Fraction64(add(a.num_, b.num_), 1);
    const std::int64_t g = gcd(a.den_, b.den_);
    const std::int64_t t = add(mul(a.num_, b.den_ / g), mul(b.num_, a.den_ / g));
    if (t == 0) return Fraction64();
    const std::int64_t g2 = gcd(magnitude(t), g);
    return Fraction64(t / g2, mul(a.den_ / g, b.den_ / g2));
  }
  friend Fraction64 operator-(const Fraction64& a, const Fraction64& b) { return a + (-b); }
  friend Fraction64 operator*(const Fraction64& a, const Fraction64& b) {
    if (a.den_ == 1 && b.den_ == 1) return Fraction64(mul(a.num_, b.num_), 1);
    if (a.num_ == 0 || b.num_ == 0) return Fraction64();
    const std::int64_t g1 = gcd(magnitude(a.num_), b.den_);
    const std::int64_t g2 = gcd(magnitude(b.num_), a.den_);
    return Fraction64(mul(a.num_ / g1, b.num_ / g2), mul(a.den_ / g2, b.den_ / g1));
  }
  friend Fraction64 operator/(const Fraction64& a, const Fraction64& b) {
    if (b.num_ == 0) throw InvariantError("division by zero in simplex pivot");
    const Fraction64 inverse = b.num_ > 0 ? Fraction64(b.den_, b.num_) : Fraction64(-b.den_, -b.num_);
    return a * inverse;
  }
  friend bool operator<(const Fraction64& a, const Fraction64& b) {
    if (a.den_ == b.den_) return a.num_ < b.num_;
    return static_cast<__int128>(a.num_) * b.den_ < static_cast<__int128>(b.num_) * a.den_;
  }
  friend bool operator==(const Fraction64&, const Fraction64&) = default;

 private:
  // Trusted: already reduced, den > 0.
  Fraction64(std::int64_t num, std::int64_t den) : num_(num), den_(den) {}

  static std::int64_t checked(std::int64_t v) {
    if (v == std::numeric_limits<std::int64_t>::min()) throw Overflow{};
    return v;
  }
  static std::int64_t add(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_add_overflow(a, b, &r)) throw Overflow{};
    return checked(r);
  }
  static std::int64_t mul(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_mul_overflow(a, b, &r)) throw Overflow{};
    return checked(r);
  }
  static std::int64_t magnitude(std::int64_t v) { return v < 0 ? -v : v; }
  // Binary gcd; gcd(0, b) = b.
  static std::int64_t gcd(std::int64_t a, std::int64_t b) {
    auto u = static_cast<std::uint64_t>(a);
    auto v = static_cast<std::uint64_t>(b);
    if (u == 0) return static_cast<std::int64_t>(v);
    if (v == 0) return static_cast<std::int64_t>(u);
    const int shift = __builtin_ctzll(u | v);
    u >>= __builtin_ctzll(u);
    do {
      v >>= __builtin_ctzll(v);
      if (u > v) std::swap(u, v);
      v -= u;
    } while (v != 0);
    return static_cast<std::int64_t>(u << shift);
  }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

inline int sign_of(const Fraction64& v) { return v.sign(); }
inline int sign_of(const Rational& v) { return sgn(v); }
inline Rational to_rational(const Fraction64& v) { return v.to_rational(); }
inline Rational to_rational(const Rational& v) { return v; }

template <typename T>
T from_rational(const Rational& r) {
  if constexpr (std::is_same_v<T, Rational>) {
    return r;
  } else {
    return T::from(r);
  }
}

/// Rows of `width` coefficients followed by the bound, meaning
/// coefficients . v >= bound, over v >= 0.
template <typename T>
class DenseSystem {
 public:
  explicit DenseSystem(std::size_t width = 0) : width_(width) {}

  void reset(std::size_t width) {
    width_ = width;
    data_.clear();
  }
  std::size_t width() const { return width_; }
  std::size_t rows() const { return width_ + 1 == 0 ? 0 : data_.size() / (width_ + 1); }
  T* row(std::size_t i) { return data_.data() + i * (width_ + 1); }
  const T* row(std::size_t i) const { return data_.data() + i * (width_ + 1); }
  T& bound(std::size_t i) { return row(i)[width_]; }
  const T& bound(std::size_t i) const { return row(i)[width_]; }

  /// Appends a zero row and returns it.
  T* add_row() {
    data_.resize(data_.size() + width_ + 1, T());
    return row(rows() - 1);
  }

  /// Drops rows made redundant by another with equal coefficients and a
  /// larger bound, and all-zero rows with bound <= 0. Returns false if an
  /// all-zero row has a positive bound.
  bool normalize() {
    const std::size_t m = rows();
    order_.resize(m);
    for (std::size_t i = 0; i < m; ++i) order_[i] = i;
    auto coefficients_less = [&](std::size_t a, std::size_t b) {
      const T* ra = row(a);
      const T* rb = row(b);
      for (std::size_t j = 0; j < width_; ++j) {
        if (ra[j] < rb[j]) return true;
        if (rb[j] < ra[j]) return false;
      }
      return false;
    };
    std::stable_sort(order_.begin(), order_.end(), coefficients_less);
    std::vector<T> kept;
    kept.reserve(data_.size());
    std::size_t kept_rows = 0;
    for (std::size_t idx : order_) {
      const T* r = row(idx);
      bool zero = true;
      for (std::size_t j = 0; j < width_ && zero; ++j) zero = sign_of(r[j]) == 0;
      if (zero) {
        if (sign_of(r[width_]) > 0) return false;
        continue;
      }
      if (kept_rows > 0) {
        T* last = kept.data() + (kept_rows - 1) * (width_ + 1);
        if (std::equal(r, r + width_, last)) {
          if (last[width_] < r[width_]) last[width_] = r[width_];
          continue;
        }
      }
      kept.insert(kept.end(), r, r + width_ + 1);
      ++kept_rows;
    }
    data_ = std::move(kept);
    return true;
  }

 private:
  std::size_t width_;
  std::vector<T> data_;
  std::vector<std::size_t> order_;
};

/// Phase I with Bland's rule on a normalized system. Each row gets a
/// surplus column; rows with bound <= 0 start with it basic, the others
/// with an artificial that is never allowed back in once it leaves (so it
/// needs no column). Returns a feasible point or nullopt.
template <typename T>
std::optional<std::vector<T>> phase_one(const DenseSystem<T>& system) {
  const std::size_t vars = system.width();
  const std::size_t m = system.rows();
  const std::size_t cols = vars + m;
  const std::size_t stride = cols + 1;
  constexpr std::size_t kArtificial = std::numeric_limits<std::size_t>::max();

  thread_local std::vector<T> tab;
  thread_local std::vector<T> obj;
  thread_local std::vector<std::size_t> basis;
  thread_local std::vector<std::size_t> support;
  tab.assign(m * stride, T());
  obj.assign(stride, T());
  basis.assign(m, kArtificial);

  for (std::size_t i = 0; i < m; ++i) {
    const T* src = system.row(i);
    T* dst = tab.data() + i * stride;
    const bool artificial = sign_of(src[vars]) > 0;
    for (std::size_t j = 0; j < vars; ++j) {
      if (sign_of(src[j]) != 0) dst[j] = artificial ? src[j] : T() - src[j];
    }
    dst[vars + i] = from_rational<T>(Rational(artificial ? -1 : 1));
    dst[cols] = artificial ? src[vars] : T() - src[vars];
    if (artificial) {
      for (std::size_t j = 0; j < stride; ++j) {
        if (sign_of(dst[j]) != 0) obj[j] = obj[j] - dst[j];
      }
    } else {
      basis[i] = vars + i;
    }
  }

  while (true) {
    std::size_t enter = cols;
    for (std::size_t j = 0; j < cols; ++j) {
      if (sign_of(obj[j]) < 0) {
        enter = j;
        break;
      }
    }
    if (enter == cols) break;

    std::size_t leave = m;
    T best_ratio;
    for (std::size_t i = 0; i < m; ++i) {
      const T& a = tab[i * stride + enter];
      if (sign_of(a) <= 0) continue;
      T ratio = tab[i * stride + cols] / a;
      if (leave == m || ratio < best_ratio || (ratio == best_ratio && basis[i] < basis[leave])) {
        leave = i;
        best_ratio = std::move(ratio);
      }
    }
    // Phase I is bounded below by zero, so an improving column always has
    // a blocking row.
    if (leave == m) throw InvariantError("phase-one simplex found an unbounded direction");

    T* pivot_row = tab.data() + leave * stride;
    const T pivot = pivot_row[enter];
    support.clear();
    for (std::size_t j = 0; j < stride; ++j) {
      if (sign_of(pivot_row[j]) != 0) {
        pivot_row[j] = pivot_row[j] / pivot;
        support.push_back(j);
      }
    }
    auto eliminate = [&](T* target) {
      if (sign_of(target[enter]) == 0) return;
      const T factor = target[enter];
      for (std::size_t j : support) target[j] = target[j] - factor * pivot_row[j];
    };
    for (std::size_t i = 0; i < m; ++i) {
      if (i != leave) eliminate(tab.data() + i * stride);
    }
    eliminate(obj.data());
    basis[leave] = enter;
  }

  if (sign_of(obj[cols]) != 0) return std::nullopt;
  std::vector<T> point(vars, T());
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < vars) point[basis[i]] = tab[i * stride + cols];
  }
  return point;
}

}  // namespace mechtree::lp_kernel
