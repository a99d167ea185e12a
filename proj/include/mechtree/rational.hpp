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

#include <gmpxx.h>

#include <optional>
#include <string>
#include <string_view>

namespace mechtree {

/// Exact rational number. Every verification path computes with this type.
using Rational = mpq_class;

/// Parses `p/q`, `-p/q` or a bare integer. Decimals are rejected. Returns
/// nullopt on malformed input or a zero denominator.
std::optional<Rational> parse_rational(std::string_view text);

/// Canonical text form: bare integer when the denominator is 1, else `p/q`.
std::string to_string(const Rational& value);

/// Decimal rendering with `significant` significant digits (printf %g style).
std::string to_decimal(const Rational& value, int significant = 12);

/// A rational extended with the two infinities. Used for Moulin constants.
class ExtendedRational {
 public:
  enum class Kind { kNegInf, kFinite, kPosInf };

  ExtendedRational() : kind_(Kind::kPosInf) {}
  ExtendedRational(Rational value)  // NOLINT(google-explicit-constructor)
      : kind_(Kind::kFinite), value_(std::move(value)) {}

  static ExtendedRational pos_inf() { return ExtendedRational(Kind::kPosInf); }
  static ExtendedRational neg_inf() { return ExtendedRational(Kind::kNegInf); }

  Kind kind() const { return kind_; }
  bool is_finite() const { return kind_ == Kind::kFinite; }
  bool is_pos_inf() const { return kind_ == Kind::kPosInf; }
  bool is_neg_inf() const { return kind_ == Kind::kNegInf; }
  /// Only meaningful when finite.
  const Rational& value() const { return value_; }

  friend bool operator==(const ExtendedRational& a, const ExtendedRational& b);
  friend bool operator<(const ExtendedRational& a, const ExtendedRational& b);

 private:
  explicit ExtendedRational(Kind kind) : kind_(kind) {}

  Kind kind_;
  Rational value_;
};

/// Accepts `+inf`, `-inf` or anything parse_rational accepts.
std::optional<ExtendedRational> parse_extended(std::string_view text);
std::string to_string(const ExtendedRational& value);

}  // namespace mechtree
