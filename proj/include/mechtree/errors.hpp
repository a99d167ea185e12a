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

#include <stdexcept>
#include <string>
#include <vector>

namespace mechtree {

/// 1-based position in a source text.
struct SourceSpan {
  int line = 1;
  int column = 1;
};

/// Syntax or semantic error in mechanism/profile text.
class ParseError : public std::runtime_error {
 public:
  ParseError(SourceSpan span, std::string message, std::string expected = {},
             std::string source = {});

  /// Same error, with what() prefixed by `source` (usually a file path).
  ParseError in_source(std::string source) const;

  const SourceSpan& span() const { return span_; }
  const std::string& message() const { return message_; }
  /// Token(s) the parser was looking for; empty for semantic errors.
  const std::string& expected() const { return expected_; }
  const std::string& source() const { return source_; }

 private:
  SourceSpan span_;
  std::string message_;
  std::string expected_;
  std::string source_;
};

/// A structurally invalid mechanism was handed to an operation that needs a
/// valid one.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// A caller broke an operation's precondition (bad arity, out-of-range
/// parameter, length mismatch).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An internal consistency check failed (e.g. a witness did not replay).
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace mechtree
