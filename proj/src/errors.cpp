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

#include "mechtree/errors.hpp"

namespace mechtree {
namespace {

std::string format_parse(const SourceSpan& span, const std::string& message,
                         const std::string& expected, const std::string& source) {
  std::string out = (source.empty() ? "" : source + ":") + std::to_string(span.line) + ":" +
                    std::to_string(span.column) + ": " + message;
  if (!expected.empty()) out += " (expected " + expected + ")";
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out += "; ";
    out += item;
  }
  return out;
}

}  // namespace

ParseError::ParseError(SourceSpan span, std::string message, std::string expected,
                       std::string source)
    : std::runtime_error(format_parse(span, message, expected, source)),
      span_(span),
      message_(std::move(message)),
      expected_(std::move(expected)),
      source_(std::move(source)) {}

ParseError ParseError::in_source(std::string source) const {
  return ParseError(span_, message_, expected_, std::move(source));
}

ValidationError::ValidationError(std::vector<std::string> violations)
    : std::runtime_error("invalid mechanism: " + join(violations)),
      violations_(std::move(violations)) {}

}  // namespace mechtree
