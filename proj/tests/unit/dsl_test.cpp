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


#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "mechtree/dsl.hpp"
#include "mechtree/errors.hpp"
#include "mechtree/mechanisms.hpp"

using namespace mechtree;

namespace {

std::vector<std::filesystem::path> fixture_files() {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(MECHTREE_FIXTURES)) {
    if (e.path().extension() == ".mech") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

SourceSpan error_span(const std::string& text) {
  try {
    parse_mechanism(text);
  } catch (const ParseError& e) {
    return e.span();
  }
  FAIL("no parse error for: " << text);
  return {};
}

std::string error_message(const std::string& text) {
  try {
    parse_mechanism(text);
  } catch (const ParseError& e) {
    return e.message();
  }
  return {};
}

}  // namespace

TEST_CASE("dictator text") {
  const Mechanism m = parse_mechanism(
      "version 1\nmechanism deterministic agents 3\nleaf l0: 1 x1\nroot l0\n");
  const auto& t = std::get<DecisionTree>(m);
  REQUIRE(leaf_count(t) == 1);
  CHECK(t.node(t.root()).leaf().agent_weights == std::vector<Rational>{1, 0, 0});
  CHECK(same_mechanism(m, Mechanism(gen_dictator(3, 1))));
}

TEST_CASE("average text") {
  const Mechanism m = parse_mechanism(
      "mechanism deterministic agents 3\nleaf l0: 1/3 x1 + 1/3 x2 + 1/3 x3\nroot l0\n");
  const auto& t = std::get<DecisionTree>(m);
  CHECK(t.node(t.root()).leaf().agent_weights == std::vector<Rational>(3, Rational(1, 3)));
  CHECK(same_mechanism(m, Mechanism(gen_average(3))));
}

TEST_CASE("coefficient sum is a semantic parse error") {
  const std::string text = "mechanism deterministic agents 2\nleaf l0: 1/2 x1 + 1/4 x2\nroot l0\n";
  CHECK(error_message(text).find("coefficients sum 3/4") != std::string::npos);
  CHECK(error_span(text).line == 2);
}

TEST_CASE("syntax errors carry spans") {
  const SourceSpan dangling =
      error_span("mechanism deterministic agents 2\nnode n0: x1 >= x2 ? l0 : l9\nleaf l0: 1 x1\nroot n0\n");
  CHECK(dangling.line == 2);
  CHECK(dangling.column == 26);
  const SourceSpan decimal = error_span("mechanism deterministic agents 2\nleaf l0: 0.5 x1 + 0.5 x2\nroot l0\n");
  CHECK(decimal.line == 2);
  CHECK(decimal.column == 10);
  CHECK(error_span("mechanism deterministic agents 2\nleaf l0: 1 x1\nleaf l0: 1 x2\nroot l0\n").line == 3);
  CHECK(error_span("mechanism deterministic agents 2\nleaf l0: 1 x1\n").line == 2);
  CHECK(error_span("mechanism sideways agents 2\n").column == 11);
  CHECK(error_span("").line >= 1);
  CHECK(error_span("mechanism deterministic agents 2\nleaf l0: 1 x1\nroot l0\nroot l0\n").line == 4);
  CHECK(error_span("mechanism deterministic agents 2\nnode n0: x1 == x2 ? l0 : l0\nleaf l0: 1 x1\nroot n0\n").line == 2);
}

TEST_CASE("every bad fixture is rejected") {
  std::size_t count = 0;
  for (const auto& e : std::filesystem::directory_iterator(MECHTREE_FIXTURES "/bad")) {
    CAPTURE(e.path().string());
    CHECK_THROWS_AS(load_mechanism(e.path()), ParseError);
    ++count;
  }
  CHECK(count >= 10);
}

TEST_CASE("errors from files name the file") {
  const std::string path = MECHTREE_FIXTURES "/bad/dangling.mech";
  try {
    load_mechanism(path);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.source() == path);
    CHECK(std::string(e.what()).rfind(path + ":", 0) == 0);
    CHECK(e.message() == "dangling reference to 'l9'");
  }
}

TEST_CASE("comments, blank lines and forward references are accepted") {
  const Mechanism m = parse_mechanism(
      "# header\n\nmechanism deterministic agents 3\n"
      "leaf a: 1 x2\n\nleaf b: 1 x3   # trailing\nnode top: x2 >= x3 ? a : b\nroot top\n");
  CHECK(leaf_count(std::get<DecisionTree>(m)) == 2);
}

TEST_CASE("deleting one token yields an error at or after the deletion point") {
  const std::regex token(R"([+-]inf|[A-Za-z_][A-Za-z0-9_'-]*|-?[0-9]+(/[0-9]+)?|>=|<=|->|\S)");
  std::size_t deletions = 0;
  std::size_t still_valid = 0;
  for (const auto& path : fixture_files()) {
    std::ifstream in(path);
    std::vector<std::string> file_lines;
    for (std::string l; std::getline(in, l);) file_lines.push_back(l);
    for (std::size_t li = 0; li < file_lines.size(); ++li) {
      const std::string& line = file_lines[li];
      const std::string code = line.substr(0, line.find('#'));
      for (auto it = std::sregex_iterator(code.begin(), code.end(), token); it != std::sregex_iterator(); ++it) {
        const auto col = static_cast<std::size_t>(it->position());
        std::string text;
        for (std::size_t k = 0; k < file_lines.size(); ++k) {
          text += k == li ? line.substr(0, col) + line.substr(col + it->length()) : file_lines[k];
          text += '\n';
        }
        ++deletions;
        try {
          parse_mechanism(text);
          ++still_valid;
          MESSAGE("still valid: " << path.filename().string() << ":" << li + 1 << " '" << it->str() << "'");
        } catch (const ParseError& e) {
          const auto line_no = static_cast<int>(li) + 1;
          CAPTURE(path.filename().string());
          CAPTURE(line_no);
          CAPTURE(it->str());
          CAPTURE(e.message());
          if (e.expected().empty()) {
            // Semantic errors point at the offending declaration's line.
            CHECK(e.span().line >= line_no);
          } else {
            CHECK((e.span().line > line_no ||
                   (e.span().line == line_no && e.span().column >= static_cast<int>(col) + 1)));
          }
        }
      }
    }
  }
  CHECK(deletions > 500);
  CHECK(still_valid == 0);
}

TEST_CASE("randomized and Moulin forms") {
  const Mechanism rd = load_mechanism(MECHTREE_FIXTURES "/random_dictator_4.mech");
  CHECK(same_mechanism(rd, Mechanism(gen_random_dictator(4))));
  const Mechanism sm = load_mechanism(MECHTREE_FIXTURES "/sampled_median_9_3.mech");
  CHECK(same_mechanism(sm, Mechanism(gen_sampled_median(9, 3))));
  const Mechanism big = load_mechanism(MECHTREE_FIXTURES "/sampled_median_201_101.mech");
  CHECK(std::get<RandomizedMechanism>(big).branches()[0].tree.is_implicit());
  const Mechanism ex = load_mechanism(MECHTREE_FIXTURES "/explicit_tuples.mech");
  const auto& branches = std::get<RandomizedMechanism>(ex).branches();
  REQUIRE(branches.size() == 2);
  CHECK(branches[0].tree.fixed_agents == std::vector<std::size_t>{1});
  const auto& tuples = std::get<ExplicitTuples>(branches[1].tree.distribution).entries;
  REQUIRE(tuples.size() == 2);
  CHECK(tuples[0].first == std::vector<std::size_t>{3, 1});
  CHECK(tuples[1].second == Rational(3, 4));
  const Mechanism moulin = load_mechanism(MECHTREE_FIXTURES "/moulin_median3.mech");
  CHECK(std::get<MoulinScheme>(moulin).constants().size() == 8);
  CHECK(same_mechanism(moulin, Mechanism(gen_moulin_median3())));
}

TEST_CASE("serialization is canonical") {
  CHECK(serialize(Mechanism(gen_dictator(3, 1))) ==
        "version 1\nmechanism deterministic agents 3\nleaf l0: 1 x1\nroot l0\n");
  const Mechanism strict = load_mechanism(MECHTREE_FIXTURES "/strict_ops.mech");
  const std::string text = serialize(strict);
  CHECK(text.find("node n0: x2 > x1 ? n1 : n2") != std::string::npos);
  CHECK(text.find("leaf l3: 1/3 x1 + 1/3 x2 + 1/3 x3") != std::string::npos);
}

TEST_CASE("round trip over every fixture") {
  const auto files = fixture_files();
  CHECK(files.size() >= 20);
  for (const auto& path : files) {
    CAPTURE(path.string());
    const Mechanism m = load_mechanism(path);
    const std::string once = serialize(m);
    const Mechanism again = parse_mechanism(once);
    CHECK(same_mechanism(m, again));
    CHECK(serialize(again) == once);
  }
}

TEST_CASE("same_mechanism distinguishes different mechanisms") {
  CHECK_FALSE(same_mechanism(Mechanism(gen_dictator(3, 1)), Mechanism(gen_dictator(3, 2))));
  CHECK_FALSE(same_mechanism(Mechanism(gen_average(2)), Mechanism(gen_random_dictator(2))));
  CHECK_FALSE(same_mechanism(Mechanism(gen_sampled_median(5, 3)),
                             Mechanism(gen_sampled_median(5, 5))));
}

TEST_CASE("missing file") {
  CHECK_THROWS_AS(load_mechanism(MECHTREE_FIXTURES "/no_such_file.mech"), UsageError);
}
