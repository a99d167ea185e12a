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

#include "mechtree/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "mechtree/errors.hpp"

namespace mechtree {
namespace {

enum class TokenKind { kWord, kNumber, kInf, kSymbol, kEnd };

struct Token {
  TokenKind kind;
  std::string text;
  int column;
};

bool word_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

std::vector<Token> tokenize(std::string_view line, int line_no) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto col = [&](std::size_t at) { return static_cast<int>(at) + 1; };
  while (i < line.size()) {
    const char c = line[i];
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    if (c == '#') break;
    const std::size_t start = i;
    if (word_start(c)) {
      while (i < line.size() && word_char(line[i])) ++i;
      // A trailing '-' belongs to a following "->" rather than the word.
      while (i > start + 1 && line[i - 1] == '-') --i;
      out.push_back({TokenKind::kWord, std::string(line.substr(start, i - start)), col(start)});
      continue;
    }
    if ((c == '+' || c == '-') && line.substr(i + 1, 3) == "inf" &&
        (i + 4 >= line.size() || !word_char(line[i + 4]))) {
      i += 4;
      out.push_back({TokenKind::kInf, std::string(line.substr(start, 4)), col(start)});
      continue;
    }
    if (digit(c) || (c == '-' && i + 1 < line.size() && digit(line[i + 1]))) {
      ++i;
      while (i < line.size() && digit(line[i])) ++i;
      if (i + 1 < line.size() && line[i] == '/' && digit(line[i + 1])) {
        ++i;
        while (i < line.size() && digit(line[i])) ++i;
      }
      if (i < line.size() && (line[i] == '.' || word_char(line[i]))) {
        throw ParseError({line_no, col(start)}, "malformed number", "integer or p/q rational");
      }
      out.push_back({TokenKind::kNumber, std::string(line.substr(start, i - start)), col(start)});
      continue;
    }
    for (std::string_view sym : {"->", ">=", "<="}) {
      if (line.substr(i, 2) == sym) {
        i += 2;
        out.push_back({TokenKind::kSymbol, std::string(sym), col(start)});
        break;
      }
    }
    if (i != start) continue;
    if (std::string_view(":?+{}(),<>").find(c) != std::string_view::npos) {
      ++i;
      out.push_back({TokenKind::kSymbol, std::string(1, c), col(start)});
      continue;
    }
    throw ParseError({line_no, col(start)}, std::string("unexpected character '") + c + "'");
  }
  int end_col = static_cast<int>(line.size()) + 1;
  if (const auto hash = line.find('#'); hash != std::string_view::npos) {
    end_col = static_cast<int>(hash) + 1;
  }
  out.push_back({TokenKind::kEnd, "end of line", end_col});
  return out;
}

struct Line {
  int number;
  std::vector<Token> tokens;
};

// Cursor over one line's tokens.
class LineReader {
 public:
  explicit LineReader(const Line& line) : line_(line) {}

  const Token& peek() const { return line_.tokens[pos_]; }
  bool at_end() const { return peek().kind == TokenKind::kEnd; }
  SourceSpan span() const { return {line_.number, peek().column}; }
  SourceSpan span_of(const Token& t) const { return {line_.number, t.column}; }
  int line_number() const { return line_.number; }

  [[noreturn]] void fail(const std::string& expected) const {
    throw ParseError(span(), "unexpected " + describe(peek()), expected);
  }

  const Token& take() { return line_.tokens[pos_ < line_.tokens.size() - 1 ? pos_++ : pos_]; }

  bool accept_symbol(std::string_view sym) {
    if (peek().kind == TokenKind::kSymbol && peek().text == sym) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect_symbol(std::string_view sym) {
    if (!accept_symbol(sym)) fail("'" + std::string(sym) + "'");
  }

  bool accept_keyword(std::string_view word) {
    if (peek().kind == TokenKind::kWord && peek().text == word) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect_keyword(std::string_view word) {
    if (!accept_keyword(word)) fail("'" + std::string(word) + "'");
  }

  const Token& expect_word(const std::string& what) {
    if (peek().kind != TokenKind::kWord) fail(what);
    return take();
  }

  std::pair<Rational, SourceSpan> expect_rational() {
    if (peek().kind != TokenKind::kNumber) fail("rational");
    const Token& t = take();
    return {*parse_rational(t.text), span_of(t)};
  }

  std::size_t expect_count(const std::string& what) {
    if (peek().kind != TokenKind::kNumber || peek().text.find_first_of("/-") != std::string::npos) {
      fail(what);
    }
    const Token& t = take();
    try {
      return static_cast<std::size_t>(std::stoull(t.text));
    } catch (const std::exception&) {
      throw ParseError(span_of(t), "integer out of range", what);
    }
  }

  void expect_end() {
    if (!at_end()) fail("end of line");
  }

  static std::string describe(const Token& t) {
    if (t.kind == TokenKind::kEnd) return "end of line";
    return "'" + t.text + "'";
  }

 private:
  const Line& line_;
  std::size_t pos_ = 0;
};

std::optional<Operand> as_operand(const Token& t) {
  if (t.kind != TokenKind::kWord || t.text.size() < 2) return std::nullopt;
  const char head = t.text[0];
  if (head != 'x' && head != 'z') return std::nullopt;
  const std::string digits = t.text.substr(1);
  if (!std::all_of(digits.begin(), digits.end(), digit) || digits[0] == '0') return std::nullopt;
  if (digits.size() > 9) return std::nullopt;
  const auto index = static_cast<std::size_t>(std::stoul(digits));
  return head == 'x' ? Operand::agent(index) : Operand::param(index);
}

std::optional<ComparisonOp> as_op(const Token& t) {
  if (t.kind != TokenKind::kSymbol) return std::nullopt;
  if (t.text == ">=") return ComparisonOp::kGE;
  if (t.text == "<=") return ComparisonOp::kLE;
  if (t.text == ">") return ComparisonOp::kGT;
  if (t.text == "<") return ComparisonOp::kLT;
  return std::nullopt;
}

// Node declarations of one tree before id resolution.
class TreeSection {
 public:
  TreeSection(std::size_t agents, std::size_t params, bool allow_params)
      : agents_(agents), params_(params), allow_params_(allow_params) {}

  void parse_node(LineReader& in) {
    const Token& id = in.expect_word("node id");
    const SourceSpan id_span = in.span_of(id);
    in.expect_symbol(":");
    const Operand lhs = parse_operand(in);
    const Token& op_token = in.take();
    const auto op = as_op(op_token);
    if (!op) throw ParseError(in.span_of(op_token), "unexpected " + LineReader::describe(op_token), "comparison (>=, <=, >, <)");
    const Operand rhs = parse_operand(in);
    in.expect_symbol("?");
    const Token& yes = in.expect_word("node id");
    const SourceSpan yes_span = in.span_of(yes);
    in.expect_symbol(":");
    const Token& no = in.expect_word("node id");
    const SourceSpan no_span = in.span_of(no);
    in.expect_end();
    Pending p;
    p.id = id.text;
    p.line = in.line_number();
    p.comparison = Comparison{lhs, *op, rhs, 0, 0};
    p.children = {{yes.text, yes_span}, {no.text, no_span}};
    add(std::move(p), id_span);
  }

  void parse_leaf(LineReader& in) {
    const Token& id = in.expect_word("leaf id");
    const SourceSpan id_span = in.span_of(id);
    in.expect_symbol(":");
    Leaf leaf{std::vector<Rational>(agents_, Rational(0)), std::vector<Rational>(params_, Rational(0))};
    std::set<std::pair<int, std::size_t>> seen;
    Rational sum = 0;
    do {
      auto [coef, coef_span] = in.expect_rational();
      if (coef < 0) throw ParseError(coef_span, "negative coefficient " + to_string(coef));
      const SourceSpan var_span = in.span();
      const Operand var = parse_operand(in);
      if (!seen.insert({static_cast<int>(var.kind), var.index}).second) {
        throw ParseError(var_span, "duplicate variable " + to_string(var) + " in leaf");
      }
      sum += coef;
      (var.is_agent() ? leaf.agent_weights : leaf.param_weights)[var.index - 1] = coef;
    } while (in.accept_symbol("+"));
    in.expect_end();
    if (sum != 1) {
      throw ParseError({in.line_number(), 1}, "coefficients sum " + to_string(sum) + " ≠ 1");
    }
    Pending p;
    p.id = id.text;
    p.line = in.line_number();
    p.leaf = std::move(leaf);
    add(std::move(p), id_span);
  }

  void parse_root(LineReader& in) {
    const Token& id = in.expect_word("node id");
    root_ = {id.text, in.span_of(id)};
    in.expect_end();
  }

  bool has_root() const { return root_.has_value(); }

  DecisionTree build(SourceSpan eof) const {
    if (!root_) throw ParseError(eof, "missing root declaration", "'root'");
    std::map<std::string, NodeIndex> index;
    for (std::size_t i = 0; i < pending_.size(); ++i) index[pending_[i].id] = i;
    auto resolve = [&](const std::pair<std::string, SourceSpan>& ref) {
      auto it = index.find(ref.first);
      if (it == index.end()) throw ParseError(ref.second, "dangling reference to '" + ref.first + "'");
      return it->second;
    };
    std::vector<TreeNode> nodes;
    for (const auto& p : pending_) {
      if (p.leaf) {
        nodes.push_back({p.id, *p.leaf});
      } else {
        Comparison c = *p.comparison;
        c.if_true = resolve(p.children[0]);
        c.if_false = resolve(p.children[1]);
        nodes.push_back({p.id, c});
      }
    }
    const NodeIndex root = resolve(*root_);
    DecisionTree tree(agents_, std::move(nodes), root, params_);
    // Structural problems (self comparison, multiple parents, unreachable
    // nodes) are reported on the first offending declaration.
    std::vector<int> parents(pending_.size(), 0);
    for (const auto& node : tree.nodes()) {
      if (!node.is_leaf()) {
        ++parents[node.comparison().if_true];
        ++parents[node.comparison().if_false];
      }
    }
    for (std::size_t i = 0; i < pending_.size(); ++i) {
      const auto& node = tree.node(i);
      if (!node.is_leaf() && node.comparison().lhs == node.comparison().rhs) {
        throw ParseError({pending_[i].line, 1}, "node " + node.id + ": i = j (" + to_string(node.comparison().lhs) + " compared with itself)");
      }
      if (parents[i] > 1 || (i == root && parents[i] > 0)) {
        throw ParseError({pending_[i].line, 1}, "node " + node.id + " has multiple parents");
      }
    }
    std::vector<bool> reachable(pending_.size(), false);
    for (NodeIndex i : tree.preorder()) reachable[i] = true;
    for (std::size_t i = 0; i < pending_.size(); ++i) {
      if (!reachable[i]) {
        throw ParseError({pending_[i].line, 1}, "node " + pending_[i].id + " unreachable from root");
      }
    }
    return tree;
  }

 private:
  struct Pending {
    std::string id;
    int line = 0;
    std::optional<Comparison> comparison;
    std::optional<Leaf> leaf;
    std::vector<std::pair<std::string, SourceSpan>> children;
  };

  Operand parse_operand(LineReader& in) {
    const SourceSpan span = in.span();
    const Token& t = in.take();
    auto op = as_operand(t);
    if (!op) throw ParseError(span, "unexpected " + LineReader::describe(t), "variable x<i> or z<j>");
    if (!op->is_agent() && !allow_params_) {
      throw ParseError(span, "parameter " + t.text + " in a deterministic tree");
    }
    const std::size_t limit = op->is_agent() ? agents_ : params_;
    if (op->index > limit) throw ParseError(span, "variable " + t.text + " out of range");
    return *op;
  }

  void add(Pending p, SourceSpan id_span) {
    for (const auto& q : pending_) {
      if (q.id == p.id) throw ParseError(id_span, "duplicate node id '" + p.id + "'");
    }
    pending_.push_back(std::move(p));
  }

  std::size_t agents_;
  std::size_t params_;
  bool allow_params_;
  std::vector<Pending> pending_;
  std::optional<std::pair<std::string, SourceSpan>> root_;
};

std::vector<std::size_t> parse_index_set(LineReader& in, std::string_view open,
                                         std::string_view close, std::size_t limit) {
  std::vector<std::size_t> out;
  in.expect_symbol(open);
  if (in.accept_symbol(close)) return out;
  do {
    const SourceSpan span = in.span();
    const std::size_t v = in.expect_count("agent index");
    if (v < 1 || v > limit) throw ParseError(span, "agent " + std::to_string(v) + " out of range");
    if (std::find(out.begin(), out.end(), v) != out.end()) {
      throw ParseError(span, "duplicate agent " + std::to_string(v));
    }
    out.push_back(v);
  } while (in.accept_symbol(","));
  in.expect_symbol(close);
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view text) {
    int number = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const std::size_t end = std::min(text.find('\n', pos), text.size());
      ++number;
      auto tokens = tokenize(text.substr(pos, end - pos), number);
      if (tokens.size() > 1) lines_.push_back({number, std::move(tokens)});
      if (end < text.size() || end > pos || number == 1) {
        last_line_ = number;
        eof_ = {number, static_cast<int>(end - pos) + 1};
      }
      if (end == text.size()) break;
      pos = end + 1;
    }
  }

  Mechanism parse() {
    if (lines_.empty()) throw ParseError(eof_, "empty input", "'mechanism'");
    std::size_t i = 0;
    {
      LineReader in(lines_[i]);
      if (in.accept_keyword("version")) {
        const SourceSpan span = in.span();
        if (in.expect_count("version number") != 1) throw ParseError(span, "unsupported version");
        in.expect_end();
        ++i;
      }
    }
    if (i >= lines_.size()) throw ParseError(eof_, "missing header", "'mechanism'");
    LineReader header(lines_[i++]);
    header.expect_keyword("mechanism");
    const Token& kind = header.expect_word("mechanism kind");
    if (kind.text != "deterministic" && kind.text != "randomized" && kind.text != "moulin") {
      throw ParseError(header.span_of(kind), "unknown mechanism kind '" + kind.text + "'",
                       "deterministic, randomized or moulin");
    }
    header.expect_keyword("agents");
    const SourceSpan agents_span = header.span();
    agents_ = header.expect_count("agent count");
    if (agents_ < 1) throw ParseError(agents_span, "agent count must be at least 1");
    header.expect_end();
    if (kind.text == "deterministic") return parse_deterministic(i);
    if (kind.text == "randomized") return parse_randomized(i);
    return parse_moulin(i);
  }

 private:
  Mechanism parse_deterministic(std::size_t i) {
    TreeSection section(agents_, 0, false);
    i = parse_section_body(section, i);
    if (i < lines_.size()) {
      LineReader in(lines_[i]);
      throw ParseError(in.span(), "unexpected " + LineReader::describe(in.peek()) + " after root", "end of file");
    }
    return section.build(eof_);
  }

  // Consumes node/leaf lines up to and including `root`. Returns the next
  // line index.
  std::size_t parse_section_body(TreeSection& section, std::size_t i) {
    for (; i < lines_.size(); ++i) {
      LineReader in(lines_[i]);
      if (in.accept_keyword("node")) {
        section.parse_node(in);
      } else if (in.accept_keyword("leaf")) {
        section.parse_leaf(in);
      } else if (in.accept_keyword("root")) {
        section.parse_root(in);
        return i + 1;
      } else {
        in.fail("'node', 'leaf' or 'root'");
      }
    }
    section.build(eof_);  // throws: missing root
    return i;
  }

  struct PendingBranch {
    Rational probability;
    std::string tree_id;
    SourceSpan tree_span;
    std::vector<std::size_t> fixed;
    std::size_t params;
    TupleDistribution distribution;
    int line;
  };

  Mechanism parse_randomized(std::size_t i) {
    std::vector<PendingBranch> branches;
    for (; i < lines_.size(); ++i) {
      LineReader in(lines_[i]);
      if (!in.accept_keyword("branch")) break;
      branches.push_back(parse_branch(in));
    }
    if (branches.empty()) {
      const SourceSpan span = i < lines_.size() ? LineReader(lines_[i]).span() : eof_;
      throw ParseError(span, "randomized mechanism has no branches", "'branch'");
    }
    std::map<std::string, std::variant<ImplicitMedian, DecisionTree>> bodies;
    while (i < lines_.size()) {
      LineReader in(lines_[i]);
      in.expect_keyword("tree");
      const Token& id = in.expect_word("tree id");
      const SourceSpan id_span = in.span_of(id);
      auto owner = std::find_if(branches.begin(), branches.end(),
                                [&](const PendingBranch& b) { return b.tree_id == id.text; });
      if (owner == branches.end()) throw ParseError(id_span, "tree '" + id.text + "' is not used by any branch");
      if (bodies.count(id.text)) throw ParseError(id_span, "duplicate tree '" + id.text + "'");
      if (in.accept_keyword("median")) {
        in.expect_end();
        bodies.emplace(id.text, ImplicitMedian{});
        ++i;
        continue;
      }
      in.expect_end();
      TreeSection section(agents_, owner->params, true);
      i = parse_section_body(section, i + 1);
      bodies.emplace(id.text, section.build(eof_));
    }
    Rational total = 0;
    std::vector<Branch> out;
    for (const auto& b : branches) {
      total += b.probability;
      auto it = bodies.find(b.tree_id);
      if (it == bodies.end()) throw ParseError(b.tree_span, "dangling reference to tree '" + b.tree_id + "'");
      ParamTree pt;
      pt.fixed_agents = b.fixed;
      pt.param_count = b.params;
      pt.body = it->second;
      pt.distribution = b.distribution;
      out.push_back({b.probability, std::move(pt)});
    }
    if (total != 1) {
      throw ParseError({branches.front().line, 1}, "branch probabilities sum " + to_string(total) + " ≠ 1");
    }
    RandomizedMechanism mech(agents_, std::move(out));
    auto violations = validate(mech);
    if (!violations.empty()) throw ParseError({branches.front().line, 1}, violations.front());
    return mech;
  }

  PendingBranch parse_branch(LineReader& in) {
    PendingBranch b;
    b.line = in.line_number();
    auto [p, p_span] = in.expect_rational();
    if (p <= 0) throw ParseError(p_span, "branch probability must be positive");
    b.probability = p;
    in.expect_symbol("->");
    in.expect_keyword("tree");
    const Token& id = in.expect_word("tree id");
    b.tree_id = id.text;
    b.tree_span = in.span_of(id);
    in.expect_keyword("fixed");
    b.fixed = parse_index_set(in, "{", "}", agents_);
    std::sort(b.fixed.begin(), b.fixed.end());
    in.expect_keyword("params");
    const SourceSpan params_span = in.span();
    b.params = in.expect_count("parameter count");
    if (b.params + b.fixed.size() > agents_) {
      throw ParseError(params_span, "parameter count exceeds the free agents");
    }
    in.expect_keyword("dist");
    if (in.accept_keyword("uniform-k-subsets")) {
      b.distribution = UniformSubsets{};
    } else if (in.accept_keyword("explicit")) {
      ExplicitTuples dist;
      Rational mass = 0;
      do {
        const SourceSpan tuple_span = in.span();
        auto tuple = parse_index_set(in, "(", ")", agents_);
        if (tuple.size() != b.params) throw ParseError(tuple_span, "tuple arity differs from parameter count");
        for (std::size_t a : tuple) {
          if (std::binary_search(b.fixed.begin(), b.fixed.end(), a)) {
            throw ParseError(tuple_span, "tuple agent " + std::to_string(a) + " is fixed");
          }
        }
        in.expect_symbol(":");
        auto [q, q_span] = in.expect_rational();
        if (q < 0) throw ParseError(q_span, "negative tuple probability");
        mass += q;
        dist.entries.emplace_back(std::move(tuple), q);
      } while (in.accept_symbol(","));
      if (mass != 1) throw ParseError({b.line, 1}, "tuple probabilities sum " + to_string(mass) + " ≠ 1");
      b.distribution = std::move(dist);
    } else {
      in.fail("'uniform-k-subsets' or 'explicit'");
    }
    in.expect_end();
    return b;
  }

  Mechanism parse_moulin(std::size_t i) {
    std::vector<std::pair<MoulinScheme::Coalition, ExtendedRational>> constants;
    std::set<MoulinScheme::Coalition> seen;
    int first_line = i < lines_.size() ? lines_[i].number : last_line_;
    for (; i < lines_.size(); ++i) {
      LineReader in(lines_[i]);
      in.expect_keyword("set");
      const SourceSpan set_span = in.span();
      auto coalition = parse_index_set(in, "{", "}", agents_);
      std::sort(coalition.begin(), coalition.end());
      if (!seen.insert(coalition).second) throw ParseError(set_span, "duplicate coalition");
      in.expect_symbol(":");
      const SourceSpan value_span = in.span();
      const Token& t = in.take();
      std::optional<ExtendedRational> value;
      if (t.kind == TokenKind::kNumber || t.kind == TokenKind::kInf) value = parse_extended(t.text);
      if (!value) throw ParseError(value_span, "unexpected " + LineReader::describe(t), "rational, +inf or -inf");
      in.expect_end();
      constants.emplace_back(std::move(coalition), std::move(*value));
    }
    MoulinScheme scheme(agents_, std::move(constants));
    auto violations = validate(scheme);
    if (!violations.empty()) throw ParseError({first_line, 1}, violations.front());
    return scheme;
  }

  std::vector<Line> lines_;
  int last_line_ = 0;
  SourceSpan eof_{1, 1};
  std::size_t agents_ = 0;
};

std::string format_leaf(const Leaf& leaf) {
  std::string out;
  auto term = [&](const Rational& w, const std::string& var) {
    if (w == 0) return;
    if (!out.empty()) out += " + ";
    out += to_string(w) + " " + var;
  };
  for (std::size_t i = 0; i < leaf.agent_weights.size(); ++i) term(leaf.agent_weights[i], "x" + std::to_string(i + 1));
  for (std::size_t j = 0; j < leaf.param_weights.size(); ++j) term(leaf.param_weights[j], "z" + std::to_string(j + 1));
  return out;
}

void write_tree_body(std::ostringstream& os, const DecisionTree& tree) {
  const DecisionTree canon = canonicalize(tree);
  for (const auto& node : canon.nodes()) {
    if (node.is_leaf()) {
      os << "leaf " << node.id << ": " << format_leaf(node.leaf()) << "\n";
    } else {
      const auto& c = node.comparison();
      os << "node " << node.id << ": " << to_string(c.lhs) << " " << op_symbol(c.op) << " "
         << to_string(c.rhs) << " ? " << canon.node(c.if_true).id << " : "
         << canon.node(c.if_false).id << "\n";
    }
  }
  os << "root " << canon.node(canon.root()).id << "\n";
}

std::string join_indices(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) out += ",";
    out += std::to_string(v[k]);
  }
  return out;
}

}  // namespace

Mechanism parse_mechanism(std::string_view text) { return Parser(text).parse(); }

Mechanism load_mechanism(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open mechanism file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_mechanism(buffer.str());
  } catch (const ParseError& e) {
    throw e.in_source(path.string());
  }
}

std::string serialize(const DecisionTree& tree) { return serialize(Mechanism(tree)); }

std::string serialize(const Mechanism& mech) {
  std::ostringstream os;
  os << "version 1\n";
  if (const auto* tree = std::get_if<DecisionTree>(&mech)) {
    os << "mechanism deterministic agents " << tree->agent_count() << "\n";
    write_tree_body(os, *tree);
  } else if (const auto* rand = std::get_if<RandomizedMechanism>(&mech)) {
    os << "mechanism randomized agents " << rand->agent_count() << "\n";
    const auto& branches = rand->branches();
    for (std::size_t r = 0; r < branches.size(); ++r) {
      const auto& pt = branches[r].tree;
      os << "branch " << to_string(branches[r].probability) << " -> tree t" << r + 1
         << " fixed {" << join_indices(pt.fixed_agents) << "} params " << pt.param_count << " dist ";
      if (const auto* ex = std::get_if<ExplicitTuples>(&pt.distribution)) {
        os << "explicit ";
        for (std::size_t e = 0; e < ex->entries.size(); ++e) {
          if (e) os << ", ";
          os << "(" << join_indices(ex->entries[e].first) << "):" << to_string(ex->entries[e].second);
        }
      } else {
        os << "uniform-k-subsets";
      }
      os << "\n";
    }
    for (std::size_t r = 0; r < branches.size(); ++r) {
      const auto& pt = branches[r].tree;
      if (pt.is_implicit()) {
        os << "tree t" << r + 1 << " median\n";
      } else {
        os << "tree t" << r + 1 << "\n";
        write_tree_body(os, pt.tree());
      }
    }
  } else {
    const auto& scheme = std::get<MoulinScheme>(mech);
    os << "mechanism moulin agents " << scheme.agent_count() << "\n";
    for (const auto& [coalition, value] : scheme.constants()) {
      os << "set {" << join_indices(coalition) << "}: " << to_string(value) << "\n";
    }
  }
  return os.str();
}

bool same_mechanism(const Mechanism& a, const Mechanism& b) {
  if (a.index() != b.index()) return false;
  if (const auto* ta = std::get_if<DecisionTree>(&a)) return same_structure(*ta, std::get<DecisionTree>(b));
  if (const auto* ra = std::get_if<RandomizedMechanism>(&a)) {
    const auto& rb = std::get<RandomizedMechanism>(b);
    if (ra->agent_count() != rb.agent_count() || ra->branches().size() != rb.branches().size()) return false;
    for (std::size_t r = 0; r < ra->branches().size(); ++r) {
      const auto& x = ra->branches()[r];
      const auto& y = rb.branches()[r];
      if (x.probability != y.probability || x.tree.fixed_agents != y.tree.fixed_agents ||
          x.tree.param_count != y.tree.param_count || x.tree.is_implicit() != y.tree.is_implicit() ||
          x.tree.distribution.index() != y.tree.distribution.index()) {
        return false;
      }
      if (!x.tree.is_implicit() && !same_structure(x.tree.tree(), y.tree.tree())) return false;
      if (const auto* ex = std::get_if<ExplicitTuples>(&x.tree.distribution)) {
        if (ex->entries != std::get<ExplicitTuples>(y.tree.distribution).entries) return false;
      }
    }
    return true;
  }
  const auto& ma = std::get<MoulinScheme>(a);
  const auto& mb = std::get<MoulinScheme>(b);
  return ma.agent_count() == mb.agent_count() && ma.constants() == mb.constants();
}

}  // namespace mechtree
