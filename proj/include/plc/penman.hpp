#pragma once

// PENMAN notation for rooted, labeled, directed graphs.
//
//   graph    := "(" variable "/" concept relation* ")"
//   relation := ":" role ( graph | reference | constant )
//
// A block may be preceded by metadata lines of the form "# ::key value";
// other "#" lines are comments. An unquoted relation target counts as a node
// reference when it names a variable bound earlier in the block or matches
// the variable shape [a-z][0-9]*; anything else is a constant. A
// variable-shaped atom that is never bound is a dangling reference and is
// rejected. All errors carry the 1-based line and column where they were
// detected.

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "plc/errors.hpp"
#include "plc/io.hpp"

namespace plc {

struct AmrNode {
  std::string id;
  std::string label;  // concept
};

struct AmrEdge {
  std::string source;  // node id
  std::string role;    // relation label without the leading ':'
  std::string target;  // node id when target_is_node, else constant text
  bool target_is_node = true;
};

struct AmrGraph {
  std::string root;
  std::vector<AmrNode> nodes;  // in binding order
  std::vector<AmrEdge> edges;  // in document order
  std::map<std::string, std::string> metadata;

  bool has_node(std::string_view id) const {
    for (const auto& n : nodes)
      if (n.id == id) return true;
    return false;
  }

  const std::string* label_of(std::string_view id) const {
    for (const auto& n : nodes)
      if (n.id == id) return &n.label;
    return nullptr;
  }

  // Structural invariants: at least one node, unique ids, root bound, every
  // node-typed edge endpoint bound.
  void check() const {
    if (nodes.empty()) throw DataError("graph has no nodes");
    std::set<std::string_view> ids;
    for (const auto& n : nodes)
      if (!ids.insert(n.id).second)
        throw DataError("duplicate node id '" + n.id + "'");
    if (!ids.count(root)) throw DataError("root '" + root + "' is not a node");
    for (const auto& e : edges) {
      if (!ids.count(e.source))
        throw DataError("edge source '" + e.source + "' is not a node");
      if (e.target_is_node && !ids.count(e.target))
        throw DataError("edge target '" + e.target + "' is not a node");
    }
  }
};

struct ParseError : DataError {
  int line = 0;
  int column = 0;
  ParseError(const std::string& msg, int line_, int column_)
      : DataError(msg + " (line " + std::to_string(line_) + ", column " +
                  std::to_string(column_) + ")"),
        line(line_),
        column(column_) {}
};

namespace penman_detail {

inline bool is_atom_char(char c) {
  return !(c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '(' ||
           c == ')' || c == '/' || c == '"');
}

inline bool variable_shaped(std::string_view s) {
  if (s.empty() || s[0] < 'a' || s[0] > 'z') return false;
  return std::all_of(s.begin() + 1, s.end(),
                     [](char c) { return c >= '0' && c <= '9'; });
}

struct Cursor {
  std::string_view text;
  std::size_t pos = 0;
  int line = 1;
  int col = 1;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, line, col);
  }

  bool done() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }

  void advance() {
    if (text[pos] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++pos;
  }

  void skip_space() {
    while (!done()) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n')
        advance();
      else
        break;
    }
  }

  std::string rest_of_line() {
    std::string out;
    while (!done() && peek() != '\n') {
      out.push_back(peek());
      advance();
    }
    if (!out.empty() && out.back() == '\r') out.pop_back();
    return out;
  }
};

inline std::string read_atom(Cursor& cur, const char* what) {
  if (cur.done() || !is_atom_char(cur.peek()))
    cur.fail(std::string("expected ") + what);
  std::string out;
  while (!cur.done() && is_atom_char(cur.peek())) {
    out.push_back(cur.peek());
    cur.advance();
  }
  return out;
}

inline std::string read_string(Cursor& cur) {
  int l = cur.line, c = cur.col;
  cur.advance();  // opening quote
  std::string out;
  while (true) {
    if (cur.done()) throw ParseError("unterminated string literal", l, c);
    char ch = cur.peek();
    if (ch == '"') {
      cur.advance();
      return out;
    }
    if (ch == '\\') {
      cur.advance();
      if (cur.done()) throw ParseError("unterminated string literal", l, c);
      char e = cur.peek();
      out.push_back(e == 'n' ? '\n' : e);
      cur.advance();
    } else {
      out.push_back(ch);
      cur.advance();
    }
  }
}

struct Parser {
  Cursor cur;
  AmrGraph g;
  std::map<std::string, int, std::less<>> bound;  // variable -> node index

  static constexpr int kMaxDepth = 4000;

  // cursor sits on '('; returns the bound variable.
  std::string parse_node(int depth) {
    if (depth > kMaxDepth) cur.fail("nesting too deep");
    cur.advance();  // '('
    cur.skip_space();
    int vline = cur.line, vcol = cur.col;
    std::string var = read_atom(cur, "variable");
    if (bound.count(var))
      throw ParseError("duplicate variable binding '" + var + "'", vline, vcol);
    cur.skip_space();
    if (cur.done() || cur.peek() != '/') cur.fail("expected '/' after variable");
    cur.advance();
    cur.skip_space();
    std::string label;
    if (!cur.done() && cur.peek() == '"')
      label = read_string(cur);
    else
      label = read_atom(cur, "concept");
    bound[var] = static_cast<int>(g.nodes.size());
    g.nodes.push_back({var, label});

    while (true) {
      cur.skip_space();
      if (cur.done()) cur.fail("unbalanced parentheses: unexpected end of input");
      char c = cur.peek();
      if (c == ')') {
        cur.advance();
        return var;
      }
      if (c != ':') cur.fail("expected ':role' or ')'");
      cur.advance();
      std::string role = read_atom(cur, "role name");
      cur.skip_space();
      if (cur.done()) cur.fail("unbalanced parentheses: unexpected end of input");
      char t = cur.peek();
      if (t == '(') {
        std::string child = parse_node(depth + 1);
        g.edges.push_back({var, role, child, true});
      } else if (t == '"') {
        std::string s = read_string(cur);
        g.edges.push_back({var, role, s, false});
      } else if (t == ')') {
        cur.fail("expected relation target");
      } else {
        int aline = cur.line, acol = cur.col;
        std::string atom = read_atom(cur, "relation target");
        if (bound.count(atom)) {
          g.edges.push_back({var, role, atom, true});
        } else if (variable_shaped(atom)) {
          throw ParseError("dangling reference '" + atom + "'", aline, acol);
        } else {
          g.edges.push_back({var, role, atom, false});
        }
      }
    }
  }
};

// Constants and concepts that would not survive re-lexing must be quoted.
inline bool constant_needs_quoting(std::string_view s, const AmrGraph& g) {
  if (s.empty() || s[0] == ':') return true;
  for (char c : s)
    if (!is_atom_char(c)) return true;
  if (variable_shaped(s)) return true;
  return g.has_node(s);
}

inline bool concept_needs_quoting(std::string_view s) {
  if (s.empty() || s[0] == ':') return true;
  for (char c : s)
    if (!is_atom_char(c)) return true;
  return false;
}

inline std::string quote_text(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace penman_detail

inline AmrGraph parse_penman(std::string_view text, int first_line = 1) {
  penman_detail::Parser p;
  p.cur = {text, 0, first_line, 1};
  auto& cur = p.cur;

  // metadata / comment lines before the expression
  while (true) {
    cur.skip_space();
    if (cur.done()) cur.fail("empty input: no PENMAN expression found");
    if (cur.peek() != '#') break;
    cur.advance();
    std::string rest = cur.rest_of_line();
    std::string_view r = rest;
    if (!r.empty() && r.front() == ' ') r.remove_prefix(1);
    if (r.substr(0, 2) == "::") {
      r.remove_prefix(2);
      std::size_t sp = r.find(' ');
      std::string key(r.substr(0, sp));
      std::string value(sp == std::string_view::npos ? "" : r.substr(sp + 1));
      if (!key.empty()) p.g.metadata[key] = value;
    }
  }

  if (cur.peek() != '(') cur.fail("expected '('");
  p.g.root = p.parse_node(0);

  // only whitespace and comment lines may follow
  while (true) {
    cur.skip_space();
    if (cur.done()) break;
    if (cur.peek() == '#') {
      cur.rest_of_line();
      continue;
    }
    if (cur.peek() == ')') cur.fail("unbalanced parentheses: unexpected ')'");
    cur.fail("unexpected trailing content after graph");
  }
  return p.g;
}

inline std::string serialize_penman(const AmrGraph& g) {
  using namespace penman_detail;
  g.check();

  std::map<std::string_view, std::vector<const AmrEdge*>> out_edges;
  for (const auto& e : g.edges) out_edges[e.source].push_back(&e);

  std::string s;
  for (const auto& [k, v] : g.metadata) s += "# ::" + k + " " + v + "\n";

  std::set<std::string_view> visited;
  auto emit = [&](auto&& self, std::string_view id) -> void {
    visited.insert(id);
    const std::string* label = g.label_of(id);
    s += "(";
    s += id;
    s += " / ";
    s += concept_needs_quoting(*label) ? quote_text(*label) : *label;
    auto it = out_edges.find(id);
    if (it != out_edges.end()) {
      for (const AmrEdge* e : it->second) {
        s += " :" + e->role + " ";
        if (e->target_is_node) {
          if (visited.count(e->target))
            s += e->target;  // re-entrancy: reference on later mentions
          else
            self(self, e->target);
        } else {
          s += constant_needs_quoting(e->target, g) ? quote_text(e->target)
                                                    : e->target;
        }
      }
    }
    s += ")";
  };
  emit(emit, g.root);

  if (visited.size() != g.nodes.size()) {
    for (const auto& n : g.nodes)
      if (!visited.count(n.id))
        throw DataError("node '" + n.id +
                        "' unreachable from root; refusing to serialize");
  }
  return s;
}

// Sembank layout: blocks separated by blank lines, each block optional
// metadata lines followed by one PENMAN expression.
inline std::vector<AmrGraph> parse_sembank(std::string_view text) {
  std::vector<AmrGraph> out;
  auto lines = split_lines(text);
  std::size_t i = 0;
  while (i < lines.size()) {
    while (i < lines.size() && trim(lines[i]).empty()) ++i;
    if (i >= lines.size()) break;
    std::size_t start = i;
    std::string block;
    while (i < lines.size() && !trim(lines[i]).empty()) {
      block += lines[i];
      block += '\n';
      ++i;
    }
    out.push_back(parse_penman(block, static_cast<int>(start) + 1));
  }
  return out;
}

inline std::vector<AmrGraph> load_sembank(const std::filesystem::path& p) {
  return parse_sembank(read_file(p));
}

}  // namespace plc
