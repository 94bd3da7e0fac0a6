#pragma once

// Turning graphs into (key, value) predicates. Two sources:
//   * edges whose role is listed in the rules (e.g. :poss -> HAS_POSSESSION),
//     keyed by the mapped name, valued by the target subtree phrase;
//   * verb-frame nodes (concepts with a sense suffix such as "have-01"),
//     keyed by the stripped frame name, one predicate per core argument
//     ARG0..ARG4, valued by the argument subtree phrase.
// Phrases are depth-first, left-to-right concept/constant concatenation over
// the subtree, lowercased, whitespace-collapsed, capped at max_value_tokens.

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "plc/errors.hpp"
#include "plc/penman.hpp"

namespace plc {

struct Predicate {
  std::string key;
  std::string value;

  std::string name() const { return key + "_" + value; }
  friend auto operator<=>(const Predicate&, const Predicate&) = default;
};

struct ExtractionRules {
  std::map<std::string, std::string> relation_keys = {
      {"poss", "HAS_POSSESSION"},
      {"manner", "HAS_MANNER"},
  };
  bool strip_verb_frames = true;
  int max_value_tokens = 8;

  void validate() const {
    if (relation_keys.empty())
      throw DataError("extraction rules: relation-keys must be non-empty");
    if (max_value_tokens < 1)
      throw DataError("extraction rules: max-value-tokens must be >= 1");
  }
};

// "have-01" and "have-rel-role-91" carry sense suffixes; "have" does not.
// A suffix is a '-' followed by two or more digits at the end of the label.
inline bool is_verb_frame(std::string_view label) {
  auto dash = label.rfind('-');
  if (dash == std::string_view::npos || dash == 0) return false;
  std::string_view tail = label.substr(dash + 1);
  if (tail.size() < 2) return false;
  for (char c : tail)
    if (c < '0' || c > '9') return false;
  return true;
}

inline std::string_view strip_frame_suffix(std::string_view label) {
  if (!is_verb_frame(label)) return label;
  return label.substr(0, label.rfind('-'));
}

// Lowercase ASCII, collapse whitespace runs, trim.
inline std::string normalize_phrase(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      if (!out.empty()) pending_space = true;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    out.push_back(c);
  }
  return out;
}

namespace extract_detail {

using Adjacency = std::map<std::string_view, std::vector<const AmrEdge*>>;

inline void push_tokens(std::string_view text, int cap,
                        std::vector<std::string>& toks) {
  std::string norm = normalize_phrase(text);
  std::size_t start = 0;
  while (start < norm.size() && static_cast<int>(toks.size()) < cap) {
    std::size_t sp = norm.find(' ', start);
    if (sp == std::string::npos) sp = norm.size();
    if (sp > start) toks.emplace_back(norm.substr(start, sp - start));
    start = sp + 1;
  }
}

inline void phrase_tokens(const AmrGraph& g, const Adjacency& adj,
                          std::string_view node, const ExtractionRules& rules,
                          std::set<std::string_view>& visited,
                          std::vector<std::string>& toks) {
  if (static_cast<int>(toks.size()) >= rules.max_value_tokens) return;
  if (!visited.insert(node).second) return;
  const std::string* label = g.label_of(node);
  std::string_view tok =
      rules.strip_verb_frames ? strip_frame_suffix(*label) : *label;
  push_tokens(tok, rules.max_value_tokens, toks);
  auto it = adj.find(node);
  if (it == adj.end()) return;
  for (const AmrEdge* e : it->second) {
    if (static_cast<int>(toks.size()) >= rules.max_value_tokens) return;
    if (e->target_is_node)
      phrase_tokens(g, adj, e->target, rules, visited, toks);
    else
      push_tokens(e->target, rules.max_value_tokens, toks);
  }
}

inline std::string target_phrase(const AmrGraph& g, const Adjacency& adj,
                                 const AmrEdge& e, const ExtractionRules& rules) {
  std::vector<std::string> toks;
  if (e.target_is_node) {
    std::set<std::string_view> visited;
    phrase_tokens(g, adj, e.target, rules, visited, toks);
  } else {
    push_tokens(e.target, rules.max_value_tokens, toks);
  }
  return join(toks, " ");
}

inline bool is_core_arg(std::string_view role) {
  return role.size() == 4 && role.substr(0, 3) == "ARG" && role[3] >= '0' &&
         role[3] <= '4';
}

}  // namespace extract_detail

// Deterministic, order-independent: returns the predicate set sorted by
// (key, value). Empty result is fine for graphs with no matching structure.
inline std::vector<Predicate> extract_predicates(const AmrGraph& g,
                                                 const ExtractionRules& rules) {
  using namespace extract_detail;
  rules.validate();
  g.check();

  Adjacency adj;
  for (const auto& e : g.edges) adj[e.source].push_back(&e);

  std::set<Predicate> found;

  for (const auto& e : g.edges) {
    auto it = rules.relation_keys.find(e.role);
    if (it == rules.relation_keys.end()) continue;
    std::string value = target_phrase(g, adj, e, rules);
    if (!value.empty()) found.insert({it->second, value});
  }

  if (rules.strip_verb_frames) {
    for (const auto& n : g.nodes) {
      if (!is_verb_frame(n.label)) continue;
      std::string key(strip_frame_suffix(n.label));
      if (key.empty()) continue;
      auto it = adj.find(std::string_view(n.id));
      if (it == adj.end()) continue;
      for (const AmrEdge* e : it->second) {
        if (!is_core_arg(e->role)) continue;
        std::string value = target_phrase(g, adj, *e, rules);
        if (!value.empty()) found.insert({key, value});
      }
    }
  }

  return {found.begin(), found.end()};
}

}  // namespace plc
