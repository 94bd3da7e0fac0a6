#pragma once

// Test-only oracles, kept independent of the implementation paths they check.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "plc/lnn.hpp"
#include "plc/penman.hpp"
#include "plc/predicates.hpp"
#include "plc/rng.hpp"
#include "plc/store.hpp"

namespace oracle {

// ------------------------------------------------ graph canonical form
//
// Relabels nodes by DFS preorder from the root (per-source edges in document
// order) and renders nodes, edges and metadata as text. Two graphs with equal
// canonical forms are isomorphic as rooted, edge-ordered graphs.

inline std::string canonical_graph(const plc::AmrGraph& g) {
  std::map<std::string_view, std::vector<const plc::AmrEdge*>> adj;
  for (const auto& e : g.edges) adj[e.source].push_back(&e);

  std::map<std::string_view, int> index;
  std::vector<std::string_view> stack{g.root};
  // iterative preorder; children pushed in reverse to pop in document order
  while (!stack.empty()) {
    auto id = stack.back();
    stack.pop_back();
    if (index.count(id)) continue;
    index[id] = static_cast<int>(index.size());
    auto it = adj.find(id);
    if (it == adj.end()) continue;
    for (auto rit = it->second.rbegin(); rit != it->second.rend(); ++rit)
      if ((*rit)->target_is_node && !index.count((*rit)->target))
        stack.push_back((*rit)->target);
  }

  std::string out = "root=0\n";
  std::vector<std::pair<int, std::string_view>> nodes;
  for (const auto& n : g.nodes) {
    if (!index.count(n.id)) return "UNREACHABLE\n";  // not canonicalizable
    nodes.emplace_back(index[n.id], n.label);
  }
  std::sort(nodes.begin(), nodes.end());
  for (const auto& [i, label] : nodes)
    out += "N " + std::to_string(i) + " " + std::string(label) + "\n";
  // only per-source edge order is structural: nesting reorders the global list
  std::vector<std::pair<int, std::string_view>> sources;
  for (const auto& [id, edges] : adj) sources.emplace_back(index[id], id);
  std::sort(sources.begin(), sources.end());
  for (const auto& [src_index, src] : sources) {
    for (const plc::AmrEdge* e : adj[src]) {
      out += "E " + std::to_string(src_index) + " " + e->role + " ";
      if (e->target_is_node)
        out += "@" + std::to_string(index[e->target]);
      else
        out += "'" + e->target + "'";
      out += "\n";
    }
  }
  for (const auto& [k, v] : g.metadata) out += "M " + k + "=" + v + "\n";
  return out;
}

inline bool isomorphic(const plc::AmrGraph& a, const plc::AmrGraph& b) {
  return canonical_graph(a) == canonical_graph(b);
}

// ------------------------------------------------ random graph generator

inline plc::AmrGraph random_graph(plc::Rng& rng) {
  static const char* concepts[] = {"have-01", "go-02",  "feel",  "down",
                                   "i",       "you",    "thing", "medication",
                                   "talk-01", "detail", "want-01"};
  static const char* roles[] = {"ARG0", "ARG1", "ARG2", "poss",
                                "manner", "mod", "time", "op1"};
  static const char* constants[] = {"-", "+", "now", "3", "some phrase"};

  plc::AmrGraph g;
  int n = 1 + static_cast<int>(rng.below(7));
  for (int i = 0; i < n; ++i)
    g.nodes.push_back({"n" + std::to_string(i),
                       concepts[rng.below(std::size(concepts))]});
  g.root = "n0";
  // a random tree over the nodes keeps everything reachable
  for (int i = 1; i < n; ++i) {
    int parent = static_cast<int>(rng.below(static_cast<std::uint64_t>(i)));
    g.edges.push_back({"n" + std::to_string(parent),
                       roles[rng.below(std::size(roles))],
                       "n" + std::to_string(i), true});
  }
  // extra edges: re-entrancies, cycles, constants
  int extras = static_cast<int>(rng.below(4));
  for (int i = 0; i < extras; ++i) {
    int src = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    if (rng.bernoulli(0.5)) {
      int dst = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
      g.edges.push_back({"n" + std::to_string(src),
                         roles[rng.below(std::size(roles))],
                         "n" + std::to_string(dst), true});
    } else {
      g.edges.push_back({"n" + std::to_string(src),
                         roles[rng.below(std::size(roles))],
                         constants[rng.below(std::size(constants))], false});
    }
  }
  if (rng.bernoulli(0.3)) g.metadata["id"] = "g" + std::to_string(rng.below(100));
  if (rng.bernoulli(0.3)) g.metadata["snt"] = "a sample sentence";
  return g;
}

// ------------------------------------------------ AUC pairwise oracle

// P(random positive outscores random negative), ties as 1/2. O(P*N).
inline double pairwise_auc(const std::vector<double>& scores,
                           const std::vector<int>& labels) {
  double wins = 0.0;
  long pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == 0) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j])
        wins += 1.0;
      else if (scores[i] == scores[j])
        wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

// ------------------------------------------------ similarity brute force

// Grouping by BFS over the pairwise containment relation, representative by
// definition: most tokens, ties to the smallest value.
inline std::vector<int> similarity_bruteforce(const plc::PredicateUniverse& u) {
  const int n = u.size();
  auto tokens = [](const std::string& v) {
    std::vector<std::string> t;
    std::string cur;
    for (char c : v) {
      if (c == ' ') {
        if (!cur.empty()) t.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    if (!cur.empty()) t.push_back(cur);
    return t;
  };
  auto contains = [](const std::vector<std::string>& a,
                     const std::vector<std::string>& b) {
    if (b.empty() || b.size() > a.size()) return false;
    for (std::size_t s = 0; s + b.size() <= a.size(); ++s) {
      bool ok = true;
      for (std::size_t i = 0; i < b.size(); ++i)
        if (a[s + i] != b[i]) {
          ok = false;
          break;
        }
      if (ok) return true;
    }
    return false;
  };

  std::vector<std::vector<std::string>> toks;
  for (int i = 0; i < n; ++i)
    toks.push_back(tokens(u.predicates[static_cast<std::size_t>(i)].value));

  std::vector<std::vector<int>> related(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      if (u.predicates[static_cast<std::size_t>(i)].key !=
          u.predicates[static_cast<std::size_t>(j)].key)
        continue;
      if (contains(toks[static_cast<std::size_t>(i)], toks[static_cast<std::size_t>(j)]) ||
          contains(toks[static_cast<std::size_t>(j)], toks[static_cast<std::size_t>(i)]))
        related[static_cast<std::size_t>(i)].push_back(j);
    }

  std::vector<int> kept;
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (int start = 0; start < n; ++start) {
    if (seen[static_cast<std::size_t>(start)]) continue;
    std::vector<int> group, frontier{start};
    seen[static_cast<std::size_t>(start)] = true;
    while (!frontier.empty()) {
      int cur = frontier.back();
      frontier.pop_back();
      group.push_back(cur);
      for (int next : related[static_cast<std::size_t>(cur)])
        if (!seen[static_cast<std::size_t>(next)]) {
          seen[static_cast<std::size_t>(next)] = true;
          frontier.push_back(next);
        }
    }
    int rep = group.front();
    for (int id : group) {
      auto& a = toks[static_cast<std::size_t>(id)];
      auto& r = toks[static_cast<std::size_t>(rep)];
      if (a.size() > r.size() ||
          (a.size() == r.size() &&
           u.predicates[static_cast<std::size_t>(id)].value <
               u.predicates[static_cast<std::size_t>(rep)].value))
        rep = id;
    }
    kept.push_back(rep);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

// ------------------------------------------------ random universes

// A universe with controllable containment structure and random provenance.
inline plc::PredicateUniverse random_universe(plc::Rng& rng, int max_preds,
                                              const std::vector<std::string>& classes) {
  static const char* keys[] = {"have", "feel", "talk", "HAS_POSSESSION"};
  static const char* words[] = {"my", "sister", "birthday", "own", "dark",
                                "thought", "sleep", "night", "bad", "dream"};
  plc::PredicateUniverse u;
  int n = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_preds)));
  int attempts = 0;
  while (u.size() < n && attempts < 4 * n) {
    ++attempts;
    int len = 1 + static_cast<int>(rng.below(4));
    std::vector<std::string> toks;
    for (int i = 0; i < len; ++i)
      toks.emplace_back(words[rng.below(std::size(words))]);
    plc::Predicate p{keys[rng.below(std::size(keys))], plc::join(toks, " ")};
    if (u.id_of(p.name()) >= 0) continue;
    int id = u.add(p);
    int nprov = 1 + static_cast<int>(rng.below(4));
    for (int i = 0; i < nprov; ++i) {
      const auto& cls = classes[rng.below(classes.size())];
      u.provenance[static_cast<std::size_t>(id)][cls].insert(
          cls + "_s" + std::to_string(rng.below(8)));
    }
  }
  return u;
}

// ------------------------------------------------ finite differences

// Central difference of the training loss in one coordinate.
template <typename LossFn>
inline double central_diff(LossFn&& loss, std::vector<double> params,
                           std::size_t coord, double step) {
  params[coord] += step;
  double up = loss(params);
  params[coord] -= 2 * step;
  double down = loss(params);
  return (up - down) / (2 * step);
}

}  // namespace oracle
