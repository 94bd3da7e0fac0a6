#pragma once

// Predicate pruning stages over a universe's provenance:
//   similarity — within a key, collapse values standing in contiguous-token
//                containment (transitive closure); the member with the most
//                tokens survives, ties to the lexicographically smallest.
//   frequency  — keep by count of distinct sessions where the predicate was
//                TRUE (greater-than / equals / open range against F).
//   exclusive  — keep only predicates whose provenance touches exactly one
//                class.
//   balance    — equalize per-class predicate counts: overfull classes drop
//                their lowest-frequency members, underfull ones refill from
//                the highest-frequency predicates the frequency stage removed.
// Stages report kept ids plus a removal mapping; all are idempotent.

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "plc/errors.hpp"
#include "plc/store.hpp"

namespace plc {

enum class FrequencyMode { GreaterThan, Equals, Range };

inline std::string frequency_mode_name(FrequencyMode m) {
  switch (m) {
    case FrequencyMode::GreaterThan: return "greater-than";
    case FrequencyMode::Equals: return "equals";
    case FrequencyMode::Range: return "range";
  }
  throw DataError("bad frequency mode");
}

inline FrequencyMode frequency_mode_from(std::string_view s) {
  if (s == "greater-than") return FrequencyMode::GreaterThan;
  if (s == "equals") return FrequencyMode::Equals;
  if (s == "range") return FrequencyMode::Range;
  throw DataError("unknown frequency mode '" + std::string(s) + "'");
}

struct PruneConfig {
  std::vector<std::string> chain = {"similarity", "frequency", "exclusive"};
  FrequencyMode frequency_mode = FrequencyMode::GreaterThan;
  int frequency_f = 1;
  int range_lo = 0;
  int range_hi = 0;
  bool balanced = false;
  int balanced_target = 0;

  void validate() const {
    for (const auto& s : chain)
      if (s != "similarity" && s != "frequency" && s != "exclusive")
        throw DataError("unknown prune stage '" + s + "'");
    if (frequency_f < 0) throw DataError("frequency threshold must be >= 0");
    if (frequency_mode == FrequencyMode::Range && range_lo >= range_hi)
      throw DataError("frequency range requires lo < hi");
    if (balanced && balanced_target < 1)
      throw DataError("balanced target must be >= 1");
  }
};

enum class RemovalReason { Similarity, Frequency, Exclusive, Balance };

inline std::string removal_reason_name(RemovalReason r) {
  switch (r) {
    case RemovalReason::Similarity: return "similarity";
    case RemovalReason::Frequency: return "frequency";
    case RemovalReason::Exclusive: return "exclusive";
    case RemovalReason::Balance: return "balance";
  }
  throw DataError("bad removal reason");
}

struct Removal {
  RemovalReason reason;
  int representative = -1;  // set for similarity merges
};

struct StageStats {
  std::string stage;
  int input = 0;
  int output = 0;
  std::map<std::string, int> per_class;  // kept predicates touching the class
  std::vector<std::string> notes;
};

struct PruneReport {
  std::vector<StageStats> stages;
  std::map<int, Removal> mapping;  // removed id -> reason / representative
};

namespace prune_detail {

inline std::vector<std::string> value_tokens(std::string_view value) {
  std::vector<std::string> toks;
  for (auto t : split_view(value, ' '))
    if (!t.empty()) toks.emplace_back(t);
  return toks;
}

// b appears as a contiguous run inside a.
inline bool contains_tokens(const std::vector<std::string>& a,
                            const std::vector<std::string>& b) {
  if (b.empty() || b.size() > a.size()) return false;
  for (std::size_t start = 0; start + b.size() <= a.size(); ++start) {
    bool match = true;
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (a[start + i] != b[i]) {
        match = false;
        break;
      }
    }
    if (match) return true;
  }
  return false;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
};

inline std::map<std::string, int> class_counts(const PredicateUniverse& u,
                                               const std::vector<int>& kept) {
  std::map<std::string, int> counts;
  for (int id : kept)
    for (const auto& [cls, ss] : u.provenance[static_cast<std::size_t>(id)])
      if (!ss.empty()) ++counts[cls];
  return counts;
}

inline StageStats make_stats(const PredicateUniverse& u, std::string stage,
                             int input, const std::vector<int>& kept) {
  StageStats st;
  st.stage = std::move(stage);
  st.input = input;
  st.output = static_cast<int>(kept.size());
  st.per_class = class_counts(u, kept);
  return st;
}

// Majority-provenance class; ties to the lexicographically smallest label.
inline std::string attributed_class(const PredicateUniverse& u, int id) {
  std::string best;
  std::size_t best_count = 0;
  for (const auto& [cls, ss] : u.provenance[static_cast<std::size_t>(id)]) {
    if (ss.empty()) continue;
    if (ss.size() > best_count || (ss.size() == best_count && (best.empty() || cls < best))) {
      best = cls;
      best_count = ss.size();
    }
  }
  return best;  // "" when provenance is empty
}

}  // namespace prune_detail

inline std::pair<std::vector<int>, PruneReport> similarity_prune(
    const PredicateUniverse& u) {
  using namespace prune_detail;
  const int n = u.size();

  std::map<std::string_view, std::vector<int>> by_key;
  for (int id = 0; id < n; ++id)
    by_key[u.predicates[static_cast<std::size_t>(id)].key].push_back(id);

  std::vector<std::vector<std::string>> toks(static_cast<std::size_t>(n));
  for (int id = 0; id < n; ++id)
    toks[static_cast<std::size_t>(id)] =
        value_tokens(u.predicates[static_cast<std::size_t>(id)].value);

  UnionFind uf(n);
  for (const auto& [key, ids] : by_key) {
    for (std::size_t i = 0; i < ids.size(); ++i)
      for (std::size_t j = i + 1; j < ids.size(); ++j) {
        const auto& a = toks[static_cast<std::size_t>(ids[i])];
        const auto& b = toks[static_cast<std::size_t>(ids[j])];
        if (contains_tokens(a, b) || contains_tokens(b, a))
          uf.unite(ids[i], ids[j]);
      }
  }

  std::map<int, std::vector<int>> groups;
  for (int id = 0; id < n; ++id) groups[uf.find(id)].push_back(id);

  PruneReport report;
  std::vector<int> kept;
  for (const auto& [root, members] : groups) {
    int rep = members.front();
    for (int id : members) {
      const auto& a = toks[static_cast<std::size_t>(id)];
      const auto& r = toks[static_cast<std::size_t>(rep)];
      if (a.size() > r.size() ||
          (a.size() == r.size() &&
           u.predicates[static_cast<std::size_t>(id)].value <
               u.predicates[static_cast<std::size_t>(rep)].value))
        rep = id;
    }
    kept.push_back(rep);
    for (int id : members)
      if (id != rep) report.mapping[id] = {RemovalReason::Similarity, rep};
  }
  std::sort(kept.begin(), kept.end());
  report.stages.push_back(make_stats(u, "similarity", n, kept));
  return {kept, report};
}

inline std::pair<std::vector<int>, PruneReport> frequency_prune(
    const PredicateUniverse& u, const PruneConfig& cfg) {
  using namespace prune_detail;
  cfg.validate();
  PruneReport report;
  std::vector<int> kept;
  for (int id = 0; id < u.size(); ++id) {
    int f = u.frequency(id);
    bool keep = false;
    switch (cfg.frequency_mode) {
      case FrequencyMode::GreaterThan: keep = f > cfg.frequency_f; break;
      case FrequencyMode::Equals: keep = f == cfg.frequency_f; break;
      case FrequencyMode::Range: keep = f > cfg.range_lo && f < cfg.range_hi; break;
    }
    if (keep)
      kept.push_back(id);
    else
      report.mapping[id] = {RemovalReason::Frequency, -1};
  }
  report.stages.push_back(make_stats(u, "frequency", u.size(), kept));
  return {kept, report};
}

inline std::pair<std::vector<int>, PruneReport> exclusive_prune(
    const PredicateUniverse& u) {
  using namespace prune_detail;
  PruneReport report;
  std::vector<int> kept;
  for (int id = 0; id < u.size(); ++id) {
    int classes = 0;
    for (const auto& [cls, ss] : u.provenance[static_cast<std::size_t>(id)])
      if (!ss.empty()) ++classes;
    if (classes == 1)
      kept.push_back(id);
    else
      report.mapping[id] = {RemovalReason::Exclusive, -1};
  }
  report.stages.push_back(make_stats(u, "exclusive", u.size(), kept));
  return {kept, report};
}

// `refill_pool` holds ids previously removed by the frequency stage; classes
// below target draw from it in frequency order. A class that cannot reach the
// target even with the whole pool is capped and noted.
inline std::pair<std::vector<int>, PruneReport> balance_classes(
    const PredicateUniverse& u, const std::vector<int>& kept,
    const std::vector<int>& refill_pool, const PruneConfig& cfg) {
  using namespace prune_detail;
  if (cfg.balanced_target < 1)
    throw DataError("balanced target must be >= 1");

  auto by_rank = [&](int a, int b) {
    int fa = u.frequency(a), fb = u.frequency(b);
    if (fa != fb) return fa > fb;
    return u.predicates[static_cast<std::size_t>(a)].name() <
           u.predicates[static_cast<std::size_t>(b)].name();
  };

  std::map<std::string, std::vector<int>> kept_by_class;
  std::vector<int> unattributed;
  for (int id : kept) {
    std::string cls = attributed_class(u, id);
    if (cls.empty())
      unattributed.push_back(id);
    else
      kept_by_class[cls].push_back(id);
  }
  std::map<std::string, std::vector<int>> pool_by_class;
  std::set<int> kept_set(kept.begin(), kept.end());
  for (int id : refill_pool) {
    if (kept_set.count(id)) continue;
    std::string cls = attributed_class(u, id);
    if (!cls.empty()) pool_by_class[cls].push_back(id);
  }

  PruneReport report;
  StageStats st;
  st.stage = "balance";
  st.input = static_cast<int>(kept.size());

  std::vector<int> result = unattributed;
  std::set<std::string> classes;
  for (const auto& [cls, ids] : kept_by_class) classes.insert(cls);
  for (const auto& [cls, ids] : pool_by_class) classes.insert(cls);

  for (const auto& cls : classes) {
    auto members = kept_by_class[cls];
    std::sort(members.begin(), members.end(), by_rank);
    int target = cfg.balanced_target;
    if (static_cast<int>(members.size()) > target) {
      for (std::size_t i = static_cast<std::size_t>(target); i < members.size(); ++i)
        report.mapping[members[i]] = {RemovalReason::Balance, -1};
      members.resize(static_cast<std::size_t>(target));
    } else if (static_cast<int>(members.size()) < target) {
      auto candidates = pool_by_class[cls];
      std::sort(candidates.begin(), candidates.end(), by_rank);
      for (int id : candidates) {
        if (static_cast<int>(members.size()) >= target) break;
        members.push_back(id);
      }
      if (static_cast<int>(members.size()) < target)
        st.notes.push_back("class " + cls + " capped at " +
                           std::to_string(members.size()) + " of " +
                           std::to_string(target));
    }
    result.insert(result.end(), members.begin(), members.end());
  }

  std::sort(result.begin(), result.end());
  st.output = static_cast<int>(result.size());
  st.per_class = class_counts(u, result);
  report.stages.push_back(std::move(st));
  return {result, report};
}

// Universe containing only `kept` (re-densified); provenance and examples of
// similarity-merged members folded into their representatives.
inline PredicateUniverse apply_prune_universe(
    const PredicateUniverse& u, const std::vector<int>& kept,
    const std::map<int, Removal>& mapping) {
  std::vector<int> sorted = kept;
  std::sort(sorted.begin(), sorted.end());

  PredicateUniverse out;
  std::map<int, int> remap;
  for (int id : sorted) {
    int nid = out.add(u.predicates[static_cast<std::size_t>(id)]);
    out.provenance[static_cast<std::size_t>(nid)] =
        u.provenance[static_cast<std::size_t>(id)];
    out.examples[static_cast<std::size_t>(nid)] =
        u.examples[static_cast<std::size_t>(id)];
    remap[id] = nid;
  }

  auto resolve = [&](int id) {
    // follow similarity links until a kept id or a dead end
    for (int hops = 0; hops <= static_cast<int>(mapping.size()); ++hops) {
      if (remap.count(id)) return id;
      auto it = mapping.find(id);
      if (it == mapping.end() || it->second.reason != RemovalReason::Similarity)
        return -1;
      id = it->second.representative;
    }
    return -1;
  };

  for (const auto& [removed, rem] : mapping) {
    if (rem.reason != RemovalReason::Similarity) continue;
    int rep = resolve(rem.representative);
    if (rep < 0) continue;
    int nid = remap[rep];
    for (const auto& [cls, ss] : u.provenance[static_cast<std::size_t>(removed)])
      out.provenance[static_cast<std::size_t>(nid)][cls].insert(ss.begin(),
                                                                ss.end());
    if (out.examples[static_cast<std::size_t>(nid)].empty())
      out.examples[static_cast<std::size_t>(nid)] =
          u.examples[static_cast<std::size_t>(removed)];
  }
  return out;
}

struct ChainResult {
  std::vector<int> kept;  // original universe ids, ascending
  PruneReport report;
};

// Stages applied in order over progressively restricted universes; the
// balanced flag runs last, refilling from the frequency stage's exclusions.
inline ChainResult run_chain(const PredicateUniverse& universe,
                             const GroundingTable& table,
                             const PruneConfig& cfg) {
  cfg.validate();
  if (cfg.chain.empty()) throw DataError("prune chain must be non-empty");
  if (!table.samples.empty() &&
      table.universe.fingerprint() != universe.fingerprint())
    throw DataError("prune chain: table universe does not match");

  ChainResult res;
  res.kept.resize(static_cast<std::size_t>(universe.size()));
  std::iota(res.kept.begin(), res.kept.end(), 0);

  std::vector<int> freq_excluded;

  for (const auto& stage : cfg.chain) {
    PredicateUniverse cur =
        apply_prune_universe(universe, res.kept, res.report.mapping);
    std::pair<std::vector<int>, PruneReport> r;
    if (stage == "similarity")
      r = similarity_prune(cur);
    else if (stage == "frequency")
      r = frequency_prune(cur, cfg);
    else
      r = exclusive_prune(cur);

    // translate current-universe ids back to original ids
    std::vector<int> next;
    next.reserve(r.first.size());
    for (int id : r.first)
      next.push_back(res.kept[static_cast<std::size_t>(id)]);
    for (const auto& [removed, rem] : r.second.mapping) {
      int orig = res.kept[static_cast<std::size_t>(removed)];
      Removal translated = rem;
      if (rem.representative >= 0)
        translated.representative =
            res.kept[static_cast<std::size_t>(rem.representative)];
      res.report.mapping[orig] = translated;
      if (rem.reason == RemovalReason::Frequency) freq_excluded.push_back(orig);
    }
    res.report.stages.push_back(r.second.stages.front());
    res.kept = std::move(next);
  }

  if (cfg.balanced) {
    std::vector<int> scope = res.kept;
    scope.insert(scope.end(), freq_excluded.begin(), freq_excluded.end());
    std::sort(scope.begin(), scope.end());
    PredicateUniverse cur =
        apply_prune_universe(universe, scope, res.report.mapping);
    std::map<int, int> to_cur;
    for (std::size_t i = 0; i < scope.size(); ++i)
      to_cur[scope[i]] = static_cast<int>(i);
    std::vector<int> kept_cur, pool_cur;
    for (int id : res.kept) kept_cur.push_back(to_cur[id]);
    for (int id : freq_excluded) pool_cur.push_back(to_cur[id]);

    auto [bal_kept, bal_report] = balance_classes(cur, kept_cur, pool_cur, cfg);
    std::vector<int> next;
    std::set<int> bal_set(bal_kept.begin(), bal_kept.end());
    for (int id : bal_kept) next.push_back(scope[static_cast<std::size_t>(id)]);
    for (const auto& [removed, rem] : bal_report.mapping)
      res.report.mapping[scope[static_cast<std::size_t>(removed)]] = rem;
    // refilled pool members are back in: clear their frequency removal
    for (int id : pool_cur)
      if (bal_set.count(id))
        res.report.mapping.erase(scope[static_cast<std::size_t>(id)]);
    res.report.stages.push_back(bal_report.stages.front());
    std::sort(next.begin(), next.end());
    res.kept = std::move(next);
  }

  std::sort(res.kept.begin(), res.kept.end());
  return res;
}

// Chain result applied to a table: groundings of similarity-merged members
// transfer to their representative, then the universe is restricted.
inline GroundingTable apply_prune(const GroundingTable& table,
                                  const ChainResult& chain) {
  if (chain.kept.empty())
    throw DataError("pruning removed every predicate; nothing to keep");
  PredicateUniverse pruned = apply_prune_universe(
      table.universe, chain.kept, chain.report.mapping);

  std::map<int, int> remap;  // original id -> pruned id
  {
    std::vector<int> sorted = chain.kept;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i)
      remap[sorted[i]] = static_cast<int>(i);
  }
  auto resolve = [&](int id) {
    for (int hops = 0; hops <= static_cast<int>(chain.report.mapping.size());
         ++hops) {
      if (remap.count(id)) return remap[id];
      auto it = chain.report.mapping.find(id);
      if (it == chain.report.mapping.end() ||
          it->second.reason != RemovalReason::Similarity)
        return -1;
      id = it->second.representative;
    }
    return -1;
  };

  GroundingTable out;
  out.universe = std::move(pruned);
  out.labels = table.labels;
  for (const auto& s : table.samples) {
    Sample ns{s.sample_id, s.session_id, s.class_label, {}};
    for (int id : s.true_ids) {
      int nid = resolve(id);
      if (nid >= 0) ns.true_ids.push_back(nid);
    }
    std::sort(ns.true_ids.begin(), ns.true_ids.end());
    ns.true_ids.erase(std::unique(ns.true_ids.begin(), ns.true_ids.end()),
                      ns.true_ids.end());
    out.samples.push_back(std::move(ns));
  }
  return out;
}

// -------------------------------------------------------------- report I/O

inline void save_prune_report(const PruneReport& r,
                              const std::filesystem::path& report_path,
                              const std::filesystem::path& mapping_path) {
  ArtifactHeader h{"prune-report", 1, {}};
  std::string out = h.line() + "\n";
  for (const auto& st : r.stages) {
    out += st.stage + "\t" + std::to_string(st.input) + "\t" +
           std::to_string(st.output);
    std::vector<std::string> parts;
    for (const auto& [cls, n] : st.per_class)
      parts.push_back(cls + "=" + std::to_string(n));
    out += "\t" + join(parts, ",");
    for (const auto& note : st.notes) out += "\t" + note;
    out += "\n";
  }
  write_file(report_path, out);

  ArtifactHeader hm{"prune-map", 1, {}};
  std::string mout = hm.line() + "\n";
  for (const auto& [id, rem] : r.mapping) {
    mout += std::to_string(id);
    mout += '\t';
    if (rem.reason == RemovalReason::Similarity)
      mout += std::to_string(rem.representative);
    else
      mout += removal_reason_name(rem.reason);
    mout += '\n';
  }
  write_file(mapping_path, mout);
}

}  // namespace plc
