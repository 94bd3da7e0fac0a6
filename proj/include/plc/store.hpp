#pragma once

// The predicate universe and the per-sample grounding table. One utterance is
// one sample; a sample's grounding over the universe is boolean, TRUE exactly
// on the predicates extracted from that utterance. Provenance records, per
// predicate and class, the distinct sessions where it occurred TRUE.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "plc/errors.hpp"
#include "plc/io.hpp"
#include "plc/predicates.hpp"

namespace plc {

struct ParsedUtterance {
  std::string sample_id;
  std::string session_id;
  std::string class_label;
  std::string sentence;               // "" when the corpus block had no ::snt
  std::vector<Predicate> predicates;  // sorted, unique
};

// Class labels and session ids end up as delimited file fields.
inline void check_label(std::string_view s, std::string_view what) {
  if (s.empty()) throw DataError(std::string(what) + " must be non-empty");
  for (char c : s)
    if (c == '\t' || c == '\n' || c == ',' || c == ' ' || c == '=')
      throw DataError(std::string(what) + " '" + std::string(s) +
                      "' contains a reserved character");
}

struct PredicateUniverse {
  std::vector<Predicate> predicates;
  std::unordered_map<std::string, int> id_index;  // name -> dense id
  // per id: class -> sessions where the predicate occurred TRUE
  std::vector<std::map<std::string, std::set<std::string>>> provenance;
  std::vector<std::string> examples;  // per id: a source sentence, may be ""

  int size() const { return static_cast<int>(predicates.size()); }

  int id_of(const std::string& name) const {
    auto it = id_index.find(name);
    return it == id_index.end() ? -1 : it->second;
  }

  // Distinct sessions across all classes.
  int frequency(int id) const {
    std::set<std::string_view> sessions;
    for (const auto& [cls, ss] : provenance[id])
      for (const auto& s : ss) sessions.insert(s);
    return static_cast<int>(sessions.size());
  }

  // Sorted union of classes appearing in provenance.
  std::vector<std::string> class_labels() const {
    std::set<std::string> classes;
    for (const auto& prov : provenance)
      for (const auto& [cls, ss] : prov)
        if (!ss.empty()) classes.insert(cls);
    return {classes.begin(), classes.end()};
  }

  std::uint64_t fingerprint() const {
    std::uint64_t h = kFnvOffset;
    for (const auto& p : predicates) {
      h = fnv1a(p.name(), h);
      h = fnv1a("\n", h);
    }
    return h;
  }

  int add(const Predicate& p) {
    std::string name = p.name();
    auto it = id_index.find(name);
    if (it != id_index.end()) {
      const Predicate& existing = predicates[it->second];
      if (existing.key != p.key || existing.value != p.value)
        throw DataError("predicate name collision: '" + name + "'");
      return it->second;
    }
    int id = size();
    predicates.push_back(p);
    id_index.emplace(std::move(name), id);
    provenance.emplace_back();
    examples.emplace_back();
    return id;
  }
};

struct Sample {
  std::string sample_id;
  std::string session_id;
  std::string class_label;
  std::vector<int> true_ids;  // sorted, unique
};

struct GroundingTable {
  PredicateUniverse universe;
  std::vector<std::string> labels;  // configured class order
  std::vector<Sample> samples;

  std::vector<std::uint8_t> dense_row(const Sample& s) const {
    std::vector<std::uint8_t> row(universe.size(), 0);
    for (int id : s.true_ids) row[static_cast<std::size_t>(id)] = 1;
    return row;
  }
};

// Union of observed (key, value) pairs; ids in first-occurrence order;
// provenance and first-seen example sentences filled along the way.
inline PredicateUniverse build_universe(
    const std::vector<ParsedUtterance>& records) {
  PredicateUniverse u;
  std::set<std::string_view> seen_samples;
  for (const auto& r : records) {
    if (!seen_samples.insert(r.sample_id).second)
      throw DataError("duplicate sample id '" + r.sample_id + "'");
    check_label(r.class_label, "class label");
    check_label(r.session_id, "session id");
    for (const auto& p : r.predicates) {
      int id = u.add(p);
      u.provenance[id][r.class_label].insert(r.session_id);
      if (u.examples[id].empty() && !r.sentence.empty())
        u.examples[id] = r.sentence;
    }
  }
  return u;
}

// One sample per utterance; predicates missing from the universe are dropped
// silently (the universe may have been pruned).
inline GroundingTable build_grounding_table(
    const PredicateUniverse& universe,
    const std::vector<ParsedUtterance>& records,
    const std::vector<std::string>& labels) {
  if (labels.empty()) throw DataError("label set must be non-empty");
  std::set<std::string_view> label_set;
  for (const auto& l : labels) {
    check_label(l, "class label");
    if (!label_set.insert(l).second)
      throw DataError("duplicate class label '" + l + "'");
  }

  GroundingTable t;
  t.universe = universe;
  t.labels = labels;
  std::set<std::string_view> seen_samples;
  for (const auto& r : records) {
    if (!seen_samples.insert(r.sample_id).second)
      throw DataError("duplicate sample id '" + r.sample_id + "'");
    if (!label_set.count(r.class_label))
      throw DataError("unknown class label '" + r.class_label + "'");
    Sample s;
    s.sample_id = r.sample_id;
    s.session_id = r.session_id;
    s.class_label = r.class_label;
    for (const auto& p : r.predicates) {
      int id = universe.id_of(p.name());
      if (id >= 0) s.true_ids.push_back(id);
    }
    std::sort(s.true_ids.begin(), s.true_ids.end());
    s.true_ids.erase(std::unique(s.true_ids.begin(), s.true_ids.end()),
                     s.true_ids.end());
    t.samples.push_back(std::move(s));
  }
  return t;
}

// Universe restricted to `keep` (re-densified, relative id order preserved);
// groundings outside `keep` dropped. Sample count unchanged.
inline GroundingTable restrict_table(const GroundingTable& table,
                                     const std::vector<int>& keep) {
  if (keep.empty()) throw DataError("restrict_table: empty keep set");
  std::vector<int> sorted = keep;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  std::unordered_map<int, int> remap;
  GroundingTable t;
  t.labels = table.labels;
  for (int old_id : sorted) {
    if (old_id < 0 || old_id >= table.universe.size())
      throw DataError("restrict_table: id " + std::to_string(old_id) +
                      " out of range");
    int new_id = t.universe.add(table.universe.predicates[old_id]);
    t.universe.provenance[new_id] = table.universe.provenance[old_id];
    t.universe.examples[new_id] = table.universe.examples[old_id];
    remap[old_id] = new_id;
  }
  for (const auto& s : table.samples) {
    Sample ns{s.sample_id, s.session_id, s.class_label, {}};
    for (int id : s.true_ids) {
      auto it = remap.find(id);
      if (it != remap.end()) ns.true_ids.push_back(it->second);
    }
    std::sort(ns.true_ids.begin(), ns.true_ids.end());
    t.samples.push_back(std::move(ns));
  }
  return t;
}

// Row subset (for train/test splits); the universe is carried unchanged.
inline GroundingTable subset_table(const GroundingTable& table,
                                   const std::vector<int>& sample_indices) {
  GroundingTable t;
  t.universe = table.universe;
  t.labels = table.labels;
  for (int i : sample_indices) {
    if (i < 0 || i >= static_cast<int>(table.samples.size()))
      throw DataError("subset_table: sample index out of range");
    t.samples.push_back(table.samples[static_cast<std::size_t>(i)]);
  }
  return t;
}

// ------------------------------------------------------------- persistence
//
// Predicate table: "id \t key \t value" then one column per class holding
// comma-joined session ids. Grounding file: one line per sample,
// "sample \t session \t class \t space-joined TRUE ids". Each carries a
// one-line versioned header.

inline void save_universe(const PredicateUniverse& u,
                          const std::filesystem::path& path) {
  auto classes = u.class_labels();
  ArtifactHeader h{"universe", 1, {}};
  h.attrs["classes"] = join(classes, ",");
  h.attrs["fingerprint"] = hex64(u.fingerprint());

  std::string out = h.line() + "\n";
  for (int id = 0; id < u.size(); ++id) {
    out += std::to_string(id);
    out += '\t';
    out += u.predicates[static_cast<std::size_t>(id)].key;
    out += '\t';
    out += u.predicates[static_cast<std::size_t>(id)].value;
    for (const auto& cls : classes) {
      out += '\t';
      auto it = u.provenance[static_cast<std::size_t>(id)].find(cls);
      if (it != u.provenance[static_cast<std::size_t>(id)].end())
        out += join(it->second, ",");
    }
    out += '\n';
  }
  write_file(path, out);
}

inline PredicateUniverse load_universe(const std::filesystem::path& path) {
  std::string text = read_file(path);
  LineReader rd{text};
  std::string_view line;
  if (!rd.next(line)) throw DataError("empty universe file: " + path.string());
  ArtifactHeader h = ArtifactHeader::parse(line, "universe");

  std::vector<std::string> classes;
  if (!h.attr("classes").empty())
    for (auto c : split_view(h.attr("classes"), ','))
      classes.emplace_back(c);

  PredicateUniverse u;
  int expect_id = 0;
  while (rd.next(line)) {
    if (line.empty()) continue;
    auto cols = split_view(line, '\t');
    if (cols.size() != 3 + classes.size())
      throw DataError("universe row has " + std::to_string(cols.size()) +
                      " columns, expected " +
                      std::to_string(3 + classes.size()));
    if (parse_i64(cols[0], "universe id") != expect_id)
      throw DataError("universe ids must be dense and in order");
    int id = u.add({std::string(cols[1]), std::string(cols[2])});
    for (std::size_t c = 0; c < classes.size(); ++c) {
      std::string_view cell = cols[3 + c];
      if (cell.empty()) continue;
      auto& sessions = u.provenance[static_cast<std::size_t>(id)][classes[c]];
      for (auto s : split_view(cell, ','))
        if (!s.empty()) sessions.emplace(s);
    }
    ++expect_id;
  }
  if (h.attr("fingerprint") != hex64(u.fingerprint()))
    throw DataError("universe file fingerprint mismatch: " + path.string());
  return u;
}

inline void save_groundings(const GroundingTable& t,
                            const std::filesystem::path& path) {
  ArtifactHeader h{"groundings", 1, {}};
  h.attrs["labels"] = join(t.labels, ",");
  h.attrs["universe"] = hex64(t.universe.fingerprint());

  std::string out = h.line() + "\n";
  for (const auto& s : t.samples) {
    out += s.sample_id;
    out += '\t';
    out += s.session_id;
    out += '\t';
    out += s.class_label;
    out += '\t';
    bool first = true;
    for (int id : s.true_ids) {
      if (!first) out += ' ';
      out += std::to_string(id);
      first = false;
    }
    out += '\n';
  }
  write_file(path, out);
}

inline GroundingTable load_groundings(const std::filesystem::path& path,
                                      const PredicateUniverse& universe) {
  std::string text = read_file(path);
  LineReader rd{text};
  std::string_view line;
  if (!rd.next(line)) throw DataError("empty grounding file: " + path.string());
  ArtifactHeader h = ArtifactHeader::parse(line, "groundings");
  if (h.attr("universe") != hex64(universe.fingerprint()))
    throw DataError("grounding/universe fingerprint mismatch: " + path.string());

  GroundingTable t;
  t.universe = universe;
  for (auto l : split_view(h.attr("labels"), ','))
    if (!l.empty()) t.labels.emplace_back(l);
  if (t.labels.empty())
    throw DataError("grounding file declares no labels: " + path.string());

  while (rd.next(line)) {
    if (line.empty()) continue;
    auto cols = split_view(line, '\t');
    if (cols.size() != 4)
      throw DataError("grounding row must have 4 columns");
    Sample s{std::string(cols[0]), std::string(cols[1]), std::string(cols[2]), {}};
    for (auto tok : split_view(cols[3], ' ')) {
      if (tok.empty()) continue;
      long long id = parse_i64(tok, "grounding id");
      if (id < 0 || id >= universe.size())
        throw DataError("grounding id " + std::to_string(id) + " out of range");
      s.true_ids.push_back(static_cast<int>(id));
    }
    std::sort(s.true_ids.begin(), s.true_ids.end());
    t.samples.push_back(std::move(s));
  }
  return t;
}

}  // namespace plc
