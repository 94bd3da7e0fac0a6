#pragma once

// Top-weight predicates per class, for human inspection of what each gate
// learned. Entries are sorted by weight descending, ties by name ascending;
// weights are reported verbatim from the model.

#include <algorithm>
#include <string>
#include <vector>

#include "plc/errors.hpp"
#include "plc/io.hpp"
#include "plc/lnn.hpp"
#include "plc/store.hpp"

namespace plc {

struct InsightEntry {
  std::string predicate;
  double weight = 0.0;
  int class_frequency = 0;  // sessions of this class where it occurred TRUE
  std::string example;      // source sentence when known
};

struct InsightReport {
  int k = 0;
  bool truncated = false;  // k exceeded the universe size
  std::vector<std::pair<std::string, std::vector<InsightEntry>>> per_class;
};

inline InsightReport top_k_predicates(const LnnModel& model,
                                      const PredicateUniverse& universe,
                                      int k) {
  if (k < 1) throw DataError("k must be >= 1");
  if (model.fingerprint != universe.fingerprint())
    throw DataError("model/universe fingerprint mismatch");

  InsightReport report;
  report.k = k;
  report.truncated = k > universe.size();

  const int take = std::min(k, universe.size());
  for (const auto& gate : model.gates) {
    std::vector<int> ids(static_cast<std::size_t>(universe.size()));
    for (int i = 0; i < universe.size(); ++i) ids[static_cast<std::size_t>(i)] = i;
    std::sort(ids.begin(), ids.end(), [&](int a, int b) {
      double wa = gate.weights[static_cast<std::size_t>(a)];
      double wb = gate.weights[static_cast<std::size_t>(b)];
      if (wa != wb) return wa > wb;
      return model.predicate_names[static_cast<std::size_t>(a)] <
             model.predicate_names[static_cast<std::size_t>(b)];
    });

    std::vector<InsightEntry> entries;
    for (int r = 0; r < take; ++r) {
      int id = ids[static_cast<std::size_t>(r)];
      InsightEntry e;
      e.predicate = model.predicate_names[static_cast<std::size_t>(id)];
      e.weight = gate.weights[static_cast<std::size_t>(id)];
      auto it = universe.provenance[static_cast<std::size_t>(id)].find(
          gate.class_label);
      e.class_frequency =
          it == universe.provenance[static_cast<std::size_t>(id)].end()
              ? 0
              : static_cast<int>(it->second.size());
      e.example = universe.examples[static_cast<std::size_t>(id)];
      entries.push_back(std::move(e));
    }
    report.per_class.emplace_back(gate.class_label, std::move(entries));
  }
  return report;
}

// "class \t rank \t predicate \t weight \t freq" with a versioned header.
inline std::string render_insights_tsv(const InsightReport& report) {
  ArtifactHeader h{"insights", 1, {}};
  h.attrs["k"] = std::to_string(report.k);
  if (report.truncated) h.attrs["truncated"] = "true";
  std::string out = h.line() + "\n";
  for (const auto& [cls, entries] : report.per_class) {
    int rank = 1;
    for (const auto& e : entries) {
      out += cls + "\t" + std::to_string(rank++) + "\t" + e.predicate + "\t" +
             fmt_g17(e.weight) + "\t" + std::to_string(e.class_frequency) + "\n";
    }
  }
  return out;
}

inline std::string render_insights_text(const InsightReport& report) {
  std::string out;
  for (const auto& [cls, entries] : report.per_class) {
    out += "== " + cls + " ==\n";
    int rank = 1;
    for (const auto& e : entries) {
      out += "  " + std::to_string(rank++) + ". " + e.predicate +
             "  (weight " + fmt_g17(e.weight) + ", sessions " +
             std::to_string(e.class_frequency) + ")\n";
      if (!e.example.empty()) out += "     e.g. \"" + e.example + "\"\n";
    }
    out += "\n";
  }
  return out;
}

}  // namespace plc
