#pragma once

// Binary-classifier evaluation: confusion counts at a threshold, TPR/FPR,
// ROC curves with grouped-tie thresholds, trapezoidal AUC, and multiclass
// accuracy over a grounding table. The trapezoid AUC equals the probability
// that a random positive outscores a random negative, ties counted half.

#include <algorithm>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "plc/errors.hpp"
#include "plc/io.hpp"
#include "plc/lnn.hpp"
#include "plc/store.hpp"

namespace plc {

struct ConfusionCounts {
  long tp = 0, fp = 0, tn = 0, fn = 0;
};

namespace eval_detail {

inline void check_binary(std::span<const double> scores,
                         std::span<const int> labels) {
  if (scores.size() != labels.size())
    throw DataError("scores and labels differ in length");
  if (scores.empty()) throw DataError("empty score list");
  bool has_pos = false, has_neg = false;
  for (int l : labels) (l != 0 ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg)
    throw DataError("labels contain a single class; TPR/FPR undefined");
}

}  // namespace eval_detail

// Predicted positive iff score >= t.
inline ConfusionCounts confusion_at_threshold(std::span<const double> scores,
                                              std::span<const int> labels,
                                              double t) {
  eval_detail::check_binary(scores, labels);
  ConfusionCounts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    bool predicted = scores[i] >= t;
    bool actual = labels[i] != 0;
    if (predicted && actual) ++c.tp;
    else if (predicted && !actual) ++c.fp;
    else if (!predicted && actual) ++c.fn;
    else ++c.tn;
  }
  return c;
}

inline double tpr(const ConfusionCounts& c) {
  if (c.tp + c.fn == 0) throw DataError("TPR undefined: no positive samples");
  return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
}

inline double fpr(const ConfusionCounts& c) {
  if (c.tn + c.fp == 0) throw DataError("FPR undefined: no negative samples");
  return static_cast<double>(c.fp) / static_cast<double>(c.tn + c.fp);
}

struct RocCurve {
  std::vector<std::pair<double, double>> points;  // (FPR, TPR), monotone
  std::vector<double> thresholds;  // aligned; +inf for the (0,0) point
  double auc = 0.0;
};

// Thresholds sweep the distinct scores in descending order; tied scores enter
// together, producing diagonal segments.
inline RocCurve roc_auc(std::span<const double> scores,
                        std::span<const int> labels) {
  eval_detail::check_binary(scores, labels);
  const std::size_t n = scores.size();

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  long total_pos = 0, total_neg = 0;
  for (int l : labels) (l != 0 ? total_pos : total_neg) += 1;

  RocCurve curve;
  curve.points.emplace_back(0.0, 0.0);
  curve.thresholds.push_back(std::numeric_limits<double>::infinity());

  long tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    for (std::size_t k = i; k < j; ++k)
      (labels[order[k]] != 0 ? tp : fp) += 1;
    curve.points.emplace_back(
        static_cast<double>(fp) / static_cast<double>(total_neg),
        static_cast<double>(tp) / static_cast<double>(total_pos));
    curve.thresholds.push_back(scores[order[i]]);
    i = j;
  }

  double auc = 0.0;
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    auto [x0, y0] = curve.points[k - 1];
    auto [x1, y1] = curve.points[k];
    auc += (x1 - x0) * (y0 + y1) / 2.0;
  }
  curve.auc = auc;
  return curve;
}

// Fraction of samples whose argmax prediction matches the true label, under
// the given scorer.
inline double multiclass_accuracy(const LnnModel& model,
                                  const GroundingTable& table, Scorer scorer) {
  if (table.samples.empty()) throw DataError("empty grounding table");
  if (model.fingerprint != table.universe.fingerprint())
    throw DataError("model/universe fingerprint mismatch");

  long correct = 0;
  for (const auto& s : table.samples) {
    auto row = table.dense_row(s);
    int best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < model.gates.size(); ++g) {
      double sc = gate_score(model.gates[g], row, scorer);
      if (sc > best_score) {
        best_score = sc;
        best = static_cast<int>(g);
      }
    }
    if (model.class_order[static_cast<std::size_t>(best)] == s.class_label)
      ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(table.samples.size());
}

inline double multiclass_accuracy(const LnnModel& model,
                                  const GroundingTable& table) {
  return multiclass_accuracy(model, table, model.scorer);
}

// "threshold \t fpr \t tpr" rows plus a final "auc \t value" summary line.
inline void save_roc(const RocCurve& curve, const std::filesystem::path& path,
                     const std::string& class_label, Scorer scorer) {
  ArtifactHeader h{"roc", 1, {}};
  h.attrs["class"] = class_label;
  h.attrs["scorer"] = scorer_name(scorer);
  std::string out = h.line() + "\n";
  for (std::size_t i = 0; i < curve.points.size(); ++i)
    out += fmt_g17(curve.thresholds[i]) + "\t" + fmt_g17(curve.points[i].first) +
           "\t" + fmt_g17(curve.points[i].second) + "\n";
  out += "auc\t" + fmt_g17(curve.auc) + "\n";
  write_file(path, out);
}

}  // namespace plc
