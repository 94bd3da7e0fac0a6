#pragma once

// Weighted real-valued AND gates with lower/upper truth bounds, one gate per
// class, trained one-vs-rest by full-batch gradient descent.
//
// A gate computes raw(x) = bias - sum_i w_i * (1 - x_i) with w_i >= 0, applied
// separately to the lower and upper input bounds. At inference the raw value
// is clamped hard to [0,1]; during training a leaky clamp (slope alpha outside
// [0,1]) keeps gradients alive, and stored bounds are re-clamped to [0,1].
// With unit weights, bias 1 and crisp inputs this is boolean AND.
//
// Two scorers: "bounds-average" is (lower+upper)/2 of the gate activation on
// crisp bounds; "linear" is the unclamped, bias-free sum of weights over TRUE
// groundings.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <future>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "plc/errors.hpp"
#include "plc/io.hpp"
#include "plc/store.hpp"

namespace plc {

struct TruthBounds {
  double lower = 0.0;
  double upper = 1.0;  // default-constructed bounds are "unknown"
};

inline TruthBounds crisp(bool b) { return b ? TruthBounds{1, 1} : TruthBounds{0, 0}; }
inline TruthBounds crisp(double degree) { return {degree, degree}; }

struct WeightedAndGate {
  std::string class_label;
  std::vector<double> weights;  // one per universe predicate, >= 0
  double bias = 1.0;
};

enum class Scorer { BoundsAverage, Linear };

inline std::string scorer_name(Scorer s) {
  return s == Scorer::BoundsAverage ? "bounds-average" : "linear";
}

inline Scorer scorer_from(std::string_view s) {
  if (s == "bounds-average") return Scorer::BoundsAverage;
  if (s == "linear") return Scorer::Linear;
  throw DataError("unknown scorer '" + std::string(s) + "'");
}

struct TrainConfig {
  double learning_rate = 0.05;
  int epochs = 50;
  std::uint64_t seed = 0;  // reserved for sampling extensions; the full-batch
                           // baseline is seed-independent
  double activation_leak = 0.01;
  double init_scale = 0.0;  // 0 -> 1/N
  Scorer scorer = Scorer::BoundsAverage;

  void validate() const {
    if (!(learning_rate > 0)) throw DataError("learning rate must be > 0");
    if (epochs < 1) throw DataError("epochs must be >= 1");
    if (!(activation_leak >= 0.0 && activation_leak < 0.5))
      throw DataError("activation leak must be in [0, 0.5)");
    if (init_scale < 0) throw DataError("init scale must be >= 0");
  }
};

struct LnnModel {
  std::uint64_t fingerprint = 0;
  std::vector<std::string> predicate_names;
  std::vector<std::string> class_order;
  Scorer scorer = Scorer::BoundsAverage;
  std::vector<WeightedAndGate> gates;           // aligned with class_order
  std::vector<std::vector<double>> loss_trace;  // per gate, per epoch
  TrainConfig config;                           // snapshot, not persisted
};

inline double hard_clamp(double x) { return x < 0 ? 0.0 : (x > 1 ? 1.0 : x); }

inline double leaky_clamp(double x, double alpha) {
  if (x < 0) return alpha * x;
  if (x > 1) return 1.0 + alpha * (x - 1.0);
  return x;
}

inline double leaky_clamp_grad(double x, double alpha) {
  return (x < 0 || x > 1) ? alpha : 1.0;
}

// ------------------------------------------------------------- activation

inline TruthBounds and_activation(const WeightedAndGate& gate,
                                  std::span<const TruthBounds> inputs) {
  if (inputs.size() != gate.weights.size())
    throw DataError("gate input length " + std::to_string(inputs.size()) +
                    " does not match weight length " +
                    std::to_string(gate.weights.size()));
  double raw_lower = gate.bias;
  double raw_upper = gate.bias;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    double w = gate.weights[i];
    if (w < 0) throw DataError("gate weight must be non-negative");
    const TruthBounds& b = inputs[i];
    if (!(b.lower >= 0 && b.lower <= b.upper && b.upper <= 1))
      throw DataError("input truth bounds out of order");
    raw_lower -= w * (1.0 - b.lower);
    raw_upper -= w * (1.0 - b.upper);
  }
  return {hard_clamp(raw_lower), hard_clamp(raw_upper)};
}

inline double gate_score(const WeightedAndGate& gate,
                         std::span<const std::uint8_t> grounding, Scorer scorer) {
  if (grounding.size() != gate.weights.size())
    throw DataError("grounding length does not match gate weight length");
  if (scorer == Scorer::Linear) {
    double s = 0.0;
    for (std::size_t i = 0; i < grounding.size(); ++i)
      if (grounding[i]) s += gate.weights[i];
    return s;
  }
  double raw = gate.bias;
  for (std::size_t i = 0; i < grounding.size(); ++i)
    if (!grounding[i]) raw -= gate.weights[i];
  // crisp inputs: lower == upper, so the bounds average is the clamp itself
  return hard_clamp(raw);
}

// ---------------------------------------------------------------- training

struct GateGradient {
  std::vector<double> weights;
  double bias = 0.0;
};

struct EpochEval {
  double mean_loss = 0.0;
  GateGradient grad;
};

// One full-batch pass: mean squared error between the leaky bounds-average
// score and the 0/1 target, with its analytic gradient. `rows` holds each
// sample's sorted TRUE ids. Reductions are fixed-order pairwise sums, so the
// result is bit-stable.
inline EpochEval evaluate_epoch(const std::vector<std::vector<int>>& rows,
                                const std::vector<double>& targets,
                                std::span<const double> weights, double bias,
                                double alpha) {
  const std::size_t m = rows.size();
  if (m == 0) throw DataError("empty grounding table");
  if (targets.size() != m) throw DataError("target length mismatch");

  const double weight_total = pairwise_sum(weights);
  std::vector<double> losses(m), g(m);
  for (std::size_t s = 0; s < m; ++s) {
    double sum_true = 0.0;
    for (int id : rows[s]) sum_true += weights[static_cast<std::size_t>(id)];
    double raw = bias - weight_total + sum_true;
    double score = leaky_clamp(raw, alpha);
    double err = score - targets[s];
    losses[s] = err * err;
    g[s] = 2.0 * err * leaky_clamp_grad(raw, alpha) / static_cast<double>(m);
  }

  EpochEval out;
  out.mean_loss = pairwise_sum(losses) / static_cast<double>(m);
  const double g_total = pairwise_sum(g);

  // d raw / d w_i = x_i - 1: a dense -g_total plus a sparse scatter
  out.grad.weights.assign(weights.size(), -g_total);
  for (std::size_t s = 0; s < m; ++s)
    for (int id : rows[s]) out.grad.weights[static_cast<std::size_t>(id)] += g[s];
  out.grad.bias = g_total;
  return out;
}

inline double train_loss(const std::vector<std::vector<int>>& rows,
                         const std::vector<double>& targets,
                         std::span<const double> weights, double bias,
                         double alpha) {
  return evaluate_epoch(rows, targets, weights, bias, alpha).mean_loss;
}

inline GateGradient train_gradient(const std::vector<std::vector<int>>& rows,
                                   const std::vector<double>& targets,
                                   std::span<const double> weights, double bias,
                                   double alpha) {
  return evaluate_epoch(rows, targets, weights, bias, alpha).grad;
}

namespace lnn_detail {

struct GateRun {
  WeightedAndGate gate;
  std::vector<double> trace;
};

inline GateRun train_gate(const std::string& label,
                          const std::vector<std::vector<int>>& rows,
                          const std::vector<double>& targets, int n,
                          const TrainConfig& cfg) {
  GateRun run;
  run.gate.class_label = label;
  double init = cfg.init_scale > 0 ? cfg.init_scale : 1.0 / static_cast<double>(n);
  run.gate.weights.assign(static_cast<std::size_t>(n), init);
  run.gate.bias = 1.0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    EpochEval ev = evaluate_epoch(rows, targets, run.gate.weights,
                                  run.gate.bias, cfg.activation_leak);
    if (!std::isfinite(ev.mean_loss))
      throw NumericError("non-finite training loss at epoch " +
                         std::to_string(epoch) + " for class '" + label + "'");
    run.trace.push_back(ev.mean_loss);
    for (std::size_t i = 0; i < run.gate.weights.size(); ++i) {
      double w = run.gate.weights[i] - cfg.learning_rate * ev.grad.weights[i];
      run.gate.weights[i] = w < 0 ? 0.0 : w;  // projection keeps weights >= 0
    }
    run.gate.bias -= cfg.learning_rate * ev.grad.bias;
  }
  return run;
}

}  // namespace lnn_detail

// One-vs-rest training: target 1 for the gate's class, 0 otherwise. Gates are
// independent and trained concurrently; each gate's arithmetic is
// sequential-deterministic, so results do not depend on scheduling.
inline LnnModel train(const GroundingTable& table, const TrainConfig& cfg) {
  cfg.validate();
  const int n = table.universe.size();
  if (n == 0) throw DataError("cannot train on an empty predicate universe");
  if (table.samples.empty()) throw DataError("cannot train on an empty table");
  if (table.labels.empty()) throw DataError("table has no class labels");

  std::vector<std::vector<int>> rows;
  rows.reserve(table.samples.size());
  for (const auto& s : table.samples) rows.push_back(s.true_ids);

  for (const auto& label : table.labels) {
    bool any = false;
    for (const auto& s : table.samples)
      if (s.class_label == label) {
        any = true;
        break;
      }
    if (!any)
      throw DataError("class '" + label + "' has no positive samples");
  }

  LnnModel model;
  model.fingerprint = table.universe.fingerprint();
  for (const auto& p : table.universe.predicates)
    model.predicate_names.push_back(p.name());
  model.class_order = table.labels;
  model.scorer = cfg.scorer;
  model.config = cfg;

  std::vector<std::future<lnn_detail::GateRun>> futures;
  for (const auto& label : table.labels) {
    std::vector<double> targets;
    targets.reserve(table.samples.size());
    for (const auto& s : table.samples)
      targets.push_back(s.class_label == label ? 1.0 : 0.0);
    futures.push_back(std::async(
        std::launch::async,
        [label, targets = std::move(targets), &rows, n, &cfg] {
          return lnn_detail::train_gate(label, rows, targets, n, cfg);
        }));
  }
  for (auto& f : futures) {
    lnn_detail::GateRun run = f.get();
    model.gates.push_back(std::move(run.gate));
    model.loss_trace.push_back(std::move(run.trace));
  }
  return model;
}

// --------------------------------------------------------------- inference

struct Prediction {
  std::vector<double> scores;  // per gate, class order
  int class_index = 0;         // ties go to the first class in order
};

inline Prediction predict(const LnnModel& model,
                          std::span<const std::uint8_t> grounding) {
  if (model.gates.empty()) throw DataError("model has no gates");
  if (grounding.size() != model.predicate_names.size())
    throw DataError("grounding length does not match model universe");
  Prediction p;
  for (const auto& gate : model.gates)
    p.scores.push_back(gate_score(gate, grounding, model.scorer));
  for (std::size_t i = 1; i < p.scores.size(); ++i)
    if (p.scores[i] > p.scores[static_cast<std::size_t>(p.class_index)])
      p.class_index = static_cast<int>(i);
  return p;
}

// ------------------------------------------------------------- persistence
//
// Text format: a versioned header line (scorer, universe fingerprint, class
// order), then per gate "class \t beta \t N" followed by N lines
// "predicate-name \t weight". Numbers use 17 significant digits, so a
// save/load round trip is exact.

inline void save_model(const LnnModel& model, const std::filesystem::path& path) {
  if (model.gates.empty())
    throw DataError("refusing to save a model with no gates");
  if (model.gates.size() != model.class_order.size())
    throw DataError("model gate count does not match class order");

  ArtifactHeader h{"model", 1, {}};
  h.attrs["scorer"] = scorer_name(model.scorer);
  h.attrs["fingerprint"] = hex64(model.fingerprint);
  h.attrs["classes"] = join(model.class_order, ",");

  std::string out = h.line() + "\n";
  for (const auto& gate : model.gates) {
    if (gate.weights.size() != model.predicate_names.size())
      throw DataError("gate weight length does not match universe");
    out += gate.class_label + "\t" + fmt_g17(gate.bias) + "\t" +
           std::to_string(gate.weights.size()) + "\n";
    for (std::size_t i = 0; i < gate.weights.size(); ++i)
      out += model.predicate_names[i] + "\t" + fmt_g17(gate.weights[i]) + "\n";
  }
  write_file(path, out);
}

inline LnnModel load_model(const std::filesystem::path& path) {
  std::string text = read_file(path);
  LineReader rd{text};
  std::string_view line;

  auto truncated = [&]() -> DataError {
    return DataError("truncated model file at byte offset " +
                     std::to_string(rd.offset()) + ": " + path.string());
  };

  if (!rd.next(line)) throw truncated();
  ArtifactHeader h = ArtifactHeader::parse(line, "model");

  LnnModel model;
  model.scorer = scorer_from(h.attr("scorer"));
  for (auto c : split_view(h.attr("classes"), ','))
    if (!c.empty()) model.class_order.emplace_back(c);
  if (model.class_order.empty())
    throw DataError("model file declares no classes: " + path.string());

  for (std::size_t gi = 0; gi < model.class_order.size(); ++gi) {
    if (!rd.next(line)) throw truncated();
    auto cols = split_view(line, '\t');
    if (cols.size() != 3)
      throw DataError("malformed gate line at byte offset " +
                      std::to_string(rd.offset()));
    WeightedAndGate gate;
    gate.class_label = std::string(cols[0]);
    if (gate.class_label != model.class_order[gi])
      throw DataError("gate order does not match header class order");
    gate.bias = parse_f64(cols[1], "gate bias");
    long long n = parse_i64(cols[2], "gate weight count");
    if (n < 0) throw DataError("negative weight count");
    for (long long i = 0; i < n; ++i) {
      if (!rd.next(line)) throw truncated();
      auto wc = split_view(line, '\t');
      if (wc.size() != 2)
        throw DataError("malformed weight line at byte offset " +
                        std::to_string(rd.offset()));
      double w = parse_f64(wc[1], "gate weight");
      if (!std::isfinite(w) || !std::isfinite(gate.bias))
        throw DataError("non-finite numeric in model file");
      if (gi == 0)
        model.predicate_names.emplace_back(wc[0]);
      else if (model.predicate_names[static_cast<std::size_t>(i)] != wc[0])
        throw DataError("gates disagree on predicate names");
      gate.weights.push_back(w);
    }
    model.gates.push_back(std::move(gate));
  }
  while (rd.next(line))
    if (!trim(line).empty())
      throw DataError("trailing content in model file at byte offset " +
                      std::to_string(rd.offset()));

  std::uint64_t fp = kFnvOffset;
  for (const auto& name : model.predicate_names) {
    fp = fnv1a(name, fp);
    fp = fnv1a("\n", fp);
  }
  model.fingerprint = fp;
  if (hex64(fp) != h.attr("fingerprint"))
    throw DataError("model fingerprint mismatch: " + path.string());
  return model;
}

inline void save_loss_trace(const LnnModel& model,
                            const std::filesystem::path& path) {
  ArtifactHeader h{"loss", 1, {}};
  std::string out = h.line() + "\n";
  for (std::size_t g = 0; g < model.gates.size(); ++g)
    for (std::size_t e = 0; e < model.loss_trace[g].size(); ++e)
      out += model.gates[g].class_label + "\t" + std::to_string(e) + "\t" +
             fmt_g17(model.loss_trace[g][e]) + "\n";
  write_file(path, out);
}

}  // namespace plc
