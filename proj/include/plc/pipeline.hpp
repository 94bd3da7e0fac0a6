#pragma once

// End-to-end orchestration over a work directory:
//
//   corpus/            PENMAN session files + manifest.tsv (+ plants.tsv)
//   extract/<s>.tsv    per-session extraction output
//   dataset/           universe.tsv + groundings.tsv
//   pruned/            pruned dataset + report.tsv + mapping.tsv
//   model/             model.tsv + loss_trace.tsv
//   eval/              metrics.tsv + roc_<class>.tsv
//   insights/          insights.tsv + insights.txt
//   bench.tsv          timing table
//   run.log            one line per command (timestamp, config hash, counts)
//
// Every run_* function is deterministic given (corpus bytes, config); run.log
// and bench.tsv carry wall-clock values and are the only exceptions.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "plc/config.hpp"
#include "plc/errors.hpp"
#include "plc/eval.hpp"
#include "plc/insights.hpp"
#include "plc/io.hpp"
#include "plc/lnn.hpp"
#include "plc/penman.hpp"
#include "plc/predicates.hpp"
#include "plc/pruning.hpp"
#include "plc/rng.hpp"
#include "plc/store.hpp"
#include "plc/synth.hpp"

namespace plc {

struct WorkPaths {
  std::filesystem::path root;

  std::filesystem::path extract_dir() const { return root / "extract"; }
  std::filesystem::path universe() const { return root / "dataset" / "universe.tsv"; }
  std::filesystem::path groundings() const { return root / "dataset" / "groundings.tsv"; }
  std::filesystem::path pruned_universe() const { return root / "pruned" / "universe.tsv"; }
  std::filesystem::path pruned_groundings() const { return root / "pruned" / "groundings.tsv"; }
  std::filesystem::path prune_report() const { return root / "pruned" / "report.tsv"; }
  std::filesystem::path prune_mapping() const { return root / "pruned" / "mapping.tsv"; }
  std::filesystem::path model() const { return root / "model" / "model.tsv"; }
  std::filesystem::path loss_trace() const { return root / "model" / "loss_trace.tsv"; }
  std::filesystem::path eval_dir() const { return root / "eval"; }
  std::filesystem::path metrics() const { return eval_dir() / "metrics.tsv"; }
  std::filesystem::path insights_tsv() const { return root / "insights" / "insights.tsv"; }
  std::filesystem::path insights_txt() const { return root / "insights" / "insights.txt"; }
  std::filesystem::path bench() const { return root / "bench.tsv"; }
  std::filesystem::path run_log() const { return root / "run.log"; }
};

namespace pipeline_detail {

inline std::string iso_now() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void log_run(const PipelineConfig& cfg, const std::string& cmd,
                    const std::string& details) {
  WorkPaths wp{cfg.work_dir};
  append_file(wp.run_log(), iso_now() + "\t" + cmd + "\tcfg=" +
                                cfg.config_hash() + "\t" + details + "\n");
}

}  // namespace pipeline_detail

// ------------------------------------------------------------------- split

struct SplitIndices {
  std::vector<int> train;
  std::vector<int> test;
};

// Stratified by class, deterministic in (fraction, seed). With
// by_session, whole sessions are held out instead of single utterances.
inline SplitIndices stratified_split(const GroundingTable& table,
                                     double fraction, std::uint64_t seed,
                                     bool by_session = false) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw DataError("split fraction must be in (0, 1)");
  SplitIndices out;
  Rng rng(seed);

  for (const auto& label : table.labels) {
    if (!by_session) {
      std::vector<int> idx;
      for (std::size_t i = 0; i < table.samples.size(); ++i)
        if (table.samples[i].class_label == label)
          idx.push_back(static_cast<int>(i));
      if (idx.empty()) continue;
      rng.shuffle(idx);
      auto n = static_cast<long long>(idx.size());
      long long ntr = std::llround(fraction * static_cast<double>(n));
      if (ntr < 1) ntr = 1;
      if (n >= 2 && ntr >= n) ntr = n - 1;
      for (long long i = 0; i < n; ++i)
        (i < ntr ? out.train : out.test).push_back(idx[static_cast<std::size_t>(i)]);
    } else {
      std::vector<std::string> sessions;
      std::map<std::string, std::vector<int>> by_sess;
      for (std::size_t i = 0; i < table.samples.size(); ++i) {
        const auto& s = table.samples[i];
        if (s.class_label != label) continue;
        if (!by_sess.count(s.session_id)) sessions.push_back(s.session_id);
        by_sess[s.session_id].push_back(static_cast<int>(i));
      }
      if (sessions.empty()) continue;
      rng.shuffle(sessions);
      long long total = 0;
      for (const auto& [k, v] : by_sess) total += static_cast<long long>(v.size());
      long long want = std::llround(fraction * static_cast<double>(total));
      long long got = 0;
      int class_test_sessions = 0;
      for (std::size_t si = 0; si < sessions.size(); ++si) {
        auto& idx = by_sess[sessions[si]];
        bool to_train = got < want;
        if (si + 1 == sessions.size() && class_test_sessions == 0 &&
            sessions.size() > 1)
          to_train = false;  // each class keeps at least one session held out
        for (int i : idx) (to_train ? out.train : out.test).push_back(i);
        if (to_train)
          got += static_cast<long long>(idx.size());
        else
          ++class_test_sessions;
      }
    }
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

// ------------------------------------------------------------------ extract

struct ExtractStats {
  int sessions_ok = 0;
  int sessions_failed = 0;
  std::vector<std::string> failures;  // "file: message"
  int utterances = 0;
  int distinct_predicates = 0;
  std::map<std::string, int> utterances_per_class;
};

inline std::vector<std::pair<std::string, std::string>> load_manifest(
    const std::filesystem::path& corpus_dir) {
  auto path = corpus_dir / "manifest.tsv";
  std::string text = read_file(path);
  auto lines = split_lines(text);
  if (lines.empty()) throw DataError("empty manifest: " + path.string());
  ArtifactHeader::parse(lines[0], "manifest");
  std::vector<std::pair<std::string, std::string>> entries;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    auto cols = split_view(lines[i], '\t');
    if (cols.size() != 2)
      throw DataError("manifest row must be 'file\\tclass'");
    entries.emplace_back(std::string(cols[0]), std::string(cols[1]));
  }
  if (entries.empty()) throw DataError("manifest lists no sessions: " + path.string());
  return entries;
}

// Extraction file: header then, per utterance, one "U" line and one "P" line
// per predicate.
inline void save_extraction(const std::vector<ParsedUtterance>& records,
                            const std::string& session, const std::string& cls,
                            const std::filesystem::path& path) {
  ArtifactHeader h{"extract", 1, {}};
  h.attrs["session"] = session;
  h.attrs["class"] = cls;
  std::string out = h.line() + "\n";
  for (const auto& r : records) {
    std::string sentence = r.sentence;
    for (auto& ch : sentence)
      if (ch == '\t') ch = ' ';
    out += "U\t" + r.sample_id + "\t" + r.session_id + "\t" + r.class_label +
           "\t" + sentence + "\n";
    for (const auto& p : r.predicates)
      out += "P\t" + p.key + "\t" + p.value + "\n";
  }
  write_file(path, out);
}

inline std::vector<ParsedUtterance> load_extraction(
    const std::filesystem::path& path) {
  std::string text = read_file(path);
  auto lines = split_lines(text);
  if (lines.empty()) throw DataError("empty extraction file: " + path.string());
  ArtifactHeader::parse(lines[0], "extract");
  std::vector<ParsedUtterance> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    auto cols = split_view(lines[i], '\t');
    if (cols[0] == "U") {
      if (cols.size() != 5)
        throw DataError("malformed U line in " + path.string());
      ParsedUtterance r;
      r.sample_id = std::string(cols[1]);
      r.session_id = std::string(cols[2]);
      r.class_label = std::string(cols[3]);
      r.sentence = std::string(cols[4]);
      out.push_back(std::move(r));
    } else if (cols[0] == "P") {
      if (cols.size() != 3 || out.empty())
        throw DataError("malformed P line in " + path.string());
      out.back().predicates.push_back(
          {std::string(cols[1]), std::string(cols[2])});
    } else {
      throw DataError("unknown record tag in " + path.string());
    }
  }
  for (auto& r : out) std::sort(r.predicates.begin(), r.predicates.end());
  return out;
}

inline ExtractStats run_extract(const PipelineConfig& cfg) {
  cfg.validate();
  auto corpus = cfg.corpus();
  auto entries = load_manifest(corpus);

  WorkPaths wp{cfg.work_dir};
  ExtractStats stats;
  std::set<std::string> names;

  for (const auto& [file, cls] : entries) {
    auto path = corpus / file;
    std::string stem = std::filesystem::path(file).stem().string();
    try {
      auto graphs = load_sembank(path);
      std::vector<ParsedUtterance> records;
      int index = 0;
      for (const auto& g : graphs) {
        ParsedUtterance r;
        auto id_it = g.metadata.find("id");
        r.sample_id = id_it != g.metadata.end() && !id_it->second.empty()
                          ? id_it->second
                          : stem + "#" + std::to_string(index);
        r.session_id = stem;
        r.class_label = cls;
        auto snt_it = g.metadata.find("snt");
        if (snt_it != g.metadata.end()) r.sentence = snt_it->second;
        r.predicates = extract_predicates(g, cfg.rules);
        for (const auto& p : r.predicates) names.insert(p.name());
        ++index;
        ++stats.utterances;
        ++stats.utterances_per_class[cls];
        records.push_back(std::move(r));
      }
      save_extraction(records, stem, cls, wp.extract_dir() / (stem + ".tsv"));
      ++stats.sessions_ok;
    } catch (const DataError& e) {
      ++stats.sessions_failed;
      stats.failures.push_back(file + ": " + e.what());
    }
  }
  stats.distinct_predicates = static_cast<int>(names.size());
  pipeline_detail::log_run(
      cfg, "extract",
      "sessions=" + std::to_string(stats.sessions_ok) + " failed=" +
          std::to_string(stats.sessions_failed) + " utterances=" +
          std::to_string(stats.utterances) + " predicates=" +
          std::to_string(stats.distinct_predicates));
  return stats;
}

// ------------------------------------------------------------ build-dataset

struct BuildStats {
  int samples = 0;
  int predicates = 0;
  int all_false_samples = 0;
};

inline std::vector<ParsedUtterance> load_all_extractions(
    const std::filesystem::path& extract_dir) {
  if (!std::filesystem::is_directory(extract_dir))
    throw DataError("extraction directory missing: " + extract_dir.string() +
                    " (run extract first)");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(extract_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".tsv")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty())
    throw DataError("no extraction files in " + extract_dir.string());
  std::vector<ParsedUtterance> records;
  for (const auto& f : files) {
    auto part = load_extraction(f);
    records.insert(records.end(), part.begin(), part.end());
  }
  return records;
}

inline BuildStats run_build_dataset(const PipelineConfig& cfg) {
  cfg.validate();
  WorkPaths wp{cfg.work_dir};
  auto records = load_all_extractions(wp.extract_dir());
  PredicateUniverse universe = build_universe(records);
  GroundingTable table = build_grounding_table(universe, records, cfg.labels);
  save_universe(universe, wp.universe());
  save_groundings(table, wp.groundings());

  BuildStats stats;
  stats.samples = static_cast<int>(table.samples.size());
  stats.predicates = universe.size();
  for (const auto& s : table.samples)
    if (s.true_ids.empty()) ++stats.all_false_samples;
  pipeline_detail::log_run(
      cfg, "build-dataset",
      "samples=" + std::to_string(stats.samples) + " predicates=" +
          std::to_string(stats.predicates) + " all_false=" +
          std::to_string(stats.all_false_samples));
  return stats;
}

// -------------------------------------------------------------------- prune

struct PruneStats {
  std::vector<StageStats> stages;
  int kept = 0;
};

inline PruneStats run_prune(const PipelineConfig& cfg) {
  cfg.validate();
  WorkPaths wp{cfg.work_dir};
  PredicateUniverse universe = load_universe(wp.universe());
  GroundingTable table = load_groundings(wp.groundings(), universe);

  ChainResult chain = run_chain(universe, table, cfg.prune);
  GroundingTable pruned = apply_prune(table, chain);
  save_universe(pruned.universe, wp.pruned_universe());
  save_groundings(pruned, wp.pruned_groundings());
  save_prune_report(chain.report, wp.prune_report(), wp.prune_mapping());

  PruneStats stats;
  stats.stages = chain.report.stages;
  stats.kept = static_cast<int>(chain.kept.size());
  std::string detail;
  for (const auto& st : stats.stages)
    detail += st.stage + ":" + std::to_string(st.input) + "->" +
              std::to_string(st.output) + " ";
  pipeline_detail::log_run(cfg, "prune", detail + "kept=" + std::to_string(stats.kept));
  return stats;
}

// -------------------------------------------------------------------- train

struct DatasetChoice {
  GroundingTable table;
  bool pruned = false;
};

inline DatasetChoice load_dataset(const PipelineConfig& cfg, bool prefer_pruned) {
  WorkPaths wp{cfg.work_dir};
  if (prefer_pruned && std::filesystem::exists(wp.pruned_universe())) {
    PredicateUniverse u = load_universe(wp.pruned_universe());
    return {load_groundings(wp.pruned_groundings(), u), true};
  }
  if (!std::filesystem::exists(wp.universe()))
    throw DataError("dataset missing: " + wp.universe().string() +
                    " (run build-dataset first)");
  PredicateUniverse u = load_universe(wp.universe());
  return {load_groundings(wp.groundings(), u), false};
}

// Model and dataset must agree on the universe; try pruned, then base.
inline DatasetChoice load_dataset_for_model(const PipelineConfig& cfg,
                                            const LnnModel& model) {
  WorkPaths wp{cfg.work_dir};
  if (std::filesystem::exists(wp.pruned_universe())) {
    PredicateUniverse u = load_universe(wp.pruned_universe());
    if (u.fingerprint() == model.fingerprint)
      return {load_groundings(wp.pruned_groundings(), u), true};
  }
  if (std::filesystem::exists(wp.universe())) {
    PredicateUniverse u = load_universe(wp.universe());
    if (u.fingerprint() == model.fingerprint)
      return {load_groundings(wp.groundings(), u), false};
  }
  throw DataError("no dataset matches the model's universe fingerprint " +
                  hex64(model.fingerprint));
}

struct TrainStats {
  bool used_pruned = false;
  int train_samples = 0;
  int predicates = 0;
  std::map<std::string, double> final_loss;
};

inline TrainStats run_train(const PipelineConfig& cfg) {
  cfg.validate();
  WorkPaths wp{cfg.work_dir};
  DatasetChoice data = load_dataset(cfg, /*prefer_pruned=*/true);

  SplitIndices split = stratified_split(data.table, cfg.split_fraction,
                                        cfg.split_seed, cfg.split_by_session);
  GroundingTable train_table = subset_table(data.table, split.train);
  LnnModel model = train(train_table, cfg.train);
  save_model(model, wp.model());
  save_loss_trace(model, wp.loss_trace());

  TrainStats stats;
  stats.used_pruned = data.pruned;
  stats.train_samples = static_cast<int>(train_table.samples.size());
  stats.predicates = train_table.universe.size();
  std::string detail = std::string("dataset=") + (data.pruned ? "pruned" : "base");
  for (std::size_t g = 0; g < model.gates.size(); ++g) {
    double last = model.loss_trace[g].back();
    stats.final_loss[model.gates[g].class_label] = last;
    detail += " " + model.gates[g].class_label + "=" + fmt_g17(last);
  }
  pipeline_detail::log_run(cfg, "train",
                           detail + " samples=" + std::to_string(stats.train_samples));
  return stats;
}

// --------------------------------------------------------------------- eval

struct EvalStats {
  // auc[scorer][class]
  std::map<std::string, std::map<std::string, double>> auc;
  std::map<std::string, double> accuracy;  // per scorer
  int test_samples = 0;
  bool used_pruned = false;
};

inline EvalStats run_eval(const PipelineConfig& cfg) {
  cfg.validate();
  WorkPaths wp{cfg.work_dir};
  if (!std::filesystem::exists(wp.model()))
    throw DataError("model missing: " + wp.model().string() + " (run train first)");
  LnnModel model = load_model(wp.model());
  DatasetChoice data = load_dataset_for_model(cfg, model);

  SplitIndices split = stratified_split(data.table, cfg.split_fraction,
                                        cfg.split_seed, cfg.split_by_session);
  GroundingTable test_table = subset_table(data.table, split.test);
  if (test_table.samples.empty()) throw DataError("test split is empty");

  EvalStats stats;
  stats.test_samples = static_cast<int>(test_table.samples.size());
  stats.used_pruned = data.pruned;

  std::vector<std::vector<std::uint8_t>> rows;
  rows.reserve(test_table.samples.size());
  for (const auto& s : test_table.samples) rows.push_back(test_table.dense_row(s));

  const Scorer scorers[2] = {model.scorer, model.scorer == Scorer::BoundsAverage
                                               ? Scorer::Linear
                                               : Scorer::BoundsAverage};
  std::string metrics;
  for (Scorer scorer : scorers) {
    for (std::size_t g = 0; g < model.gates.size(); ++g) {
      const auto& gate = model.gates[g];
      std::vector<double> scores;
      std::vector<int> labels;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        scores.push_back(gate_score(gate, rows[i], scorer));
        labels.push_back(test_table.samples[i].class_label == gate.class_label ? 1 : 0);
      }
      RocCurve curve = roc_auc(scores, labels);
      stats.auc[scorer_name(scorer)][gate.class_label] = curve.auc;
      metrics += "auc\t" + scorer_name(scorer) + "\t" + gate.class_label +
                 "\t" + fmt_g17(curve.auc) + "\n";
      if (scorer == model.scorer)
        save_roc(curve, wp.eval_dir() / ("roc_" + gate.class_label + ".tsv"),
                 gate.class_label, scorer);
    }
    double acc = multiclass_accuracy(model, test_table, scorer);
    stats.accuracy[scorer_name(scorer)] = acc;
    metrics += "accuracy\t" + scorer_name(scorer) + "\t*\t" + fmt_g17(acc) + "\n";
  }

  ArtifactHeader h{"metrics", 1, {}};
  h.attrs["scorer"] = scorer_name(model.scorer);
  h.attrs["test_samples"] = std::to_string(stats.test_samples);
  write_file(wp.metrics(), h.line() + "\n" + metrics);

  std::string detail = "test=" + std::to_string(stats.test_samples);
  for (const auto& [cls, auc] : stats.auc[scorer_name(model.scorer)])
    detail += " " + cls + "=" + fmt_g17(auc);
  pipeline_detail::log_run(cfg, "eval", detail);
  return stats;
}

// ------------------------------------------------------------------ explain

struct InsightStats {
  int k = 0;
  bool truncated = false;
};

// Example sentences come from the extraction files when present: the first
// utterance mentioning a predicate supplies its sentence.
inline void fill_examples(PredicateUniverse& u,
                          const std::filesystem::path& extract_dir) {
  if (!std::filesystem::is_directory(extract_dir)) return;
  auto records = load_all_extractions(extract_dir);
  for (const auto& r : records) {
    if (r.sentence.empty()) continue;
    for (const auto& p : r.predicates) {
      int id = u.id_of(p.name());
      if (id >= 0 && u.examples[static_cast<std::size_t>(id)].empty())
        u.examples[static_cast<std::size_t>(id)] = r.sentence;
    }
  }
}

inline InsightStats run_explain(const PipelineConfig& cfg, int k) {
  cfg.validate();
  WorkPaths wp{cfg.work_dir};
  if (!std::filesystem::exists(wp.model()))
    throw DataError("model missing: " + wp.model().string() + " (run train first)");
  LnnModel model = load_model(wp.model());
  DatasetChoice data = load_dataset_for_model(cfg, model);
  fill_examples(data.table.universe, wp.extract_dir());

  InsightReport report = top_k_predicates(model, data.table.universe, k);
  write_file(wp.insights_tsv(), render_insights_tsv(report));
  write_file(wp.insights_txt(), render_insights_text(report));

  pipeline_detail::log_run(cfg, "explain",
                           "k=" + std::to_string(k) +
                               (report.truncated ? " truncated" : ""));
  return {report.k, report.truncated};
}

// -------------------------------------------------------------------- synth

struct SynthStats {
  int sessions = 0;
  int utterances = 0;
  int planted_exclusive = 0;
  int shared = 0;
};

inline SynthStats run_synth(const PipelineConfig& cfg) {
  cfg.validate();
  SynthCorpus corpus = generate_corpus(cfg.synth, cfg.corpus());
  SynthStats stats;
  stats.sessions = static_cast<int>(corpus.manifest.size());
  stats.utterances = static_cast<int>(corpus.truth.size());
  stats.planted_exclusive = static_cast<int>(corpus.plants.size());
  stats.shared = static_cast<int>(corpus.shared.size());
  pipeline_detail::log_run(
      cfg, "synth",
      "sessions=" + std::to_string(stats.sessions) + " utterances=" +
          std::to_string(stats.utterances) + " exclusive=" +
          std::to_string(stats.planted_exclusive) + " shared=" +
          std::to_string(stats.shared));
  return stats;
}

// -------------------------------------------------------------------- bench

struct BenchRow {
  int predicates = 0;
  double seconds = 0.0;
};

// Trains the full gate set on the dataset restricted to the first N
// predicates, for each N; wall-clock seconds are reported, not asserted.
inline std::vector<BenchRow> run_bench(const PipelineConfig& cfg,
                                       const std::vector<int>& counts) {
  cfg.validate();
  if (counts.empty()) throw DataError("bench: no predicate counts given");
  WorkPaths wp{cfg.work_dir};
  DatasetChoice data = load_dataset(cfg, /*prefer_pruned=*/false);

  std::vector<BenchRow> rows;
  std::string out_rows;
  for (int count : counts) {
    if (count < 1 || count > data.table.universe.size())
      throw DataError("bench: predicate count " + std::to_string(count) +
                      " out of range (universe has " +
                      std::to_string(data.table.universe.size()) + ")");
    std::vector<int> keep(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) keep[static_cast<std::size_t>(i)] = i;
    GroundingTable restricted = restrict_table(data.table, keep);

    auto start = std::chrono::steady_clock::now();
    (void)train(restricted, cfg.train);
    auto stop = std::chrono::steady_clock::now();
    double seconds = std::chrono::duration<double>(stop - start).count();
    rows.push_back({count, seconds});
    out_rows += std::to_string(count) + "\t" + fmt_g17(seconds) + "\n";
  }

  ArtifactHeader h{"bench", 1, {}};
  write_file(wp.bench(), h.line() + "\n" + out_rows);
  pipeline_detail::log_run(cfg, "bench", "rows=" + std::to_string(rows.size()));
  return rows;
}

}  // namespace plc
