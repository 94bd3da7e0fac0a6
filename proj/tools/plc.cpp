// plc — predicate-logic classifier pipeline.
//
// Subcommands: synth, extract, build-dataset, prune, train, eval, explain,
// bench. Exit codes: 0 ok, 2 usage/config, 3 data/artifact, 4 numeric.

#include <fcntl.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "plc/config.hpp"
#include "plc/pipeline.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

// Advisory lock: one mutating command per work dir at a time.
class WorkDirLock {
 public:
  explicit WorkDirLock(const std::filesystem::path& dir)
      : path_(dir / ".lock") {
    std::filesystem::create_directories(dir);
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0)
      throw plc::DataError("work dir is locked (remove " + path_.string() +
                           " if no other run is active)");
  }
  ~WorkDirLock() {
    if (fd_ >= 0) {
      ::close(fd_);
      std::error_code ec;
      std::filesystem::remove(path_, ec);
    }
  }
  WorkDirLock(const WorkDirLock&) = delete;
  WorkDirLock& operator=(const WorkDirLock&) = delete;

 private:
  std::filesystem::path path_;
  int fd_ = -1;
};

struct GlobalArgs {
  std::string config_path;
  std::string work_dir;
  std::string scorer;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

plc::PipelineConfig effective_config(const GlobalArgs& args) {
  plc::KvConfig kv;
  if (!args.config_path.empty()) kv = plc::KvConfig::load(args.config_path);
  plc::PipelineConfig cfg = plc::PipelineConfig::from_kv(kv);

  if (!args.work_dir.empty()) {
    cfg.work_dir = args.work_dir;
  } else if (!kv.has("pipeline.work_dir")) {
    if (const char* env = std::getenv("PLC_WORK_DIR"); env && *env)
      cfg.work_dir = env;
  }
  if (!args.scorer.empty()) cfg.train.scorer = plc::scorer_from(args.scorer);
  if (args.seed_set) {
    cfg.train.seed = args.seed;
    cfg.synth.seed = args.seed;
    cfg.split_seed = args.seed;
  }
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"plc — explainable predicate-logic text classifier pipeline"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  GlobalArgs g;
  app.add_option("--config", g.config_path, "configuration file (key = value sections)");
  app.add_option("--work-dir", g.work_dir,
                 "working directory (default: $PLC_WORK_DIR or ./plc-work)");
  app.add_option("--scorer", g.scorer, "gate scorer: bounds-average | linear")
      ->check(CLI::IsMember({"bounds-average", "linear"}));
  auto* seed_opt = app.add_option("--seed", g.seed,
                                  "override synth/train/split seeds");

  auto* cmd_synth = app.add_subcommand("synth", "generate a synthetic corpus");
  std::string synth_out;
  cmd_synth->add_option("--out", synth_out, "corpus output dir (default: <work-dir>/corpus)");

  auto* cmd_extract = app.add_subcommand("extract", "parse corpus and extract predicates");
  std::string extract_corpus;
  cmd_extract->add_option("--corpus", extract_corpus, "corpus dir with manifest.tsv");

  app.add_subcommand("build-dataset", "build predicate universe and grounding table");
  app.add_subcommand("prune", "run the configured pruning chain");
  app.add_subcommand("train", "train one AND gate per class");
  app.add_subcommand("eval", "ROC/AUC per class and multiclass accuracy");

  auto* cmd_explain = app.add_subcommand("explain", "report top-weight predicates per class");
  int explain_k = 20;
  cmd_explain->add_option("-k,--top", explain_k, "list length per class");

  auto* cmd_bench = app.add_subcommand("bench", "time training at given predicate counts");
  std::vector<int> bench_counts;
  cmd_bench->add_option("--counts", bench_counts, "predicate counts, e.g. --counts 710 1415")
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  g.seed_set = seed_opt->count() > 0;

  try {
    plc::PipelineConfig cfg = effective_config(g);

    if (cmd_synth->parsed()) {
      if (!synth_out.empty()) cfg.corpus_dir = synth_out;
      WorkDirLock lock(cfg.work_dir);
      auto stats = plc::run_synth(cfg);
      std::printf("synth: %d sessions, %d utterances, %d exclusive + %d shared predicates -> %s\n",
                  stats.sessions, stats.utterances, stats.planted_exclusive,
                  stats.shared, cfg.corpus().string().c_str());
      return 0;
    }

    if (cmd_extract->parsed()) {
      if (!extract_corpus.empty()) cfg.corpus_dir = extract_corpus;
      WorkDirLock lock(cfg.work_dir);
      auto stats = plc::run_extract(cfg);
      std::printf("extract: %d sessions ok, %d failed, %d utterances, %d distinct predicates\n",
                  stats.sessions_ok, stats.sessions_failed, stats.utterances,
                  stats.distinct_predicates);
      for (const auto& f : stats.failures)
        std::fprintf(stderr, "extract failure: %s\n", f.c_str());
      return stats.sessions_failed > 0 ? kExitData : 0;
    }

    if (app.get_subcommand("build-dataset")->parsed()) {
      WorkDirLock lock(cfg.work_dir);
      auto stats = plc::run_build_dataset(cfg);
      std::printf("build-dataset: %d samples x %d predicates (%d all-false rows kept)\n",
                  stats.samples, stats.predicates, stats.all_false_samples);
      return 0;
    }

    if (app.get_subcommand("prune")->parsed()) {
      WorkDirLock lock(cfg.work_dir);
      auto stats = plc::run_prune(cfg);
      for (const auto& st : stats.stages) {
        std::printf("prune %-10s %6d -> %6d", st.stage.c_str(), st.input, st.output);
        for (const auto& [cls, n] : st.per_class) std::printf("  %s=%d", cls.c_str(), n);
        std::printf("\n");
        for (const auto& note : st.notes) std::printf("  note: %s\n", note.c_str());
      }
      std::printf("prune: kept %d predicates\n", stats.kept);
      return 0;
    }

    if (app.get_subcommand("train")->parsed()) {
      WorkDirLock lock(cfg.work_dir);
      auto stats = plc::run_train(cfg);
      std::printf("train: %d samples x %d predicates (%s dataset)\n",
                  stats.train_samples, stats.predicates,
                  stats.used_pruned ? "pruned" : "base");
      for (const auto& [cls, loss] : stats.final_loss)
        std::printf("  %-16s final loss %.6f\n", cls.c_str(), loss);
      return 0;
    }

    if (app.get_subcommand("eval")->parsed()) {
      WorkDirLock lock(cfg.work_dir);
      auto stats = plc::run_eval(cfg);
      std::printf("eval: %d held-out samples (%s dataset)\n", stats.test_samples,
                  stats.used_pruned ? "pruned" : "base");
      for (const auto& [scorer, by_class] : stats.auc) {
        std::printf("  scorer %-14s", scorer.c_str());
        for (const auto& [cls, auc] : by_class)
          std::printf("  %s AUC=%.3f", cls.c_str(), auc);
        std::printf("  accuracy=%.3f\n", stats.accuracy.at(scorer));
      }
      return 0;
    }

    if (cmd_explain->parsed()) {
      WorkDirLock lock(cfg.work_dir);
      auto stats = plc::run_explain(cfg, explain_k);
      std::printf("explain: top-%d per class%s -> %s\n", stats.k,
                  stats.truncated ? " (truncated: k exceeds universe)" : "",
                  (cfg.work_dir / "insights").string().c_str());
      return 0;
    }

    if (cmd_bench->parsed()) {
      if (bench_counts.empty())
        throw plc::DataError("bench: pass --counts with at least one value");
      WorkDirLock lock(cfg.work_dir);
      auto rows = plc::run_bench(cfg, bench_counts);
      for (const auto& r : rows)
        std::printf("bench: %6d predicates  %.3f s\n", r.predicates, r.seconds);
      return 0;
    }

    std::fprintf(stderr, "no subcommand given\n");
    return kExitUsage;
  } catch (const plc::NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return kExitNumeric;
  } catch (const plc::DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
}
