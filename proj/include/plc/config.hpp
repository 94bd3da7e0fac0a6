#pragma once

// Plain-text configuration: "[section]" headers and "key = value" lines,
// '#' comments. No structured-format dependency.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "plc/errors.hpp"
#include "plc/io.hpp"
#include "plc/lnn.hpp"
#include "plc/predicates.hpp"
#include "plc/pruning.hpp"
#include "plc/synth.hpp"

namespace plc {

struct KvConfig {
  std::map<std::string, std::string> values;  // "section.key" -> value

  static KvConfig parse(std::string_view text) {
    KvConfig cfg;
    std::string section;
    int line_no = 0;
    for (auto raw : split_lines(text)) {
      ++line_no;
      std::string_view line = trim(raw);
      if (line.empty() || line.front() == '#') continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw DataError("config line " + std::to_string(line_no) +
                          ": unterminated section header");
        section = std::string(trim(line.substr(1, line.size() - 2)));
        continue;
      }
      auto eq = line.find('=');
      if (eq == std::string_view::npos)
        throw DataError("config line " + std::to_string(line_no) +
                        ": expected 'key = value'");
      std::string key(trim(line.substr(0, eq)));
      std::string_view raw_value = line.substr(eq + 1);
      if (auto hash = raw_value.find('#'); hash != std::string_view::npos)
        raw_value = raw_value.substr(0, hash);  // inline comment
      std::string value(trim(raw_value));
      if (key.empty())
        throw DataError("config line " + std::to_string(line_no) +
                        ": empty key");
      cfg.values[section.empty() ? key : section + "." + key] = value;
    }
    return cfg;
  }

  static KvConfig load(const std::filesystem::path& p) {
    return parse(read_file(p));
  }

  bool has(const std::string& key) const { return values.count(key) > 0; }

  std::string get_str(const std::string& key, const std::string& def) const {
    auto it = values.find(key);
    return it == values.end() ? def : it->second;
  }

  double get_f64(const std::string& key, double def) const {
    auto it = values.find(key);
    return it == values.end() ? def : parse_f64(it->second, "config " + key);
  }

  long long get_i64(const std::string& key, long long def) const {
    auto it = values.find(key);
    return it == values.end() ? def : parse_i64(it->second, "config " + key);
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t def) const {
    auto it = values.find(key);
    return it == values.end() ? def : parse_u64(it->second, "config " + key);
  }

  bool get_bool(const std::string& key, bool def) const {
    auto it = values.find(key);
    if (it == values.end()) return def;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw DataError("config " + key + ": expected true/false");
  }

  std::vector<std::string> get_list(const std::string& key,
                                    const std::vector<std::string>& def) const {
    auto it = values.find(key);
    if (it == values.end()) return def;
    std::vector<std::string> out;
    for (auto part : split_view(it->second, ','))
      if (!trim(part).empty()) out.emplace_back(trim(part));
    return out;
  }
};

struct PipelineConfig {
  std::filesystem::path work_dir = "plc-work";
  std::filesystem::path corpus_dir;  // defaults to work_dir/corpus
  std::vector<std::string> labels = {"anxiety", "depression", "suicidal",
                                     "schizophrenia"};
  ExtractionRules rules;
  PruneConfig prune;
  TrainConfig train;
  SynthConfig synth;
  double split_fraction = 0.7;
  std::uint64_t split_seed = 17;
  bool split_by_session = false;

  std::filesystem::path corpus() const {
    return corpus_dir.empty() ? work_dir / "corpus" : corpus_dir;
  }

  void validate() const {
    if (!(split_fraction > 0.0 && split_fraction < 1.0))
      throw DataError("split fraction must be in (0, 1)");
    if (labels.empty()) throw DataError("label set must be non-empty");
    std::set<std::string> seen;
    for (const auto& l : labels) {
      check_label(l, "class label");
      if (!seen.insert(l).second)
        throw DataError("duplicate class label '" + l + "'");
    }
    if (!corpus_dir.empty() &&
        std::filesystem::weakly_canonical(corpus_dir) ==
            std::filesystem::weakly_canonical(work_dir))
      throw DataError("corpus dir and work dir must be distinct");
    rules.validate();
    prune.validate();
    train.validate();
    synth.validate();
  }

  static PipelineConfig from_kv(const KvConfig& kv) {
    PipelineConfig c;
    c.work_dir = kv.get_str("pipeline.work_dir", c.work_dir.string());
    c.corpus_dir = kv.get_str("pipeline.corpus_dir", "");
    c.labels = kv.get_list("pipeline.labels", c.labels);
    c.split_fraction = kv.get_f64("pipeline.split_fraction", c.split_fraction);
    c.split_seed = kv.get_u64("pipeline.split_seed", c.split_seed);
    c.split_by_session =
        kv.get_bool("pipeline.split_by_session", c.split_by_session);

    // extraction: "relation_key.<role> = <KEY>" entries replace the defaults
    std::map<std::string, std::string> relations;
    for (const auto& [key, value] : kv.values) {
      constexpr std::string_view prefix = "extract.relation_key.";
      if (key.size() > prefix.size() &&
          std::string_view(key).substr(0, prefix.size()) == prefix)
        relations[key.substr(prefix.size())] = value;
    }
    if (!relations.empty()) c.rules.relation_keys = std::move(relations);
    c.rules.strip_verb_frames =
        kv.get_bool("extract.strip_verb_frames", c.rules.strip_verb_frames);
    c.rules.max_value_tokens = static_cast<int>(
        kv.get_i64("extract.max_value_tokens", c.rules.max_value_tokens));

    c.prune.chain = kv.get_list("prune.chain", c.prune.chain);
    c.prune.frequency_mode = frequency_mode_from(
        kv.get_str("prune.frequency_mode", frequency_mode_name(c.prune.frequency_mode)));
    c.prune.frequency_f =
        static_cast<int>(kv.get_i64("prune.frequency_f", c.prune.frequency_f));
    c.prune.range_lo = static_cast<int>(kv.get_i64("prune.range_lo", c.prune.range_lo));
    c.prune.range_hi = static_cast<int>(kv.get_i64("prune.range_hi", c.prune.range_hi));
    c.prune.balanced = kv.get_bool("prune.balanced", c.prune.balanced);
    c.prune.balanced_target = static_cast<int>(
        kv.get_i64("prune.balanced_target", c.prune.balanced_target));

    c.train.learning_rate = kv.get_f64("train.learning_rate", c.train.learning_rate);
    c.train.epochs = static_cast<int>(kv.get_i64("train.epochs", c.train.epochs));
    c.train.seed = kv.get_u64("train.seed", c.train.seed);
    c.train.activation_leak =
        kv.get_f64("train.activation_leak", c.train.activation_leak);
    c.train.init_scale = kv.get_f64("train.init_scale", c.train.init_scale);
    c.train.scorer =
        scorer_from(kv.get_str("train.scorer", scorer_name(c.train.scorer)));

    c.synth.classes = kv.get_list("synth.classes", c.labels);
    c.synth.sessions_per_class = static_cast<int>(
        kv.get_i64("synth.sessions_per_class", c.synth.sessions_per_class));
    c.synth.utterances_per_session = static_cast<int>(kv.get_i64(
        "synth.utterances_per_session", c.synth.utterances_per_session));
    c.synth.exclusive_per_class = static_cast<int>(
        kv.get_i64("synth.exclusive_per_class", c.synth.exclusive_per_class));
    c.synth.shared_predicates = static_cast<int>(
        kv.get_i64("synth.shared_predicates", c.synth.shared_predicates));
    c.synth.p_signal = kv.get_f64("synth.p_signal", c.synth.p_signal);
    c.synth.p_noise = kv.get_f64("synth.p_noise", c.synth.p_noise);
    c.synth.p_shared = kv.get_f64("synth.p_shared", c.synth.p_shared);
    c.synth.seed = kv.get_u64("synth.seed", c.synth.seed);
    return c;
  }

  // Canonical text of the effective configuration; hashed into run logs.
  std::string canonical() const {
    std::string s;
    s += "labels=" + join(labels, ",") + "\n";
    s += "split_fraction=" + fmt_g17(split_fraction) + "\n";
    s += "split_seed=" + std::to_string(split_seed) + "\n";
    s += "split_by_session=" + std::string(split_by_session ? "1" : "0") + "\n";
    for (const auto& [role, key] : rules.relation_keys)
      s += "relation_key." + role + "=" + key + "\n";
    s += "strip_verb_frames=" + std::string(rules.strip_verb_frames ? "1" : "0") + "\n";
    s += "max_value_tokens=" + std::to_string(rules.max_value_tokens) + "\n";
    s += "chain=" + join(prune.chain, ",") + "\n";
    s += "frequency_mode=" + frequency_mode_name(prune.frequency_mode) + "\n";
    s += "frequency_f=" + std::to_string(prune.frequency_f) + "\n";
    s += "range=" + std::to_string(prune.range_lo) + ".." +
         std::to_string(prune.range_hi) + "\n";
    s += "balanced=" + std::string(prune.balanced ? "1" : "0") + "/" +
         std::to_string(prune.balanced_target) + "\n";
    s += "learning_rate=" + fmt_g17(train.learning_rate) + "\n";
    s += "epochs=" + std::to_string(train.epochs) + "\n";
    s += "train_seed=" + std::to_string(train.seed) + "\n";
    s += "activation_leak=" + fmt_g17(train.activation_leak) + "\n";
    s += "init_scale=" + fmt_g17(train.init_scale) + "\n";
    s += "scorer=" + scorer_name(train.scorer) + "\n";
    s += "synth_classes=" + join(synth.classes, ",") + "\n";
    s += "synth=" + std::to_string(synth.sessions_per_class) + "," +
         std::to_string(synth.utterances_per_session) + "," +
         std::to_string(synth.exclusive_per_class) + "," +
         std::to_string(synth.shared_predicates) + "," + fmt_g17(synth.p_signal) +
         "," + fmt_g17(synth.p_noise) + "," + fmt_g17(synth.p_shared) + "," +
         std::to_string(synth.seed) + "\n";
    return s;
  }

  std::string config_hash() const { return hex64(fnv1a(canonical())); }
};

}  // namespace plc
