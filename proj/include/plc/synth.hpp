#pragma once

// Synthetic labeled corpora with planted per-class predicate signals. Each
// utterance samples its TRUE predicate set (class exclusives at p_signal in
// their own class, p_noise elsewhere; shared predicates at p_shared
// everywhere), then emits a PENMAN graph built so that predicate extraction
// under the default rules recovers exactly that set. Fully deterministic
// given the seed.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "plc/errors.hpp"
#include "plc/io.hpp"
#include "plc/penman.hpp"
#include "plc/predicates.hpp"
#include "plc/rng.hpp"
#include "plc/store.hpp"

namespace plc {

struct SynthConfig {
  std::vector<std::string> classes = {"anxiety", "depression", "suicidal",
                                      "schizophrenia"};
  int sessions_per_class = 12;
  int utterances_per_session = 20;
  int exclusive_per_class = 20;  // E
  int shared_predicates = 100;   // S
  double p_signal = 0.8;
  double p_noise = 0.05;
  double p_shared = 0.3;
  std::uint64_t seed = 1;

  void validate() const {
    if (classes.empty()) throw DataError("synth: class list must be non-empty");
    for (const auto& c : classes) check_label(c, "class label");
    if (sessions_per_class < 1 || utterances_per_session < 1)
      throw DataError("synth: session and utterance counts must be >= 1");
    if (exclusive_per_class < 0 || shared_predicates < 0)
      throw DataError("synth: predicate counts must be >= 0");
    if (!(p_noise >= 0 && p_noise < p_signal && p_signal <= 1))
      throw DataError("synth: require 0 <= p_noise < p_signal <= 1");
    if (!(p_shared >= 0 && p_shared <= 1))
      throw DataError("synth: p_shared must be in [0, 1]");
  }
};

struct SynthCorpus {
  std::vector<std::pair<std::string, std::string>> manifest;  // file -> class
  std::vector<std::pair<Predicate, std::string>> plants;  // exclusive -> class
  std::vector<Predicate> shared;
  std::vector<ParsedUtterance> truth;  // sampled TRUE sets, one per utterance
};

namespace synth_detail {

inline const std::vector<std::string>& wordlist() {
  static const std::vector<std::string> words = {
      "time",    "family",  "work",    "sleep",   "night",   "morning",
      "week",    "worry",   "thought", "feeling", "medication", "doctor",
      "session", "school",  "friend",  "mother",  "father",  "sister",
      "brother", "house",   "money",   "job",     "music",   "memory",
      "dream",   "voice",   "story",   "question", "answer", "plan",
      "walk",    "book",    "phone",   "letter",  "garden",  "road",
      "coffee",  "dinner",  "weather", "holiday", "future",  "past",
      "moment",  "breath",  "heart",   "mind",    "body",    "room",
      "window",  "door",    "table",   "picture", "journal", "routine",
      "habit",   "hobby",   "team",    "meeting", "visit",   "call"};
  return words;
}

inline const std::vector<std::string>& frame_keys() {
  static const std::vector<std::string> keys = {
      "have", "feel", "take", "see", "want",
      "talk", "get",  "give", "put", "do"};
  return keys;
}

// Every value is exactly three words, so distinct values never stand in
// token-containment relation and similarity pruning leaves plants alone. The
// index is scrambled through a bijection of [0, 60^3) so consecutive
// predicates do not share word prefixes.
inline std::string value_for(int index) {
  const auto& w = wordlist();
  const int n = static_cast<int>(w.size());
  const int space = n * n * n;
  int mixed = static_cast<int>((static_cast<long long>(index) * 100003) % space);
  int a = (mixed / (n * n)) % n;
  int b = (mixed / n) % n;
  int c = mixed % n;
  return w[static_cast<std::size_t>(a)] + " " + w[static_cast<std::size_t>(b)] +
         " " + w[static_cast<std::size_t>(c)];
}

inline Predicate predicate_for(int index) {
  const ExtractionRules rules;
  std::vector<std::string> keys = frame_keys();
  for (const auto& [role, key] : rules.relation_keys) keys.push_back(key);
  return {keys[static_cast<std::size_t>(index) % keys.size()],
          value_for(index)};
}

// Chain (v / tok1 :op1 (v / tok2 :op1 (v / tok3))), phrase = the value.
inline std::string attach_value_chain(AmrGraph& g, const std::string& value,
                                      int& var_counter) {
  std::string head;
  std::string prev;
  for (auto tok : split_view(value, ' ')) {
    std::string var = "v" + std::to_string(var_counter++);
    g.nodes.push_back({var, std::string(tok)});
    if (head.empty())
      head = var;
    else
      g.edges.push_back({prev, "op1", var, true});
    prev = var;
  }
  return head;
}

inline std::string emit_utterance(const std::string& sample_id,
                                  const std::string& sentence,
                                  const std::vector<Predicate>& true_preds) {
  const ExtractionRules rules;
  std::map<std::string, std::string> key_to_role;  // HAS_POSSESSION -> poss
  for (const auto& [role, key] : rules.relation_keys) key_to_role[key] = role;

  AmrGraph g;
  g.root = "r0";
  g.nodes.push_back({"r0", "multi-sentence"});
  g.metadata["id"] = sample_id;
  g.metadata["snt"] = sentence;

  int var_counter = 1;
  int snt_counter = 1;
  for (const auto& p : true_preds) {
    auto role_it = key_to_role.find(p.key);
    if (role_it != key_to_role.end()) {
      std::string head = attach_value_chain(g, p.value, var_counter);
      g.edges.push_back({"r0", role_it->second, head, true});
    } else {
      std::string frame_var = "f" + std::to_string(var_counter++);
      g.nodes.push_back({frame_var, p.key + "-01"});
      g.edges.push_back(
          {"r0", "snt" + std::to_string(snt_counter++), frame_var, true});
      std::string head = attach_value_chain(g, p.value, var_counter);
      g.edges.push_back({frame_var, "ARG1", head, true});
    }
  }
  return serialize_penman(g);
}

inline std::string sentence_for(const std::vector<Predicate>& true_preds) {
  if (true_preds.empty()) return "i had nothing more to say";
  std::vector<std::string> parts;
  for (std::size_t i = 0; i < true_preds.size() && i < 3; ++i)
    parts.push_back(true_preds[i].value);
  return "i talked about " + join(parts, " and ");
}

}  // namespace synth_detail

inline SynthCorpus generate_corpus(const SynthConfig& cfg,
                                   const std::filesystem::path& dir) {
  using namespace synth_detail;
  cfg.validate();
  std::filesystem::create_directories(dir);

  const int num_classes = static_cast<int>(cfg.classes.size());
  SynthCorpus corpus;

  // exclusives first, shared after: disjoint value index ranges
  std::vector<std::vector<Predicate>> exclusives(
      static_cast<std::size_t>(num_classes));
  int index = 0;
  for (int c = 0; c < num_classes; ++c)
    for (int e = 0; e < cfg.exclusive_per_class; ++e) {
      Predicate p = predicate_for(index++);
      exclusives[static_cast<std::size_t>(c)].push_back(p);
      corpus.plants.emplace_back(p, cfg.classes[static_cast<std::size_t>(c)]);
    }
  for (int s = 0; s < cfg.shared_predicates; ++s)
    corpus.shared.push_back(predicate_for(index++));

  Rng rng(cfg.seed);
  char name_buf[32];

  for (int c = 0; c < num_classes; ++c) {
    const std::string& cls = cfg.classes[static_cast<std::size_t>(c)];
    for (int s = 0; s < cfg.sessions_per_class; ++s) {
      std::snprintf(name_buf, sizeof name_buf, "_s%02d", s);
      std::string session = cls + name_buf;
      std::string file_name = session + ".amr";
      std::string file_text;

      for (int u = 0; u < cfg.utterances_per_session; ++u) {
        std::snprintf(name_buf, sizeof name_buf, "_u%02d", u);
        std::string sample_id = session + name_buf;

        std::vector<Predicate> true_preds;  // fixed sampling order
        for (int oc = 0; oc < num_classes; ++oc) {
          double p = oc == c ? cfg.p_signal : cfg.p_noise;
          for (const auto& pred : exclusives[static_cast<std::size_t>(oc)])
            if (rng.bernoulli(p)) true_preds.push_back(pred);
        }
        for (const auto& pred : corpus.shared)
          if (rng.bernoulli(cfg.p_shared)) true_preds.push_back(pred);

        std::string sentence = sentence_for(true_preds);
        if (u > 0) file_text += "\n";
        file_text += emit_utterance(sample_id, sentence, true_preds);
        file_text += "\n";

        ParsedUtterance rec;
        rec.sample_id = sample_id;
        rec.session_id = session;
        rec.class_label = cls;
        rec.sentence = sentence;
        rec.predicates = true_preds;
        std::sort(rec.predicates.begin(), rec.predicates.end());
        corpus.truth.push_back(std::move(rec));
      }
      write_file(dir / file_name, file_text);
      corpus.manifest.emplace_back(file_name, cls);
    }
  }

  if (corpus.truth.empty()) throw DataError("synth: configuration yields an empty corpus");

  ArtifactHeader mh{"manifest", 1, {}};
  std::string mtext = mh.line() + "\n";
  for (const auto& [file, cls] : corpus.manifest)
    mtext += file + "\t" + cls + "\n";
  write_file(dir / "manifest.tsv", mtext);

  ArtifactHeader ph{"plants", 1, {}};
  std::string ptext = ph.line() + "\n";
  for (const auto& [pred, cls] : corpus.plants)
    ptext += pred.name() + "\t" + cls + "\n";
  write_file(dir / "plants.tsv", ptext);

  return corpus;
}

}  // namespace plc
