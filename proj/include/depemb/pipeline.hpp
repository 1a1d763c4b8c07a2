/*
 * Copyright 2026 The depemb Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Run configuration, file-level stage drivers and the end-to-end pipeline
// (extract -> train -> eval) with digest-based stage skipping.
//
// Output layout of a pipeline run:
//   <out>/manifest.json
//   <out>/pairs/<variant>.pairs        <out>/pairs/<variant>.extract.json
//   <out>/vectors/<variant>.vec
//   <out>/reports/report.json          <out>/reports/report.txt

#pragma once

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include <json.hpp>

#include "depemb/common.hpp"
#include "depemb/conllu.hpp"
#include "depemb/contexts.hpp"
#include "depemb/eval.hpp"
#include "depemb/graph.hpp"
#include "depemb/report.hpp"
#include "depemb/scheme.hpp"
#include "depemb/trainer.hpp"
#include "depemb/vectors_io.hpp"

namespace depemb {

namespace fs = std::filesystem;
using nlohmann::json;

// --- files and digests ---------------------------------------------------

namespace io {

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) {
    out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return out.str();
}

inline std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) {
    out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return out.str();
}

inline std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open input file: " + path.string());
  return in;
}

// Writes through a sibling temporary file and renames it into place.
inline void write_file_atomic(const fs::path& path,
                              const std::function<void(std::ostream&)>& body) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  try {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    body(out);
    out.flush();
    if (!out) throw DataError("write failed for " + tmp.string());
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);  // no orphan on failure
    throw;
  }
  fs::rename(tmp, path);
}

inline void write_text_atomic(const fs::path& path, const std::string& text) {
  write_file_atomic(path, [&](std::ostream& out) { out << text; });
}

// Creates `dir` (and parents) so that it appears fully formed: a temporary
// sibling is created and renamed. An existing directory is reused.
inline void create_output_dir(const fs::path& dir) {
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) {
      throw ConfigError("output path exists and is not a directory: " + dir.string());
    }
    return;
  }
  const fs::path parent = dir.has_parent_path() ? dir.parent_path() : fs::path(".");
  fs::create_directories(parent);
  fs::path tmp = dir;
  tmp += ".partial";
  fs::remove_all(tmp);
  fs::create_directory(tmp);
  std::error_code ec;
  fs::rename(tmp, dir, ec);
  if (ec) {
    fs::remove_all(tmp);
    if (!fs::is_directory(dir)) {
      throw ConfigError("cannot create output directory " + dir.string() + ": " +
                        ec.message());
    }
  }
}

// Sentences of surface forms: CoNLL-U when the file ends in .conllu/.conll,
// otherwise one whitespace-tokenised sentence per line.
inline std::vector<std::vector<std::string>> read_token_sentences(
    const fs::path& path, const ExtractionConfig& cfg) {
  std::vector<std::vector<std::string>> out;
  auto in = open_input(path);
  const auto ext = path.extension().string();
  if (ext == ".conllu" || ext == ".conll") {
    ConlluReader reader(in);
    for (auto& result : reader) {
      if (auto* s = std::get_if<DepSentence>(&result)) {
        out.push_back(sentence_words(*s, cfg));
      }
    }
    return out;
  }
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> words;
    for (auto w : strings::split_ws(strings::trim(line))) {
      words.push_back(cfg.lowercase ? strings::to_lower(w) : std::string(w));
    }
    if (!words.empty()) out.push_back(std::move(words));
  }
  return out;
}

}  // namespace io

// --- configuration -------------------------------------------------------

enum class ModelKind { Dependency, Cbow, SkipGram };

inline std::string_view to_string(ModelKind m) {
  switch (m) {
    case ModelKind::Dependency:
      return "deps";
    case ModelKind::Cbow:
      return "cbow";
    case ModelKind::SkipGram:
      return "skipgram";
  }
  return "?";
}

inline ModelKind parse_model_kind(std::string_view name) {
  const auto lower = strings::to_lower(name);
  if (lower == "deps" || lower == "dependency") return ModelKind::Dependency;
  if (lower == "cbow") return ModelKind::Cbow;
  if (lower == "skipgram" || lower == "sgns" || lower == "skip-gram") {
    return ModelKind::SkipGram;
  }
  throw ConfigError("unknown model '" + std::string(name) +
                    "' (valid: deps, cbow, skipgram)");
}

struct ExtractionSettings {
  bool lowercase = true;
  bool include_punct = false;
  std::string inverse_marker = "-1";
  bool collapse_prepositions = false;
};

struct DatasetPaths {
  std::optional<fs::path> ws353_similarity;
  std::optional<fs::path> ws353_relatedness;
  std::optional<fs::path> chiarello;
  std::optional<fs::path> simlex;
  bool strict = true;
  OovPolicy oov = OovPolicy::Skip;
  bool allow_high_oov = false;

  bool any() const {
    return ws353_similarity || ws353_relatedness || chiarello || simlex;
  }
};

struct VariantConfig {
  std::string name;
  ModelKind model = ModelKind::Dependency;
  fs::path corpus;
  SchemeId scheme = SchemeId::Universal;
  EnhancementLevel level = EnhancementLevel::Basic;
  EnhanceMode enhance_mode = EnhanceMode::RuleEngine;
  int window_k = 5;
};

struct RunConfig {
  fs::path corpus;
  SchemeId scheme = SchemeId::Universal;
  EnhancementLevel level = EnhancementLevel::Basic;
  EnhanceMode enhance_mode = EnhanceMode::RuleEngine;
  ModelKind model = ModelKind::Dependency;
  int window_k = 5;
  ExtractionSettings extraction;
  TrainerConfig trainer;
  DatasetPaths datasets;
  fs::path output_dir;
  std::uint64_t seed = 1;
  int workers = 1;
  // Empty: a single variant built from the top-level fields.
  std::vector<VariantConfig> variants;

  std::vector<VariantConfig> resolved_variants() const {
    if (!variants.empty()) return variants;
    VariantConfig v;
    v.model = model;
    v.corpus = corpus;
    v.scheme = scheme;
    v.level = level;
    v.enhance_mode = enhance_mode;
    v.window_k = window_k;
    v.name = model == ModelKind::Dependency
                 ? std::string(to_string(scheme)) + "-" + std::string(to_string(level))
                 : std::string(to_string(model)) + "-k" + std::to_string(window_k);
    return {v};
  }

  TrainerConfig effective_trainer() const {
    TrainerConfig t = trainer;
    t.seed = seed;
    t.workers = workers;
    return t;
  }

  void validate() const {
    if (output_dir.empty()) throw ConfigError("output_dir is required");
    effective_trainer().validate();
    const auto vs = resolved_variants();
    std::vector<std::string> names;
    for (const auto& v : vs) {
      if (v.name.empty()) throw ConfigError("every variant needs a name");
      if (std::find(names.begin(), names.end(), v.name) != names.end()) {
        throw ConfigError("duplicate variant name '" + v.name + "'");
      }
      names.push_back(v.name);
      if (v.corpus.empty()) throw ConfigError("variant '" + v.name + "' has no corpus");
      if (!fs::exists(v.corpus)) {
        throw ConfigError("corpus not found: " + v.corpus.string());
      }
      if (v.window_k < 1) throw ConfigError("window must be at least 1");
      if (extraction.collapse_prepositions && v.model == ModelKind::Dependency &&
          v.scheme != SchemeId::Stanford) {
        throw ConfigError("collapse_prepositions applies to the stanford scheme only");
      }
    }
    for (const auto* p : {&datasets.ws353_similarity, &datasets.ws353_relatedness,
                          &datasets.chiarello, &datasets.simlex}) {
      if (*p && !fs::exists(**p)) {
        throw ConfigError("dataset file not found: " + (*p)->string());
      }
    }
    if (datasets.ws353_similarity.has_value() != datasets.ws353_relatedness.has_value()) {
      throw ConfigError("WS353 needs both the similarity and relatedness files");
    }
  }
};

inline ExtractionConfig make_extraction_config(const ExtractionSettings& s,
                                               const VariantConfig& v) {
  ExtractionConfig cfg;
  cfg.level = v.level;
  cfg.scheme = builtin_scheme(v.scheme);
  cfg.enhance.mode = v.enhance_mode;
  cfg.enhance.scheme = v.scheme;
  cfg.enhance.collapse_prepositions =
      s.collapse_prepositions && v.scheme == SchemeId::Stanford;
  cfg.lowercase = s.lowercase;
  cfg.include_punct = s.include_punct;
  cfg.inverse_marker = s.inverse_marker;
  cfg.linear = v.model != ModelKind::Dependency;
  cfg.window_k = v.window_k;
  return cfg;
}

// --- JSON form of the configuration ----------------------------------------

inline json trainer_to_json(const TrainerConfig& t) {
  return {{"dimension", t.dimension},
          {"negatives", t.negatives},
          {"subsample", t.subsample_threshold},
          {"epochs", t.epochs},
          {"step_size", t.initial_step_size},
          {"unigram_power", t.unigram_power},
          {"min_count", t.min_count},
          {"shuffle", t.shuffle}};
}

inline void trainer_from_json(const json& j, TrainerConfig& t) {
  t.dimension = j.value("dimension", t.dimension);
  t.negatives = j.value("negatives", t.negatives);
  t.subsample_threshold = j.value("subsample", t.subsample_threshold);
  t.epochs = j.value("epochs", t.epochs);
  t.initial_step_size = j.value("step_size", t.initial_step_size);
  t.unigram_power = j.value("unigram_power", t.unigram_power);
  t.min_count = j.value("min_count", t.min_count);
  t.shuffle = j.value("shuffle", t.shuffle);
}

inline json extraction_to_json(const ExtractionSettings& e) {
  return {{"lowercase", e.lowercase},
          {"include_punct", e.include_punct},
          {"inverse_marker", e.inverse_marker},
          {"collapse_prepositions", e.collapse_prepositions}};
}

inline json variant_to_json(const VariantConfig& v) {
  return {{"name", v.name},
          {"model", to_string(v.model)},
          {"corpus", v.corpus.string()},
          {"scheme", to_string(v.scheme)},
          {"level", to_string(v.level)},
          {"enhance_mode", to_string(v.enhance_mode)},
          {"window", v.window_k}};
}

inline json to_json(const RunConfig& c) {
  json datasets = json::object();
  auto put = [&](const char* key, const std::optional<fs::path>& p) {
    if (p) datasets[key] = p->string();
  };
  put("ws353_similarity", c.datasets.ws353_similarity);
  put("ws353_relatedness", c.datasets.ws353_relatedness);
  put("chiarello", c.datasets.chiarello);
  put("simlex", c.datasets.simlex);
  datasets["strict"] = c.datasets.strict;
  datasets["oov"] = c.datasets.oov == OovPolicy::Skip ? "skip" : "zero";
  datasets["allow_high_oov"] = c.datasets.allow_high_oov;
  json j = {{"corpus", c.corpus.string()},
            {"scheme", to_string(c.scheme)},
            {"level", to_string(c.level)},
            {"enhance_mode", to_string(c.enhance_mode)},
            {"model", to_string(c.model)},
            {"window", c.window_k},
            {"extraction", extraction_to_json(c.extraction)},
            {"trainer", trainer_to_json(c.trainer)},
            {"datasets", datasets},
            {"output_dir", c.output_dir.string()},
            {"seed", c.seed},
            {"workers", c.workers}};
  j["variants"] = json::array();
  for (const auto& v : c.variants) j["variants"].push_back(variant_to_json(v));
  return j;
}

// Relative paths are resolved against `base_dir` (the config file's folder).
inline RunConfig run_config_from_json(const json& j, const fs::path& base_dir = {}) {
  auto path_of = [&](const std::string& s) -> fs::path {
    fs::path p(s);
    if (p.empty() || p.is_absolute() || base_dir.empty()) return p;
    return (base_dir / p).lexically_normal();
  };
  try {
    RunConfig c;
    if (j.contains("corpus")) c.corpus = path_of(j.at("corpus").get<std::string>());
    if (j.contains("scheme")) c.scheme = parse_scheme_id(j.at("scheme").get<std::string>());
    if (j.contains("level")) c.level = parse_level(j.at("level").get<std::string>());
    if (j.contains("enhance_mode")) {
      c.enhance_mode = parse_enhance_mode(j.at("enhance_mode").get<std::string>());
    }
    if (j.contains("model")) c.model = parse_model_kind(j.at("model").get<std::string>());
    c.window_k = j.value("window", c.window_k);
    if (j.contains("extraction")) {
      const auto& e = j.at("extraction");
      c.extraction.lowercase = e.value("lowercase", c.extraction.lowercase);
      c.extraction.include_punct = e.value("include_punct", c.extraction.include_punct);
      c.extraction.inverse_marker = e.value("inverse_marker", c.extraction.inverse_marker);
      c.extraction.collapse_prepositions =
          e.value("collapse_prepositions", c.extraction.collapse_prepositions);
    }
    if (j.contains("trainer")) trainer_from_json(j.at("trainer"), c.trainer);
    if (j.contains("datasets")) {
      const auto& d = j.at("datasets");
      auto get = [&](const char* key) -> std::optional<fs::path> {
        if (!d.contains(key)) return std::nullopt;
        return path_of(d.at(key).get<std::string>());
      };
      c.datasets.ws353_similarity = get("ws353_similarity");
      c.datasets.ws353_relatedness = get("ws353_relatedness");
      c.datasets.chiarello = get("chiarello");
      c.datasets.simlex = get("simlex");
      c.datasets.strict = d.value("strict", true);
      c.datasets.oov = parse_oov_policy(d.value("oov", std::string("skip")));
      c.datasets.allow_high_oov = d.value("allow_high_oov", false);
    }
    if (j.contains("output_dir")) c.output_dir = path_of(j.at("output_dir").get<std::string>());
    c.seed = j.value("seed", c.seed);
    c.workers = j.value("workers", c.workers);
    if (j.contains("variants")) {
      for (const auto& vj : j.at("variants")) {
        VariantConfig v;
        v.model = parse_model_kind(vj.value("model", std::string(to_string(c.model))));
        v.corpus = vj.contains("corpus") ? path_of(vj.at("corpus").get<std::string>())
                                         : c.corpus;
        v.scheme = parse_scheme_id(vj.value("scheme", std::string(to_string(c.scheme))));
        v.level = parse_level(vj.value("level", std::string(to_string(c.level))));
        v.enhance_mode = parse_enhance_mode(
            vj.value("enhance_mode", std::string(to_string(c.enhance_mode))));
        v.window_k = vj.value("window", c.window_k);
        v.name = vj.value("name", std::string());
        c.variants.push_back(std::move(v));
      }
    }
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid run configuration: ") + e.what());
  }
}

inline RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return run_config_from_json(j, path.parent_path());
}

// --- stage drivers (shared by the CLI subcommands and the pipeline) --------

inline json extraction_report_json(const ExtractionReport& r) {
  return {{"sentences_read", r.sentences_read},
          {"sentences_used", r.sentences_used},
          {"pairs", r.pairs},
          {"rewritten_tokens", r.rewritten_tokens},
          {"errors", r.errors}};
}

// Rewrites a corpus so its DEPREL/DEPS columns carry the requested level.
// Sentences that cannot be transformed are reported and left out.
inline std::vector<std::string> enhance_file(std::istream& in, std::ostream& out,
                                             EnhancementLevel level,
                                             const LabelScheme& scheme,
                                             const EnhanceOptions& opts) {
  std::vector<std::string> errors;
  ConlluReader reader(in);
  for (auto& result : reader) {
    if (auto* err = std::get_if<ParseError>(&result)) {
      errors.push_back(err->describe());
      continue;
    }
    try {
      write_conllu(out, materialize_level(std::get<DepSentence>(result), level,
                                          scheme, opts));
    } catch (const SentenceError& e) {
      errors.push_back(e.what());
    }
  }
  return errors;
}

// Writes the pair file for `cfg` from a CoNLL-U corpus (or, for linear
// contexts, a plain token file).
inline ExtractionReport extract_file(const fs::path& input, const fs::path& output,
                                     const ExtractionConfig& cfg, int workers) {
  ExtractionReport report;
  if (!fs::exists(input)) throw ConfigError("cannot open input file: " + input.string());
  const auto ext = input.extension().string();
  const bool conllu = ext == ".conllu" || ext == ".conll";
  io::write_file_atomic(output, [&](std::ostream& out) {
    if (conllu) {
      auto in = io::open_input(input);
      report = extract_corpus(in, out, cfg, workers);
    } else {
      if (!cfg.linear) {
        throw ConfigError("dependency contexts need a CoNLL-U corpus (.conllu): " +
                          input.string());
      }
      for (const auto& words : io::read_token_sentences(input, cfg)) {
        ++report.sentences_read;
        ++report.sentences_used;
        auto pairs = linear_pairs(words, cfg.window_k);
        report.pairs += pairs.size();
        report.rewritten_tokens += write_pairs(pairs, out);
      }
    }
    // inside the writer so that nothing is left behind
    if (report.pairs == 0) {
      throw DataError("no context pairs extracted from " + input.string() +
                      (report.errors.empty() ? std::string()
                                             : "; first error: " + report.errors.front()));
    }
  });
  return report;
}

struct TrainOutcome {
  TrainStats stats;
  std::size_t vocabulary = 0;
  std::size_t contexts = 0;
  std::uint64_t pairs = 0;
};

inline json train_outcome_json(const TrainOutcome& o) {
  json deciles = json::array();
  for (double d : o.stats.decile_objective) deciles.push_back(d);
  return {{"steps", o.stats.steps},
          {"mean_objective", o.stats.mean_objective},
          {"decile_objective", deciles},
          {"vocabulary", o.vocabulary},
          {"contexts", o.contexts},
          {"pairs", o.pairs}};
}

// SGNS over a pair file.
inline TrainOutcome train_pairs_file(const fs::path& pairs, const fs::path& vectors,
                                     const TrainerConfig& cfg,
                                     const std::optional<fs::path>& context_vectors = {}) {
  cfg.validate();
  const PairCorpus corpus = build_pair_corpus(pairs, cfg.min_count);
  auto result = train_sgns<float>(corpus, cfg);
  io::write_file_atomic(vectors, [&](std::ostream& out) {
    save_vectors(out, result.embeddings);
  });
  if (context_vectors) {
    io::write_file_atomic(*context_vectors, [&](std::ostream& out) {
      save_context_vectors(out, result.embeddings);
    });
  }
  return {result.stats, corpus.words.size(), corpus.contexts.size(), corpus.pairs.size()};
}

// CBOW over a token corpus.
inline TrainOutcome train_cbow_file(const fs::path& corpus, const fs::path& vectors,
                                    const TrainerConfig& cfg, int window_k,
                                    const ExtractionConfig& tokens_cfg) {
  cfg.validate();
  const auto sentences = io::read_token_sentences(corpus, tokens_cfg);
  auto result = train_cbow<float>(sentences, cfg, window_k);
  io::write_file_atomic(vectors, [&](std::ostream& out) {
    save_vectors(out, result.embeddings);
  });
  std::uint64_t tokens = 0;
  for (const auto& s : sentences) tokens += s.size();
  return {result.stats, result.embeddings.word_vocab.size(),
          result.embeddings.word_vocab.size(), tokens};
}

inline std::vector<EvalDataset> load_datasets(const DatasetPaths& paths) {
  std::vector<EvalDataset> out;
  LoadOptions opts;
  opts.strict = paths.strict;
  auto open = [](const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw ConfigError("dataset file not found: " + p.string());
    return in;
  };
  if (paths.ws353_similarity || paths.ws353_relatedness) {
    if (!paths.ws353_similarity || !paths.ws353_relatedness) {
      throw ConfigError("WS353 needs both the similarity and relatedness files");
    }
    auto sim = open(*paths.ws353_similarity);
    auto rel = open(*paths.ws353_relatedness);
    out.push_back(load_ws353(sim, rel, opts));
  }
  if (paths.chiarello) {
    auto in = open(*paths.chiarello);
    out.push_back(load_chiarello(in, opts));
  }
  if (paths.simlex) {
    auto in = open(*paths.simlex);
    out.push_back(load_simlex(in, opts));
  }
  for (auto& d : out) d.oov_policy = paths.oov;
  return out;
}

// Evaluates each named vector file on every dataset and writes
// report.json and report.txt into `out_dir`.
inline std::vector<EvalReport> eval_files(
    const std::vector<std::pair<std::string, fs::path>>& vectors,
    const DatasetPaths& paths, const fs::path& out_dir) {
  const auto datasets = load_datasets(paths);
  if (datasets.empty()) throw ConfigError("no evaluation datasets given");
  EvalOptions opts;
  opts.allow_high_oov = paths.allow_high_oov;
  std::vector<EvalReport> reports;
  std::vector<std::string> order;
  for (const auto& [id, path] : vectors) {
    auto in = io::open_input(path);
    const auto set = load_vectors<float>(in);
    order.push_back(id);
    for (const auto& d : datasets) {
      EvalReport r = evaluate(set, d, opts);
      r.embedding_id = id;
      reports.push_back(std::move(r));
    }
  }
  io::write_text_atomic(out_dir / "report.json", reports_to_json(reports).dump(2) + "\n");
  io::write_text_atomic(out_dir / "report.txt", format_report_table(reports, order));
  return reports;
}

// --- pipeline --------------------------------------------------------------

// Rethrows the active exception with `stage` prefixed, keeping its category.
[[noreturn]] inline void rethrow_in_stage(const std::string& stage) {
  try {
    throw;
  } catch (const ConfigError& e) {
    throw ConfigError("stage " + stage + ": " + e.what());
  } catch (const NumericError& e) {
    throw NumericError("stage " + stage + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError("stage " + stage + ": " + e.what());
  } catch (const fs::filesystem_error& e) {
    throw DataError("stage " + stage + ": " + e.what());
  } catch (const Error& e) {
    throw Error("stage " + stage + ": " + e.what());
  }
}

struct PipelineSummary {
  std::vector<std::string> ran;
  std::vector<std::string> skipped;
  std::vector<EvalReport> reports;
};

class Pipeline {
 public:
  explicit Pipeline(RunConfig cfg, std::ostream* log = nullptr)
      : cfg_(std::move(cfg)), log_(log) {}

  PipelineSummary run() {
    cfg_.validate();
    io::create_output_dir(cfg_.output_dir);
    load_manifest();
    manifest_["version"] = std::string(kVersion);
    manifest_["config"] = to_json(cfg_);
    if (!manifest_.contains("stages")) manifest_["stages"] = json::object();

    PipelineSummary summary;
    const auto variants = cfg_.resolved_variants();
    const TrainerConfig trainer = cfg_.effective_trainer();
    json corpus_digests = json::object();
    std::vector<std::pair<std::string, fs::path>> vector_files;
    std::vector<std::string> vector_digests;
    bool any_train_ran = false;

    for (const auto& v : variants) {
      const std::string corpus_digest = io::sha256_file(v.corpus);
      corpus_digests[v.corpus.string()] = corpus_digest;
      const ExtractionConfig ecfg = make_extraction_config(cfg_.extraction, v);
      std::string upstream = corpus_digest;
      bool upstream_ran = false;

      if (v.model != ModelKind::Dependency && v.model != ModelKind::SkipGram) {
        // CBOW reads the corpus directly.
      } else {
        const std::string key = "extract/" + v.name;
        const fs::path pairs = rel("pairs/" + v.name + ".pairs");
        const fs::path report = rel("pairs/" + v.name + ".extract.json");
        const std::string input = io::sha256_hex(
            key + "\n" + corpus_digest + "\n" + variant_to_json(v).dump() + "\n" +
            extraction_to_json(cfg_.extraction).dump());
        upstream_ran = run_stage(summary, key, input, {pairs, report}, false, [&] {
          const auto r = extract_file(v.corpus, abs(pairs), ecfg, cfg_.workers);
          io::write_text_atomic(abs(report), extraction_report_json(r).dump(2) + "\n");
          return json{{"sentences_used", r.sentences_used},
                      {"pairs", r.pairs},
                      {"errors", r.errors.size()}};
        });
        upstream = output_digest(key, pairs);
      }

      const std::string key = "train/" + v.name;
      const fs::path vec = rel("vectors/" + v.name + ".vec");
      const std::string input = io::sha256_hex(
          key + "\n" + upstream + "\n" + variant_to_json(v).dump() + "\n" +
          trainer_to_json(trainer).dump() + "\nseed=" + std::to_string(trainer.seed) +
          "\nworkers=" + std::to_string(trainer.workers));
      const bool ran = run_stage(summary, key, input, {vec}, upstream_ran, [&] {
        TrainOutcome o;
        if (v.model == ModelKind::Cbow) {
          o = train_cbow_file(v.corpus, abs(vec), trainer, v.window_k, ecfg);
        } else {
          o = train_pairs_file(abs(rel("pairs/" + v.name + ".pairs")), abs(vec), trainer);
        }
        return train_outcome_json(o);
      });
      any_train_ran = any_train_ran || ran;
      vector_files.emplace_back(v.name, abs(vec));
      vector_digests.push_back(output_digest(key, vec));
    }
    manifest_["corpus_digests"] = corpus_digests;
    save_manifest();

    if (cfg_.datasets.any()) {
      const std::string key = "eval";
      std::string input = key;
      for (std::size_t i = 0; i < vector_files.size(); ++i) {
        input += "\n" + vector_files[i].first + "=" + vector_digests[i];
      }
      for (const auto* p : {&cfg_.datasets.ws353_similarity, &cfg_.datasets.ws353_relatedness,
                            &cfg_.datasets.chiarello, &cfg_.datasets.simlex}) {
        input += "\n" + (*p ? io::sha256_file(**p) : std::string("-"));
      }
      input += "\nstrict=" + std::to_string(cfg_.datasets.strict) +
               " oov=" + std::to_string(static_cast<int>(cfg_.datasets.oov)) +
               " allow=" + std::to_string(cfg_.datasets.allow_high_oov);
      const fs::path rj = rel("reports/report.json");
      const fs::path rt = rel("reports/report.txt");
      run_stage(summary, key, io::sha256_hex(input), {rj, rt}, any_train_ran, [&] {
        summary.reports = eval_files(vector_files, cfg_.datasets, abs("reports"));
        return json{{"rows", summary.reports.size()}};
      });
    }
    return summary;
  }

  const json& manifest() const { return manifest_; }

 private:
  fs::path rel(const std::string& p) const { return fs::path(p); }
  fs::path abs(const fs::path& p) const { return cfg_.output_dir / p; }
  fs::path manifest_path() const { return cfg_.output_dir / "manifest.json"; }

  void load_manifest() {
    manifest_ = json::object();
    std::ifstream in(manifest_path());
    if (!in) return;
    try {
      in >> manifest_;
    } catch (const json::exception&) {
      manifest_ = json::object();  // unreadable manifest: rerun everything
    }
  }

  void save_manifest() {
    io::write_text_atomic(manifest_path(), manifest_.dump(2) + "\n");
  }

  std::string output_digest(const std::string& key, const fs::path& p) const {
    const auto& stage = manifest_["stages"][key];
    return stage["outputs"][p.string()].get<std::string>();
  }

  bool up_to_date(const std::string& key, const std::string& input,
                  const std::vector<fs::path>& outputs) const {
    const auto& stages = manifest_["stages"];
    if (!stages.contains(key)) return false;
    const auto& s = stages[key];
    if (s.value("input_digest", std::string()) != input) return false;
    for (const auto& p : outputs) {
      const fs::path full = abs(p);
      if (!fs::exists(full)) return false;
      if (!s["outputs"].contains(p.string())) return false;
      if (io::sha256_file(full) != s["outputs"][p.string()].get<std::string>()) {
        return false;
      }
    }
    return true;
  }

  // Returns true when the stage actually ran.
  bool run_stage(PipelineSummary& summary, const std::string& key,
                 const std::string& input, const std::vector<fs::path>& outputs,
                 bool force, const std::function<json()>& body) {
    if (!force && up_to_date(key, input, outputs)) {
      summary.skipped.push_back(key);
      if (log_) *log_ << "[skip] " << key << "\n";
      return false;
    }
    if (log_) *log_ << "[run]  " << key << "\n" << std::flush;
    const auto start = std::chrono::steady_clock::now();
    json details;
    try {
      details = body();
    } catch (...) {
      save_manifest();
      rethrow_in_stage(key);
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json outs = json::object();
    for (const auto& p : outputs) outs[p.string()] = io::sha256_file(abs(p));
    manifest_["stages"][key] = {{"input_digest", input},
                                {"outputs", outs},
                                {"details", details},
                                {"wall_seconds", secs}};
    save_manifest();
    summary.ran.push_back(key);
    return true;
  }

  RunConfig cfg_;
  std::ostream* log_;
  json manifest_;
};

}  // namespace depemb
