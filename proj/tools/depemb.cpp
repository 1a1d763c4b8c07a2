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

// depemb: enhance | extract | train | eval | pipeline
// Exit codes: 0 ok, 2 configuration, 3 data, 4 numeric, 1 anything else.

#include <CLI11.hpp>

#include <unistd.h>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "depemb/pipeline.hpp"

namespace {

using namespace depemb;

struct CommonOpts {
  std::string scheme = "universal";
  std::string level = "basic";
  std::string enhance_mode = "rules";
  std::string scheme_map;  // optional custom label map
  bool collapse_preps = false;
};

void add_common(CLI::App* app, CommonOpts& o) {
  app->add_option("--scheme", o.scheme, "Label scheme: stanford | universal")
      ->capture_default_str();
  app->add_option("--level", o.level,
                  "unlabeled | simplified | basic | enhanced | enhanced++")
      ->capture_default_str();
  app->add_option("--enhance-mode", o.enhance_mode,
                  "Where enhanced edges come from: rules | annotation")
      ->capture_default_str();
  app->add_option("--scheme-map", o.scheme_map,
                  "Custom label-class file (label<TAB>class) for simplified labels");
  app->add_flag("--collapse-preps", o.collapse_preps,
                "Collapse prep+pobj into prep_<word> (stanford only)");
}

struct Resolved {
  SchemeId id;
  EnhancementLevel level;
  EnhanceOptions enhance;
  LabelScheme scheme;
};

Resolved resolve(const CommonOpts& o) {
  Resolved r{parse_scheme_id(o.scheme), parse_level(o.level), {}, {}};
  r.enhance.mode = parse_enhance_mode(o.enhance_mode);
  r.enhance.scheme = r.id;
  if (o.collapse_preps && r.id != SchemeId::Stanford) {
    throw ConfigError("--collapse-preps applies to the stanford scheme only");
  }
  r.enhance.collapse_prepositions = o.collapse_preps;
  if (o.scheme_map.empty()) {
    r.scheme = builtin_scheme(r.id);
  } else {
    std::ifstream in(o.scheme_map);
    if (!in) throw ConfigError("cannot open scheme map " + o.scheme_map);
    r.scheme = load_custom_map(in);
  }
  return r;
}

void write_sidecar(const fs::path& output, const json& body) {
  fs::path side = output;
  side += ".manifest.json";
  json j = body;
  j["version"] = std::string(kVersion);
  j["output_digest"] = io::sha256_file(output);
  io::write_text_atomic(side, j.dump(2) + "\n");
}

// name=path, or a bare path named after its stem.
std::pair<std::string, fs::path> parse_named(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) return {fs::path(spec).stem().string(), fs::path(spec)};
  if (eq == 0) throw ConfigError("empty name in --vectors " + spec);
  return {spec.substr(0, eq), fs::path(spec.substr(eq + 1))};
}

void print_errors(const std::vector<std::string>& errors) {
  const std::size_t shown = std::min<std::size_t>(errors.size(), 10);
  for (std::size_t i = 0; i < shown; ++i) std::cerr << "  skipped: " << errors[i] << "\n";
  if (errors.size() > shown) {
    std::cerr << "  ... and " << errors.size() - shown << " more\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dependency-based word embeddings"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  // enhance
  CommonOpts enh_common;
  std::string enh_in, enh_out;
  auto* enhance = app.add_subcommand("enhance", "Rewrite a corpus at an enhancement level");
  enhance->add_option("-i,--input", enh_in, "Input CoNLL-U")->required();
  enhance->add_option("-o,--output", enh_out, "Output CoNLL-U")->required();
  add_common(enhance, enh_common);

  // extract
  CommonOpts ex_common;
  std::string ex_in, ex_out, inverse_marker = "-1";
  bool linear = false, include_punct = false, no_lowercase = false;
  int k = 5, ex_workers = 1;
  auto* extract = app.add_subcommand("extract", "Write (word, context) pairs");
  extract->add_option("-i,--input", ex_in, "Input corpus (CoNLL-U or tokenised text)")
      ->required();
  extract->add_option("-o,--output", ex_out, "Output pair file")->required();
  add_common(extract, ex_common);
  extract->add_flag("--linear", linear, "Linear window contexts instead of dependencies");
  extract->add_option("--k", k, "Window size for --linear")->capture_default_str();
  extract->add_option("--workers", ex_workers, "Worker threads")->capture_default_str();
  extract->add_flag("--include-punct", include_punct, "Keep punctuation edges");
  extract->add_flag("--no-lowercase", no_lowercase, "Keep original casing");
  extract->add_option("--inverse-marker", inverse_marker, "Suffix of inverse labels")
      ->capture_default_str();

  // train
  TrainerConfig tc;
  std::string tr_pairs, tr_corpus, tr_out, tr_ctx_out, model = "sgns";
  int tr_k = 5;
  bool tr_no_lowercase = false, tr_include_punct = false;
  auto* train = app.add_subcommand("train", "Train embeddings");
  auto* pairs_opt = train->add_option("--pairs", tr_pairs, "Pair file (SGNS)");
  auto* corpus_opt =
      train->add_option("--corpus", tr_corpus, "Corpus for --model cbow|skipgram");
  pairs_opt->excludes(corpus_opt);
  train->add_option("-o,--output", tr_out, "Output vector file")->required();
  train->add_option("--context-output", tr_ctx_out, "Also write context vectors");
  train->add_option("--model", model, "sgns (pairs) | cbow | skipgram (corpus)")
      ->capture_default_str();
  train->add_option("--k", tr_k, "Window size for corpus models")->capture_default_str();
  train->add_option("--dim", tc.dimension, "Dimension")->capture_default_str();
  train->add_option("--negatives", tc.negatives, "Negative samples")->capture_default_str();
  train->add_option("--subsample", tc.subsample_threshold, "Subsampling threshold")
      ->capture_default_str();
  train->add_option("--epochs", tc.epochs, "Epochs")->capture_default_str();
  train->add_option("--alpha", tc.initial_step_size, "Initial step size")
      ->capture_default_str();
  train->add_option("--power", tc.unigram_power, "Negative-sampling unigram power")
      ->capture_default_str();
  train->add_option("--min-count", tc.min_count, "Minimum count")->capture_default_str();
  train->add_option("--seed", tc.seed, "Random seed")->capture_default_str();
  train->add_option("--workers", tc.workers, "Worker threads")->capture_default_str();
  train->add_flag("--no-lowercase", tr_no_lowercase, "Keep casing (corpus models)");
  train->add_flag("--include-punct", tr_include_punct, "Keep punctuation (corpus models)");

  // eval
  std::vector<std::string> ev_vectors;
  DatasetPaths dp;
  std::string ws_sim, ws_rel, chiarello, simlex, ev_out, oov = "skip";
  bool lenient = false;
  auto* eval = app.add_subcommand("eval", "Evaluate vector files");
  eval->add_option("--vectors", ev_vectors, "NAME=PATH (repeatable)")->required();
  eval->add_option("--ws353-sim", ws_sim, "WS353 similarity split");
  eval->add_option("--ws353-rel", ws_rel, "WS353 relatedness split");
  eval->add_option("--chiarello", chiarello, "Chiarello pairs file");
  eval->add_option("--simlex", simlex, "SimLex-999 file");
  eval->add_option("--oov", oov, "skip | zero")->capture_default_str();
  eval->add_flag("--lenient", lenient, "Do not enforce the published pair counts");
  eval->add_flag("--allow-high-oov", dp.allow_high_oov, "Accept more than 50% OOV");
  eval->add_option("-o,--output-dir", ev_out, "Write report.json and report.txt here");

  // pipeline
  std::string config, pl_out;
  std::optional<int> pl_workers;
  std::optional<std::uint64_t> pl_seed;
  auto* pipeline = app.add_subcommand("pipeline", "Run extract, train and eval from a config");
  pipeline->add_option("-c,--config", config, "Run configuration (JSON)")->required();
  pipeline->add_option("-o,--output-dir", pl_out, "Override output_dir");
  pipeline->add_option("--workers", pl_workers, "Override workers");
  pipeline->add_option("--seed", pl_seed, "Override seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*enhance) {
      const Resolved r = resolve(enh_common);
      auto in = io::open_input(enh_in);
      std::vector<std::string> errors;
      io::write_file_atomic(enh_out, [&](std::ostream& out) {
        errors = enhance_file(in, out, r.level, r.scheme, r.enhance);
      });
      if (!errors.empty()) {
        std::cerr << errors.size() << " sentence(s) not written\n";
        print_errors(errors);
      }
    } else if (*extract) {
      const Resolved r = resolve(ex_common);
      ExtractionConfig cfg;
      cfg.level = r.level;
      cfg.scheme = r.scheme;
      cfg.enhance = r.enhance;
      cfg.lowercase = !no_lowercase;
      cfg.include_punct = include_punct;
      cfg.inverse_marker = inverse_marker;
      cfg.linear = linear;
      cfg.window_k = k;
      if (k < 1) throw ConfigError("--k must be at least 1");
      const auto report = extract_file(ex_in, ex_out, cfg, ex_workers);
      std::cerr << report.sentences_used << "/" << report.sentences_read
                << " sentences, " << report.pairs << " pairs";
      if (report.rewritten_tokens) {
        std::cerr << ", " << report.rewritten_tokens << " tokens with whitespace rewritten";
      }
      std::cerr << "\n";
      print_errors(report.errors);
      write_sidecar(ex_out, {{"command", "extract"},
                             {"input", ex_in},
                             {"input_digest", io::sha256_file(ex_in)},
                             {"scheme", ex_common.scheme},
                             {"level", std::string(to_string(r.level))},
                             {"enhance_mode", std::string(to_string(r.enhance.mode))},
                             {"linear", linear},
                             {"k", k},
                             {"report", extraction_report_json(report)}});
    } else if (*train) {
      tc.validate();
      const std::string m = strings::to_lower(model);
      json body = {{"command", "train"}, {"model", m}, {"trainer", trainer_to_json(tc)},
                   {"seed", tc.seed}, {"workers", tc.workers}};
      TrainOutcome outcome;
      std::optional<fs::path> ctx;
      if (!tr_ctx_out.empty()) ctx = fs::path(tr_ctx_out);
      if (m == "sgns" || m == "deps") {
        if (tr_pairs.empty()) throw ConfigError("--model sgns needs --pairs");
        outcome = train_pairs_file(tr_pairs, tr_out, tc, ctx);
        body["input"] = tr_pairs;
        body["input_digest"] = io::sha256_file(tr_pairs);
      } else {
        if (tr_corpus.empty()) throw ConfigError("--model " + m + " needs --corpus");
        if (tr_k < 1) throw ConfigError("--k must be at least 1");
        ExtractionConfig tokens;
        tokens.lowercase = !tr_no_lowercase;
        tokens.include_punct = tr_include_punct;
        body["input"] = tr_corpus;
        body["input_digest"] = io::sha256_file(tr_corpus);
        body["k"] = tr_k;
        if (parse_model_kind(m) == ModelKind::Cbow) {
          if (ctx) throw ConfigError("--context-output is not available for cbow");
          outcome = train_cbow_file(tr_corpus, tr_out, tc, tr_k, tokens);
        } else {
          PairList pairs;
          for (const auto& s : io::read_token_sentences(tr_corpus, tokens)) {
            auto p = linear_pairs(s, tr_k);
            pairs.insert(pairs.end(), p.begin(), p.end());
          }
          const PairCorpus corpus = build_pair_corpus(pairs, tc.min_count);
          auto result = train_sgns<float>(corpus, tc);
          io::write_file_atomic(tr_out, [&](std::ostream& out) {
            save_vectors(out, result.embeddings);
          });
          if (ctx) {
            io::write_file_atomic(*ctx, [&](std::ostream& out) {
              save_context_vectors(out, result.embeddings);
            });
          }
          outcome = {result.stats, corpus.words.size(), corpus.contexts.size(),
                     corpus.pairs.size()};
        }
      }
      body["stats"] = train_outcome_json(outcome);
      write_sidecar(tr_out, body);
      std::cerr << "trained " << outcome.vocabulary << " words over " << outcome.stats.steps
                << " updates, mean objective " << outcome.stats.mean_objective << "\n";
    } else if (*eval) {
      if (!ws_sim.empty()) dp.ws353_similarity = ws_sim;
      if (!ws_rel.empty()) dp.ws353_relatedness = ws_rel;
      if (!chiarello.empty()) dp.chiarello = chiarello;
      if (!simlex.empty()) dp.simlex = simlex;
      dp.strict = !lenient;
      dp.oov = parse_oov_policy(oov);
      std::vector<std::pair<std::string, fs::path>> named;
      for (const auto& spec : ev_vectors) named.push_back(parse_named(spec));
      fs::path out_dir = ev_out.empty() ? fs::path() : fs::path(ev_out);
      std::vector<EvalReport> reports;
      if (out_dir.empty()) {
        // No output directory: evaluate in a scratch location, print the table.
        const fs::path tmp = fs::temp_directory_path() /
                             ("depemb-eval-" + std::to_string(::getpid()));
        reports = eval_files(named, dp, tmp);
        fs::remove_all(tmp);
      } else {
        io::create_output_dir(out_dir);
        reports = eval_files(named, dp, out_dir);
      }
      std::vector<std::string> order;
      for (const auto& [name, path] : named) order.push_back(name);
      std::cout << format_report_table(reports, order);
      for (const auto& r : reports) {
        std::cout << r.embedding_id << " " << r.dataset << " " << r.metric << " = "
                  << r.value << " (used " << r.n_used << ", skipped " << r.n_skipped
                  << ", oov " << r.n_oov << ")\n";
      }
    } else if (*pipeline) {
      RunConfig cfg = load_run_config(config);
      if (!pl_out.empty()) cfg.output_dir = pl_out;
      if (pl_workers) cfg.workers = *pl_workers;
      if (pl_seed) cfg.seed = *pl_seed;
      Pipeline p(cfg, &std::cerr);
      const auto summary = p.run();
      std::cerr << summary.ran.size() << " stage(s) ran, " << summary.skipped.size()
                << " skipped\n";
      const fs::path table = cfg.output_dir / "reports" / "report.txt";
      if (fs::exists(table)) {
        std::ifstream in(table);
        std::cout << in.rdbuf();
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
