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

// Intrinsic evaluation: benchmark loaders, cosine scoring, similarity-over-
// relatedness average precision and Spearman correlation.

#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "depemb/common.hpp"
#include "depemb/trainer.hpp"

namespace depemb {

enum class RelationClass { Similar, Related };
enum class PartOfSpeech { Noun, Adjective, Verb };
enum class DatasetKind { SimRel, Ranked };
enum class OovPolicy { Skip, ZeroVector };

inline std::string_view to_string(PartOfSpeech pos) {
  switch (pos) {
    case PartOfSpeech::Noun:
      return "noun";
    case PartOfSpeech::Adjective:
      return "adj";
    case PartOfSpeech::Verb:
      return "verb";
  }
  return "?";
}

inline OovPolicy parse_oov_policy(std::string_view name) {
  const auto lower = strings::to_lower(name);
  if (lower == "skip") return OovPolicy::Skip;
  if (lower == "zero" || lower == "zero-vector") return OovPolicy::ZeroVector;
  throw ConfigError("unknown OOV policy '" + std::string(name) +
                    "' (valid: skip, zero)");
}

struct WordPairRecord {
  std::string word1;
  std::string word2;
  std::optional<double> gold_score;
  std::optional<RelationClass> relation;
  std::optional<PartOfSpeech> pos;
};

struct EvalDataset {
  std::string name;
  DatasetKind kind = DatasetKind::SimRel;
  std::vector<WordPairRecord> records;
  OovPolicy oov_policy = OovPolicy::Skip;

  std::size_t count(RelationClass c) const {
    return static_cast<std::size_t>(std::count_if(
        records.begin(), records.end(),
        [c](const auto& r) { return r.relation == c; }));
  }
  std::size_t count(PartOfSpeech p) const {
    return static_cast<std::size_t>(std::count_if(
        records.begin(), records.end(),
        [p](const auto& r) { return r.pos == p; }));
  }
};

struct LoadOptions {
  // WS353: minimum score (on the 0-10 scale) for a pair to be kept.
  double threshold = 5.0;
  // Reject files whose filtered counts differ from the published ones.
  bool strict = true;
};

inline constexpr std::size_t kWs353Similar = 90;
inline constexpr std::size_t kWs353Related = 147;
inline constexpr std::size_t kChiarelloSimilar = 48;
inline constexpr std::size_t kChiarelloRelated = 48;
inline constexpr std::size_t kSimlexNouns = 666;
inline constexpr std::size_t kSimlexAdjectives = 111;
inline constexpr std::size_t kSimlexVerbs = 222;

namespace eval_detail {

struct ScoredRow {
  std::string word1, word2;
  double score;
};

// `word1 word2 score` rows; a non-numeric score on the first line is taken
// as a header.
inline std::vector<ScoredRow> read_scored(std::istream& in,
                                          std::string_view what) {
  std::vector<ScoredRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto body = strings::trim(line);
    if (body.empty() || body.front() == '#') continue;
    auto f = strings::split_ws(body);
    auto score = f.size() == 3 ? strings::parse_double(f[2]) : std::nullopt;
    if (!score) {
      if (line_no == 1) continue;
      throw DataError(std::string(what) + " line " + std::to_string(line_no) +
                      ": expected 'word1 word2 score'");
    }
    rows.push_back({std::string(f[0]), std::string(f[1]), *score});
  }
  return rows;
}

}  // namespace eval_detail

// WordSim-353 split into its similarity- and relatedness-annotated subsets.
// Pairs scoring at least `threshold` are kept from each subset.
inline EvalDataset load_ws353(std::istream& similarity, std::istream& relatedness,
                              const LoadOptions& opts = {}) {
  EvalDataset ds;
  ds.name = "ws353";
  ds.kind = DatasetKind::SimRel;
  for (auto& r : eval_detail::read_scored(similarity, "WS353 similarity")) {
    if (r.score >= opts.threshold) {
      ds.records.push_back({r.word1, r.word2, r.score, RelationClass::Similar, {}});
    }
  }
  for (auto& r : eval_detail::read_scored(relatedness, "WS353 relatedness")) {
    if (r.score >= opts.threshold) {
      ds.records.push_back({r.word1, r.word2, r.score, RelationClass::Related, {}});
    }
  }
  const auto sim = ds.count(RelationClass::Similar);
  const auto rel = ds.count(RelationClass::Related);
  if (opts.strict && (sim != kWs353Similar || rel != kWs353Related)) {
    throw DataError("WS353 filtering kept " + std::to_string(sim) +
                    " similar / " + std::to_string(rel) +
                    " related pairs, expected 90 / 147; check the input files");
  }
  return ds;
}

// Chiarello pairs as `word1 word2 class`, class in {similar, related, both}.
// Pairs marked both are dropped.
inline EvalDataset load_chiarello(std::istream& in, const LoadOptions& opts = {}) {
  EvalDataset ds;
  ds.name = "chiarello";
  ds.kind = DatasetKind::SimRel;
  std::string line;
  std::size_t line_no = 0;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto body = strings::trim(line);
    if (body.empty() || body.front() == '#') continue;
    auto f = strings::split_ws(body);
    const std::string cls = f.size() == 3 ? strings::to_lower(f[2]) : "";
    if (cls == "class" && line_no == 1) continue;
    ++rows;
    if (cls == "both") continue;
    if (cls != "similar" && cls != "related") {
      throw DataError("Chiarello line " + std::to_string(line_no) +
                      ": expected 'word1 word2 similar|related|both'");
    }
    ds.records.push_back({std::string(f[0]), std::string(f[1]), std::nullopt,
                          cls == "similar" ? RelationClass::Similar
                                           : RelationClass::Related,
                          {}});
  }
  if (rows == 0) throw DataError("Chiarello file contains no pairs");
  const auto sim = ds.count(RelationClass::Similar);
  const auto rel = ds.count(RelationClass::Related);
  if (opts.strict && (sim != kChiarelloSimilar || rel != kChiarelloRelated)) {
    throw DataError("Chiarello filtering kept " + std::to_string(sim) +
                    " similar / " + std::to_string(rel) +
                    " related pairs, expected 48 / 48; check the input file");
  }
  return ds;
}

// SimLex-999 in its distributed tab-separated layout; columns are located by
// the header names word1, word2, POS and SimLex999.
inline EvalDataset load_simlex(std::istream& in, const LoadOptions& opts = {}) {
  EvalDataset ds;
  ds.name = "simlex999";
  ds.kind = DatasetKind::Ranked;
  std::string line;
  if (!std::getline(in, line)) throw DataError("SimLex file is empty");
  const auto header = strings::split(strings::trim(line), '\t');
  auto column = [&](std::string_view name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (strings::to_lower(strings::trim(header[i])) == strings::to_lower(name)) {
        return i;
      }
    }
    throw DataError("SimLex header lacks a '" + std::string(name) + "' column");
  };
  const std::size_t c1 = column("word1"), c2 = column("word2"),
                    cp = column("POS"), cs = column("SimLex999");
  const std::size_t needed = std::max({c1, c2, cp, cs}) + 1;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    auto body = strings::trim(line);
    if (body.empty()) continue;
    auto f = strings::split(body, '\t');
    if (f.size() < needed) {
      throw DataError("SimLex line " + std::to_string(line_no) +
                      ": too few columns");
    }
    auto score = strings::parse_double(strings::trim(f[cs]));
    const auto pos = strings::trim(f[cp]);
    std::optional<PartOfSpeech> p;
    if (pos == "N") p = PartOfSpeech::Noun;
    if (pos == "A") p = PartOfSpeech::Adjective;
    if (pos == "V") p = PartOfSpeech::Verb;
    if (!score || !p) {
      throw DataError("SimLex line " + std::to_string(line_no) +
                      ": bad POS or score");
    }
    ds.records.push_back({std::string(strings::trim(f[c1])),
                          std::string(strings::trim(f[c2])), *score,
                          std::nullopt, p});
  }
  const auto n = ds.count(PartOfSpeech::Noun);
  const auto a = ds.count(PartOfSpeech::Adjective);
  const auto v = ds.count(PartOfSpeech::Verb);
  if (opts.strict && (n != kSimlexNouns || a != kSimlexAdjectives ||
                      v != kSimlexVerbs)) {
    throw DataError("SimLex POS partition is " + std::to_string(n) + "/" +
                    std::to_string(a) + "/" + std::to_string(v) +
                    ", expected 666/111/222 (999 pairs)");
  }
  return ds;
}

// --- metrics -------------------------------------------------------------

// Cosine similarity. A zero vector scores 0 and bumps `zero_count`.
template <typename Real>
double cosine(std::span<const Real> u, std::span<const Real> v,
              std::size_t* zero_count = nullptr) {
  if (u.size() != v.size()) {
    throw DataError("cosine of vectors with dimensions " +
                    std::to_string(u.size()) + " and " +
                    std::to_string(v.size()));
  }
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = static_cast<double>(u[i]);
    const double b = static_cast<double>(v[i]);
    dot += a * b;
    nu += a * a;
    nv += b * b;
  }
  if (nu == 0.0 || nv == 0.0) {
    if (zero_count) ++*zero_count;
    return 0.0;
  }
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

struct ScoredPair {
  double score = 0.0;
  bool similar = false;  // positive class
};

// Average precision with "similar" as the positive class, ranking by
// descending score. Tied scores are resolved in expectation over every
// ordering of the tied block, which keeps the value independent of input
// order. For a tied block of m items holding p positives, preceded by s items
// of which P are positive, the expected precision summed over its positives
// is
//   p / m * sum_{r=1..m} (P + 1 + (r - 1)(p - 1)/(m - 1)) / (s + r).
inline double pr_auc_sim_over_rel(std::vector<ScoredPair> scores) {
  const auto positives = static_cast<std::size_t>(std::count_if(
      scores.begin(), scores.end(), [](const auto& x) { return x.similar; }));
  if (positives == 0 || positives == scores.size()) {
    throw DataError("sim/rel AUC needs at least one similar and one related pair");
  }
  for (const auto& x : scores) {
    if (!std::isfinite(x.score)) throw DataError("non-finite score in sim/rel AUC");
  }
  std::stable_sort(scores.begin(), scores.end(),
                   [](const auto& a, const auto& b) { return a.score > b.score; });
  double total = 0.0;
  std::size_t before = 0;
  std::size_t pos_before = 0;
  for (std::size_t i = 0; i < scores.size();) {
    std::size_t j = i;
    std::size_t p = 0;
    while (j < scores.size() && scores[j].score == scores[i].score) {
      p += scores[j].similar ? 1 : 0;
      ++j;
    }
    const std::size_t m = j - i;
    if (p > 0) {
      double expected = 0.0;
      for (std::size_t r = 1; r <= m; ++r) {
        const double others =
            m > 1 ? static_cast<double>((r - 1) * (p - 1)) / static_cast<double>(m - 1)
                  : 0.0;
        expected += (static_cast<double>(pos_before) + 1.0 + others) /
                    static_cast<double>(before + r);
      }
      total += static_cast<double>(p) * expected / static_cast<double>(m);
    }
    before += m;
    pos_before += p;
    i = j;
  }
  return total / static_cast<double>(positives);
}

// 1-based fractional ranks; ties share their average rank.
inline std::vector<double> fractional_ranks(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
    i = j;
  }
  return ranks;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

inline double spearman(const std::vector<double>& predicted,
                       const std::vector<double>& gold) {
  if (predicted.size() != gold.size()) {
    throw DataError("spearman: predicted and gold lengths differ");
  }
  if (predicted.size() < 2) throw DataError("spearman needs at least two pairs");
  auto constant = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
  };
  if (constant(predicted)) throw DataError("spearman: predicted scores are constant");
  if (constant(gold)) throw DataError("spearman: gold scores are constant");
  return std::clamp(pearson(fractional_ranks(predicted), fractional_ranks(gold)),
                    -1.0, 1.0);
}

// --- evaluation ----------------------------------------------------------

struct EvalReport {
  std::string embedding_id;
  std::string dataset;
  std::string metric;  // "sim_rel_auc" or "spearman"
  double value = 0.0;
  std::size_t n_used = 0;
  std::size_t n_skipped = 0;
  std::size_t n_oov = 0;
  std::size_t zero_vectors = 0;
  // Ranked datasets only: per-POS correlations (absent when undefined).
  std::map<std::string, std::optional<double>> per_pos;
};

struct EvalOptions {
  std::optional<OovPolicy> oov_policy;  // overrides the dataset's policy
  // Evaluate even when more than half of the pairs are out of vocabulary.
  bool allow_high_oov = false;
};

namespace eval_detail {

template <typename Real>
std::optional<std::span<const Real>> lookup(const EmbeddingSet<Real>& set,
                                            const std::string& word) {
  if (auto v = set.vector(word)) return v;
  const auto lower = strings::to_lower(word);
  if (lower != word) return set.vector(lower);
  return std::nullopt;
}

}  // namespace eval_detail

template <typename Real>
EvalReport evaluate(const EmbeddingSet<Real>& set, const EvalDataset& dataset,
                    const EvalOptions& opts = {}) {
  const OovPolicy policy = opts.oov_policy.value_or(dataset.oov_policy);
  EvalReport report;
  report.dataset = dataset.name;
  report.metric = dataset.kind == DatasetKind::SimRel ? "sim_rel_auc" : "spearman";

  struct Scored {
    const WordPairRecord* record;
    double score;
  };
  std::vector<Scored> used;
  for (const auto& r : dataset.records) {
    auto a = eval_detail::lookup(set, r.word1);
    auto b = eval_detail::lookup(set, r.word2);
    if (!a || !b) {
      ++report.n_oov;
      if (policy == OovPolicy::Skip) {
        ++report.n_skipped;
        continue;
      }
      ++report.zero_vectors;
      used.push_back({&r, 0.0});
      continue;
    }
    used.push_back({&r, cosine<Real>(*a, *b, &report.zero_vectors)});
  }
  report.n_used = used.size();
  if (!opts.allow_high_oov && report.n_oov * 2 > dataset.records.size()) {
    throw DataError(dataset.name + ": " + std::to_string(report.n_oov) + " of " +
                    std::to_string(dataset.records.size()) +
                    " pairs are out of vocabulary (over 50%)");
  }

  if (dataset.kind == DatasetKind::SimRel) {
    std::vector<ScoredPair> scored;
    for (const auto& u : used) {
      scored.push_back({u.score, u.record->relation == RelationClass::Similar});
    }
    report.value = pr_auc_sim_over_rel(std::move(scored));
    return report;
  }

  auto correlate = [&](std::optional<PartOfSpeech> pos) -> std::optional<double> {
    std::vector<double> pred, gold;
    for (const auto& u : used) {
      if (pos && u.record->pos != pos) continue;
      pred.push_back(u.score);
      gold.push_back(u.record->gold_score.value_or(0.0));
    }
    try {
      return spearman(pred, gold);
    } catch (const DataError&) {
      if (!pos) throw;
      return std::nullopt;
    }
  };
  report.value = *correlate(std::nullopt);
  for (auto pos : {PartOfSpeech::Noun, PartOfSpeech::Adjective, PartOfSpeech::Verb}) {
    if (dataset.count(pos) == 0) continue;
    report.per_pos[std::string(to_string(pos))] = correlate(pos);
  }
  return report;
}

}  // namespace depemb
