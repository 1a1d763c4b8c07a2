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

// (word, context) pair extraction and the pair text format.
//
// A labeled dependency edge l(h, m) yields two pairs:
//   (h, m/l)  and  (m, h/l-1)
// Unlabeled edges yield (h, m) and (m, h). Linear contexts yield every
// (w_i, w_j) with 0 < |i - j| <= k.

#pragma once

#include <algorithm>
#include <cstddef>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "depemb/common.hpp"
#include "depemb/conllu.hpp"
#include "depemb/graph.hpp"
#include "depemb/scheme.hpp"

namespace depemb {

struct ContextPair {
  std::string target;
  std::string context;

  friend bool operator==(const ContextPair&, const ContextPair&) = default;
  friend auto operator<=>(const ContextPair&, const ContextPair&) = default;
};

using PairList = std::vector<ContextPair>;

struct ExtractionConfig {
  EnhancementLevel level = EnhancementLevel::Basic;
  LabelScheme scheme = universal_scheme();
  EnhanceOptions enhance;
  bool lowercase = true;
  bool include_punct = false;
  std::string inverse_marker = "-1";
  // Linear contexts instead of dependency contexts.
  bool linear = false;
  int window_k = 5;
};

inline bool is_punctuation(const TokenNode& t) {
  if (t.upos && *t.upos == "PUNCT") return true;
  return strings::to_lower(base_label(t.deprel)) == "punct";
}

inline std::string surface(const TokenNode& t, const ExtractionConfig& cfg) {
  return cfg.lowercase ? strings::to_lower(t.form) : t.form;
}

// Pairs for an edge list produced by apply_level. Edges touching the root
// (index 0) are skipped. Unless include_punct is set, an edge is dropped when
// either endpoint is a punctuation token.
inline PairList dependency_pairs(const EdgeList& edges, const DepSentence& s,
                                 const ExtractionConfig& cfg) {
  PairList pairs;
  pairs.reserve(edges.size() * 2);
  const int n = static_cast<int>(s.size());
  const bool unlabeled = cfg.level == EnhancementLevel::Unlabeled;
  for (const auto& e : edges) {
    if (e.head <= 0 || e.dependent <= 0 || e.head > n || e.dependent > n) {
      continue;
    }
    const TokenNode& head = s.token(e.head);
    const TokenNode& dep = s.token(e.dependent);
    if (!cfg.include_punct && (is_punctuation(head) || is_punctuation(dep))) {
      continue;
    }
    std::string h = surface(head, cfg);
    std::string m = surface(dep, cfg);
    if (unlabeled) {
      pairs.push_back({h, m});
      pairs.push_back({std::move(m), std::move(h)});
    } else {
      pairs.push_back({h, m + '/' + e.label});
      pairs.push_back({std::move(m), h + '/' + e.label + cfg.inverse_marker});
    }
  }
  return pairs;
}

inline PairList linear_pairs(const std::vector<std::string>& words, int k) {
  PairList pairs;
  const int n = static_cast<int>(words.size());
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - k);
    const int hi = std::min(n - 1, i + k);
    for (int j = lo; j <= hi; ++j) {
      if (j != i) pairs.push_back({words[i], words[j]});
    }
  }
  return pairs;
}

// Surface forms of a sentence as used for linear contexts and CBOW.
inline std::vector<std::string> sentence_words(const DepSentence& s,
                                               const ExtractionConfig& cfg) {
  std::vector<std::string> words;
  words.reserve(s.size());
  for (const auto& t : s.tokens) {
    if (!cfg.include_punct && is_punctuation(t)) continue;
    words.push_back(surface(t, cfg));
  }
  return words;
}

// All pairs of one sentence under `cfg`. Throws SentenceError when the
// sentence cannot be brought to the requested level.
inline PairList extract_sentence(const DepSentence& s,
                                 const ExtractionConfig& cfg) {
  if (cfg.linear) return linear_pairs(sentence_words(s, cfg), cfg.window_k);
  return dependency_pairs(apply_level(s, cfg.level, cfg.scheme, cfg.enhance), s,
                          cfg);
}

// --- pair text format: `target<SPACE>context\n` ---------------------------

inline std::string sanitize_token(std::string_view token, bool* rewritten) {
  std::string out(token);
  bool changed = false;
  for (char& c : out) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
        c == '\f') {
      c = '_';
      changed = true;
    }
  }
  if (rewritten) *rewritten = changed;
  return out;
}

// Writes pairs one per line; tokens containing whitespace are rewritten with
// underscores. Returns the number of rewritten tokens.
template <typename Range>
std::size_t write_pairs(const Range& pairs, std::ostream& out) {
  std::size_t rewritten = 0;
  std::string line;
  for (const ContextPair& p : pairs) {
    bool r1 = false;
    bool r2 = false;
    line = sanitize_token(p.target, &r1);
    line += ' ';
    line += sanitize_token(p.context, &r2);
    line += '\n';
    rewritten += static_cast<std::size_t>(r1) + static_cast<std::size_t>(r2);
    out.write(line.data(), static_cast<std::streamsize>(line.size()));
  }
  return rewritten;
}

class PairReader {
 public:
  explicit PairReader(std::istream& in) : in_(&in) {}

  bool next(ContextPair& out) {
    std::string line;
    while (std::getline(*in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      const std::size_t sp = line.find(' ');
      if (sp == std::string::npos || sp == 0 || sp + 1 == line.size() ||
          line.find(' ', sp + 1) != std::string::npos) {
        throw DataError("pair file line " + std::to_string(line_no_) +
                        ": expected 'target context'");
      }
      out.target.assign(line, 0, sp);
      out.context.assign(line, sp + 1, std::string::npos);
      return true;
    }
    return false;
  }

  std::size_t line() const { return line_no_; }

 private:
  std::istream* in_;
  std::size_t line_no_ = 0;
};

inline PairList read_pairs(std::istream& in) {
  PairList out;
  PairReader reader(in);
  ContextPair p;
  while (reader.next(p)) out.push_back(p);
  return out;
}

// --- corpus-level extraction ---------------------------------------------

struct ExtractionReport {
  std::size_t sentences_read = 0;
  std::size_t sentences_used = 0;
  std::size_t pairs = 0;
  std::size_t rewritten_tokens = 0;
  std::vector<std::string> errors;  // one line per rejected sentence
};

// Streams a CoNLL-U corpus into the pair format. Sentences are processed in
// batches by `workers` threads; output order follows input order regardless
// of the worker count. Per-sentence failures are collected in the report.
inline ExtractionReport extract_corpus(std::istream& conllu, std::ostream& out,
                                       const ExtractionConfig& cfg,
                                       int workers = 1,
                                       std::size_t batch_size = 2048) {
  ExtractionReport report;
  ConlluReader reader(conllu);
  workers = std::max(1, workers);

  std::vector<DepSentence> batch;
  std::vector<PairList> results;
  std::vector<std::string> batch_errors;

  auto flush = [&] {
    results.assign(batch.size(), {});
    batch_errors.assign(batch.size(), {});
    auto work = [&](std::size_t begin, std::size_t step) {
      for (std::size_t i = begin; i < batch.size(); i += step) {
        try {
          results[i] = extract_sentence(batch[i], cfg);
        } catch (const SentenceError& e) {
          batch_errors[i] = e.what();
        }
      }
    };
    if (workers == 1 || batch.size() < 2) {
      work(0, 1);
    } else {
      std::vector<std::thread> pool;
      for (int w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
      for (auto& t : pool) t.join();
    }
    for (std::size_t i = 0; i < batch.size(); ++i) {
      if (!batch_errors[i].empty()) {
        report.errors.push_back(batch_errors[i]);
        continue;
      }
      ++report.sentences_used;
      report.pairs += results[i].size();
      report.rewritten_tokens += write_pairs(results[i], out);
    }
    batch.clear();
  };

  for (auto& result : reader) {
    ++report.sentences_read;
    if (auto* err = std::get_if<ParseError>(&result)) {
      report.errors.push_back(err->describe());
      continue;
    }
    batch.push_back(std::move(std::get<DepSentence>(result)));
    if (batch.size() >= batch_size) flush();
  }
  flush();
  return report;
}

}  // namespace depemb
