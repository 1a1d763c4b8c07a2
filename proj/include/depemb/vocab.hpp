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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "depemb/common.hpp"

namespace depemb {

using Rng = std::mt19937_64;
using WordId = std::int32_t;

// Frequency-sorted vocabulary with dense ids 0..V-1. Ties in count are
// ordered lexicographically so ids do not depend on hash iteration order.
class Vocabulary {
 public:
  Vocabulary() = default;

  static Vocabulary from_counts(
      const std::unordered_map<std::string, std::uint64_t>& counts,
      std::uint64_t min_count) {
    std::vector<std::pair<std::string, std::uint64_t>> kept;
    for (const auto& [w, c] : counts) {
      if (c >= min_count) kept.emplace_back(w, c);
    }
    if (kept.empty()) {
      throw DataError("vocabulary is empty after applying min_count " +
                      std::to_string(min_count));
    }
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    Vocabulary v;
    v.min_count_ = min_count;
    for (auto& [w, c] : kept) v.add(std::move(w), c);
    return v;
  }

  // Keeps the given order; used when loading vector files.
  static Vocabulary from_words(std::vector<std::string> words) {
    Vocabulary v;
    for (auto& w : words) v.add(std::move(w), 0);
    return v;
  }

  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }
  std::uint64_t min_count() const { return min_count_; }
  std::uint64_t total_count() const { return total_; }

  const std::string& word(WordId id) const { return words_.at(id); }
  std::uint64_t count(WordId id) const { return counts_.at(id); }
  const std::vector<std::string>& words() const { return words_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }

  std::optional<WordId> find(std::string_view w) const {
    auto it = index_.find(std::string(w));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  // Relative frequency of `id` among retained entries.
  double frequency(WordId id) const {
    return total_ == 0 ? 0.0
                       : static_cast<double>(counts_.at(id)) /
                             static_cast<double>(total_);
  }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.words_ == b.words_ && a.counts_ == b.counts_;
  }

 private:
  void add(std::string w, std::uint64_t c) {
    if (index_.count(w)) throw DataError("duplicate vocabulary entry '" + w + "'");
    index_.emplace(w, static_cast<WordId>(words_.size()));
    words_.push_back(std::move(w));
    counts_.push_back(c);
    total_ += c;
  }

  std::vector<std::string> words_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, WordId> index_;
  std::uint64_t min_count_ = 0;
  std::uint64_t total_ = 0;
};

template <typename Range>
Vocabulary build_vocab(const Range& tokens, std::uint64_t min_count) {
  std::unordered_map<std::string, std::uint64_t> counts;
  for (const auto& t : tokens) ++counts[std::string(t)];
  return Vocabulary::from_counts(counts, min_count);
}

// Draws ids with probability count^power / sum(count^power).
class NegativeSampler {
 public:
  NegativeSampler() = default;
  NegativeSampler(const Vocabulary& vocab, double power) {
    if (vocab.empty()) throw DataError("negative sampler needs a vocabulary");
    weights_.reserve(vocab.size());
    for (auto c : vocab.counts()) {
      weights_.push_back(power == 0.0 ? 1.0
                                      : std::pow(static_cast<double>(c), power));
    }
    double sum = 0.0;
    for (double w : weights_) sum += w;
    for (double& w : weights_) w /= sum;
    dist_ = std::discrete_distribution<WordId>(weights_.begin(), weights_.end());
  }

  WordId operator()(Rng& rng) const { return dist_(rng); }
  double probability(WordId id) const { return weights_.at(id); }
  std::size_t size() const { return weights_.size(); }

 private:
  std::vector<double> weights_;
  mutable std::discrete_distribution<WordId> dist_;
};

inline NegativeSampler negative_table(const Vocabulary& vocab,
                                      double unigram_power) {
  return NegativeSampler(vocab, unigram_power);
}

// Probability of keeping one occurrence of a word with relative frequency f.
inline double keep_probability(double frequency, double threshold) {
  if (frequency <= 0.0) return 1.0;
  if (threshold <= 0.0) return 0.0;
  return std::min(1.0, std::sqrt(threshold / frequency));
}

struct IdPair {
  WordId word = 0;
  WordId context = 0;
  friend bool operator==(const IdPair&, const IdPair&) = default;
};

// Frequent-word discounting of a pair stream by target frequency.
inline std::vector<IdPair> subsample(const std::vector<IdPair>& pairs,
                                     const Vocabulary& words, double threshold,
                                     std::uint64_t seed) {
  std::vector<double> keep(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    keep[i] = keep_probability(words.frequency(static_cast<WordId>(i)),
                               threshold);
  }
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<IdPair> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (keep[p.word] >= 1.0 || unit(rng) < keep[p.word]) out.push_back(p);
  }
  return out;
}

}  // namespace depemb
