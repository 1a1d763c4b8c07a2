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

// Skip-gram with negative sampling over arbitrary (word, context) pairs, and
// a CBOW baseline over token windows.
//
// Per observed pair (w, c) with sampled negatives n_1..n_k the objective is
//
//   log s(v_w . u_c) + sum_i log s(-v_w . u_{n_i}),   s(x) = 1 / (1 + e^-x)
//
// and each step moves every touched row by step_size * gradient. Word rows
// start uniform in [-0.5/d, 0.5/d], context rows at zero. For CBOW, v_w is
// replaced by the mean of the window's word rows.
//
// With workers > 1 the parameter matrices are shared without locks (relaxed
// atomic loads and stores), so results vary run to run. workers == 1 is
// bit-reproducible for a fixed seed.

#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "depemb/common.hpp"
#include "depemb/contexts.hpp"
#include "depemb/vocab.hpp"

namespace depemb {

template <typename Real>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, Real fill = Real(0))
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::span<Real> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const Real> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  Real* data() { return data_.data(); }
  const Real* data() const { return data_.data(); }
  const std::vector<Real>& values() const { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Real> data_;
};

template <typename Real>
struct EmbeddingSet {
  Matrix<Real> word_vectors;
  Matrix<Real> context_vectors;
  Vocabulary word_vocab;
  Vocabulary context_vocab;

  std::size_t dimension() const { return word_vectors.cols(); }

  std::optional<std::span<const Real>> vector(std::string_view word) const {
    auto id = word_vocab.find(word);
    if (!id) return std::nullopt;
    return word_vectors.row(static_cast<std::size_t>(*id));
  }

  bool all_finite() const {
    auto finite = [](const Matrix<Real>& m) {
      return std::all_of(m.values().begin(), m.values().end(),
                         [](Real x) { return std::isfinite(x); });
    };
    return finite(word_vectors) && finite(context_vectors);
  }
};

struct TrainerConfig {
  int dimension = 300;
  int negatives = 15;
  double subsample_threshold = 1e-5;
  int epochs = 1;
  double initial_step_size = 0.025;
  double unigram_power = 0.75;
  std::uint64_t min_count = 5;
  std::uint64_t seed = 1;
  int workers = 1;
  bool shuffle = true;

  void validate() const {
    if (dimension < 2) throw ConfigError("dimension must be at least 2");
    if (negatives < 1) throw ConfigError("negatives must be positive");
    if (subsample_threshold <= 0.0) {
      throw ConfigError("subsample threshold must be positive");
    }
    if (epochs < 1) throw ConfigError("epochs must be positive");
    if (!(initial_step_size > 0.0)) {
      throw ConfigError("initial step size must be positive");
    }
    if (unigram_power < 0.0) throw ConfigError("unigram power must be >= 0");
    if (min_count < 1) throw ConfigError("min_count must be positive");
    if (workers < 1) throw ConfigError("workers must be positive");
  }
};

struct TrainStats {
  std::uint64_t steps = 0;
  double mean_objective = 0.0;
  // Mean per-example objective over each tenth of training, in order.
  std::array<double, 10> decile_objective{};
};

template <typename Real>
struct TrainResult {
  EmbeddingSet<Real> embeddings;
  TrainStats stats;
};

namespace kernels {

template <typename Real>
Real sigmoid(Real x) {
  return Real(1) / (Real(1) + std::exp(-x));
}

// log s(x), stable for large |x|.
template <typename Real>
Real log_sigmoid(Real x) {
  return x >= Real(0) ? -std::log1p(std::exp(-x))
                      : x - std::log1p(std::exp(x));
}

template <bool Shared, typename Real>
inline Real load(const Real& x) {
  if constexpr (Shared) {
    return std::atomic_ref<Real>(const_cast<Real&>(x))
        .load(std::memory_order_relaxed);
  } else {
    return x;
  }
}

template <bool Shared, typename Real>
inline void store(Real& x, Real v) {
  if constexpr (Shared) {
    std::atomic_ref<Real>(x).store(v, std::memory_order_relaxed);
  } else {
    x = v;
  }
}

template <bool Shared = false, typename Real>
Real dot(const Real* a, const Real* b, std::size_t d) {
  Real s = 0;
  for (std::size_t i = 0; i < d; ++i) s += load<Shared>(a[i]) * load<Shared>(b[i]);
  return s;
}

// Objective of one example: hidden vector h against targets with labels
// (1 = observed, 0 = negative).
template <typename Real>
Real objective(std::span<const Real> hidden,
               const std::vector<std::span<const Real>>& targets,
               const std::vector<int>& labels) {
  Real total = 0;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const Real s = dot(hidden.data(), targets[t].data(), hidden.size());
    total += labels[t] ? log_sigmoid(s) : log_sigmoid(-s);
  }
  return total;
}

// Gradient of `objective` w.r.t. the hidden vector and every target row.
template <typename Real>
void gradient(std::span<const Real> hidden,
              const std::vector<std::span<const Real>>& targets,
              const std::vector<int>& labels, std::span<Real> grad_hidden,
              std::vector<std::vector<Real>>& grad_targets) {
  const std::size_t d = hidden.size();
  std::fill(grad_hidden.begin(), grad_hidden.end(), Real(0));
  grad_targets.assign(targets.size(), std::vector<Real>(d));
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const Real s = dot(hidden.data(), targets[t].data(), d);
    const Real g = Real(labels[t]) - sigmoid(s);
    for (std::size_t i = 0; i < d; ++i) {
      grad_hidden[i] += g * targets[t][i];
      grad_targets[t][i] = g * hidden[i];
    }
  }
}

// Skip-gram objective for one (word, context, negatives) example.
template <typename Real>
Real sgns_objective(std::span<const Real> word, std::span<const Real> context,
                    const std::vector<std::span<const Real>>& negatives) {
  std::vector<std::span<const Real>> targets{context};
  std::vector<int> labels{1};
  for (auto n : negatives) {
    targets.push_back(n);
    labels.push_back(0);
  }
  return objective(word, targets, labels);
}

// CBOW objective: the hidden vector is the mean of the window rows.
template <typename Real>
Real cbow_objective(const std::vector<std::span<const Real>>& window,
                    std::span<const Real> center,
                    const std::vector<std::span<const Real>>& negatives) {
  std::vector<Real> hidden(center.size(), Real(0));
  for (auto w : window) {
    for (std::size_t i = 0; i < hidden.size(); ++i) hidden[i] += w[i];
  }
  for (auto& h : hidden) h /= static_cast<Real>(window.size());
  std::vector<std::span<const Real>> targets{center};
  std::vector<int> labels{1};
  for (auto n : negatives) {
    targets.push_back(n);
    labels.push_back(0);
  }
  return objective(std::span<const Real>(hidden), targets, labels);
}

// One ascent step. `inputs` are the rows averaged into the hidden vector
// (a single word row for skip-gram), `targets` are output rows with labels.
// Every coefficient is computed from the current parameters before any row
// is written, so the update is exactly step_size * gradient (rows listed
// twice accumulate). Returns the example's objective; `scratch` must hold
// 2 * dimension values.
template <bool Shared = false, typename Real>
double step(Real* const* inputs, std::size_t n_inputs, Real* const* targets,
            const int* labels, std::size_t n_targets, std::size_t d,
            Real step_size, Real* scratch, Real* coeffs) {
  Real* hidden = scratch;
  Real* grad_hidden = scratch + d;
  std::fill(hidden, hidden + d, Real(0));
  std::fill(grad_hidden, grad_hidden + d, Real(0));
  for (std::size_t k = 0; k < n_inputs; ++k) {
    for (std::size_t i = 0; i < d; ++i) hidden[i] += load<Shared>(inputs[k][i]);
  }
  if (n_inputs > 1) {
    const Real inv = Real(1) / static_cast<Real>(n_inputs);
    for (std::size_t i = 0; i < d; ++i) hidden[i] *= inv;
  }
  double obj = 0.0;
  for (std::size_t t = 0; t < n_targets; ++t) {
    Real s = 0;
    for (std::size_t i = 0; i < d; ++i) s += hidden[i] * load<Shared>(targets[t][i]);
    if (!std::isfinite(s)) return std::numeric_limits<double>::quiet_NaN();
    coeffs[t] = Real(labels[t]) - sigmoid(s);
    obj += labels[t] ? log_sigmoid(static_cast<double>(s))
                     : log_sigmoid(-static_cast<double>(s));
    for (std::size_t i = 0; i < d; ++i) {
      grad_hidden[i] += coeffs[t] * load<Shared>(targets[t][i]);
    }
  }
  for (std::size_t t = 0; t < n_targets; ++t) {
    const Real g = step_size * coeffs[t];
    for (std::size_t i = 0; i < d; ++i) {
      store<Shared>(targets[t][i], load<Shared>(targets[t][i]) + g * hidden[i]);
    }
  }
  const Real scale = step_size / static_cast<Real>(n_inputs);
  for (std::size_t k = 0; k < n_inputs; ++k) {
    for (std::size_t i = 0; i < d; ++i) {
      store<Shared>(inputs[k][i],
                    load<Shared>(inputs[k][i]) + scale * grad_hidden[i]);
    }
  }
  return obj;
}

}  // namespace kernels

// Pairs mapped onto vocabulary ids.
struct PairCorpus {
  Vocabulary words;
  Vocabulary contexts;
  std::vector<IdPair> pairs;
  std::uint64_t dropped = 0;  // pairs with an out-of-vocabulary side
};

namespace trainer_detail {

inline PairCorpus index_pairs(
    const std::unordered_map<std::string, std::uint64_t>& wc,
    const std::unordered_map<std::string, std::uint64_t>& cc,
    std::uint64_t min_count) {
  PairCorpus corpus;
  corpus.words = Vocabulary::from_counts(wc, min_count);
  corpus.contexts = Vocabulary::from_counts(cc, min_count);
  return corpus;
}

inline void add_pair(PairCorpus& corpus, std::string_view w,
                     std::string_view c) {
  auto wi = corpus.words.find(w);
  auto ci = corpus.contexts.find(c);
  if (wi && ci) {
    corpus.pairs.push_back({*wi, *ci});
  } else {
    ++corpus.dropped;
  }
}

}  // namespace trainer_detail

// Separate target and context vocabularies, each filtered by min_count.
inline PairCorpus build_pair_corpus(const PairList& pairs,
                                    std::uint64_t min_count) {
  std::unordered_map<std::string, std::uint64_t> wc, cc;
  for (const auto& p : pairs) {
    ++wc[p.target];
    ++cc[p.context];
  }
  PairCorpus corpus = trainer_detail::index_pairs(wc, cc, min_count);
  corpus.pairs.reserve(pairs.size());
  for (const auto& p : pairs) trainer_detail::add_pair(corpus, p.target, p.context);
  return corpus;
}

// Two passes over a pair file: counting, then indexing.
inline PairCorpus build_pair_corpus(const std::filesystem::path& path,
                                    std::uint64_t min_count) {
  std::unordered_map<std::string, std::uint64_t> wc, cc;
  {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open pair file " + path.string());
    PairReader reader(in);
    ContextPair p;
    while (reader.next(p)) {
      ++wc[p.target];
      ++cc[p.context];
    }
  }
  PairCorpus corpus = trainer_detail::index_pairs(wc, cc, min_count);
  std::ifstream in(path);
  PairReader reader(in);
  ContextPair p;
  while (reader.next(p)) trainer_detail::add_pair(corpus, p.target, p.context);
  return corpus;
}

namespace trainer_detail {

inline std::uint64_t worker_seed(std::uint64_t seed, int epoch, int worker) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch),
                    static_cast<std::uint32_t>(worker)};
  std::uint64_t out[1];
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  out[0] = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
  return out[0];
}

template <typename Real>
Matrix<Real> init_word_rows(std::size_t rows, std::size_t d,
                            std::uint64_t seed) {
  Matrix<Real> m(rows, d);
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-0.5 / static_cast<double>(d),
                                           0.5 / static_cast<double>(d));
  Real* p = m.data();
  for (std::size_t i = 0; i < rows * d; ++i) p[i] = static_cast<Real>(u(rng));
  return m;
}

// Tracks decile means and the learning-rate schedule.
class Progress {
 public:
  explicit Progress(std::uint64_t total) : total_(std::max<std::uint64_t>(total, 1)) {}

  double step_size(double initial) const {
    const double done = static_cast<double>(processed_.load(std::memory_order_relaxed));
    return initial * std::max(1.0 - done / (static_cast<double>(total_) + 1.0), 1e-4);
  }

  void record(std::uint64_t count, double objective_sum) {
    const std::uint64_t before = processed_.fetch_add(count, std::memory_order_relaxed);
    std::size_t bucket = static_cast<std::size_t>(
        std::min<std::uint64_t>(9, before * 10 / total_));
    std::lock_guard<std::mutex> lock(mu_);
    sums_[bucket] += objective_sum;
    counts_[bucket] += count;
  }

  TrainStats stats() const {
    TrainStats s;
    double total = 0.0;
    std::uint64_t n = 0;
    for (std::size_t b = 0; b < 10; ++b) {
      s.decile_objective[b] =
          counts_[b] ? sums_[b] / static_cast<double>(counts_[b]) : 0.0;
      total += sums_[b];
      n += counts_[b];
    }
    s.steps = n;
    s.mean_objective = n ? total / static_cast<double>(n) : 0.0;
    return s;
  }

 private:
  std::uint64_t total_;
  std::atomic<std::uint64_t> processed_{0};
  std::mutex mu_;
  std::array<double, 10> sums_{};
  std::array<std::uint64_t, 10> counts_{};
};

// Runs `body(worker, begin, end, rng)` over contiguous shards of [0, n) and
// rethrows the first worker exception.
template <typename Body>
void run_workers(int workers, std::size_t n, std::uint64_t seed, int epoch,
                 Body body) {
  if (workers <= 1) {
    Rng rng(worker_seed(seed, epoch, 0));
    body(0, std::size_t{0}, n, rng);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        Rng rng(worker_seed(seed, epoch, w));
        const std::size_t begin = n * w / workers;
        const std::size_t end = n * (w + 1) / workers;
        body(w, begin, end, rng);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline void check_finite(double objective, std::uint64_t step) {
  if (!std::isfinite(objective)) {
    throw NumericError("non-finite objective at training step " +
                       std::to_string(step));
  }
}

}  // namespace trainer_detail

// Trains skip-gram embeddings over an indexed pair corpus.
template <typename Real = float>
TrainResult<Real> train_sgns(const PairCorpus& corpus,
                             const TrainerConfig& cfg) {
  cfg.validate();
  if (corpus.pairs.empty()) throw DataError("no in-vocabulary pairs to train on");
  const std::size_t d = static_cast<std::size_t>(cfg.dimension);
  TrainResult<Real> result;
  auto& emb = result.embeddings;
  emb.word_vocab = corpus.words;
  emb.context_vocab = corpus.contexts;
  emb.word_vectors = trainer_detail::init_word_rows<Real>(corpus.words.size(), d, cfg.seed);
  emb.context_vectors = Matrix<Real>(corpus.contexts.size(), d);
  const NegativeSampler sampler(corpus.contexts, cfg.unigram_power);

  std::vector<IdPair> order = corpus.pairs;
  if (cfg.shuffle) {
    Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::shuffle(order.begin(), order.end(), rng);
  }
  std::vector<std::vector<IdPair>> epochs(cfg.epochs);
  std::uint64_t total = 0;
  for (int e = 0; e < cfg.epochs; ++e) {
    epochs[e] = subsample(order, corpus.words, cfg.subsample_threshold,
                          trainer_detail::worker_seed(cfg.seed, e, -1));
    total += epochs[e].size();
  }
  trainer_detail::Progress progress(total);
  const bool shared = cfg.workers > 1;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto& pairs = epochs[epoch];
    trainer_detail::run_workers(
        cfg.workers, pairs.size(), cfg.seed, epoch,
        [&](int, std::size_t begin, std::size_t end, Rng& rng) {
          std::vector<Real> scratch(2 * d);
          std::vector<Real> coeffs(cfg.negatives + 1);
          std::vector<Real*> targets;
          std::vector<int> labels;
          constexpr std::size_t kChunk = 1024;
          for (std::size_t chunk = begin; chunk < end; chunk += kChunk) {
            const Real alpha = static_cast<Real>(progress.step_size(cfg.initial_step_size));
            const std::size_t stop = std::min(end, chunk + kChunk);
            double obj_sum = 0.0;
            for (std::size_t i = chunk; i < stop; ++i) {
              const IdPair& p = pairs[i];
              targets.assign(1, emb.context_vectors.row(p.context).data());
              labels.assign(1, 1);
              for (int k = 0; k < cfg.negatives; ++k) {
                const WordId n = sampler(rng);
                if (n == p.context) continue;
                targets.push_back(emb.context_vectors.row(n).data());
                labels.push_back(0);
              }
              Real* input = emb.word_vectors.row(p.word).data();
              const double obj =
                  shared ? kernels::step<true>(&input, 1, targets.data(), labels.data(),
                                               targets.size(), d, alpha, scratch.data(),
                                               coeffs.data())
                         : kernels::step<false>(&input, 1, targets.data(), labels.data(),
                                                targets.size(), d, alpha, scratch.data(),
                                                coeffs.data());
              trainer_detail::check_finite(obj, i);
              obj_sum += obj;
            }
            progress.record(stop - chunk, obj_sum);
          }
        });
  }
  if (!emb.all_finite()) throw NumericError("training produced non-finite vectors");
  result.stats = progress.stats();
  return result;
}

template <typename Real = float>
TrainResult<Real> train_sgns(const PairList& pairs, const TrainerConfig& cfg) {
  cfg.validate();  // before the vocabulary, so bad settings are not reported as data errors
  return train_sgns<Real>(build_pair_corpus(pairs, cfg.min_count), cfg);
}

// Trains CBOW embeddings: each position's window rows (|i - j| <= k, j != i)
// are averaged and trained against the center word. Word vectors are the
// input rows.
template <typename Real = float>
TrainResult<Real> train_cbow(const std::vector<std::vector<std::string>>& sentences,
                             const TrainerConfig& cfg, int window_k) {
  cfg.validate();
  if (window_k < 1) throw ConfigError("window size must be at least 1");
  std::unordered_map<std::string, std::uint64_t> counts;
  for (const auto& s : sentences) {
    for (const auto& w : s) ++counts[w];
  }
  const Vocabulary vocab = Vocabulary::from_counts(counts, cfg.min_count);
  std::vector<std::vector<WordId>> ids;
  ids.reserve(sentences.size());
  std::uint64_t tokens = 0;
  for (const auto& s : sentences) {
    std::vector<WordId> row;
    for (const auto& w : s) {
      if (auto id = vocab.find(w)) row.push_back(*id);
    }
    tokens += row.size();
    if (row.size() >= 2) ids.push_back(std::move(row));
  }
  if (ids.empty()) throw DataError("no sentence has two in-vocabulary tokens");

  const std::size_t d = static_cast<std::size_t>(cfg.dimension);
  TrainResult<Real> result;
  auto& emb = result.embeddings;
  emb.word_vocab = vocab;
  emb.context_vocab = vocab;
  emb.word_vectors = trainer_detail::init_word_rows<Real>(vocab.size(), d, cfg.seed);
  emb.context_vectors = Matrix<Real>(vocab.size(), d);
  const NegativeSampler sampler(vocab, cfg.unigram_power);
  std::vector<double> keep(vocab.size());
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    keep[i] = keep_probability(vocab.frequency(static_cast<WordId>(i)),
                               cfg.subsample_threshold);
  }
  trainer_detail::Progress progress(tokens * static_cast<std::uint64_t>(cfg.epochs));
  const bool shared = cfg.workers > 1;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    trainer_detail::run_workers(
        cfg.workers, ids.size(), cfg.seed, epoch,
        [&](int, std::size_t begin, std::size_t end, Rng& rng) {
          std::uniform_real_distribution<double> unit(0.0, 1.0);
          std::vector<Real> scratch(2 * d);
          std::vector<Real> coeffs(cfg.negatives + 1);
          std::vector<Real*> inputs;
          std::vector<Real*> targets;
          std::vector<int> labels;
          std::vector<WordId> kept;
          std::uint64_t step_index = 0;
          for (std::size_t si = begin; si < end; ++si) {
            kept.clear();
            for (WordId w : ids[si]) {
              if (keep[w] >= 1.0 || unit(rng) < keep[w]) kept.push_back(w);
            }
            const Real alpha = static_cast<Real>(progress.step_size(cfg.initial_step_size));
            double obj_sum = 0.0;
            const int n = static_cast<int>(kept.size());
            for (int i = 0; i < n; ++i) {
              inputs.clear();
              for (int j = std::max(0, i - window_k); j <= std::min(n - 1, i + window_k); ++j) {
                if (j != i) inputs.push_back(emb.word_vectors.row(kept[j]).data());
              }
              if (inputs.empty()) continue;
              const WordId center = kept[i];
              targets.assign(1, emb.context_vectors.row(center).data());
              labels.assign(1, 1);
              for (int k = 0; k < cfg.negatives; ++k) {
                const WordId neg = sampler(rng);
                if (neg == center) continue;
                targets.push_back(emb.context_vectors.row(neg).data());
                labels.push_back(0);
              }
              const double obj =
                  shared ? kernels::step<true>(inputs.data(), inputs.size(), targets.data(),
                                               labels.data(), targets.size(), d, alpha,
                                               scratch.data(), coeffs.data())
                         : kernels::step<false>(inputs.data(), inputs.size(), targets.data(),
                                                labels.data(), targets.size(), d, alpha,
                                                scratch.data(), coeffs.data());
              trainer_detail::check_finite(obj, step_index);
              ++step_index;
              obj_sum += obj;
            }
            progress.record(ids[si].size(), obj_sum);
          }
        });
  }
  if (!emb.all_finite()) throw NumericError("training produced non-finite vectors");
  result.stats = progress.stats();
  return result;
}

}  // namespace depemb
