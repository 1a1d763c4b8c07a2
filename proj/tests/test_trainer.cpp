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

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "depemb/contexts.hpp"
#include "depemb/trainer.hpp"
#include "depemb/vectors_io.hpp"
#include "test_util.hpp"

using namespace depemb;

namespace {

using Rows = std::vector<std::vector<double>>;

Rows random_rows(std::size_t n, std::size_t d, std::mt19937_64& rng, double scale = 0.5) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Rows r(n, std::vector<double>(d));
  for (auto& row : r) {
    for (auto& x : row) x = u(rng);
  }
  return r;
}

std::vector<std::span<const double>> spans(const Rows& r) {
  return {r.begin(), r.end()};
}

// CBOW objective with the center as the first target and the rest negative.
double cbow_obj(const Rows& inputs, const Rows& targets) {
  const Rows negs(targets.begin() + 1, targets.end());
  return kernels::cbow_objective<double>(spans(inputs), targets[0], spans(negs));
}

// Applies one kernel step and returns (new - old) / alpha for every input and
// target coordinate.
std::pair<Rows, Rows> step_direction(Rows inputs, Rows targets, double alpha) {
  const Rows in0 = inputs, tg0 = targets;
  const std::size_t d = inputs[0].size();
  std::vector<double*> ip, tp;
  for (auto& r : inputs) ip.push_back(r.data());
  for (auto& r : targets) tp.push_back(r.data());
  std::vector<int> labels(targets.size(), 0);
  labels[0] = 1;
  std::vector<double> scratch(2 * d), coeffs(targets.size());
  kernels::step<false>(ip.data(), ip.size(), tp.data(), labels.data(), tp.size(), d, alpha,
                       scratch.data(), coeffs.data());
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    for (std::size_t i = 0; i < d; ++i) inputs[k][i] = (inputs[k][i] - in0[k][i]) / alpha;
  }
  for (std::size_t k = 0; k < targets.size(); ++k) {
    for (std::size_t i = 0; i < d; ++i) targets[k][i] = (targets[k][i] - tg0[k][i]) / alpha;
  }
  return {inputs, targets};
}

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

void check_gradient(std::size_t n_inputs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t d = 8;
  Rows inputs = random_rows(n_inputs, d, rng);
  Rows targets = random_rows(6, d, rng);
  const auto [gi, gt] = step_direction(inputs, targets, 1e-3);
  const double eps = 1e-5;
  auto numeric = [&](Rows& block, std::size_t k, std::size_t i) {
    const double x = block[k][i];
    block[k][i] = x + eps;
    const double up = cbow_obj(inputs, targets);
    block[k][i] = x - eps;
    const double down = cbow_obj(inputs, targets);
    block[k][i] = x;
    return (up - down) / (2 * eps);
  };
  for (std::size_t k = 0; k < n_inputs; ++k) {
    for (std::size_t i = 0; i < d; ++i) {
      EXPECT_LT(rel_err(numeric(inputs, k, i), gi[k][i]), 1e-4) << "input " << k << "," << i;
    }
  }
  for (std::size_t k = 0; k < targets.size(); ++k) {
    for (std::size_t i = 0; i < d; ++i) {
      EXPECT_LT(rel_err(numeric(targets, k, i), gt[k][i]), 1e-4) << "target " << k << "," << i;
    }
  }
}

PairList demo_pairs() {
  std::ifstream in(testutil::demo("corpus.ud.conllu"));
  std::stringstream out;
  ExtractionConfig cfg;
  extract_corpus(in, out, cfg);
  return read_pairs(out);
}

TrainerConfig small_cfg() {
  TrainerConfig c;
  c.dimension = 16;
  c.negatives = 5;
  c.subsample_threshold = 1e-3;
  c.epochs = 2;
  c.min_count = 2;
  c.seed = 4;
  return c;
}

}  // namespace

TEST(Trainer, SgnsGradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) check_gradient(1, seed);
}

TEST(Trainer, CbowGradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) check_gradient(4, seed);
}

TEST(Trainer, SgnsObjectiveAgreesWithCbowOfOne) {
  std::mt19937_64 rng(2);
  const Rows w = random_rows(1, 5, rng);
  const Rows t = random_rows(4, 5, rng);
  const Rows negs(t.begin() + 1, t.end());
  EXPECT_DOUBLE_EQ(kernels::sgns_objective<double>(w[0], t[0], spans(negs)), cbow_obj(w, t));
  // and one input row takes exactly the skip-gram step
  const auto [gi, gt] = step_direction(w, t, 0.1);
  std::vector<double> gh(5);
  std::vector<std::vector<double>> gtt;
  kernels::gradient<double>(w[0], spans(t), {1, 0, 0, 0}, gh, gtt);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(gi[0][i], gh[i], 1e-12);
  for (std::size_t k = 0; k < 4; ++k) {
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(gt[k][i], gtt[k][i], 1e-12);
  }
}

TEST(Trainer, LogSigmoidIsStable) {
  EXPECT_NEAR(kernels::log_sigmoid(-800.0), -800.0, 1e-9);
  EXPECT_NEAR(kernels::log_sigmoid(800.0), 0.0, 1e-12);
  EXPECT_NEAR(kernels::log_sigmoid(0.0), std::log(0.5), 1e-15);
}

TEST(Trainer, InitialisationRanges) {
  TrainerConfig cfg = small_cfg();
  cfg.epochs = 1;
  cfg.initial_step_size = 1e-30;  // effectively frozen
  const auto r = train_sgns<float>(demo_pairs(), cfg);
  const float bound = 0.5f / cfg.dimension;
  for (float x : r.embeddings.word_vectors.values()) {
    EXPECT_LE(std::abs(x), bound * 1.0001f);
  }
  const auto m = trainer_detail::init_word_rows<double>(50, 10, 3);
  double lo = 1, hi = -1;
  for (double x : m.values()) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  EXPECT_GE(lo, -0.05);
  EXPECT_LT(hi, 0.05);
  EXPECT_LT(lo, -0.04);  // the full range is used
  EXPECT_GT(hi, 0.04);
}

TEST(Trainer, SingleWorkerIsBitReproducible) {
  const auto pairs = demo_pairs();
  const auto a = train_sgns<float>(pairs, small_cfg());
  const auto b = train_sgns<float>(pairs, small_cfg());
  EXPECT_EQ(a.embeddings.word_vectors, b.embeddings.word_vectors);
  EXPECT_EQ(a.embeddings.context_vectors, b.embeddings.context_vectors);
  auto other = small_cfg();
  other.seed = 5;
  EXPECT_NE(train_sgns<float>(pairs, other).embeddings.word_vectors, a.embeddings.word_vectors);
}

TEST(Trainer, MultiWorkerStaysFinite) {
  auto cfg = small_cfg();
  cfg.workers = 4;
  const auto r = train_sgns<float>(demo_pairs(), cfg);
  EXPECT_TRUE(r.embeddings.all_finite());
  EXPECT_GT(r.stats.steps, 0u);
}

TEST(Trainer, ObjectiveImproves) {
  auto cfg = small_cfg();
  cfg.epochs = 5;
  const auto r = train_sgns<float>(demo_pairs(), cfg);
  EXPECT_GT(r.stats.decile_objective[9], r.stats.decile_objective[0]);
  EXPECT_LT(r.stats.decile_objective[9], 0.0);
}

TEST(Trainer, HugeStepSizeRaisesNumericError) {
  auto cfg = small_cfg();
  cfg.initial_step_size = 1e30;
  try {
    train_sgns<float>(demo_pairs(), cfg);
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("training step"), std::string::npos) << e.what();
  }
}

TEST(Trainer, CbowTrainsAndIsReproducible) {
  std::vector<std::vector<std::string>> sents;
  std::ifstream in(testutil::demo("corpus.ud.conllu"));
  ExtractionConfig ec;
  for (const auto& s : read_conllu(in)) sents.push_back(sentence_words(s, ec));
  const auto a = train_cbow<float>(sents, small_cfg(), 2);
  const auto b = train_cbow<float>(sents, small_cfg(), 2);
  EXPECT_EQ(a.embeddings.word_vectors, b.embeddings.word_vectors);
  // Subsampling makes the per-token decile mean too noisy over two epochs on
  // a corpus this small, so learning is checked with every token kept.
  auto dense = small_cfg();
  dense.subsample_threshold = 1.0;
  const auto c = train_cbow<float>(sents, dense, 2);
  EXPECT_GT(c.stats.decile_objective[9], c.stats.decile_objective[0]);
  EXPECT_THROW(train_cbow<float>(sents, small_cfg(), 0), ConfigError);
}

TEST(Trainer, ConfigValidation) {
  auto cfg = small_cfg();
  cfg.dimension = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = small_cfg();
  cfg.subsample_threshold = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = small_cfg();
  cfg.negatives = 0;
  EXPECT_THROW(train_sgns<float>(PairList{{"a", "b"}}, cfg), ConfigError);
}

TEST(Trainer, EmptyAfterMinCount) {
  EXPECT_THROW(train_sgns<float>(PairList{{"a", "b"}}, small_cfg()), DataError);
}

TEST(VectorsIo, RoundTrip) {
  auto cfg = small_cfg();
  cfg.epochs = 1;
  const auto r = train_sgns<float>(demo_pairs(), cfg);
  std::stringstream ss;
  save_vectors(ss, r.embeddings);
  const auto back = load_vectors<float>(ss);
  EXPECT_EQ(back.word_vocab.words(), r.embeddings.word_vocab.words());
  EXPECT_EQ(back.word_vectors, r.embeddings.word_vectors);  // %.9g is exact for float
}

TEST(VectorsIo, HandWrittenFile) {
  std::istringstream in("2 3\nhello 1 0 -0.5\nworld 0.25 2e-3 7\n");
  const auto v = load_vectors<double>(in);
  EXPECT_EQ(v.dimension(), 3u);
  EXPECT_EQ(v.word_vocab.words(), (std::vector<std::string>{"hello", "world"}));
  EXPECT_EQ((*v.vector("world"))[1], 2e-3);
  EXPECT_FALSE(v.vector("nope"));
}

TEST(VectorsIo, MalformedFilesNameTheLine) {
  auto message = [](const std::string& text) {
    std::istringstream in(text);
    try {
      load_vectors<float>(in);
    } catch (const DataError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message("3 2\na 1 2\nb 3 4\n").find("line 4"), std::string::npos);
  EXPECT_NE(message("2 2\na 1 2\nb 3\n").find("line 3"), std::string::npos);
  EXPECT_NE(message("2 2\na 1 x\nb 3 4\n").find("line 2"), std::string::npos);
  EXPECT_NE(message("1 2\na 1 2\nb 3 4\n").find("line 3"), std::string::npos);
  EXPECT_NE(message("").find("empty"), std::string::npos);
  EXPECT_NE(message("2 0\n").find("line 1"), std::string::npos);
}

TEST(VectorsIo, RefusesNonFinite) {
  EmbeddingSet<float> set;
  set.word_vocab = Vocabulary::from_words({"x"});
  set.word_vectors = Matrix<float>(1, 2, std::numeric_limits<float>::quiet_NaN());
  std::ostringstream out;
  EXPECT_THROW(save_vectors(out, set), NumericError);
}
