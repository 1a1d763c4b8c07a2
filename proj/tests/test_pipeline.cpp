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

#include <algorithm>
#include <sstream>

#include "depemb/pipeline.hpp"
#include "test_util.hpp"

using namespace depemb;
namespace fs = std::filesystem;

namespace {

RunConfig demo_config(const fs::path& out) {
  RunConfig c = load_run_config(testutil::demo("pipeline.json"));
  c.output_dir = out;
  c.trainer.epochs = 2;  // keep the suite quick
  return c;
}

// Every regular file under `dir` (relative path -> bytes), minus the manifest
// whose timings differ between runs.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), dir).generic_string();
    if (rel == "manifest.json") continue;
    out[rel] = testutil::read_file(e.path());
  }
  return out;
}

bool contains(const std::vector<std::string>& v, const std::string& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

}  // namespace

TEST(Digest, KnownVectors) {
  EXPECT_EQ(io::sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(io::sha256_hex(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  testutil::TempDir dir("digest");
  testutil::write_file(dir / "abc", "abc");
  EXPECT_EQ(io::sha256_file(dir / "abc"), io::sha256_hex("abc"));
}

TEST(Config, ResolvesPathsAgainstConfigFolder) {
  const auto c = load_run_config(testutil::demo("pipeline.json"));
  EXPECT_EQ(c.corpus, testutil::demo("corpus.ud.conllu").lexically_normal());
  EXPECT_EQ(*c.datasets.simlex, testutil::demo("toy_simlex.txt").lexically_normal());
  EXPECT_EQ(c.variants.size(), 13u);
  EXPECT_EQ(c.variants.front().scheme, SchemeId::Stanford);
  EXPECT_EQ(c.trainer.dimension, 50);
  EXPECT_EQ(c.seed, 7u);
}

TEST(Config, JsonRoundTrip) {
  const auto c = load_run_config(testutil::demo("pipeline.json"));
  const auto j = to_json(c);
  EXPECT_EQ(to_json(run_config_from_json(j)), j);
}

TEST(Config, SingleVariantFromTopLevel) {
  RunConfig c;
  c.corpus = "x.conllu";
  c.scheme = SchemeId::Stanford;
  c.level = EnhancementLevel::Enhanced;
  const auto vs = c.resolved_variants();
  ASSERT_EQ(vs.size(), 1u);
  EXPECT_EQ(vs[0].name, "stanford-enhanced");
}

TEST(Config, ValidationErrors) {
  testutil::TempDir dir("cfg");
  auto expect_config_error = [](RunConfig c, const std::string& fragment) {
    try {
      c.validate();
      ADD_FAILURE() << "no error for " << fragment;
    } catch (const ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
    }
  };
  const auto good = demo_config(dir / "out");
  EXPECT_NO_THROW(good.validate());

  auto c = good;
  c.datasets.simlex = "/no/such/simlex.txt";
  expect_config_error(c, "/no/such/simlex.txt");
  c = good;
  c.datasets.ws353_relatedness.reset();
  expect_config_error(c, "WS353");
  c = good;
  c.variants[1].name = c.variants[0].name;
  expect_config_error(c, "duplicate");
  c = good;
  c.variants[0].corpus = "/no/such/corpus.conllu";
  expect_config_error(c, "/no/such/corpus.conllu");
  c = good;
  c.trainer.dimension = 0;
  expect_config_error(c, "dimension");
  c = good;
  c.extraction.collapse_prepositions = true;  // ud variants present
  expect_config_error(c, "stanford");
  c = good;
  c.output_dir.clear();
  expect_config_error(c, "output_dir");

  EXPECT_THROW(run_config_from_json(nlohmann::json{{"level", "fancy"}}), ConfigError);
  EXPECT_THROW(run_config_from_json(nlohmann::json{{"seed", "seven"}}), ConfigError);
  EXPECT_THROW(load_run_config(dir / "missing.json"), ConfigError);
  testutil::write_file(dir / "broken.json", "{ not json");
  EXPECT_THROW(load_run_config(dir / "broken.json"), ConfigError);
}

TEST(Pipeline, RunsThenSkips) {
  testutil::TempDir dir("pipe");
  const auto cfg = demo_config(dir / "out");
  std::ostringstream log;
  const auto first = Pipeline(cfg, &log).run();
  // 13 train stages, 11 extract stages (both CBOW variants read the corpus), eval
  EXPECT_EQ(first.ran.size(), 25u);
  EXPECT_TRUE(first.skipped.empty());
  EXPECT_EQ(first.reports.size(), 13u * 3u);
  EXPECT_TRUE(fs::exists(dir / "out/reports/report.txt"));
  EXPECT_NE(log.str().find("[run]  extract/ud-enhanced"), std::string::npos);

  const auto second = Pipeline(cfg).run();
  EXPECT_TRUE(second.ran.empty());
  EXPECT_EQ(second.skipped.size(), 25u);

  const auto manifest = nlohmann::json::parse(testutil::read_file(dir / "out/manifest.json"));
  const auto& stage = manifest.at("stages").at("train/ud-basic");
  EXPECT_TRUE(stage.contains("input_digest"));
  EXPECT_TRUE(stage.contains("wall_seconds"));
  EXPECT_EQ(stage.at("outputs").at("vectors/ud-basic.vec").get<std::string>(),
            io::sha256_file(dir / "out/vectors/ud-basic.vec"));
}

TEST(Pipeline, MissingReportRerunsOnlyEval) {
  testutil::TempDir dir("pipe");
  const auto cfg = demo_config(dir / "out");
  Pipeline(cfg).run();
  const auto before = testutil::read_file(dir / "out/reports/report.json");
  fs::remove_all(dir / "out/reports");
  const auto s = Pipeline(cfg).run();
  EXPECT_EQ(s.ran, std::vector<std::string>{"eval"});
  EXPECT_EQ(testutil::read_file(dir / "out/reports/report.json"), before);
}

TEST(Pipeline, CorruptedPairsRerunsDownstream) {
  testutil::TempDir dir("pipe");
  const auto cfg = demo_config(dir / "out");
  Pipeline(cfg).run();
  const auto vec_before = testutil::read_file(dir / "out/vectors/sd-basic.vec");
  {
    std::ofstream out(dir / "out/pairs/sd-basic.pairs", std::ios::app);
    out << "junk junk\n";
  }
  const auto s = Pipeline(cfg).run();
  EXPECT_EQ(s.ran, (std::vector<std::string>{"extract/sd-basic", "train/sd-basic", "eval"}));
  EXPECT_EQ(s.skipped.size(), 22u);
  EXPECT_EQ(testutil::read_file(dir / "out/vectors/sd-basic.vec"), vec_before);
}

TEST(Pipeline, ChangedTrainerReruns) {
  testutil::TempDir dir("pipe");
  auto cfg = demo_config(dir / "out");
  cfg.variants.resize(2);
  Pipeline(cfg).run();
  cfg.trainer.negatives = 3;
  const auto s = Pipeline(cfg).run();
  EXPECT_TRUE(contains(s.skipped, "extract/sd-unlabeled"));
  EXPECT_TRUE(contains(s.ran, "train/sd-unlabeled"));
  EXPECT_TRUE(contains(s.ran, "eval"));
}

TEST(Pipeline, StageErrorIsPrefixedAndKeepsEarlierOutputs) {
  testutil::TempDir dir("pipe");
  auto cfg = demo_config(dir / "out");
  cfg.variants.resize(1);
  VariantConfig bad = cfg.variants[0];
  bad.name = "bad";
  bad.corpus = testutil::demo("corpus.txt");  // plain text cannot give dependency pairs
  cfg.variants.push_back(bad);
  try {
    Pipeline(cfg).run();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(std::string(e.what()).rfind("stage extract/bad: ", 0), 0u) << e.what();
    EXPECT_NE(e.exit_code(), 1);
  }
  EXPECT_TRUE(fs::exists(dir / "out/vectors/sd-unlabeled.vec"));
  EXPECT_FALSE(fs::exists(dir / "out/pairs/bad.pairs"));
  // the finished stage is recorded and skipped next time
  cfg.variants.pop_back();
  const auto s = Pipeline(cfg).run();
  EXPECT_TRUE(contains(s.skipped, "train/sd-unlabeled"));
}

TEST(Pipeline, Deterministic) {
  testutil::TempDir a("pipe-a"), b("pipe-b");
  auto cfg = demo_config(a / "out");
  cfg.variants.resize(4);
  Pipeline(cfg).run();
  cfg.output_dir = b / "out";
  Pipeline(cfg).run();
  const auto sa = snapshot(a / "out");
  EXPECT_FALSE(sa.empty());
  EXPECT_EQ(sa, snapshot(b / "out"));
}

TEST(Pipeline, OutputPathThatIsAFile) {
  testutil::TempDir dir("pipe");
  testutil::write_file(dir / "file", "x");
  EXPECT_THROW(io::create_output_dir(dir / "file"), ConfigError);
  io::create_output_dir(dir / "a/b/c");
  EXPECT_TRUE(fs::is_directory(dir / "a/b/c"));
  EXPECT_FALSE(fs::exists(dir / "a/b/c.partial"));
}

TEST(Stages, ExtractMissingInputIsConfigError) {
  testutil::TempDir dir("stage");
  ExtractionConfig cfg;
  EXPECT_THROW(extract_file(dir / "none.conllu", dir / "o.pairs", cfg, 1), ConfigError);
  EXPECT_FALSE(fs::exists(dir / "o.pairs"));
}

TEST(Stages, TextCorpusForLinearContexts) {
  testutil::TempDir dir("stage");
  ExtractionConfig cfg;
  cfg.linear = true;
  cfg.window_k = 1;
  testutil::write_file(dir / "c.txt", "A b c\n\nd e\n");
  const auto r = extract_file(dir / "c.txt", dir / "o.pairs", cfg, 1);
  EXPECT_EQ(r.pairs, 6u);
  EXPECT_EQ(testutil::read_file(dir / "o.pairs"), "a b\nb a\nb c\nc b\nd e\ne d\n");
}
