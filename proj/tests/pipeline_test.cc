// proscore/tests/pipeline_test.cc

// Copyright 2026  The proscore Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "proscore/pipeline.h"
#include "test_util.h"

using namespace proscore;
using proscore::testing::TempDir;

namespace {

// A pipeline small enough to run in a few seconds.
std::string SmallConfig(const std::string& root, uint64_t seed = 3) {
  std::ostringstream os;
  os << R"({"seed": )" << seed << R"(,
  "paths": {"manifest": ")" << root << R"(/corpus/manifest.json",
            "model_dir": ")" << root << R"(/models", "report_dir": ")" << root << R"(/reports"},
  "synth": {"num_phones": 4, "feature_dim": 3, "num_speakers": 12, "utterances_per_speaker": 3,
            "num_prompts": 3, "min_phones_per_utterance": 4, "max_phones_per_utterance": 6,
            "min_frames_per_phone": 2, "max_frames_per_phone": 3},
  "gmm": {"num_components": 4, "iterations": 3},
  "ivector": {"ivector_dim": 2, "iterations": 2},
  "flow": {"num_layers": 2, "hidden": 4, "epochs": 1, "batch_size": 64},
  "dnf": {"num_layers": 2, "hidden": 4, "epochs": 1, "batch_size": 64, "num_classes": 5},
  "systems": ["gop", "gmm", "ivector", "nf", "dnf"]})";
  return os.str();
}

std::string Slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("config parsing") {
  const PipelineConfig cfg = ParsePipelineConfig(SmallConfig("/tmp/x"));
  CHECK(cfg.seed == 3);
  CHECK(cfg.gmm.num_components == 4);
  CHECK(cfg.Runs("dnf"));
  CHECK(ParsePipelineConfig(SmallConfig("/tmp/x"), 11).seed == 11);

  CHECK_THROWS_WITH_AS(ParsePipelineConfig(R"({"seed": 1})"),
                       doctest::Contains("paths.manifest"), ConfigError);
  CHECK_THROWS_WITH_AS(
      ParsePipelineConfig(R"({"paths": {"manifest": "m.json", "model_dir": "m", "report_dir": "r"},
                               "gmm": {"componets": 4}})"),
      doctest::Contains("componets"), ConfigError);
  CHECK_THROWS_AS(ParsePipelineConfig(R"({"paths": {"manifest": "m.json", "model_dir": "m", "report_dir": "r"},
                                       "systems": ["asr"]})"),
                  ConfigError);
  CHECK_THROWS_AS(ParsePipelineConfig("{not json"), ConfigError);
  CHECK_THROWS_AS(
      ParsePipelineConfig(R"({"paths": {"manifest": "m.json", "model_dir": "m", "report_dir": "r"},
                              "gop": {"pooling": "median"}})"),
      ConfigError);
}

TEST_CASE("stage cache and determinism") {
  TempDir a("pipeline_a"), b("pipeline_b");
  const PipelineConfig ca = ParsePipelineConfig(SmallConfig(a.path().string()));
  const RunSummary first = RunPipeline(ca, {});
  CHECK(first.reused.empty());
  CHECK_FALSE(first.trained.empty());
  REQUIRE(std::filesystem::exists(first.report_path));

  const RunSummary second = RunPipeline(ca, {});
  CHECK(second.trained.empty());
  CHECK(second.reused.size() == first.trained.size());
  CHECK(Slurp(second.report_path) == Slurp(first.report_path));

  const RunSummary forced = RunPipeline(ca, {true, nullptr});
  CHECK(forced.reused.empty());
  CHECK(Slurp(forced.report_path) == Slurp(first.report_path));

  // Same seed in a different directory gives byte-identical reports.
  const RunSummary other = RunPipeline(ParsePipelineConfig(SmallConfig(b.path().string())), {});
  CHECK(Slurp(other.report_path) == Slurp(first.report_path));
  CHECK(Slurp(other.scores_path) == Slurp(first.scores_path));

  // The report names every configured system on both splits.
  const auto rows = ReadReport(first.report_path);
  bool has_dnf_fusion = false, has_human = false;
  for (const auto& r : rows) {
    has_dnf_fusion |= r.system.find("dnf") != std::string::npos && r.lambda.has_value();
    has_human |= r.system == "human_pairwise";
  }
  CHECK(has_dnf_fusion);
  CHECK(has_human);
}

TEST_CASE("changing a section retrains only downstream stages") {
  TempDir a("pipeline_c");
  std::string text = SmallConfig(a.path().string());
  RunPipeline(ParsePipelineConfig(text), {});
  text.insert(text.rfind('}'), R"(, "svr": {"C": 2.0})");
  const RunSummary s = RunPipeline(ParsePipelineConfig(text), {});
  CHECK_FALSE(s.reused.empty());
  CHECK_FALSE(s.trained.empty());
  for (const auto& stage : s.trained) CHECK(stage.find("gmm") == std::string::npos);
}

TEST_CASE("SHA-256") {
  CHECK(Sha256Hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(Sha256Hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}
