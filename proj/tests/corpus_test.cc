// proscore/tests/corpus_test.cc

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

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "oracles.h"
#include "proscore/binary_io.h"
#include "proscore/corpus.h"
#include "test_util.h"

using namespace proscore;
using proscore::testing::RandomMatrix;
using proscore::testing::TempDir;

namespace {

UtteranceRecord MakeRecord(const std::string& id, int T, int D,
                           const std::vector<std::string>& phones, uint64_t seed) {
  UtteranceRecord r;
  r.features = {id, RandomMatrix(T, D, seed)};
  const int P = static_cast<int>(phones.size());
  r.posteriors.utterance_id = id;
  r.posteriors.phone_table = phones;
  r.posteriors.post = Matrix::Constant(T, P, 1.0 / P);
  r.alignment.utterance_id = id;
  r.alignment.segments = {{0, 0, T / 2}, {P - 1, T / 2, T}};
  r.label = RatedUtterance::FromScores(id, {3, 4, 4});
  return r;
}

Corpus MakeCorpus(int n, int T = 10, int D = 4) {
  const std::vector<std::string> phones = {"a", "b", "c"};
  std::vector<UtteranceRecord> recs;
  SplitManifest splits;
  for (int i = 0; i < n; ++i) {
    const std::string id = "utt" + std::to_string(i);
    recs.push_back(MakeRecord(id, T, D, phones, 100 + static_cast<uint64_t>(i)));
    (i % 2 == 0 ? splits.train_ids : splits.eval_ids).push_back(id);
  }
  return Corpus(phones, std::move(recs), splits);
}

}  // namespace

TEST_CASE("feature matrices round-trip bit-exactly") {
  TempDir dir("corpus_feat");
  const Matrix m = RandomMatrix(7, 5, 1);
  WriteFeatureFile(dir / "f.prf", m);
  const Matrix back = ReadFeatureFile(dir / "f.prf");
  CHECK(back == m);
  WriteFeatureFile(dir / "g.prf", back);
  CHECK(ReadFileBytes(dir / "f.prf") == ReadFileBytes(dir / "g.prf"));
}

TEST_CASE("feature file layout is magic, version, rows, cols, little-endian doubles") {
  Matrix m(1, 2);
  m << 1.0, -2.0;
  const std::string bytes = EncodeFeatures(m);
  REQUIRE(bytes.size() == 4 + 4 + 4 + 4 + 16);
  CHECK(bytes.substr(0, 4) == "PRF1");
  CHECK(static_cast<unsigned char>(bytes[4]) == 1);  // version
  CHECK(static_cast<unsigned char>(bytes[8]) == 1);  // rows
  CHECK(static_cast<unsigned char>(bytes[12]) == 2);  // cols
  double first;
  std::memcpy(&first, bytes.data() + 16, 8);
  CHECK(first == 1.0);
}

TEST_CASE("posteriorgrams round-trip with their phone table") {
  TempDir dir("corpus_post");
  PosteriorGram pg;
  pg.utterance_id = "u";
  pg.phone_table = {"sil", "aa", "zh"};
  pg.post = Matrix::Constant(4, 3, 1.0 / 3.0);
  WritePosteriorFile(dir / "p.prf", pg);
  const PosteriorGram back = ReadPosteriorFile(dir / "p.prf", "u");
  CHECK(back.post == pg.post);
  CHECK(back.phone_table == pg.phone_table);
  CHECK_THROWS_AS(ReadFeatureFile(dir / "p.prf"), DataError);
}

TEST_CASE("truncated and foreign files are rejected") {
  const std::string bytes = EncodeFeatures(RandomMatrix(3, 3, 2));
  CHECK_THROWS_AS(DecodeFeatures(bytes.substr(0, bytes.size() - 1), "x"), DataError);
  CHECK_THROWS_AS(DecodeFeatures("PGMM" + bytes.substr(4), "x"), DataError);
  CHECK_THROWS_AS(DecodeFeatures(bytes + "z", "x"), DataError);
}

TEST_CASE("posteriorgram row-sum violation names the row") {
  PosteriorGram pg;
  pg.utterance_id = "bad";
  pg.phone_table = {"a", "b"};
  pg.post = Matrix::Constant(3, 2, 0.5);
  pg.post.row(1) << 0.5, 0.4;
  try {
    ValidatePosteriors(pg);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("bad") != std::string::npos);
    CHECK(msg.find("row 1") != std::string::npos);
  }
}

TEST_CASE("alignment validation") {
  PhoneAlignment al{"u", {{0, 0, 3}, {1, 3, 5}}};
  CHECK_NOTHROW(ValidateAlignment(al, 5, 2));
  CHECK_THROWS_AS(ValidateAlignment(al, 4, 2), DataError);
  al.segments[1].phone = 2;
  CHECK_THROWS_AS(ValidateAlignment(al, 5, 2), DataError);
  al.segments = {{0, 0, 3}, {1, 2, 5}};
  CHECK_THROWS_AS(ValidateAlignment(al, 5, 2), DataError);
  al.segments = {{0, 2, 2}};
  CHECK_THROWS_AS(ValidateAlignment(al, 5, 2), DataError);
}

TEST_CASE("corpus write then load reproduces every record") {
  TempDir dir("corpus_rt");
  const Corpus c = MakeCorpus(4);
  const std::string manifest = WriteCorpus(dir.path().string(), c);
  const Corpus back = LoadCorpus(manifest);
  REQUIRE(back.utterances().size() == 4);
  CHECK(back.phone_table() == c.phone_table());
  for (const auto& u : c.utterances()) {
    const auto& v = back.Get(u.id());
    CHECK(v.features.frames == u.features.frames);
    CHECK(v.posteriors.post == u.posteriors.post);
    CHECK(v.alignment.segments == u.alignment.segments);
    CHECK(v.label.rater_scores == u.label.rater_scores);
  }
  CHECK(back.splits().train_ids == c.splits().train_ids);
  CHECK(back.splits().eval_ids == c.splits().eval_ids);
}

TEST_CASE("single-utterance corpus with D=40 loads") {
  TempDir dir("corpus_one");
  const Corpus c = MakeCorpus(1, 10, 40);
  const Corpus back = LoadCorpus(WriteCorpus(dir.path().string(), c));
  CHECK(back.utterances().size() == 1);
  CHECK(back.feature_dim() == 40);
}

TEST_CASE("empty manifest is an empty corpus error") {
  TempDir dir("corpus_empty");
  const std::string manifest = WriteCorpus(dir.path().string(), MakeCorpus(1));
  std::ofstream(manifest) << R"({"phones": "phones.txt", "features": "features",
    "posteriors": "posteriors", "alignments": "alignments.tsv", "labels": "labels.tsv",
    "splits": "splits.tsv", "utterances": []})";
  try {
    LoadCorpus(manifest);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("empty corpus") != std::string::npos);
  }
}

TEST_CASE("corpus rejects inconsistent records") {
  const std::vector<std::string> phones = {"a", "b", "c"};
  auto r1 = MakeRecord("x", 10, 4, phones, 1);
  auto r2 = MakeRecord("y", 10, 3, phones, 2);
  CHECK_THROWS_AS(Corpus(phones, {r1, r2}, SplitManifest{{"x"}, {}, {"y"}}).Validate(), DataError);
  auto r3 = MakeRecord("y", 10, 4, phones, 2);
  r3.posteriors.post = Matrix::Constant(9, 3, 1.0 / 3.0);
  CHECK_THROWS_AS(Corpus(phones, {r1, r3}, SplitManifest{{"x"}, {}, {"y"}}).Validate(), DataError);
  auto r4 = MakeRecord("y", 10, 4, phones, 2);
  CHECK_NOTHROW(Corpus(phones, {r1, r4}, SplitManifest{{"x"}, {}, {"y"}}).Validate());
  CHECK_THROWS_AS(Corpus(phones, {r1, r4}, SplitManifest{{"x", "y"}, {}, {"y"}}).Validate(), DataError);
  CHECK_THROWS_AS(Corpus(phones, {r1, r4}, SplitManifest{{"x"}, {"y"}, {"y"}}).Validate(), DataError);
  CHECK_THROWS_AS(Corpus(phones, {r1, r1}, SplitManifest{{"x"}, {}, {}}), DataError);
}

TEST_CASE("fit ids are train minus dev") {
  SplitManifest s{{"a", "b", "c", "d"}, {"b"}, {"e"}};
  CHECK(s.FitIds() == std::vector<std::string>{"a", "c", "d"});
}

TEST_CASE("context stacking") {
  FeatureSequence fs{"u", RandomMatrix(6, 40, 3)};
  SUBCASE("D=40 with five frames each side gives 440 dims") {
    const auto out = StackContext(fs, 5, 5);
    CHECK(out.dim() == 440);
    CHECK(out.num_frames() == 6);
  }
  SUBCASE("zero context is the identity") { CHECK(StackContext(fs, 0, 0).frames == fs.frames); }
  SUBCASE("single frame is replicated across the window") {
    FeatureSequence one{"u", fs.frames.topRows(1)};
    const auto out = StackContext(one, 5, 5);
    REQUIRE(out.dim() == 440);
    for (int k = 0; k < 11; ++k) CHECK(out.frames.block(0, k * 40, 1, 40) == one.frames);
  }
  SUBCASE("row t depends only on clamped rows t-left..t+right") {
    FeatureSequence small{"u", RandomMatrix(8, 2, 4)};
    const int left = 2, right = 1;
    const auto base = StackContext(small, left, right);
    for (int src = 0; src < 8; ++src) {
      FeatureSequence bumped = small;
      bumped.frames(src, 0) += 1.0;
      const auto out = StackContext(bumped, left, right);
      for (int t = 0; t < 8; ++t) {
        bool depends = false;
        for (int k = -left; k <= right; ++k) {
          if (std::clamp(t + k, 0, 7) == src) depends = true;
        }
        CHECK((out.frames.row(t) != base.frames.row(t)) == depends);
      }
    }
  }
  CHECK_THROWS(StackContext(fs, -1, 0));
}

TEST_CASE("splits are seeded and disjoint") {
  std::vector<std::string> ids;
  for (int i = 0; i < 100; ++i) ids.push_back("u" + std::to_string(i));
  const auto a = MakeSplits(ids, 0.2, 0.1, 5);
  const auto b = MakeSplits(ids, 0.2, 0.1, 5);
  CHECK(a.train_ids == b.train_ids);
  CHECK(a.eval_ids.size() == 20);
  CHECK(a.train_ids.size() == 80);
  CHECK(a.dev_ids.size() == 8);
  for (const auto& d : a.dev_ids) {
    CHECK(std::find(a.train_ids.begin(), a.train_ids.end(), d) != a.train_ids.end());
  }
}

TEST_CASE("synthetic corpus is deterministic for a fixed seed") {
  SynthConfig cfg;
  cfg.num_speakers = 6;
  const SynthCorpus a = SynthesizeCorpus(cfg);
  const SynthCorpus b = SynthesizeCorpus(cfg);
  REQUIRE(a.corpus.utterances().size() == b.corpus.utterances().size());
  for (size_t i = 0; i < a.corpus.utterances().size(); ++i) {
    CHECK(a.corpus.utterances()[i].features.frames == b.corpus.utterances()[i].features.frames);
    CHECK(a.corpus.utterances()[i].posteriors.post == b.corpus.utterances()[i].posteriors.post);
  }
  CHECK(a.oracle == b.oracle);
  cfg.seed = 8;
  const SynthCorpus c = SynthesizeCorpus(cfg);
  CHECK(c.corpus.utterances()[0].features.frames != a.corpus.utterances()[0].features.frames);
}

TEST_CASE("synthetic posteriorgram rows sum to one") {
  SynthConfig cfg;
  cfg.num_speakers = 4;
  cfg.speaker_noise_spread = 0.3;
  const SynthCorpus s = SynthesizeCorpus(cfg);
  for (const auto& u : s.corpus.utterances()) {
    const Vector sums = u.posteriors.post.rowwise().sum();
    CHECK((sums.array() - 1.0).abs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("noise-free synthesis follows the interpolation construction") {
  // Frame noise also sets the recognizer variance and must stay positive, so
  // it is made negligible rather than zero.
  SynthConfig cfg;
  cfg.num_speakers = 10;
  cfg.frame_noise = 1e-9;
  cfg.proficiency_noise = 0.0;
  cfg.label_noise = 0.0;
  const SynthCorpus s = SynthesizeCorpus(cfg);
  for (const auto& u : s.corpus.utterances()) {
    const double rho = s.oracle.at(u.id());
    for (const auto& seg : u.alignment.segments) {
      const Eigen::RowVectorXd want =
          (1.0 - rho) * s.shifted_means.row(seg.phone) + rho * s.native_means.row(seg.phone);
      for (int t = seg.start; t < seg.end; ++t) {
        CHECK((u.features.frames.row(t) - want).cwiseAbs().maxCoeff() <= 1e-7);
      }
    }
    const int want_label = static_cast<int>(std::lround(std::clamp(1.0 + 4.0 * rho, 1.0, 5.0)));
    for (int r : u.label.rater_scores) CHECK(r == want_label);
  }
}

TEST_CASE("default synthetic labels track proficiency") {
  const SynthCorpus s = SynthesizeCorpus(SynthConfig{});
  std::vector<double> rho, label;
  for (const auto& u : s.corpus.utterances()) {
    rho.push_back(s.oracle.at(u.id()));
    label.push_back(u.label.mean_score);
  }
  const double r = oracle::Pearson(rho, label);
  // Five raters with unit noise around 1 + 4 rho, then rounding.
  CHECK(r >= 0.85);
  CHECK(r <= 0.98);
}

TEST_CASE("synth config validation names the field") {
  SynthConfig cfg;
  cfg.num_phones = 0;
  CHECK_THROWS_WITH_AS(cfg.Validate(), doctest::Contains("num_phones"), ConfigError);
  cfg = SynthConfig{};
  cfg.max_frames_per_phone = 1;
  CHECK_THROWS_AS(cfg.Validate(), ConfigError);
  cfg = SynthConfig{};
  cfg.num_prompts = -1;
  CHECK_THROWS_AS(cfg.Validate(), ConfigError);
  cfg = SynthConfig{};
  cfg.frame_noise = 0.0;
  CHECK_THROWS_WITH_AS(cfg.Validate(), doctest::Contains("frame_noise"), ConfigError);
}
