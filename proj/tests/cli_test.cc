// proscore/tests/cli_test.cc

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

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "test_util.h"

using proscore::testing::TempDir;

namespace {

struct Result {
  int status = -1;
  std::string out;
};

Result Run(const std::string& args) {
  Result r;
  const std::string cmd = std::string(PROSCORE_CLI) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::vector<std::vector<std::string>> Tsv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::istringstream ls(line);
    std::string field;
    while (std::getline(ls, field, '\t')) f.push_back(field);
    rows.push_back(f);
  }
  return rows;
}

}  // namespace

TEST_CASE("simulate") {
  const Result r = Run("simulate --a 1 --delta-min -1 --delta-max 1 --steps 3");
  REQUIRE(r.status == 0);
  const auto rows = Tsv(r.out);
  REQUIRE(rows.size() == 4);
  CHECK(rows[1][2].rfind("0.2689", 0) == 0);
  CHECK(std::stod(rows[1][2]) == doctest::Approx(0.268941).epsilon(1e-5));
  CHECK(std::stod(rows[2][2]) == doctest::Approx(0.731059).epsilon(1e-5));
  CHECK(std::stod(rows[3][2]) == doctest::Approx(0.952574).epsilon(1e-5));

  const Result one = Run("simulate --a 1 --delta-min 0.5 --delta-max 2 --steps 1");
  REQUIRE(one.status == 0);
  CHECK(Tsv(one.out).size() == 2);
  CHECK(std::stod(Tsv(one.out)[1][1]) == 0.5);

  CHECK(Run("simulate --a 0").status == 1);
  CHECK(Run("simulate --a 1 --steps 0").status == 1);
  CHECK(Run("no-such-command").status == 1);
}

TEST_CASE("file errors map to exit codes") {
  TempDir dir("cli_errors");
  {
    std::ofstream bad(dir / "bad.bin", std::ios::binary);
    bad << "XXXX0123456789";
  }
  CHECK(Run("score --manifest " + (dir / "bad.bin") + " --out -").status == 2);
  {
    std::ofstream cfg(dir / "c.json");
    cfg << R"({"seed": 1, "paths": {"model_dir": "m"}})";
  }
  CHECK(Run("run " + (dir / "c.json")).status == 1);
}

TEST_CASE("synth, train and score") {
  TempDir dir("cli_flow");
  const std::string cfg = dir / "c.json";
  {
    std::ofstream out(cfg);
    out << R"({"seed": 5, "paths": {"manifest": ")" << (dir / "corpus/manifest.json")
        << R"(", "model_dir": ")" << (dir / "models") << R"(", "report_dir": ")" << (dir / "reports")
        << R"("}, "synth": {"num_phones": 4, "feature_dim": 3, "num_speakers": 10,
        "utterances_per_speaker": 2, "num_prompts": 2, "min_phones_per_utterance": 3,
        "max_phones_per_utterance": 4, "min_frames_per_phone": 2, "max_frames_per_phone": 2}})";
  }
  REQUIRE(Run("--config " + cfg + " synth --out " + (dir / "corpus")).status == 0);
  const std::string manifest = dir / "corpus/manifest.json";

  const Result gop = Run("--config " + cfg + " score --manifest " + manifest + " --out - --split eval");
  REQUIRE(gop.status == 0);
  const auto rows = Tsv(gop.out);
  REQUIRE(rows.size() >= 2);
  CHECK(rows[0] == std::vector<std::string>{"utterance_id", "gop"});

  const Result dev = Run("--config " + cfg + " score --manifest " + manifest + " --out - --split dev");
  REQUIRE(dev.status == 0);
  for (const auto& e : Tsv(gop.out)) {
    if (e[0] == "utterance_id") continue;
    for (const auto& d : Tsv(dev.out)) CHECK(d[0] != e[0]);
  }

  REQUIRE(Run("--config " + cfg + " train-gmm --manifest " + manifest + " --out " + (dir / "u.pgmm") +
              " --components 2 --iterations 2")
              .status == 0);
  const Result with_gmm = Run("--config " + cfg + " score --manifest " + manifest + " --model " +
                              (dir / "u.pgmm") + " --out -");
  REQUIRE(with_gmm.status == 0);
  CHECK(Tsv(with_gmm.out)[0] == std::vector<std::string>{"utterance_id", "gop", "gmm_loglik"});
}
