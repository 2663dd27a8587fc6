// proscore/tests/gmm_test.cc

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

#include <cmath>
#include <numbers>

#include "proscore/gmm.h"
#include "test_util.h"

using namespace proscore;
using proscore::testing::RandomMatrix;
using proscore::testing::TempDir;

namespace {

GmmModel StandardNormal1D() {
  Vector w(1);
  w << 1.0;
  return GmmModel(w, Matrix::Zero(1, 1), Matrix::Ones(1, 1));
}

Matrix TwoClusters(int n, uint64_t seed) {
  Matrix x = RandomMatrix(n, 2, seed, 0.5);
  for (int i = 0; i < n; ++i) x(i, 0) += (i % 2 == 0) ? 5.0 : -5.0;
  return x;
}

}  // namespace

TEST_CASE("single component recovers the sample moments") {
  const Matrix x = RandomMatrix(500, 3, 1) * 2.0;
  GmmTrainConfig cfg;
  cfg.num_components = 1;
  cfg.iterations = 3;
  const GmmModel m = TrainGmm(x, cfg).model;
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::RowVectorXd var = (x.rowwise() - mean).array().square().colwise().mean();
  CHECK((m.means().row(0) - mean).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((m.variances().row(0) - var).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(m.weights()(0) == doctest::Approx(1.0));
}

TEST_CASE("two separated clusters are found") {
  const Matrix x = TwoClusters(400, 2);
  GmmTrainConfig cfg;
  cfg.num_components = 2;
  cfg.iterations = 20;
  const GmmModel m = TrainGmm(x, cfg).model;
  const double hi = std::max(m.means()(0, 0), m.means()(1, 0));
  const double lo = std::min(m.means()(0, 0), m.means()(1, 0));
  CHECK(std::abs(hi - 5.0) < 0.1 * 0.5);
  CHECK(std::abs(lo + 5.0) < 0.1 * 0.5);
}

TEST_CASE("EM trace is non-decreasing over 50 iterations") {
  const Matrix x = RandomMatrix(3000, 4, 3) + RandomMatrix(3000, 4, 4).cwiseAbs2();
  GmmTrainConfig cfg;
  cfg.num_components = 16;
  cfg.iterations = 50;
  const auto r = TrainGmm(x, cfg);
  REQUIRE(r.trace.size() == 50);
  for (size_t i = 1; i < r.trace.size(); ++i) {
    CHECK(r.trace[i] - r.trace[i - 1] >= -1e-10 * std::abs(r.trace[i - 1]));
  }
}

TEST_CASE("training is deterministic and weights form a simplex") {
  const Matrix x = TwoClusters(300, 5);
  GmmTrainConfig cfg;
  cfg.num_components = 4;
  cfg.iterations = 10;
  const auto a = TrainGmm(x, cfg), b = TrainGmm(x, cfg);
  CHECK(a.model == b.model);
  CHECK(a.trace == b.trace);
  CHECK(a.model.weights().sum() == doctest::Approx(1.0).epsilon(1e-9));
  const Eigen::RowVectorXd global_var =
      (x.rowwise() - x.colwise().mean()).array().square().colwise().mean();
  for (int k = 0; k < 4; ++k) {
    CHECK((a.model.variances().row(k).array() >= 1e-4 * global_var.array() * (1 - 1e-12)).all());
  }
}

TEST_CASE("log-likelihood evaluation") {
  const GmmModel m = StandardNormal1D();
  const double zero = 0.0;
  CHECK(m.LogLikelihood(&zero) == doctest::Approx(-0.918939).epsilon(1e-6));
  const double far = 1e3;
  const double ll = m.LogLikelihood(&far);
  CHECK(std::isfinite(ll));
  CHECK(ll == doctest::Approx(-0.5 * 1e6 - 0.5 * std::log(2 * std::numbers::pi)));

  // Multi-component tail stays finite too.
  Vector w(2);
  w << 0.5, 0.5;
  const GmmModel two(w, (Matrix(2, 1) << -1.0, 1.0).finished(), Matrix::Ones(2, 1));
  CHECK(std::isfinite(two.LogLikelihood(&far)));

  FeatureSequence fs{"u", RandomMatrix(7, 1, 6)};
  const auto a = GmmLogLikelihood(m, fs);
  FeatureSequence twice{"u", Matrix(14, 1)};
  twice.frames << fs.frames, fs.frames;
  CHECK(GmmLogLikelihood(m, twice).utterance_mean == doctest::Approx(a.utterance_mean).epsilon(1e-14));
  CHECK(a.per_frame.size() == 7);
  CHECK_THROWS_AS(GmmLogLikelihood(m, FeatureSequence{"u", Matrix::Zero(3, 2)}), DataError);
}

TEST_CASE("responsibilities are a distribution") {
  const Matrix x = TwoClusters(200, 7);
  GmmTrainConfig cfg;
  cfg.num_components = 5;
  cfg.iterations = 5;
  const GmmModel m = TrainGmm(x, cfg).model;
  std::vector<double> post(5);
  for (int i = 0; i < 50; ++i) {
    m.Posteriors(x.row(i).data(), post.data());
    double sum = 0.0;
    for (double p : post) {
      CHECK(p >= 0.0);
      sum += p;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
}

TEST_CASE("1-D density integrates to one") {
  Matrix x = RandomMatrix(400, 1, 8);
  for (int i = 0; i < 200; ++i) x(i, 0) = 3.0 + 0.3 * x(i, 0);
  GmmTrainConfig cfg;
  cfg.num_components = 3;
  cfg.iterations = 20;
  const GmmModel m = TrainGmm(x, cfg).model;
  // Cover every component to +-10 sigma.
  double lo = 1e9, hi = -1e9;
  for (int k = 0; k < 3; ++k) {
    const double s = std::sqrt(m.variances()(k, 0));
    lo = std::min(lo, m.means()(k, 0) - 10 * s);
    hi = std::max(hi, m.means()(k, 0) + 10 * s);
  }
  const int steps = 200000;
  const double h = (hi - lo) / steps;
  double mass = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double o = lo + (i + 0.5) * h;
    mass += std::exp(m.LogLikelihood(&o)) * h;
  }
  CHECK(std::abs(mass - 1.0) <= 1e-3);
}

TEST_CASE("training preconditions") {
  GmmTrainConfig cfg;
  cfg.num_components = 10;
  CHECK_THROWS_AS(TrainGmm(RandomMatrix(5, 2, 9), cfg), DataError);
  CHECK_THROWS_AS(TrainGmm(Matrix::Ones(50, 2), cfg), DataError);
  cfg.iterations = 0;
  CHECK_THROWS_AS(TrainGmm(RandomMatrix(50, 2, 9), cfg), ConfigError);
}

TEST_CASE("PGMM round trip") {
  TempDir dir("gmm_rt");
  GmmTrainConfig cfg;
  cfg.num_components = 3;
  cfg.iterations = 4;
  const GmmModel m = TrainGmm(TwoClusters(100, 10), cfg).model;
  WriteGmm(dir / "a.pgmm", m);
  const GmmModel back = ReadGmm(dir / "a.pgmm");
  CHECK(back == m);
  CHECK(GmmModel::Decode(m.Encode(), "x").Encode() == m.Encode());
  CHECK(m.Encode().substr(0, 4) == "PGMM");
}
