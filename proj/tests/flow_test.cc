// proscore/tests/flow_test.cc

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

#include "oracles.h"
#include "proscore/flow.h"
#include "test_util.h"

using namespace proscore;
using proscore::testing::RandomMatrix;
using proscore::testing::TempDir;

namespace {

FlowModel Random(int dim, int layers, int hidden, uint64_t seed, double scale = 0.3) {
  FlowConfig cfg;
  cfg.dim = dim;
  cfg.num_layers = layers;
  cfg.hidden = hidden;
  FlowModel m = FlowModel::Create(cfg);
  m.Randomize(seed, scale);
  return m;
}

Eigen::VectorXd Row(const Matrix& m, Eigen::Index i) { return m.row(i).transpose(); }

}  // namespace

TEST_CASE("fresh flow is the identity") {
  FlowConfig cfg;
  cfg.dim = 4;
  const FlowModel m = FlowModel::Create(cfg);
  const Matrix x = RandomMatrix(10, 4, 1);
  for (auto dir : {FlowDirection::kForward, FlowDirection::kInverse}) {
    const auto r = FlowTransform(m, dir, x);
    CHECK(r.images == x);
    CHECK(r.log_det.cwiseAbs().maxCoeff() == 0.0);
  }
  FlowConfig two;
  two.dim = 2;
  const FlowModel m2 = FlowModel::Create(two);
  CHECK(FlowLogProb(m2, Matrix::Zero(1, 2))(0) == doctest::Approx(-std::log(2 * std::numbers::pi)));
  const Matrix o = RandomMatrix(5, 2, 2);
  const Eigen::VectorXd lp = FlowLogProb(m2, o);
  const double zeros[2] = {0.0, 0.0};
  for (int i = 0; i < 5; ++i) {
    CHECK(lp(i) == doctest::Approx(UnitGaussianLogDensity(o.row(i).data(), zeros, 2)));
  }
}

TEST_CASE("exact invertibility and log-det antisymmetry") {
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    const FlowModel m = Random(6, 4, 8, seed, 0.5);
    const Matrix x = RandomMatrix(50, 6, seed + 10, 2.0);
    const auto inv = FlowTransform(m, FlowDirection::kInverse, x);
    const auto fwd = FlowTransform(m, FlowDirection::kForward, inv.images);
    CHECK((fwd.images - x).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((fwd.log_det + inv.log_det).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("analytic log-det matches a numeric Jacobian") {
  const FlowModel m = Random(3, 4, 8, 7, 0.5);
  const Matrix x = RandomMatrix(20, 3, 8);
  const auto inv = FlowTransform(m, FlowDirection::kInverse, x);
  for (int i = 0; i < 20; ++i) {
    const auto f = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
      return Row(FlowTransform(m, FlowDirection::kInverse, Matrix(v.transpose())).images, 0);
    };
    const double det = oracle::NumericJacobian(f, Row(x, i)).determinant();
    CHECK(std::abs(std::exp(inv.log_det(i)) - det) <= 1e-5 * std::abs(det));
  }
}

TEST_CASE("density of a random 2-D flow integrates to one") {
  const FlowModel m = Random(2, 4, 8, 9, 0.4);
  const int steps = 400;
  const double lo = -14.0, hi = 14.0, h = (hi - lo) / steps;
  Matrix grid(steps, 2);
  double mass = 0.0;
  for (int i = 0; i < steps; ++i) {
    for (int j = 0; j < steps; ++j) grid.row(j) << lo + (i + 0.5) * h, lo + (j + 0.5) * h;
    mass += FlowLogProb(m, grid).array().exp().sum() * h * h;
  }
  CHECK(std::abs(mass - 1.0) <= 1e-2);
}

TEST_CASE("negative log-likelihood gradient matches finite differences") {
  const FlowModel m = Random(4, 3, 8, 13);
  const Matrix batch = RandomMatrix(12, 4, 14);
  const std::vector<int> labels(12, 0);
  const Matrix means = Matrix::Zero(1, 4);
  const auto g = FlowNllGradient(m, batch, labels, means);
  CHECK(g.loss == doctest::Approx(FlowNll(m, batch, labels, means)).epsilon(1e-14));
  const auto numeric = oracle::NumericGradient(
      [&](const Eigen::VectorXd& p) {
        FlowModel q = m;
        q.SetParams(p);
        return FlowNll(q, batch, labels, means);
      },
      m.GetParams());
  CHECK(oracle::MaxRelativeError(g.backbone_grad, numeric) < 1e-4);
  CHECK(g.backbone_grad.size() == m.num_params());
}

TEST_CASE("parameter flattening round-trips") {
  FlowModel m = Random(4, 2, 5, 15);
  const Eigen::VectorXd p = m.GetParams();
  FlowModel q = Random(4, 2, 5, 16);
  q.SetParams(p);
  CHECK(q.GetParams() == p);
  CHECK(q == m);
  CHECK_THROWS(q.SetParams(Eigen::VectorXd::Zero(p.size() + 1)));
}

TEST_CASE("training") {
  AdamConfig adam;
  adam.batch_size = 128;
  adam.epochs = 5;
  FlowConfig cfg;
  cfg.dim = 2;
  cfg.num_layers = 4;
  cfg.hidden = 16;
  SUBCASE("standard normal data stays at the entropy bound") {
    const Matrix x = RandomMatrix(4096, 2, 17);
    const auto r = TrainFlow(FlowModel::Create(cfg), x, adam);
    const double entropy = 0.5 * 2 * std::log(2 * std::numbers::pi * std::numbers::e);
    REQUIRE(r.trace.size() == 5);
    CHECK(std::abs(r.trace.back() - entropy) <= 0.01 * entropy);
  }
  SUBCASE("a shifted Gaussian is learned") {
    Matrix x = RandomMatrix(2048, 2, 18, 0.5);
    x.col(0).array() += 2.0;
    const FlowModel init = FlowModel::Create(cfg);
    const auto r = TrainFlow(init, x, adam);
    CHECK(FlowLogProb(r.model, x).mean() > FlowLogProb(init, x).mean());
  }
  SUBCASE("same seed gives identical parameters") {
    const Matrix x = RandomMatrix(512, 2, 19);
    const auto a = TrainFlow(FlowModel::Create(cfg), x, adam);
    const auto b = TrainFlow(FlowModel::Create(cfg), x, adam);
    CHECK(a.model.GetParams() == b.model.GetParams());
    CHECK(a.trace == b.trace);
  }
  SUBCASE("invalid optimizer settings") {
    adam.learning_rate = 0.0;
    CHECK_THROWS_AS(adam.Validate(), ConfigError);
    adam = AdamConfig{};
    adam.beta1 = 1.0;
    CHECK_THROWS_AS(adam.Validate(), ConfigError);
  }
}

TEST_CASE("Adam step on a quadratic") {
  AdamConfig cfg;
  cfg.learning_rate = 0.1;
  Adam opt(cfg, 1);
  Eigen::VectorXd p = Eigen::VectorXd::Constant(1, 3.0);
  // First step moves by exactly the learning rate against the gradient sign.
  opt.Step(p, Eigen::VectorXd::Constant(1, 6.0));
  CHECK(p(0) == doctest::Approx(2.9).epsilon(1e-9));
  for (int i = 0; i < 500; ++i) opt.Step(p, 2.0 * p);
  CHECK(std::abs(p(0)) < 0.05);
  CHECK(opt.steps() == 501);
}

TEST_CASE("utterance embedding averages latent images") {
  const FlowModel m = Random(3, 2, 6, 21);
  FeatureSequence fs{"u", RandomMatrix(5, 3, 22)};
  const auto z = FlowEmbed(m, fs);
  const Matrix latent = FlowTransform(m, FlowDirection::kInverse, fs.frames).images;
  CHECK((z - Eigen::VectorXd(latent.colwise().mean().transpose())).cwiseAbs().maxCoeff() <= 1e-12);

  FeatureSequence one{"u", fs.frames.topRows(1)};
  CHECK((FlowEmbed(m, one) - Row(latent, 0)).cwiseAbs().maxCoeff() <= 1e-15);

  FeatureSequence twice{"u", Matrix(10, 3)};
  twice.frames << fs.frames, fs.frames;
  CHECK((FlowEmbed(m, twice) - z).cwiseAbs().maxCoeff() <= 1e-12);

  FlowConfig cfg;
  cfg.dim = 3;
  CHECK((FlowEmbed(FlowModel::Create(cfg), fs) -
         Eigen::VectorXd(fs.frames.colwise().mean().transpose()))
            .cwiseAbs()
            .maxCoeff() <= 1e-15);
  CHECK_THROWS(FlowEmbed(m, FeatureSequence{"u", Matrix(0, 3)}));
}

TEST_CASE("PNF1 round trip") {
  TempDir dir("flow_rt");
  const FlowModel m = Random(5, 3, 7, 23);
  WriteFlow(dir / "a.pnf1", m);
  CHECK(ReadFlow(dir / "a.pnf1") == m);
  CHECK(m.Encode().substr(0, 4) == "PNF1");
}
