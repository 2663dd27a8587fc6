// proscore/include/proscore/flow.h

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

#ifndef PROSCORE_FLOW_H_
#define PROSCORE_FLOW_H_

#include <span>
#include <string>
#include <vector>

#include "proscore/corpus.h"

namespace proscore {

/// Two-hidden-layer tanh perceptron. Weights act on column batches.
struct Mlp {
  Eigen::MatrixXd w1, w2, w3;
  Eigen::VectorXd b1, b2, b3;

  Eigen::Index num_params() const;
  Eigen::Index in_dim() const { return w1.cols(); }
  Eigen::Index out_dim() const { return w3.rows(); }
};

/// Affine coupling layer. In the latent-to-data direction the transformed
/// half becomes y_B = x_B * exp(s(x_A)) + t(x_A) with
/// s = cap * tanh(scale_net(x_A)); the conditioning half passes through.
struct CouplingLayer {
  std::vector<int> cond_dims;   ///< A
  std::vector<int> trans_dims;  ///< B
  Mlp scale_net;
  Mlp shift_net;
  Eigen::VectorXd scale_cap;

  Eigen::Index num_params() const;
};

struct FlowConfig {
  int dim = 16;
  int num_layers = 10;
  int hidden = 64;
  double scale_cap = 2.0;
  uint64_t seed = 7;
};

/// Stack of coupling layers with alternating half/half masks and a
/// standard-normal base distribution.
class FlowModel {
 public:
  FlowModel() = default;

  /// Output layers of both nets start at zero, so the flow is the identity.
  static FlowModel Create(const FlowConfig& cfg);

  int dim() const { return dim_; }
  int num_layers() const { return static_cast<int>(layers_.size()); }
  const std::vector<CouplingLayer>& layers() const { return layers_; }
  std::vector<CouplingLayer>& mutable_layers() { return layers_; }

  Eigen::Index num_params() const;
  /// Flattened parameters in a fixed layer/net/tensor order.
  Eigen::VectorXd GetParams() const;
  void SetParams(const Eigen::VectorXd& params);

  /// Fills every weight (including the output layers) with N(0, scale^2).
  void Randomize(uint64_t seed, double scale);

  std::string Encode() const;
  static FlowModel Decode(std::string_view bytes, const std::string& what);

  bool operator==(const FlowModel& o) const { return Encode() == o.Encode(); }

 private:
  int dim_ = 0;
  std::vector<CouplingLayer> layers_;
};

enum class FlowDirection {
  kForward,  ///< latent -> data, f
  kInverse,  ///< data -> latent, f^-1
};

struct FlowImages {
  Matrix images;                ///< N x D
  Eigen::VectorXd log_det;      ///< log|det d(output)/d(input)| per row
};

/// Throws DivergenceError naming the layer if an activation is non-finite.
FlowImages FlowTransform(const FlowModel& m, FlowDirection direction, const Matrix& batch);

/// Standard-normal log-density of f^-1(o) plus the inverse log-determinant.
Eigen::VectorXd FlowLogProb(const FlowModel& m, const Matrix& batch);

/// Mean of the latent images of the frames.
Eigen::VectorXd FlowEmbed(const FlowModel& m, const FeatureSequence& fs);

/// Log-density of a unit-covariance Gaussian with the given mean.
double UnitGaussianLogDensity(const double* z, const double* mean, int dim);

// ---------------------------------------------------------------------------
// Optimization.

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 256;
  int epochs = 10;
  uint64_t seed = 7;

  void Validate() const;
};

class Adam {
 public:
  Adam(const AdamConfig& cfg, Eigen::Index num_params);
  void Step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);
  int64_t steps() const { return t_; }

 private:
  AdamConfig cfg_;
  Eigen::VectorXd m_, v_;
  int64_t t_ = 0;
};

/// Objective and gradients of the mean negative log-likelihood of a batch
/// under a flow with per-sample Gaussian prior means (unit covariance).
struct FlowLossGrad {
  double loss = 0.0;
  Eigen::VectorXd backbone_grad;  ///< layout of FlowModel::GetParams
  Matrix mean_grad;               ///< one row per prior mean
};

/// `labels[n]` selects the row of `prior_means` used for sample n.
FlowLossGrad FlowNllGradient(const FlowModel& m, const Matrix& batch, std::span<const int> labels,
                             const Matrix& prior_means);

/// Loss only, for finite-difference checks.
double FlowNll(const FlowModel& m, const Matrix& batch, std::span<const int> labels,
               const Matrix& prior_means);

struct FlowTrainResult {
  FlowModel model;
  /// Prior means after training (one row; zeros unless learned).
  Matrix prior_means;
  /// Mean negative log-likelihood over each epoch's minibatches.
  std::vector<double> trace;
};

/// Maximum-likelihood training of a flow with a standard-normal prior. With
/// `learn_prior_mean`, a single prior mean is learned jointly.
FlowTrainResult TrainFlow(FlowModel init, const Matrix& frames, const AdamConfig& cfg,
                          bool learn_prior_mean = false);

/// `count` seeded unit-norm vectors of dimension `dim` (rows).
Matrix UnitNormMeans(int count, int dim, uint64_t seed);

namespace detail {

/// Shared minibatch Adam loop for flows with class-specific prior means.
FlowTrainResult TrainFlowWithPriors(FlowModel init, Matrix prior_means, bool learn_means,
                                    const Matrix& frames, std::span<const int> labels,
                                    const AdamConfig& cfg);

}  // namespace detail

void WriteFlow(const std::string& path, const FlowModel& model);
FlowModel ReadFlow(const std::string& path);

}  // namespace proscore

#endif  // PROSCORE_FLOW_H_
