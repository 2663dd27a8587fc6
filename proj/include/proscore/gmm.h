// proscore/include/proscore/gmm.h

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

#ifndef PROSCORE_GMM_H_
#define PROSCORE_GMM_H_

#include <string>
#include <vector>

#include "proscore/corpus.h"

namespace proscore {

/// Diagonal-covariance Gaussian mixture.
class GmmModel {
 public:
  GmmModel() = default;
  GmmModel(Vector weights, Matrix means, Matrix variances);

  int num_components() const { return static_cast<int>(weights_.size()); }
  int dim() const { return static_cast<int>(means_.cols()); }
  const Vector& weights() const { return weights_; }
  const Matrix& means() const { return means_; }
  const Matrix& variances() const { return variances_; }

  /// log(w_k) + log N(x; mu_k, diag(var_k)) for every component k.
  void ComponentLogLikes(const double* frame, double* out) const;
  /// log p(x).
  double LogLikelihood(const double* frame) const;
  /// Responsibilities of each component for `frame`; returns log p(x).
  double Posteriors(const double* frame, double* out) const;

  void Validate() const;

  std::string Encode() const;
  static GmmModel Decode(std::string_view bytes, const std::string& what);

  bool operator==(const GmmModel& o) const {
    return weights_ == o.weights_ && means_ == o.means_ && variances_ == o.variances_;
  }

 private:
  void CacheConstants();

  Vector weights_;
  Matrix means_;
  Matrix variances_;
  // log w_k - 0.5 * (D log 2pi + sum_d log var_kd)
  Vector log_consts_;
  Matrix inv_vars_;
};

struct GmmTrainConfig {
  int num_components = 64;
  int iterations = 50;
  int kmeans_iterations = 10;
  /// Variance floor as a fraction of the global per-dimension variance.
  double variance_floor = 1e-4;
  uint64_t seed = 7;
};

struct GmmTrainResult {
  GmmModel model;
  /// Mean per-frame log-likelihood after each EM iteration.
  std::vector<double> trace;
};

/// k-means initialization followed by EM. Throws DataError when there are
/// fewer frames than components or all frames are identical.
GmmTrainResult TrainGmm(const Matrix& frames, const GmmTrainConfig& cfg);

struct GmmLogLik {
  std::vector<double> per_frame;
  double utterance_mean = 0.0;
};

GmmLogLik GmmLogLikelihood(const GmmModel& model, const FeatureSequence& fs);

void WriteGmm(const std::string& path, const GmmModel& model);
GmmModel ReadGmm(const std::string& path);

/// Stacks the frames of several sequences into one matrix.
Matrix StackFrames(const std::vector<const FeatureSequence*>& seqs);

}  // namespace proscore

#endif  // PROSCORE_GMM_H_
