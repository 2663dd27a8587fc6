// proscore/include/proscore/ivector.h

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

#ifndef PROSCORE_IVECTOR_H_
#define PROSCORE_IVECTOR_H_

#include <string>
#include <vector>

#include "proscore/gmm.h"

namespace proscore {

/// Zeroth and centred first-order Baum-Welch statistics of one utterance
/// against a UBM.
struct BaumWelchStats {
  std::string utterance_id;
  Vector zeroth;         ///< N_k
  Matrix first_centered;  ///< K x D, sum_t gamma_tk (o_t - m_k)
};

BaumWelchStats UbmStats(const GmmModel& ubm, const FeatureSequence& fs);

/// Mixture of linear Gaussians with low-rank loadings T_k (D x R) and a
/// standard-normal prior on the latent factor.
class IVectorModel {
 public:
  IVectorModel() = default;
  IVectorModel(GmmModel ubm, std::vector<Eigen::MatrixXd> loadings);

  const GmmModel& ubm() const { return ubm_; }
  const std::vector<Eigen::MatrixXd>& loadings() const { return loadings_; }
  /// Diagonal covariances, one row per component (taken from the UBM).
  const Matrix& covariances() const { return ubm_.variances(); }
  int num_components() const { return ubm_.num_components(); }
  int feature_dim() const { return ubm_.dim(); }
  int ivector_dim() const { return loadings_.empty() ? 0 : static_cast<int>(loadings_[0].cols()); }

  std::string Encode() const;
  static IVectorModel Decode(std::string_view bytes, const std::string& what);

 private:
  friend class IVectorPrecompute;
  GmmModel ubm_;
  std::vector<Eigen::MatrixXd> loadings_;
};

struct IVectorPosterior {
  Vector mean;                ///< the i-vector
  Eigen::MatrixXd precision;  ///< L
};

/// Posterior of the latent factor given the statistics.
IVectorPosterior InferIVector(const IVectorModel& model, const BaumWelchStats& stats);

struct IVectorTrainConfig {
  int ivector_dim = 16;
  int iterations = 10;
  /// Std of the random initial loadings.
  double init_scale = 0.1;
  uint64_t seed = 7;
};

struct IVectorTrainResult {
  IVectorModel model;
  /// Log-likelihood of the first-order statistics (up to a constant that
  /// does not depend on the loadings) after each EM iteration.
  std::vector<double> trace;
};

IVectorTrainResult TrainIVector(const GmmModel& ubm, const std::vector<BaumWelchStats>& stats,
                                const IVectorTrainConfig& cfg);

/// Same as TrainIVector but starting from the given loadings.
IVectorTrainResult TrainIVectorFrom(IVectorModel init, const std::vector<BaumWelchStats>& stats,
                                    int iterations);

/// The objective tracked by training, for a fixed model.
double IVectorObjective(const IVectorModel& model, const std::vector<BaumWelchStats>& stats);

void WriteIVectorModel(const std::string& path, const IVectorModel& model);
IVectorModel ReadIVectorModel(const std::string& path);

}  // namespace proscore

#endif  // PROSCORE_IVECTOR_H_
