// proscore/src/ivector.cc

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

#include "proscore/ivector.h"

#include <cmath>

#include "proscore/binary_io.h"

namespace proscore {

namespace {
constexpr std::string_view kIVectorMagic = "PIVM";
constexpr uint32_t kIVectorVersion = 1;
}  // namespace

BaumWelchStats UbmStats(const GmmModel& ubm, const FeatureSequence& fs) {
  const int K = ubm.num_components();
  const int D = ubm.dim();
  if (fs.dim() != D) {
    throw DataError(fs.utterance_id + ": feature dim " + std::to_string(fs.dim()) +
                    " does not match UBM dim " + std::to_string(D));
  }
  BaumWelchStats st{fs.utterance_id, Vector::Zero(K), Matrix::Zero(K, D)};
  std::vector<double> post(static_cast<size_t>(K));
  for (Eigen::Index t = 0; t < fs.num_frames(); ++t) {
    const double* x = fs.frames.data() + t * D;
    ubm.Posteriors(x, post.data());
    for (int k = 0; k < K; ++k) {
      const double g = post[static_cast<size_t>(k)];
      if (g == 0.0) continue;
      st.zeroth(k) += g;
      for (int d = 0; d < D; ++d) st.first_centered(k, d) += g * (x[d] - ubm.means()(k, d));
    }
  }
  return st;
}

IVectorModel::IVectorModel(GmmModel ubm, std::vector<Eigen::MatrixXd> loadings)
    : ubm_(std::move(ubm)), loadings_(std::move(loadings)) {
  const int K = ubm_.num_components();
  const int D = ubm_.dim();
  if (static_cast<int>(loadings_.size()) != K) {
    throw DataError("i-vector model needs one loading matrix per UBM component");
  }
  const auto R = loadings_[0].cols();
  if (R < 1 || R > static_cast<Eigen::Index>(K) * D) {
    throw DataError("i-vector dim must satisfy 1 <= R <= K*D");
  }
  for (const auto& t : loadings_) {
    if (t.rows() != D || t.cols() != R) throw DataError("i-vector loading matrix has wrong shape");
    if (!t.allFinite()) throw DataError("i-vector loadings are not finite");
  }
}

// Per-component T_k' Sigma_k^-1 and T_k' Sigma_k^-1 T_k.
class IVectorPrecompute {
 public:
  explicit IVectorPrecompute(const IVectorModel& m) {
    const int K = m.num_components();
    t_inv_sigma_.resize(static_cast<size_t>(K));
    quad_.resize(static_cast<size_t>(K));
    for (int k = 0; k < K; ++k) {
      const Eigen::VectorXd inv_var = m.covariances().row(k).transpose().cwiseInverse();
      const auto& T = m.loadings_[static_cast<size_t>(k)];
      t_inv_sigma_[static_cast<size_t>(k)] = T.transpose() * inv_var.asDiagonal();
      quad_[static_cast<size_t>(k)] = t_inv_sigma_[static_cast<size_t>(k)] * T;
    }
  }

  // Fills precision L and linear term b.
  void Accumulate(const BaumWelchStats& st, Eigen::MatrixXd& L, Eigen::VectorXd& b) const {
    const auto K = static_cast<Eigen::Index>(quad_.size());
    const auto R = quad_[0].rows();
    L = Eigen::MatrixXd::Identity(R, R);
    b = Eigen::VectorXd::Zero(R);
    for (Eigen::Index k = 0; k < K; ++k) {
      const double n = st.zeroth(k);
      if (n != 0.0) L += n * quad_[static_cast<size_t>(k)];
      b += t_inv_sigma_[static_cast<size_t>(k)] * st.first_centered.row(k).transpose();
    }
  }

 private:
  std::vector<Eigen::MatrixXd> t_inv_sigma_;
  std::vector<Eigen::MatrixXd> quad_;
};

namespace {

void CheckStats(const IVectorModel& m, const BaumWelchStats& st) {
  if (st.zeroth.size() != m.num_components() || st.first_centered.rows() != m.num_components() ||
      st.first_centered.cols() != m.feature_dim()) {
    throw DataError(st.utterance_id + ": statistics do not match the i-vector model");
  }
  if (!st.zeroth.allFinite() || !st.first_centered.allFinite()) {
    throw DataError(st.utterance_id + ": non-finite Baum-Welch statistics");
  }
}

}  // namespace

IVectorPosterior InferIVector(const IVectorModel& model, const BaumWelchStats& stats) {
  CheckStats(model, stats);
  IVectorPrecompute pre(model);
  IVectorPosterior out;
  Eigen::VectorXd b;
  pre.Accumulate(stats, out.precision, b);
  Eigen::LLT<Eigen::MatrixXd> llt(out.precision);
  if (llt.info() != Eigen::Success) {
    throw DataError(stats.utterance_id + ": i-vector precision is not positive definite");
  }
  out.mean = llt.solve(b);
  return out;
}

namespace {

// Per-utterance E-step; returns log-likelihood term -0.5 log|L| + 0.5 b'L^-1 b.
double EStep(const IVectorPrecompute& pre, const BaumWelchStats& st, Eigen::VectorXd& mean,
             Eigen::MatrixXd& cov) {
  Eigen::MatrixXd L;
  Eigen::VectorXd b;
  pre.Accumulate(st, L, b);
  Eigen::LLT<Eigen::MatrixXd> llt(L);
  if (llt.info() != Eigen::Success) {
    throw DataError(st.utterance_id + ": i-vector precision is not positive definite");
  }
  mean = llt.solve(b);
  cov = llt.solve(Eigen::MatrixXd::Identity(L.rows(), L.cols()));
  const Eigen::MatrixXd& chol = llt.matrixLLT();
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < chol.rows(); ++i) logdet += 2.0 * std::log(chol(i, i));
  return -0.5 * logdet + 0.5 * b.dot(mean);
}

}  // namespace

double IVectorObjective(const IVectorModel& model, const std::vector<BaumWelchStats>& stats) {
  IVectorPrecompute pre(model);
  double total = 0.0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  for (const auto& st : stats) {
    CheckStats(model, st);
    total += EStep(pre, st, mean, cov);
  }
  return total / static_cast<double>(stats.size());
}

IVectorTrainResult TrainIVectorFrom(IVectorModel model, const std::vector<BaumWelchStats>& stats,
                                    int iterations) {
  if (iterations < 1) throw ConfigError("ivector.iterations must be >= 1");
  if (stats.empty()) throw DataError("i-vector training needs at least one utterance");
  for (const auto& st : stats) CheckStats(model, st);
  const int K = model.num_components();
  const int D = model.feature_dim();
  const int R = model.ivector_dim();

  IVectorTrainResult result;
  for (int it = 0; it <= iterations; ++it) {
    IVectorPrecompute pre(model);
    std::vector<Eigen::MatrixXd> C(static_cast<size_t>(K), Eigen::MatrixXd::Zero(D, R));
    std::vector<Eigen::MatrixXd> A(static_cast<size_t>(K), Eigen::MatrixXd::Zero(R, R));
    double objective = 0.0;
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    for (const auto& st : stats) {
      objective += EStep(pre, st, mean, cov);
      const Eigen::MatrixXd second = cov + mean * mean.transpose();
      for (int k = 0; k < K; ++k) {
        const double n = st.zeroth(k);
        if (n != 0.0) A[static_cast<size_t>(k)] += n * second;
        C[static_cast<size_t>(k)] += st.first_centered.row(k).transpose() * mean.transpose();
      }
    }
    objective /= static_cast<double>(stats.size());
    if (!std::isfinite(objective)) throw DivergenceError("i-vector objective became non-finite");
    if (it > 0) result.trace.push_back(objective);
    if (it == iterations) break;

    std::vector<Eigen::MatrixXd> loadings(static_cast<size_t>(K));
    for (int k = 0; k < K; ++k) {
      Eigen::LLT<Eigen::MatrixXd> llt(A[static_cast<size_t>(k)]);
      if (llt.info() != Eigen::Success || A[static_cast<size_t>(k)].trace() < 1e-10) {
        throw DataError("singular i-vector accumulator for component " + std::to_string(k));
      }
      // T_k = C_k A_k^-1, solved through the symmetric A_k.
      loadings[static_cast<size_t>(k)] = llt.solve(C[static_cast<size_t>(k)].transpose()).transpose();
    }
    model = IVectorModel(model.ubm(), std::move(loadings));
  }
  result.model = std::move(model);
  return result;
}

IVectorTrainResult TrainIVector(const GmmModel& ubm, const std::vector<BaumWelchStats>& stats,
                                const IVectorTrainConfig& cfg) {
  if (cfg.ivector_dim < 1) throw ConfigError("ivector.dim must be >= 1");
  Rng rng(DeriveSeed(cfg.seed, 0x1FEC));
  std::vector<Eigen::MatrixXd> init(static_cast<size_t>(ubm.num_components()));
  for (auto& t : init) {
    t.resize(ubm.dim(), cfg.ivector_dim);
    for (Eigen::Index j = 0; j < t.cols(); ++j) {
      for (Eigen::Index i = 0; i < t.rows(); ++i) t(i, j) = cfg.init_scale * rng.Normal();
    }
  }
  return TrainIVectorFrom(IVectorModel(ubm, std::move(init)), stats, cfg.iterations);
}

std::string IVectorModel::Encode() const {
  ByteWriter w;
  w.Magic(kIVectorMagic);
  w.U32(kIVectorVersion);
  w.U32(static_cast<uint32_t>(num_components()));
  w.U32(static_cast<uint32_t>(feature_dim()));
  w.U32(static_cast<uint32_t>(ivector_dim()));
  const std::string ubm_blob = ubm_.Encode();
  w.U32(static_cast<uint32_t>(ubm_blob.size()));
  w.Raw(ubm_blob);
  for (const auto& t : loadings_) {
    // row-major D x R
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
      for (Eigen::Index j = 0; j < t.cols(); ++j) w.F64(t(i, j));
    }
  }
  w.MatrixBody(covariances());
  return w.Take();
}

IVectorModel IVectorModel::Decode(std::string_view bytes, const std::string& what) {
  ByteReader r(bytes, what);
  r.ExpectMagic(kIVectorMagic);
  if (r.U32() != kIVectorVersion) throw DataError(what + ": unsupported PIVM version");
  const uint32_t K = r.U32();
  const uint32_t D = r.U32();
  const uint32_t R = r.U32();
  const uint32_t blob_size = r.U32();
  GmmModel ubm = GmmModel::Decode(r.Raw(blob_size), what + " (UBM)");
  if (static_cast<uint32_t>(ubm.num_components()) != K || static_cast<uint32_t>(ubm.dim()) != D) {
    throw DataError(what + ": UBM shape does not match header");
  }
  std::vector<Eigen::MatrixXd> loadings(K, Eigen::MatrixXd(D, R));
  for (auto& t : loadings) {
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
      for (Eigen::Index j = 0; j < t.cols(); ++j) t(i, j) = r.F64();
    }
  }
  const Matrix cov = r.MatrixBody(K, D);
  r.ExpectEnd();
  if (cov != ubm.variances()) throw DataError(what + ": covariances differ from UBM variances");
  return IVectorModel(std::move(ubm), std::move(loadings));
}

void WriteIVectorModel(const std::string& path, const IVectorModel& model) {
  WriteFileBytes(path, model.Encode());
}

IVectorModel ReadIVectorModel(const std::string& path) {
  return IVectorModel::Decode(ReadFileBytes(path), path);
}

}  // namespace proscore
