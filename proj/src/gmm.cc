// proscore/src/gmm.cc

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

#include "proscore/gmm.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "proscore/binary_io.h"

namespace proscore {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
constexpr std::string_view kGmmMagic = "PGMM";
constexpr uint32_t kGmmVersion = 1;
}  // namespace

GmmModel::GmmModel(Vector weights, Matrix means, Matrix variances)
    : weights_(std::move(weights)), means_(std::move(means)), variances_(std::move(variances)) {
  Validate();
  CacheConstants();
}

void GmmModel::CacheConstants() {
  const int K = num_components();
  const int D = dim();
  log_consts_.resize(K);
  inv_vars_ = variances_.cwiseInverse();
  for (int k = 0; k < K; ++k) {
    log_consts_(k) = std::log(weights_(k)) - 0.5 * (D * kLog2Pi + variances_.row(k).array().log().sum());
  }
}

void GmmModel::Validate() const {
  const auto K = weights_.size();
  if (K < 1) throw DataError("GMM has no components");
  if (means_.rows() != K || variances_.rows() != K || means_.cols() != variances_.cols() ||
      means_.cols() < 1) {
    throw DataError("GMM parameter shapes are inconsistent");
  }
  if (!weights_.allFinite() || weights_.minCoeff() < 0.0 ||
      std::abs(weights_.sum() - 1.0) > 1e-9) {
    throw DataError("GMM weights are not a probability vector");
  }
  if (!means_.allFinite() || !variances_.allFinite() || variances_.minCoeff() <= 0.0) {
    throw DataError("GMM means/variances invalid");
  }
}

void GmmModel::ComponentLogLikes(const double* frame, double* out) const {
  const int K = num_components();
  const int D = dim();
  for (int k = 0; k < K; ++k) {
    const double* mu = means_.data() + static_cast<ptrdiff_t>(k) * D;
    const double* iv = inv_vars_.data() + static_cast<ptrdiff_t>(k) * D;
    double quad = 0.0;
    for (int d = 0; d < D; ++d) {
      const double diff = frame[d] - mu[d];
      quad += diff * diff * iv[d];
    }
    out[k] = log_consts_(k) - 0.5 * quad;
  }
}

double GmmModel::LogLikelihood(const double* frame) const {
  std::vector<double> ll(static_cast<size_t>(num_components()));
  ComponentLogLikes(frame, ll.data());
  return LogSumExp(ll.data(), ll.size());
}

double GmmModel::Posteriors(const double* frame, double* out) const {
  const int K = num_components();
  ComponentLogLikes(frame, out);
  const double lse = LogSumExp(out, static_cast<size_t>(K));
  for (int k = 0; k < K; ++k) out[k] = std::exp(out[k] - lse);
  return lse;
}

std::string GmmModel::Encode() const {
  ByteWriter w;
  w.Magic(kGmmMagic);
  w.U32(kGmmVersion);
  w.U32(static_cast<uint32_t>(num_components()));
  w.U32(static_cast<uint32_t>(dim()));
  w.Doubles(weights_.data(), static_cast<size_t>(weights_.size()));
  w.MatrixBody(means_);
  w.MatrixBody(variances_);
  return w.Take();
}

GmmModel GmmModel::Decode(std::string_view bytes, const std::string& what) {
  ByteReader r(bytes, what);
  r.ExpectMagic(kGmmMagic);
  if (r.U32() != kGmmVersion) throw DataError(what + ": unsupported PGMM version");
  const uint32_t K = r.U32();
  const uint32_t D = r.U32();
  Vector w(K);
  r.Doubles(w.data(), K);
  Matrix means = r.MatrixBody(K, D);
  Matrix vars = r.MatrixBody(K, D);
  r.ExpectEnd();
  return GmmModel(std::move(w), std::move(means), std::move(vars));
}

void WriteGmm(const std::string& path, const GmmModel& model) {
  WriteFileBytes(path, model.Encode());
}

GmmModel ReadGmm(const std::string& path) { return GmmModel::Decode(ReadFileBytes(path), path); }

Matrix StackFrames(const std::vector<const FeatureSequence*>& seqs) {
  Eigen::Index rows = 0;
  Eigen::Index dim = seqs.empty() ? 0 : seqs.front()->dim();
  for (const auto* s : seqs) {
    if (s->dim() != dim) throw DataError("StackFrames: inconsistent feature dims");
    rows += s->num_frames();
  }
  Matrix out(rows, dim);
  Eigen::Index r = 0;
  for (const auto* s : seqs) {
    out.middleRows(r, s->num_frames()) = s->frames;
    r += s->num_frames();
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

Matrix KMeans(const Matrix& x, int K, int iterations, Rng& rng) {
  const Eigen::Index N = x.rows();
  // Distinct rows as initial centers, drawn in seeded order.
  std::vector<Eigen::Index> order(static_cast<size_t>(N));
  std::iota(order.begin(), order.end(), 0);
  rng.Shuffle(order);
  Matrix centers(K, x.cols());
  int found = 0;
  for (Eigen::Index idx : order) {
    bool dup = false;
    for (int c = 0; c < found && !dup; ++c) dup = (centers.row(c) == x.row(idx));
    if (!dup) centers.row(found++) = x.row(idx);
    if (found == K) break;
  }
  // Fewer distinct rows than K: repeat the distinct ones.
  for (int c = found; c < K; ++c) centers.row(c) = centers.row(c % found);

  std::vector<int> assign(static_cast<size_t>(N), 0);
  for (int it = 0; it < iterations; ++it) {
    for (Eigen::Index n = 0; n < N; ++n) {
      double best = std::numeric_limits<double>::infinity();
      int arg = 0;
      for (int c = 0; c < K; ++c) {
        const double d = (x.row(n) - centers.row(c)).squaredNorm();
        if (d < best) {
          best = d;
          arg = c;
        }
      }
      assign[static_cast<size_t>(n)] = arg;
    }
    Matrix sums = Matrix::Zero(K, x.cols());
    std::vector<int> counts(static_cast<size_t>(K), 0);
    for (Eigen::Index n = 0; n < N; ++n) {
      sums.row(assign[static_cast<size_t>(n)]) += x.row(n);
      ++counts[static_cast<size_t>(assign[static_cast<size_t>(n)])];
    }
    for (int c = 0; c < K; ++c) {
      if (counts[static_cast<size_t>(c)] > 0) centers.row(c) = sums.row(c) / counts[static_cast<size_t>(c)];
    }
  }
  return centers;
}

}  // namespace

GmmTrainResult TrainGmm(const Matrix& frames, const GmmTrainConfig& cfg) {
  const Eigen::Index N = frames.rows();
  const Eigen::Index D = frames.cols();
  const int K = cfg.num_components;
  if (K < 1) throw ConfigError("gmm.num_components must be >= 1");
  if (cfg.iterations < 1) throw ConfigError("gmm.iterations must be >= 1");
  if (N < K) {
    throw DataError("GMM training needs at least " + std::to_string(K) + " frames, got " +
                    std::to_string(N));
  }
  if (!frames.allFinite()) throw DataError("GMM training data has non-finite values");

  const Eigen::RowVectorXd global_mean = frames.colwise().mean();
  const Eigen::RowVectorXd global_var =
      (frames.rowwise() - global_mean).array().square().colwise().mean();
  if (global_var.maxCoeff() <= 0.0) throw DataError("GMM training frames are all identical");
  Eigen::RowVectorXd floor = cfg.variance_floor * global_var;
  {
    double positive_mean = 0.0;
    int count = 0;
    for (Eigen::Index d = 0; d < D; ++d) {
      if (global_var(d) > 0.0) {
        positive_mean += global_var(d);
        ++count;
      }
    }
    positive_mean /= count;
    for (Eigen::Index d = 0; d < D; ++d) {
      if (floor(d) <= 0.0) floor(d) = cfg.variance_floor * positive_mean;
    }
  }

  Rng rng(DeriveSeed(cfg.seed, 0x6A3));
  const Matrix centers = KMeans(frames, K, cfg.kmeans_iterations, rng);

  // Initial parameters from the hard k-means partition.
  Vector weights(K);
  Matrix means = centers;
  Matrix vars(K, D);
  {
    Matrix sq = Matrix::Zero(K, D);
    std::vector<double> counts(static_cast<size_t>(K), 0.0);
    for (Eigen::Index n = 0; n < N; ++n) {
      int arg = 0;
      double best = std::numeric_limits<double>::infinity();
      for (int c = 0; c < K; ++c) {
        const double d = (frames.row(n) - centers.row(c)).squaredNorm();
        if (d < best) {
          best = d;
          arg = c;
        }
      }
      counts[static_cast<size_t>(arg)] += 1.0;
      sq.row(arg) += (frames.row(n) - centers.row(arg)).array().square().matrix();
    }
    for (int k = 0; k < K; ++k) {
      const double c = counts[static_cast<size_t>(k)];
      weights(k) = (c + 1.0) / (static_cast<double>(N) + K);
      if (c >= 2.0) {
        vars.row(k) = (sq.row(k) / c).cwiseMax(floor);
      } else {
        vars.row(k) = global_var.cwiseMax(floor);
      }
    }
  }

  GmmTrainResult result;
  GmmModel model(weights, means, vars);
  std::vector<double> post(static_cast<size_t>(K));
  double loglik = 0.0;

  // Each pass accumulates statistics under the current model; its total
  // log-likelihood is the trace entry for the previous update.
  for (int it = 0; it <= cfg.iterations; ++it) {
    Vector occ = Vector::Zero(K);
    Matrix first = Matrix::Zero(K, D);
    Matrix second = Matrix::Zero(K, D);
    loglik = 0.0;
    for (Eigen::Index n = 0; n < N; ++n) {
      const double* x = frames.data() + n * D;
      loglik += model.Posteriors(x, post.data());
      for (int k = 0; k < K; ++k) {
        const double g = post[static_cast<size_t>(k)];
        if (g == 0.0) continue;
        occ(k) += g;
        for (Eigen::Index d = 0; d < D; ++d) {
          first(k, d) += g * x[d];
          second(k, d) += g * x[d] * x[d];
        }
      }
    }
    if (!std::isfinite(loglik)) throw DivergenceError("GMM log-likelihood became non-finite");
    if (it > 0) result.trace.push_back(loglik / static_cast<double>(N));
    if (it == cfg.iterations) break;

    Vector new_w(K);
    Matrix new_means = model.means();
    Matrix new_vars = model.variances();
    for (int k = 0; k < K; ++k) {
      new_w(k) = occ(k) / static_cast<double>(N);
      if (occ(k) < 1e-10) continue;  // unused component keeps its parameters
      new_means.row(k) = first.row(k) / occ(k);
      for (Eigen::Index d = 0; d < D; ++d) {
        // Centred second moment; the floored value is the constrained optimum.
        double centred = 0.0;
        const double mu = new_means(k, d);
        centred = second(k, d) / occ(k) - mu * mu;
        new_vars(k, d) = std::max(centred, floor(d));
      }
    }
    new_w /= new_w.sum();
    model = GmmModel(new_w, new_means, new_vars);
  }
  result.model = std::move(model);
  return result;
}

GmmLogLik GmmLogLikelihood(const GmmModel& model, const FeatureSequence& fs) {
  if (fs.dim() != model.dim()) {
    throw DataError(fs.utterance_id + ": feature dim " + std::to_string(fs.dim()) +
                    " does not match GMM dim " + std::to_string(model.dim()));
  }
  if (fs.num_frames() < 1) throw DataError(fs.utterance_id + ": no frames");
  GmmLogLik out;
  out.per_frame.resize(static_cast<size_t>(fs.num_frames()));
  double sum = 0.0;
  for (Eigen::Index t = 0; t < fs.num_frames(); ++t) {
    const double ll = model.LogLikelihood(fs.frames.data() + t * fs.dim());
    out.per_frame[static_cast<size_t>(t)] = ll;
    sum += ll;
  }
  out.utterance_mean = sum / static_cast<double>(fs.num_frames());
  return out;
}

}  // namespace proscore
