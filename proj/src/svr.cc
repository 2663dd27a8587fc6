// proscore/src/svr.cc

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

#include "proscore/svr.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "proscore/binary_io.h"

namespace proscore {

namespace {
constexpr std::string_view kSvrMagic = "PSVR";
constexpr uint32_t kSvrVersion = 1;
constexpr double kTau = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

void SvrParams::Validate() const {
  if (!(C > 0.0) || !std::isfinite(C)) throw ConfigError("svr.C must be > 0");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ConfigError("svr.epsilon must be >= 0");
  if (gamma && !(*gamma > 0.0)) throw ConfigError("svr.gamma must be > 0");
  if (!(tolerance > 0.0)) throw ConfigError("svr.tolerance must be > 0");
  if (max_iterations < 1) throw ConfigError("svr.max_iterations must be >= 1");
}

Standardizer Standardizer::Fit(const Matrix& x) {
  Standardizer s;
  const double n = static_cast<double>(x.rows());
  s.mean = x.colwise().mean().transpose();
  s.scale.resize(x.cols());
  for (Eigen::Index d = 0; d < x.cols(); ++d) {
    const double var = (x.col(d).array() - s.mean(d)).square().sum() / n;
    s.scale(d) = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return s;
}

Matrix Standardizer::Apply(const Matrix& x) const {
  if (x.cols() != mean.size()) throw DataError("standardizer dimension mismatch");
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index d = 0; d < x.cols(); ++d) out(i, d) = (x(i, d) - mean(d)) / scale(d);
  }
  return out;
}

Vector Standardizer::Apply(std::span<const double> x) const {
  if (static_cast<Eigen::Index>(x.size()) != mean.size()) {
    throw DataError("standardizer dimension mismatch");
  }
  Vector out(mean.size());
  for (Eigen::Index d = 0; d < mean.size(); ++d) {
    out(d) = (x[static_cast<size_t>(d)] - mean(d)) / scale(d);
  }
  return out;
}

double KernelValue(KernelType kernel, double gamma, std::span<const double> a,
                   std::span<const double> b) {
  double acc = 0.0;
  if (kernel == KernelType::kLinear) {
    for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
  }
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::exp(-gamma * acc);
}

double SvrModel::Predict(std::span<const double> x) const {
  const Vector z = standardizer.Apply(x);
  const auto dim = static_cast<size_t>(z.size());
  double f = bias;
  for (Eigen::Index i = 0; i < support_vectors.rows(); ++i) {
    f += coef(i) * KernelValue(kernel, gamma, {support_vectors.data() + i * z.size(), dim},
                               {z.data(), dim});
  }
  return f;
}

Vector SvrModel::PredictAll(const Matrix& x) const {
  Vector out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    out(i) = Predict({x.data() + i * x.cols(), static_cast<size_t>(x.cols())});
  }
  return out;
}

// ---------------------------------------------------------------------------
// SMO over the 2N-variable form: alpha_t for t < N carries sign +1 and
// target term eps - y_t; alpha_{t+N} carries sign -1 and eps + y_t.

SvrFit TrainSvr(const Matrix& x, std::span<const double> y, const SvrParams& params) {
  params.Validate();
  const Eigen::Index N = x.rows();
  if (N < 2) throw DataError("SVR training needs at least 2 samples");
  if (static_cast<Eigen::Index>(y.size()) != N) throw DataError("SVR: target count mismatch");
  if (!x.allFinite()) throw DataError("SVR: non-finite input features");
  for (double v : y) {
    if (!std::isfinite(v)) throw DataError("SVR: non-finite target");
  }

  SvrFit fit;
  SvrModel& m = fit.model;
  m.kernel = params.kernel;
  m.C = params.C;
  m.epsilon = params.epsilon;
  m.tolerance = params.tolerance;
  if (params.standardize) {
    m.standardizer = Standardizer::Fit(x);
  } else {
    m.standardizer.mean = Vector::Zero(x.cols());
    m.standardizer.scale = Vector::Ones(x.cols());
  }
  const Matrix xs = m.standardizer.Apply(x);
  const Eigen::Index d = x.cols();
  if (params.gamma) {
    m.gamma = *params.gamma;
  } else {
    const double mu = xs.mean();
    const double var = (xs.array() - mu).square().mean();
    m.gamma = var > 0.0 ? 1.0 / (static_cast<double>(d) * var) : 1.0;
  }
  fit.beta = Vector::Zero(N);

  const auto [ymin, ymax] = std::minmax_element(y.begin(), y.end());
  if (*ymin == *ymax) {
    m.status = SvrStatus::kConstantTargets;
    m.bias = *ymin;
    m.support_vectors = Matrix(0, d);
    m.coef = Vector(0);
    return fit;
  }

  Eigen::MatrixXd K(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      K(i, j) = K(j, i) = KernelValue(m.kernel, m.gamma, {xs.data() + i * d, static_cast<size_t>(d)},
                                      {xs.data() + j * d, static_cast<size_t>(d)});
    }
  }

  const Eigen::Index L = 2 * N;
  const double C = params.C;
  std::vector<double> alpha(static_cast<size_t>(L), 0.0);
  std::vector<double> G(static_cast<size_t>(L));
  std::vector<double> p(static_cast<size_t>(L));
  std::vector<int> sign(static_cast<size_t>(L));
  for (Eigen::Index t = 0; t < N; ++t) {
    const auto a = static_cast<size_t>(t), b = static_cast<size_t>(t + N);
    p[a] = params.epsilon - y[a];
    p[b] = params.epsilon + y[a];
    sign[a] = 1;
    sign[b] = -1;
  }
  G = p;
  auto q = [&](Eigen::Index i, Eigen::Index j) {
    return sign[static_cast<size_t>(i)] * sign[static_cast<size_t>(j)] * K(i % N, j % N);
  };
  auto upper = [&](Eigen::Index t) { return alpha[static_cast<size_t>(t)] >= C; };
  auto lower = [&](Eigen::Index t) { return alpha[static_cast<size_t>(t)] <= 0.0; };

  double violation = kInf;
  int64_t iter = 0;
  for (; iter < params.max_iterations; ++iter) {
    // Working set: maximal violating i, then j by second-order gain.
    double gmax = -kInf, gmax2 = -kInf;
    Eigen::Index i = -1;
    for (Eigen::Index t = 0; t < L; ++t) {
      const auto ts = static_cast<size_t>(t);
      if (sign[ts] == 1) {
        if (!upper(t) && -G[ts] >= gmax) {
          gmax = -G[ts];
          i = t;
        }
      } else if (!lower(t) && G[ts] >= gmax) {
        gmax = G[ts];
        i = t;
      }
    }
    Eigen::Index j = -1;
    double best = kInf;
    for (Eigen::Index t = 0; t < L; ++t) {
      const auto ts = static_cast<size_t>(t);
      if (sign[ts] == 1) {
        if (lower(t)) continue;
        gmax2 = std::max(gmax2, G[ts]);
        const double diff = gmax + G[ts];
        if (i >= 0 && diff > 0.0) {
          double quad = K(i % N, i % N) + K(t % N, t % N) - 2.0 * sign[static_cast<size_t>(i)] * q(i, t);
          if (quad <= 0.0) quad = kTau;
          const double gain = -(diff * diff) / quad;
          if (gain <= best) {
            best = gain;
            j = t;
          }
        }
      } else {
        if (upper(t)) continue;
        gmax2 = std::max(gmax2, -G[ts]);
        const double diff = gmax - G[ts];
        if (i >= 0 && diff > 0.0) {
          double quad = K(i % N, i % N) + K(t % N, t % N) + 2.0 * sign[static_cast<size_t>(i)] * q(i, t);
          if (quad <= 0.0) quad = kTau;
          const double gain = -(diff * diff) / quad;
          if (gain <= best) {
            best = gain;
            j = t;
          }
        }
      }
    }
    violation = gmax + gmax2;
    if (violation < params.tolerance || j < 0) break;

    const auto is = static_cast<size_t>(i), js = static_cast<size_t>(j);
    const double old_i = alpha[is], old_j = alpha[js];
    const double qii = K(i % N, i % N), qjj = K(j % N, j % N), qij = q(i, j);
    if (sign[is] != sign[js]) {
      double quad = qii + qjj + 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-G[is] - G[js]) / quad;
      const double diff = alpha[is] - alpha[js];
      alpha[is] += delta;
      alpha[js] += delta;
      if (diff > 0.0) {
        if (alpha[js] < 0.0) {
          alpha[js] = 0.0;
          alpha[is] = diff;
        }
      } else if (alpha[is] < 0.0) {
        alpha[is] = 0.0;
        alpha[js] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[is] > C) {
          alpha[is] = C;
          alpha[js] = C - diff;
        }
      } else if (alpha[js] > C) {
        alpha[js] = C;
        alpha[is] = C + diff;
      }
    } else {
      double quad = qii + qjj - 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (G[is] - G[js]) / quad;
      const double sum = alpha[is] + alpha[js];
      alpha[is] -= delta;
      alpha[js] += delta;
      if (sum > C) {
        if (alpha[is] > C) {
          alpha[is] = C;
          alpha[js] = sum - C;
        }
      } else if (alpha[js] < 0.0) {
        alpha[js] = 0.0;
        alpha[is] = sum;
      }
      if (sum > C) {
        if (alpha[js] > C) {
          alpha[js] = C;
          alpha[is] = sum - C;
        }
      } else if (alpha[is] < 0.0) {
        alpha[is] = 0.0;
        alpha[js] = sum;
      }
    }
    const double di = alpha[is] - old_i, dj = alpha[js] - old_j;
    for (Eigen::Index t = 0; t < L; ++t) G[static_cast<size_t>(t)] += q(i, t) * di + q(j, t) * dj;
  }
  fit.iterations = iter;
  fit.kkt_violation = violation;
  m.status = (iter >= params.max_iterations) ? SvrStatus::kIterationLimit : SvrStatus::kOk;

  // Bias from free variables, or the midpoint of the feasible interval.
  double ub = kInf, lb = -kInf, sum_free = 0.0;
  int n_free = 0;
  double objective = 0.0;
  for (Eigen::Index t = 0; t < L; ++t) {
    const auto ts = static_cast<size_t>(t);
    const double yg = sign[ts] * G[ts];
    if (upper(t)) {
      if (sign[ts] == -1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (lower(t)) {
      if (sign[ts] == 1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
    objective += alpha[ts] * (G[ts] + p[ts]);
  }
  const double rho = n_free > 0 ? sum_free / n_free : 0.5 * (ub + lb);
  m.bias = -rho;
  fit.objective = 0.5 * objective;

  std::vector<Eigen::Index> sv;
  for (Eigen::Index t = 0; t < N; ++t) {
    fit.beta(t) = alpha[static_cast<size_t>(t)] - alpha[static_cast<size_t>(t + N)];
    if (fit.beta(t) != 0.0) sv.push_back(t);
  }
  m.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), d);
  m.coef.resize(static_cast<Eigen::Index>(sv.size()));
  for (size_t k = 0; k < sv.size(); ++k) {
    m.support_vectors.row(static_cast<Eigen::Index>(k)) = xs.row(sv[k]);
    m.coef(static_cast<Eigen::Index>(k)) = fit.beta(sv[k]);
  }
  return fit;
}

std::string SvrModel::Encode() const {
  ByteWriter w;
  w.Magic(kSvrMagic);
  w.U32(kSvrVersion);
  w.U8(kernel == KernelType::kLinear ? 0 : 1);
  w.F64(gamma);
  w.F64(C);
  w.F64(epsilon);
  w.F64(tolerance);
  w.U8(static_cast<uint8_t>(status));
  w.U32(static_cast<uint32_t>(input_dim()));
  w.Doubles(standardizer.mean.data(), static_cast<size_t>(standardizer.mean.size()));
  w.Doubles(standardizer.scale.data(), static_cast<size_t>(standardizer.scale.size()));
  w.U32(static_cast<uint32_t>(support_vectors.rows()));
  w.MatrixBody(support_vectors);
  w.Doubles(coef.data(), static_cast<size_t>(coef.size()));
  w.F64(bias);
  return w.Take();
}

SvrModel SvrModel::Decode(std::string_view bytes, const std::string& what) {
  ByteReader r(bytes, what);
  r.ExpectMagic(kSvrMagic);
  if (r.U32() != kSvrVersion) throw DataError(what + ": unsupported PSVR version");
  SvrModel m;
  const uint8_t kernel = r.U8();
  if (kernel > 1) throw DataError(what + ": unknown kernel");
  m.kernel = kernel == 0 ? KernelType::kLinear : KernelType::kRbf;
  m.gamma = r.F64();
  m.C = r.F64();
  m.epsilon = r.F64();
  m.tolerance = r.F64();
  const uint8_t status = r.U8();
  if (status > 2) throw DataError(what + ": unknown status");
  m.status = static_cast<SvrStatus>(status);
  const uint32_t d = r.U32();
  m.standardizer.mean.resize(d);
  m.standardizer.scale.resize(d);
  r.Doubles(m.standardizer.mean.data(), d);
  r.Doubles(m.standardizer.scale.data(), d);
  const uint32_t n_sv = r.U32();
  m.support_vectors = r.MatrixBody(n_sv, d);
  m.coef.resize(n_sv);
  r.Doubles(m.coef.data(), n_sv);
  m.bias = r.F64();
  r.ExpectEnd();
  return m;
}

void WriteSvr(const std::string& path, const SvrModel& model) {
  WriteFileBytes(path, model.Encode());
}

SvrModel ReadSvr(const std::string& path) { return SvrModel::Decode(ReadFileBytes(path), path); }

}  // namespace proscore
