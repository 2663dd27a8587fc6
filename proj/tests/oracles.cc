// proscore/tests/oracles.cc

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

#include "oracles.h"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace proscore::oracle {

double CompetitionByDensities(double a, double delta) {
  const double var = 0.5;
  const double o = a + delta;
  auto density = [var](double x, double mu) {
    return std::exp(-(x - mu) * (x - mu) / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
  };
  const double p1 = density(o, 0.0);
  const double p2 = density(o, a);
  return p2 / (p1 + p2);
}

double Pearson(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

GaussianPosterior IVectorByConditioning(const std::vector<Eigen::MatrixXd>& loadings,
                                        const Matrix& covariances,
                                        const BaumWelchStats& stats) {
  const int R = static_cast<int>(loadings[0].cols());
  const int D = static_cast<int>(loadings[0].rows());
  std::vector<int> active;
  for (int k = 0; k < static_cast<int>(loadings.size()); ++k) {
    if (stats.zeroth(k) > 0.0) active.push_back(k);
  }
  GaussianPosterior out;
  if (active.empty()) {
    out.mean = Eigen::VectorXd::Zero(R);
    out.covariance = Eigen::MatrixXd::Identity(R, R);
    return out;
  }
  const int rows = D * static_cast<int>(active.size());
  Eigen::MatrixXd A(rows, R);
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(rows, rows);
  Eigen::VectorXd y(rows);
  for (size_t j = 0; j < active.size(); ++j) {
    const int k = active[j];
    const double n = stats.zeroth(k);
    A.middleRows(static_cast<Eigen::Index>(j) * D, D) = loadings[static_cast<size_t>(k)];
    for (int d = 0; d < D; ++d) {
      const int r = static_cast<int>(j) * D + d;
      S(r, r) = covariances(k, d) / n;
      y(r) = stats.first_centered(k, d) / n;
    }
  }
  const Eigen::MatrixXd cov_y = A * A.transpose() + S;
  const Eigen::MatrixXd gain = A.transpose() * cov_y.inverse();
  out.mean = gain * y;
  out.covariance = Eigen::MatrixXd::Identity(R, R) - gain * A;
  return out;
}

namespace {

// Euclidean projection onto {a : 0 <= a <= C, s^T a = 0} with s in {+1,-1}^n,
// by bisection on the multiplier of the equality constraint.
Eigen::VectorXd ProjectBoxHyperplane(const Eigen::VectorXd& v, const Eigen::VectorXd& s,
                                     double C) {
  auto clipped = [&](double nu) {
    Eigen::VectorXd a(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) a(i) = std::clamp(v(i) - nu * s(i), 0.0, C);
    return a;
  };
  // s^T clip(v - nu s) is non-increasing in nu.
  double lo = -1.0, hi = 1.0;
  while (s.dot(clipped(lo)) < 0.0) lo *= 2.0;
  while (s.dot(clipped(hi)) > 0.0) hi *= 2.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (s.dot(clipped(mid)) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return clipped(0.5 * (lo + hi));
}

}  // namespace

QpSolution SvrDualByProjectedGradient(const Eigen::MatrixXd& gram, std::span<const double> y,
                                      double C, double epsilon, int iterations) {
  const Eigen::Index n = gram.rows();
  Eigen::MatrixXd Q(2 * n, 2 * n);
  Q << gram, -gram, -gram, gram;
  Eigen::VectorXd p(2 * n), s(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    p(i) = epsilon - y[static_cast<size_t>(i)];
    p(n + i) = epsilon + y[static_cast<size_t>(i)];
    s(i) = 1.0;
    s(n + i) = -1.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Q);
  const double lipschitz = std::max(eig.eigenvalues().maxCoeff(), 1e-12);
  const double step = 1.0 / lipschitz;
  Eigen::VectorXd a = Eigen::VectorXd::Zero(2 * n);
  // Accelerated projected gradient (FISTA) for faster convergence.
  Eigen::VectorXd prev = a, momentum = a;
  double t = 1.0;
  for (int it = 0; it < iterations; ++it) {
    const Eigen::VectorXd grad = Q * momentum + p;
    const Eigen::VectorXd next = ProjectBoxHyperplane(momentum - step * grad, s, C);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    momentum = next + ((t - 1.0) / t_next) * (next - prev);
    prev = next;
    t = t_next;
  }
  QpSolution out;
  out.beta = prev.head(n) - prev.tail(n);
  out.objective = 0.5 * prev.dot(Q * prev) + p.dot(prev);
  return out;
}

double RbfKernel(double gamma, std::span<const double> a, std::span<const double> b) {
  double d2 = 0.0;
  for (size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
  return std::exp(-gamma * d2);
}

Eigen::VectorXd NumericGradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                Eigen::VectorXd x, double h) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double keep = x(i);
    x(i) = keep + h;
    const double up = f(x);
    x(i) = keep - h;
    const double down = f(x);
    x(i) = keep;
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

Eigen::MatrixXd NumericJacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
    double h) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd J(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::VectorXd up = x, down = x;
    up(j) += h;
    down(j) -= h;
    J.col(j) = (f(up) - f(down)) / (2.0 * h);
  }
  return J;
}

double MaxRelativeError(const Eigen::VectorXd& analytic, const Eigen::VectorXd& numeric,
                        double floor) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < analytic.size(); ++i) {
    const double a = analytic(i), n = numeric(i);
    const double denom = std::max({std::abs(a), std::abs(n), floor});
    worst = std::max(worst, std::abs(a - n) / denom);
  }
  return worst;
}

double MeanPairwisePearson(const Matrix& ratings) {
  const Eigen::Index R = ratings.cols();
  double sum = 0.0;
  int pairs = 0;
  for (Eigen::Index i = 0; i < R; ++i) {
    for (Eigen::Index j = i + 1; j < R; ++j) {
      const Eigen::VectorXd a = ratings.col(i), b = ratings.col(j);
      sum += Pearson(std::span<const double>(a.data(), a.size()),
                     std::span<const double>(b.data(), b.size()));
      ++pairs;
    }
  }
  return sum / pairs;
}

}  // namespace proscore::oracle
