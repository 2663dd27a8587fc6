// proscore/tests/oracles.h

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

// Reference implementations used to cross-check the library. They are written
// from first principles and deliberately share no code with src/.

#ifndef PROSCORE_TESTS_ORACLES_H_
#define PROSCORE_TESTS_ORACLES_H_

#include <functional>
#include <span>

#include "proscore/flow.h"
#include "proscore/ivector.h"
#include "proscore/svr.h"

namespace proscore::oracle {

/// p(q2 | o) for two unit-weight 1-D Gaussians of variance 0.5 centred at 0
/// and a, with o = a + delta, by evaluating both densities and normalizing.
double CompetitionByDensities(double a, double delta);

/// Sample Pearson correlation by the textbook two-pass formula.
double Pearson(std::span<const double> x, std::span<const double> y);

/// i-vector posterior by joint-Gaussian conditioning. The statistics are read
/// as observations y_k = F_k / N_k ~ N(T_k z, Sigma_k / N_k) with z ~ N(0, I),
/// so E[z|y] = A^T (A A^T + S)^-1 y and Cov[z|y] = I - A^T (A A^T + S)^-1 A.
/// Components with N_k = 0 carry no evidence and are skipped.
struct GaussianPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};
GaussianPosterior IVectorByConditioning(const std::vector<Eigen::MatrixXd>& loadings,
                                        const Matrix& covariances,
                                        const BaumWelchStats& stats);

/// Minimization-form epsilon-SVR dual solved by projected gradient descent on
/// [alpha; alpha*] with the box [0, C] and the equality sum(alpha - alpha*) = 0.
/// `gram` is the kernel matrix of the (already standardized) inputs.
struct QpSolution {
  Eigen::VectorXd beta;  ///< alpha - alpha*
  double objective = 0.0;
};
QpSolution SvrDualByProjectedGradient(const Eigen::MatrixXd& gram, std::span<const double> y,
                                      double C, double epsilon, int iterations = 20000);

/// exp(-gamma * |a - b|^2).
double RbfKernel(double gamma, std::span<const double> a, std::span<const double> b);

/// Central finite-difference gradient of `f` at `x`.
Eigen::VectorXd NumericGradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                Eigen::VectorXd x, double h = 1e-5);

/// Central finite-difference Jacobian of a map R^D -> R^D.
Eigen::MatrixXd NumericJacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
    double h = 1e-5);

/// Max over entries of |a - n| / max(|a|, |n|, floor).
double MaxRelativeError(const Eigen::VectorXd& analytic, const Eigen::VectorXd& numeric,
                        double floor = 1e-6);

/// Mean pairwise Pearson correlation over the columns of `ratings`.
double MeanPairwisePearson(const Matrix& ratings);

}  // namespace proscore::oracle

#endif  // PROSCORE_TESTS_ORACLES_H_
