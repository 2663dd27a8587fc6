// proscore/include/proscore/svr.h

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

#ifndef PROSCORE_SVR_H_
#define PROSCORE_SVR_H_

#include <optional>
#include <span>
#include <string>

#include "proscore/common.h"

namespace proscore {

enum class KernelType { kLinear, kRbf };

struct SvrParams {
  double C = 1.0;
  double epsilon = 0.1;
  KernelType kernel = KernelType::kRbf;
  /// Unset means "scale": 1 / (d * Var(X)) on the standardized inputs.
  std::optional<double> gamma;
  /// Stopping threshold on the maximal KKT violation.
  double tolerance = 1e-3;
  int64_t max_iterations = 10'000'000;
  /// Standardize each input dimension on the training data before solving.
  /// When off, the stored standardizer is the identity.
  bool standardize = true;

  void Validate() const;
};

/// Per-dimension affine standardization fitted on training data. Dimensions
/// with zero spread keep scale 1.
struct Standardizer {
  Vector mean;
  Vector scale;

  static Standardizer Fit(const Matrix& x);
  Matrix Apply(const Matrix& x) const;
  Vector Apply(std::span<const double> x) const;
};

enum class SvrStatus : uint8_t {
  kOk = 0,
  kConstantTargets = 1,  ///< targets had no variance; the model is their mean
  kIterationLimit = 2,   ///< solver stopped before reaching the tolerance
};

class SvrModel {
 public:
  /// Kernel parameters with gamma resolved.
  KernelType kernel = KernelType::kRbf;
  double gamma = 1.0;
  double C = 1.0;
  double epsilon = 0.1;
  double tolerance = 1e-3;
  Standardizer standardizer;
  Matrix support_vectors;  ///< standardized inputs with nonzero coefficient
  Vector coef;             ///< alpha_i - alpha_i*
  double bias = 0.0;
  SvrStatus status = SvrStatus::kOk;

  int input_dim() const { return static_cast<int>(standardizer.mean.size()); }
  double Predict(std::span<const double> x) const;
  Vector PredictAll(const Matrix& x) const;

  std::string Encode() const;
  static SvrModel Decode(std::string_view bytes, const std::string& what);
  bool operator==(const SvrModel& o) const { return Encode() == o.Encode(); }
};

struct SvrFit {
  SvrModel model;
  /// Dual objective 0.5 a'Qa + p'a at the returned point (minimization form).
  double objective = 0.0;
  /// Maximal KKT violation at return.
  double kkt_violation = 0.0;
  int64_t iterations = 0;
  /// alpha_i - alpha_i* for every training row.
  Vector beta;
};

double KernelValue(KernelType kernel, double gamma, std::span<const double> a,
                   std::span<const double> b);

/// Solves the epsilon-SVR dual by SMO on standardized inputs.
SvrFit TrainSvr(const Matrix& x, std::span<const double> y, const SvrParams& params);

void WriteSvr(const std::string& path, const SvrModel& model);
SvrModel ReadSvr(const std::string& path);

}  // namespace proscore

#endif  // PROSCORE_SVR_H_
