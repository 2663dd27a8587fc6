// proscore/include/proscore/dnf.h

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

#ifndef PROSCORE_DNF_H_
#define PROSCORE_DNF_H_

#include <span>
#include <string>
#include <vector>

#include "proscore/flow.h"

namespace proscore {

/// Flow backbone whose latent prior is N(mu_s, I) for class s.
struct DnfModel {
  FlowModel backbone;
  Matrix class_means;  ///< S x D

  int num_classes() const { return static_cast<int>(class_means.rows()); }

  std::string Encode() const;
  static DnfModel Decode(std::string_view bytes, const std::string& what);
  bool operator==(const DnfModel& o) const { return Encode() == o.Encode(); }
};

/// log N(f^-1(o); mu_class, I) + inverse log-determinant, per row.
Eigen::VectorXd DnfLogProb(const DnfModel& m, const Matrix& batch, int class_id);

struct DnfTrainConfig {
  FlowConfig backbone;
  int num_classes = 5;
  AdamConfig adam;
  /// Start all class means at zero instead of seeded unit-norm vectors.
  bool zero_init_means = false;
  /// Keep the class means fixed during training.
  bool freeze_means = false;
};

struct DnfTrainResult {
  DnfModel model;
  std::vector<double> trace;
};

/// Joint maximum-likelihood training of the backbone and class means.
/// Throws DataError when some class in [0, S) has no frames.
DnfTrainResult TrainDnf(const Matrix& frames, std::span<const int> frame_class,
                        const DnfTrainConfig& cfg);

/// Same as TrainDnf but starting from an existing backbone.
DnfTrainResult TrainDnfFrom(FlowModel backbone, const Matrix& frames,
                            std::span<const int> frame_class, const DnfTrainConfig& cfg);

/// Utterance embedding: the backbone's latent mean.
inline Eigen::VectorXd DnfEmbed(const DnfModel& m, const FeatureSequence& fs) {
  return FlowEmbed(m.backbone, fs);
}

/// Proficiency class of an utterance: mean rater score rounded to 1..5,
/// shifted to 0..4.
int ProficiencyClass(double mean_score);

void WriteDnf(const std::string& path, const DnfModel& model);
DnfModel ReadDnf(const std::string& path);

}  // namespace proscore

#endif  // PROSCORE_DNF_H_
