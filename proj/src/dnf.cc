// proscore/src/dnf.cc

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

#include "proscore/dnf.h"

#include <algorithm>
#include <cmath>

#include "proscore/binary_io.h"

namespace proscore {

namespace {
constexpr std::string_view kDnfMagic = "PDNF";
constexpr uint32_t kDnfVersion = 1;
}  // namespace

Eigen::VectorXd DnfLogProb(const DnfModel& m, const Matrix& batch, int class_id) {
  if (class_id < 0 || class_id >= m.num_classes()) {
    throw std::invalid_argument("DNF class id " + std::to_string(class_id) + " out of range [0," +
                                std::to_string(m.num_classes()) + ")");
  }
  const FlowImages inv = FlowTransform(m.backbone, FlowDirection::kInverse, batch);
  const int D = m.backbone.dim();
  Eigen::VectorXd out(batch.rows());
  for (Eigen::Index n = 0; n < batch.rows(); ++n) {
    out(n) = UnitGaussianLogDensity(inv.images.data() + n * D,
                                    m.class_means.data() + class_id * D, D) +
             inv.log_det(n);
  }
  return out;
}

DnfTrainResult TrainDnfFrom(FlowModel backbone, const Matrix& frames,
                            std::span<const int> frame_class, const DnfTrainConfig& cfg) {
  const int S = cfg.num_classes;
  if (S < 1) throw ConfigError("dnf.num_classes must be >= 1");
  if (static_cast<Eigen::Index>(frame_class.size()) != frames.rows()) {
    throw DataError("DNF training: " + std::to_string(frame_class.size()) + " labels for " +
                    std::to_string(frames.rows()) + " frames");
  }
  std::vector<int64_t> counts(static_cast<size_t>(S), 0);
  for (int c : frame_class) {
    if (c < 0 || c >= S) throw DataError("DNF training: class label " + std::to_string(c) + " out of range");
    ++counts[static_cast<size_t>(c)];
  }
  for (int s = 0; s < S; ++s) {
    if (counts[static_cast<size_t>(s)] == 0) {
      throw DataError("DNF training: class " + std::to_string(s) + " has no frames");
    }
  }
  const int D = backbone.dim();
  Matrix means = cfg.zero_init_means ? Matrix::Zero(S, D) : UnitNormMeans(S, D, cfg.adam.seed);
  FlowTrainResult r = detail::TrainFlowWithPriors(std::move(backbone), std::move(means),
                                                  !cfg.freeze_means, frames, frame_class, cfg.adam);
  return {DnfModel{std::move(r.model), std::move(r.prior_means)}, std::move(r.trace)};
}

DnfTrainResult TrainDnf(const Matrix& frames, std::span<const int> frame_class,
                        const DnfTrainConfig& cfg) {
  FlowConfig bc = cfg.backbone;
  bc.dim = static_cast<int>(frames.cols());
  return TrainDnfFrom(FlowModel::Create(bc), frames, frame_class, cfg);
}

int ProficiencyClass(double mean_score) {
  const double rounded = std::clamp(std::floor(mean_score + 0.5), 1.0, 5.0);
  return static_cast<int>(rounded) - 1;
}

std::string DnfModel::Encode() const {
  ByteWriter w;
  w.Magic(kDnfMagic);
  w.U32(kDnfVersion);
  const std::string blob = backbone.Encode();
  w.U32(static_cast<uint32_t>(blob.size()));
  w.Raw(blob);
  w.U32(static_cast<uint32_t>(class_means.rows()));
  w.U32(static_cast<uint32_t>(class_means.cols()));
  w.MatrixBody(class_means);
  return w.Take();
}

DnfModel DnfModel::Decode(std::string_view bytes, const std::string& what) {
  ByteReader r(bytes, what);
  r.ExpectMagic(kDnfMagic);
  if (r.U32() != kDnfVersion) throw DataError(what + ": unsupported PDNF version");
  const uint32_t blob_size = r.U32();
  DnfModel m;
  m.backbone = FlowModel::Decode(r.Raw(blob_size), what + " (backbone)");
  const uint32_t S = r.U32();
  const uint32_t D = r.U32();
  if (static_cast<int>(D) != m.backbone.dim() || S < 1) {
    throw DataError(what + ": class means do not match the backbone");
  }
  m.class_means = r.MatrixBody(S, D);
  r.ExpectEnd();
  return m;
}

void WriteDnf(const std::string& path, const DnfModel& model) {
  WriteFileBytes(path, model.Encode());
}

DnfModel ReadDnf(const std::string& path) { return DnfModel::Decode(ReadFileBytes(path), path); }

}  // namespace proscore
