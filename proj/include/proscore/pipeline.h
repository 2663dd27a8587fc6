// proscore/include/proscore/pipeline.h

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

#ifndef PROSCORE_PIPELINE_H_
#define PROSCORE_PIPELINE_H_

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "proscore/assess.h"
#include "proscore/corpus.h"
#include "proscore/dnf.h"
#include "proscore/flow.h"
#include "proscore/gmm.h"
#include "proscore/gop.h"
#include "proscore/ivector.h"
#include "proscore/svr.h"

namespace proscore {

/// Hex SHA-256 digest.
std::string Sha256Hex(std::string_view data);

/// Digest of the corpus content (features, posteriors, alignments, labels
/// and splits), independent of on-disk layout.
std::string CorpusDigest(const Corpus& corpus);

/// Embedding systems that feed an SVR.
inline const std::vector<std::string> kEmbeddingSystems = {"ivector", "nf", "dnf"};

struct PipelineConfig {
  std::string manifest;
  std::string model_dir;
  std::string report_dir;
  uint64_t seed = 7;

  /// When set, the corpus is synthesized at the manifest location.
  std::optional<SynthConfig> synth;

  int context_left = 0;
  int context_right = 0;
  SegmentPooling pooling = SegmentPooling::kMeanThenLog;

  GmmTrainConfig gmm;
  IVectorTrainConfig ivector;
  FlowConfig flow;
  AdamConfig flow_adam;
  DnfTrainConfig dnf;
  SvrParams svr;
  bool per_rater_targets = false;
  Normalization fusion_normalization = Normalization::kZScore;
  double lambda_grid_step = 0.02;

  /// Subset of {gop, gmm, ivector, nf, dnf}.
  std::vector<std::string> systems;
  bool score_fusion = true;
  bool feature_fusion = true;

  /// Canonical JSON of each section, used as stage-cache keys.
  std::string synth_key, frontend_key, gmm_key, ivector_key, flow_key, dnf_key, svr_key,
      fusion_key;

  bool Runs(const std::string& system) const;
};

/// Parses a JSON pipeline config. Missing required fields and unknown keys
/// raise ConfigError naming the field. `seed_override` replaces the seed of
/// every stage.
PipelineConfig ParsePipelineConfig(const std::string& json_text,
                                   std::optional<uint64_t> seed_override = std::nullopt);
PipelineConfig LoadPipelineConfig(const std::string& path,
                                  std::optional<uint64_t> seed_override = std::nullopt);

/// Parses a synth section ({} gives the defaults).
SynthConfig ParseSynthConfig(const std::string& json_text, uint64_t seed);

struct RunOptions {
  bool force = false;
  std::ostream* log = nullptr;
};

struct RunSummary {
  std::string report_path;
  std::string scores_path;
  std::vector<ReportRow> rows;
  std::vector<std::string> trained;  ///< stages that (re)ran
  std::vector<std::string> reused;   ///< stages served from cache
};

/// Executes every configured stage in dependency order. Stages whose inputs
/// and config section are unchanged since their last run are skipped unless
/// `force` is set.
RunSummary RunPipeline(const PipelineConfig& cfg, const RunOptions& options);

// ---------------------------------------------------------------------------
// Building blocks shared by the pipeline and the individual subcommands.

/// Features after the context-stacking front-end.
std::vector<FeatureSequence> FrontEnd(const Corpus& corpus, int left, int right);

/// Stacked frames of the listed utterances.
Matrix FitFrames(const std::vector<FeatureSequence>& features, const Corpus& corpus,
                 const std::vector<std::string>& ids);

/// Utterance GOP scores in corpus order.
std::vector<double> GopColumn(const Corpus& corpus, SegmentPooling pooling);

/// Mean frame log-likelihood under a GMM, NF or DNF backbone, per utterance.
std::vector<double> GmmLoglikColumn(const GmmModel& gmm, const std::vector<FeatureSequence>& fs);
std::vector<double> FlowLoglikColumn(const FlowModel& flow, const std::vector<FeatureSequence>& fs);

/// One embedding row per utterance (corpus order).
Matrix IVectorEmbeddings(const IVectorModel& model, const std::vector<FeatureSequence>& fs);
Matrix FlowEmbeddings(const FlowModel& flow, const std::vector<FeatureSequence>& fs);

/// Rows of `all` (corpus order) belonging to `ids`.
Matrix SelectRows(const Matrix& all, const Corpus& corpus, const std::vector<std::string>& ids);

/// SVR training targets: one row per utterance with the mean score, or one
/// row per rater score when `per_rater` is set.
SvrFit TrainSvrOnCorpus(const Matrix& inputs, const Corpus& corpus,
                        const std::vector<std::string>& ids, const SvrParams& params,
                        bool per_rater);

/// Frame-level DNF class labels from the utterances' mean scores.
std::vector<int> FrameClasses(const std::vector<FeatureSequence>& features, const Corpus& corpus,
                              const std::vector<std::string>& ids);

/// Standardization of the GOP column fitted on `ids`.
Standardizer FitGopStandardizer(const std::vector<double>& gop, const Corpus& corpus,
                                const std::vector<std::string>& ids);

/// Writes "epoch\tvalue" (or "iteration\tvalue") lines.
void WriteTrace(const std::string& path, const std::string& header,
                const std::vector<double>& trace);

}  // namespace proscore

#endif  // PROSCORE_PIPELINE_H_
