// proscore/include/proscore/corpus.h

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

#ifndef PROSCORE_CORPUS_H_
#define PROSCORE_CORPUS_H_

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "proscore/common.h"

namespace proscore {

/// T x D acoustic frames of one utterance.
struct FeatureSequence {
  std::string utterance_id;
  Matrix frames;

  Eigen::Index num_frames() const { return frames.rows(); }
  Eigen::Index dim() const { return frames.cols(); }
};

/// One aligned phone; `end` is exclusive.
struct PhoneSegment {
  int phone = 0;
  int start = 0;
  int end = 0;

  int length() const { return end - start; }
  bool operator==(const PhoneSegment&) const = default;
};

struct PhoneAlignment {
  std::string utterance_id;
  std::vector<PhoneSegment> segments;
};

/// Per-frame phone posteriors (T x P) with the phone inventory they index.
struct PosteriorGram {
  std::string utterance_id;
  Matrix post;
  std::vector<std::string> phone_table;
};

struct PhonePrior {
  Vector prior;

  static PhonePrior Uniform(int num_phones);
};

struct RatedUtterance {
  std::string utterance_id;
  std::vector<int> rater_scores;
  double mean_score = 0.0;

  static RatedUtterance FromScores(std::string id, std::vector<int> scores);
};

struct SplitManifest {
  std::vector<std::string> train_ids;
  std::vector<std::string> dev_ids;
  std::vector<std::string> eval_ids;

  /// Train ids that are not in the dev subset; dev is carved out of train.
  std::vector<std::string> FitIds() const;
};

enum class Split { kTrain, kDev, kEval };

std::string SplitName(Split split);
Split ParseSplit(const std::string& name);

struct UtteranceRecord {
  FeatureSequence features;
  PosteriorGram posteriors;
  PhoneAlignment alignment;
  RatedUtterance label;

  const std::string& id() const { return features.utterance_id; }
};

/// A loaded, cross-validated corpus. Utterances are kept sorted by id.
class Corpus {
 public:
  Corpus() = default;
  Corpus(std::vector<std::string> phone_table, std::vector<UtteranceRecord> utterances,
         SplitManifest splits);

  const std::vector<std::string>& phone_table() const { return phone_table_; }
  const std::vector<UtteranceRecord>& utterances() const { return utterances_; }
  const SplitManifest& splits() const { return splits_; }
  int num_phones() const { return static_cast<int>(phone_table_.size()); }
  Eigen::Index feature_dim() const;

  /// Throws DataError for unknown ids.
  const UtteranceRecord& Get(const std::string& id) const;
  bool Contains(const std::string& id) const { return index_.count(id) > 0; }

  /// Records for the given ids, in the given order.
  std::vector<const UtteranceRecord*> Select(const std::vector<std::string>& ids) const;

  /// Re-runs every invariant check; throws DataError naming the utterance.
  void Validate() const;

 private:
  std::vector<std::string> phone_table_;
  std::vector<UtteranceRecord> utterances_;
  SplitManifest splits_;
  std::map<std::string, size_t> index_;
};

// ---------------------------------------------------------------------------
// Validation of individual records.

void ValidateFeatures(const FeatureSequence& fs);
void ValidatePosteriors(const PosteriorGram& pg, double row_sum_tolerance = 1e-6);
void ValidateAlignment(const PhoneAlignment& al, Eigen::Index num_frames, int num_phones);
void ValidatePrior(const PhonePrior& prior);

// ---------------------------------------------------------------------------
// PRF1 binary matrices. Layout: "PRF1", u32 version, [phone table], u32 rows,
// u32 cols, rows*cols little-endian f64 row-major. Version 1 is a plain
// feature matrix; version 2 is a posteriorgram and carries a phone table
// (u32 count, then u32-length-prefixed UTF-8 names) before the dimensions.

inline constexpr uint32_t kFeatureFormatVersion = 1;
inline constexpr uint32_t kPosteriorFormatVersion = 2;

std::string EncodeFeatures(const Matrix& frames);
Matrix DecodeFeatures(std::string_view bytes, const std::string& what);
std::string EncodePosteriors(const Matrix& post, const std::vector<std::string>& phone_table);
std::pair<Matrix, std::vector<std::string>> DecodePosteriors(std::string_view bytes,
                                                             const std::string& what);

void WriteFeatureFile(const std::string& path, const Matrix& frames);
Matrix ReadFeatureFile(const std::string& path);
void WritePosteriorFile(const std::string& path, const PosteriorGram& pg);
PosteriorGram ReadPosteriorFile(const std::string& path, std::string utterance_id);

// ---------------------------------------------------------------------------
// TSV side files.

void WriteAlignments(const std::string& path, const std::vector<PhoneAlignment>& alignments,
                     const std::vector<std::string>& phone_table);
std::map<std::string, PhoneAlignment> ReadAlignments(const std::string& path,
                                                     const std::vector<std::string>& phone_table);
void WriteLabels(const std::string& path, const std::vector<RatedUtterance>& labels);
std::map<std::string, RatedUtterance> ReadLabels(const std::string& path);
void WriteSplits(const std::string& path, const SplitManifest& splits);
SplitManifest ReadSplits(const std::string& path);

/// Writes the corpus under `dir` and returns the manifest path. When `oracle`
/// is non-empty it is written alongside as oracle.tsv.
std::string WriteCorpus(const std::string& dir, const Corpus& corpus,
                        const std::map<std::string, double>& oracle = {});

/// Loads and cross-validates a corpus from its JSON manifest.
Corpus LoadCorpus(const std::string& manifest_path);

/// Reads the optional oracle proficiency map referenced by a manifest.
std::map<std::string, double> LoadOracle(const std::string& manifest_path);

// ---------------------------------------------------------------------------

/// Concatenates each frame with `left` preceding and `right` following frames,
/// replicating the edge frames at the boundaries.
FeatureSequence StackContext(const FeatureSequence& fs, int left, int right);

/// Seeded utterance-level split: `eval_fraction` of ids go to eval, then
/// `dev_fraction` of the remaining train ids are marked as dev.
SplitManifest MakeSplits(std::vector<std::string> ids, double eval_fraction, double dev_fraction,
                         uint64_t seed);

// ---------------------------------------------------------------------------
// Synthetic corpus with a known proficiency per utterance.

struct SynthConfig {
  int num_phones = 12;
  int feature_dim = 16;
  int num_speakers = 60;
  int utterances_per_speaker = 8;
  int min_phones_per_utterance = 10;
  int max_phones_per_utterance = 16;
  int min_frames_per_phone = 4;
  int max_frames_per_phone = 10;
  /// Std of native phone prototype coordinates.
  double prototype_scale = 1.0;
  /// Euclidean length of the non-native shift of each prototype.
  double shift_scale = 3.0;
  /// Within-phone frame noise std.
  double frame_noise = 1.0;
  /// Std of per-utterance jitter around the speaker proficiency.
  double proficiency_noise = 0.05;
  /// Std of each simulated rater's perturbation on the 1..5 scale.
  double label_noise = 1.0;
  int num_raters = 5;
  /// Log-std of the per-speaker frame noise multiplier.
  double speaker_noise_spread = 0.0;
  /// Std of the per-speaker channel offset added to every frame.
  double channel_offset = 0.0;
  /// Std of per-speaker, per-phone voice offsets (speaker timbre).
  double voice_spread = 0.0;
  /// When > 0, utterances read from a shared pool of this many prompts
  /// (phone sequences); utterance u of every speaker reads prompt
  /// u % num_prompts. When 0, every utterance has its own random phones.
  int num_prompts = 0;
  double eval_fraction = 0.2;
  double dev_fraction = 0.1;
  uint64_t seed = 7;

  /// Throws ConfigError naming the first invalid field.
  void Validate() const;
};

struct SynthCorpus {
  Corpus corpus;
  /// utterance id -> proficiency in [0, 1].
  std::map<std::string, double> oracle;
  /// Native and shifted phone prototypes (P x D).
  Matrix native_means;
  Matrix shifted_means;
};

SynthCorpus SynthesizeCorpus(const SynthConfig& cfg);

}  // namespace proscore

#endif  // PROSCORE_CORPUS_H_
