// proscore/include/proscore/assess.h

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

#ifndef PROSCORE_ASSESS_H_
#define PROSCORE_ASSESS_H_

#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "proscore/corpus.h"
#include "proscore/svr.h"

namespace proscore {

/// Sample Pearson correlation. Throws DataError on length mismatch, n < 2 or
/// a constant input.
double Pcc(std::span<const double> xs, std::span<const double> ys);

/// Per-utterance scores with named columns, keyed by utterance id.
class ScoreTable {
 public:
  /// `label_mean` may be NaN when labels are attached later.
  void AddRow(const std::string& id, double label_mean);
  void SetLabels(std::vector<double> labels);
  /// Adds or replaces a column; `values` follows row order.
  void SetColumn(const std::string& name, std::vector<double> values);

  size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<double>& labels() const { return labels_; }
  bool HasColumn(const std::string& name) const;
  const std::vector<double>& Column(const std::string& name) const;
  std::vector<std::string> ColumnNames() const;
  /// Row index of an id; throws DataError if absent.
  size_t RowOf(const std::string& id) const;

  /// Rows for the given ids (in that order). Missing ids are reported
  /// together in one DataError.
  ScoreTable Subset(const std::vector<std::string>& ids) const;

  /// Finite labels and scores.
  void Validate() const;

  /// TSV with header "utterance_id\t<columns...>"; labels are not stored.
  void WriteTsv(std::ostream& out) const;
  static ScoreTable ReadTsv(const std::string& path);

 private:
  std::vector<std::string> ids_;
  std::vector<double> labels_;
  std::vector<std::pair<std::string, std::vector<double>>> columns_;
  std::map<std::string, size_t> index_;
};

enum class Normalization { kZScore, kNone };

struct FusionConfig {
  double lambda = 0.5;
  Normalization normalization = Normalization::kZScore;

  void Validate() const;
};

/// Affine maps applied to the GOP and predicted columns before mixing.
struct FusionNorm {
  double gop_mean = 0.0, gop_scale = 1.0;
  double pred_mean = 0.0, pred_scale = 1.0;

  /// z-score statistics of the two columns over `table` (identity for kNone).
  static FusionNorm Fit(const ScoreTable& table, const std::string& gop_column,
                        const std::string& pred_column, Normalization normalization);
};

/// fused = lambda * gop' + (1 - lambda) * predicted', where ' denotes the
/// normalized column. Returns a copy of `table` with `fused_column` set.
ScoreTable ScoreFuse(const ScoreTable& table, const std::string& gop_column,
                     const std::string& pred_column, const std::string& fused_column,
                     const FusionConfig& cfg, const FusionNorm& norm);

struct LambdaSelection {
  double lambda = 0.0;
  double pcc = 0.0;
  std::vector<std::pair<double, double>> curve;  ///< (lambda, dev PCC)
  FusionNorm norm;
};

/// Exhaustive grid over {0, step, ..., 1} on the dev table; ties go to the
/// smaller lambda.
LambdaSelection SelectLambda(const ScoreTable& dev, const std::string& gop_column,
                             const std::string& pred_column,
                             Normalization normalization = Normalization::kZScore,
                             double grid_step = 0.02);

/// Appends the GOP score as one standardized column. When `gop_stats` is
/// null the column is standardized with its own mean and spread.
Matrix FeatureFuse(const Matrix& embeddings, std::span<const double> gop,
                   const Standardizer* gop_stats = nullptr);

struct InterRaterResult {
  double pcc = 0.0;
  std::vector<int> excluded_raters;  ///< raters with constant scores
};

/// Mean pairwise PCC over all rater pairs (ratings is n x R).
InterRaterResult InterRaterPcc(const Matrix& ratings);

struct ReportRow {
  std::string system;
  std::string split;
  double pcc = 0.0;
  std::optional<double> lambda;
};

/// PCC of every score column against the labels over `ids`, with optional
/// per-system lambda metadata. Rows are sorted by id first, so the result
/// does not depend on table order.
std::vector<ReportRow> Evaluate(const ScoreTable& table, std::vector<std::string> ids,
                                const std::string& split_name,
                                const std::map<std::string, double>& lambdas = {});

/// "system\tsplit\tpcc\tlambda", PCC with six decimals.
void WriteReport(std::ostream& out, const std::vector<ReportRow>& rows);
std::vector<ReportRow> ReadReport(const std::string& path);

}  // namespace proscore

#endif  // PROSCORE_ASSESS_H_
