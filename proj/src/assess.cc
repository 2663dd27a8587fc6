// proscore/src/assess.cc

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

#include "proscore/assess.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace proscore {

double Pcc(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw DataError("PCC: length mismatch " + std::to_string(xs.size()) + " vs " +
                    std::to_string(ys.size()));
  }
  const size_t n = xs.size();
  if (n < 2) throw DataError("PCC needs at least 2 values");
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DataError("PCC of a constant vector is undefined");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// ---------------------------------------------------------------------------

void ScoreTable::AddRow(const std::string& id, double label_mean) {
  if (!index_.emplace(id, ids_.size()).second) throw DataError("duplicate utterance " + id);
  ids_.push_back(id);
  labels_.push_back(label_mean);
  for (auto& [name, values] : columns_) values.push_back(std::nan(""));
}

void ScoreTable::SetLabels(std::vector<double> labels) {
  if (labels.size() != ids_.size()) throw DataError("label count does not match the score table");
  labels_ = std::move(labels);
}

void ScoreTable::SetColumn(const std::string& name, std::vector<double> values) {
  if (values.size() != ids_.size()) {
    throw DataError("column " + name + " has " + std::to_string(values.size()) + " values for " +
                    std::to_string(ids_.size()) + " rows");
  }
  for (auto& [n, v] : columns_) {
    if (n == name) {
      v = std::move(values);
      return;
    }
  }
  columns_.emplace_back(name, std::move(values));
}

bool ScoreTable::HasColumn(const std::string& name) const {
  return std::any_of(columns_.begin(), columns_.end(),
                     [&](const auto& c) { return c.first == name; });
}

const std::vector<double>& ScoreTable::Column(const std::string& name) const {
  for (const auto& [n, v] : columns_) {
    if (n == name) return v;
  }
  throw DataError("score table has no column \"" + name + "\"");
}

std::vector<std::string> ScoreTable::ColumnNames() const {
  std::vector<std::string> out;
  for (const auto& c : columns_) out.push_back(c.first);
  return out;
}

size_t ScoreTable::RowOf(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw DataError("score table has no utterance " + id);
  return it->second;
}

ScoreTable ScoreTable::Subset(const std::vector<std::string>& ids) const {
  std::vector<std::string> missing;
  for (const auto& id : ids) {
    if (!index_.count(id)) missing.push_back(id);
  }
  if (!missing.empty()) {
    std::string msg = "score table is missing " + std::to_string(missing.size()) + " utterance(s):";
    for (const auto& id : missing) msg += " " + id;
    throw DataError(msg);
  }
  ScoreTable out;
  for (const auto& id : ids) out.AddRow(id, labels_[index_.at(id)]);
  for (const auto& [name, values] : columns_) {
    std::vector<double> v;
    v.reserve(ids.size());
    for (const auto& id : ids) v.push_back(values[index_.at(id)]);
    out.SetColumn(name, std::move(v));
  }
  return out;
}

void ScoreTable::Validate() const {
  for (size_t i = 0; i < ids_.size(); ++i) {
    if (!std::isfinite(labels_[i])) throw DataError(ids_[i] + ": non-finite label");
    for (const auto& [name, values] : columns_) {
      if (!std::isfinite(values[i])) throw DataError(ids_[i] + ": non-finite " + name);
    }
  }
}

void ScoreTable::WriteTsv(std::ostream& out) const {
  out << "utterance_id";
  for (const auto& c : columns_) out << '\t' << c.first;
  out << '\n';
  char buf[64];
  for (size_t i = 0; i < ids_.size(); ++i) {
    out << ids_[i];
    for (const auto& c : columns_) {
      std::snprintf(buf, sizeof(buf), "\t%.17g", c.second[i]);
      out << buf;
    }
    out << '\n';
  }
}

ScoreTable ScoreTable::ReadTsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  auto split = [](const std::string& line) {
    std::vector<std::string> f;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, '\t')) f.push_back(field);
    return f;
  };
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty score table");
  const auto header = split(line);
  if (header.empty() || header[0] != "utterance_id") {
    throw DataError(path + ": header must start with utterance_id");
  }
  ScoreTable t;
  std::vector<std::vector<double>> cols(header.size() - 1);
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != header.size()) {
      throw DataError(path + ":" + std::to_string(lineno) + ": wrong column count");
    }
    try {
      t.AddRow(f[0], std::nan(""));
      for (size_t c = 1; c < f.size(); ++c) cols[c - 1].push_back(std::stod(f[c]));
    } catch (const std::invalid_argument&) {
      throw DataError(path + ":" + std::to_string(lineno) + ": bad number");
    }
  }
  for (size_t c = 0; c < cols.size(); ++c) t.SetColumn(header[c + 1], std::move(cols[c]));
  return t;
}

// ---------------------------------------------------------------------------

void FusionConfig::Validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("fusion lambda must lie in [0, 1]");
}

namespace {

std::pair<double, double> MeanStd(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.size());
  return {mean, var > 0.0 ? std::sqrt(var) : 1.0};
}

}  // namespace

FusionNorm FusionNorm::Fit(const ScoreTable& table, const std::string& gop_column,
                           const std::string& pred_column, Normalization normalization) {
  FusionNorm n;
  if (normalization == Normalization::kNone) return n;
  if (table.size() == 0) throw DataError("cannot fit fusion normalization on an empty table");
  std::tie(n.gop_mean, n.gop_scale) = MeanStd(table.Column(gop_column));
  std::tie(n.pred_mean, n.pred_scale) = MeanStd(table.Column(pred_column));
  return n;
}

ScoreTable ScoreFuse(const ScoreTable& table, const std::string& gop_column,
                     const std::string& pred_column, const std::string& fused_column,
                     const FusionConfig& cfg, const FusionNorm& norm) {
  cfg.Validate();
  const auto& gop = table.Column(gop_column);
  const auto& pred = table.Column(pred_column);
  std::vector<double> fused(table.size());
  for (size_t i = 0; i < table.size(); ++i) {
    const double g = (gop[i] - norm.gop_mean) / norm.gop_scale;
    const double p = (pred[i] - norm.pred_mean) / norm.pred_scale;
    fused[i] = cfg.lambda * g + (1.0 - cfg.lambda) * p;
  }
  ScoreTable out = table;
  out.SetColumn(fused_column, std::move(fused));
  return out;
}

LambdaSelection SelectLambda(const ScoreTable& dev, const std::string& gop_column,
                             const std::string& pred_column, Normalization normalization,
                             double grid_step) {
  if (!(grid_step > 0.0 && grid_step <= 1.0)) throw ConfigError("lambda grid step must be in (0, 1]");
  const auto& labels = dev.labels();
  if (std::all_of(labels.begin(), labels.end(), [&](double v) { return v == labels.front(); })) {
    throw DataError("dev labels are constant; cannot select lambda");
  }
  LambdaSelection sel;
  sel.norm = FusionNorm::Fit(dev, gop_column, pred_column, normalization);
  const int steps = static_cast<int>(std::llround(1.0 / grid_step));
  bool first = true;
  for (int k = 0; k <= steps; ++k) {
    const double lambda = static_cast<double>(k) / steps;
    const ScoreTable fused =
        ScoreFuse(dev, gop_column, pred_column, "fused", {lambda, normalization}, sel.norm);
    double pcc = 0.0;
    try {
      pcc = Pcc(fused.Column("fused"), labels);
    } catch (const DataError&) {
      pcc = 0.0;  // constant fused column
    }
    sel.curve.emplace_back(lambda, pcc);
    // Differences at rounding level count as ties, which go to the smaller lambda.
    if (first || pcc > sel.pcc + 1e-12) {
      sel.pcc = pcc;
      sel.lambda = lambda;
      first = false;
    }
  }
  return sel;
}

Matrix FeatureFuse(const Matrix& embeddings, std::span<const double> gop,
                   const Standardizer* gop_stats) {
  if (static_cast<Eigen::Index>(gop.size()) != embeddings.rows()) {
    throw DataError("feature fusion: " + std::to_string(gop.size()) + " GOP scores for " +
                    std::to_string(embeddings.rows()) + " embeddings");
  }
  const Eigen::Index n = embeddings.rows();
  const Eigen::Index d = embeddings.cols();
  Matrix gop_col(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) gop_col(i, 0) = gop[static_cast<size_t>(i)];
  const Standardizer own = gop_stats ? Standardizer{} : Standardizer::Fit(gop_col);
  const Standardizer& st = gop_stats ? *gop_stats : own;
  Matrix out(n, d + 1);
  out.leftCols(d) = embeddings;
  out.col(d) = st.Apply(gop_col).col(0);
  return out;
}

InterRaterResult InterRaterPcc(const Matrix& ratings) {
  if (ratings.cols() < 2) throw DataError("inter-rater PCC needs at least 2 raters");
  InterRaterResult r;
  std::vector<std::vector<double>> raters;
  for (Eigen::Index c = 0; c < ratings.cols(); ++c) {
    std::vector<double> col(static_cast<size_t>(ratings.rows()));
    for (Eigen::Index i = 0; i < ratings.rows(); ++i) col[static_cast<size_t>(i)] = ratings(i, c);
    if (std::all_of(col.begin(), col.end(), [&](double v) { return v == col.front(); })) {
      r.excluded_raters.push_back(static_cast<int>(c));
      continue;
    }
    raters.push_back(std::move(col));
  }
  if (raters.size() < 2) throw DataError("fewer than 2 raters with non-constant scores");
  double sum = 0.0;
  int pairs = 0;
  for (size_t a = 0; a < raters.size(); ++a) {
    for (size_t b = a + 1; b < raters.size(); ++b) {
      sum += Pcc(raters[a], raters[b]);
      ++pairs;
    }
  }
  r.pcc = sum / pairs;
  return r;
}

std::vector<ReportRow> Evaluate(const ScoreTable& table, std::vector<std::string> ids,
                                const std::string& split_name,
                                const std::map<std::string, double>& lambdas) {
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw DataError("evaluation ids contain duplicates");
  }
  const ScoreTable sub = table.Subset(ids);
  sub.Validate();
  std::vector<ReportRow> rows;
  for (const auto& name : sub.ColumnNames()) {
    ReportRow row{name, split_name, Pcc(sub.Column(name), sub.labels()), std::nullopt};
    auto it = lambdas.find(name);
    if (it != lambdas.end()) row.lambda = it->second;
    rows.push_back(std::move(row));
  }
  return rows;
}

void WriteReport(std::ostream& out, const std::vector<ReportRow>& rows) {
  out << "system\tsplit\tpcc\tlambda\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.6f", r.pcc);
    out << r.system << '\t' << r.split << '\t' << buf << '\t';
    if (r.lambda) {
      std::snprintf(buf, sizeof(buf), "%.2f", *r.lambda);
      out << buf;
    }
    out << '\n';
  }
}

std::vector<ReportRow> ReadReport(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string line;
  std::getline(in, line);
  if (line != "system\tsplit\tpcc\tlambda") throw DataError(path + ": not a report file");
  std::vector<ReportRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, '\t')) f.push_back(field);
    if (f.size() == 3) f.emplace_back();
    if (f.size() != 4) throw DataError(path + ": malformed report row");
    ReportRow r{f[0], f[1], std::stod(f[2]), std::nullopt};
    if (!f[3].empty()) r.lambda = std::stod(f[3]);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace proscore
