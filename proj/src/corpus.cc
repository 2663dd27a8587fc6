// proscore/src/corpus.cc

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

#include "proscore/corpus.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "proscore/binary_io.h"

namespace proscore {

namespace fs = std::filesystem;
using json = nlohmann::json;

PhonePrior PhonePrior::Uniform(int num_phones) {
  if (num_phones < 1) throw std::invalid_argument("PhonePrior: need at least one phone");
  return PhonePrior{Vector::Constant(num_phones, 1.0 / num_phones)};
}

RatedUtterance RatedUtterance::FromScores(std::string id, std::vector<int> scores) {
  RatedUtterance r;
  r.utterance_id = std::move(id);
  r.rater_scores = std::move(scores);
  double sum = 0.0;
  for (int s : r.rater_scores) sum += s;
  r.mean_score = r.rater_scores.empty() ? 0.0 : sum / static_cast<double>(r.rater_scores.size());
  return r;
}

std::vector<std::string> SplitManifest::FitIds() const {
  std::set<std::string> dev(dev_ids.begin(), dev_ids.end());
  std::vector<std::string> out;
  for (const auto& id : train_ids) {
    if (!dev.count(id)) out.push_back(id);
  }
  return out;
}

std::string SplitName(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kEval: return "eval";
  }
  return "";
}

Split ParseSplit(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "dev") return Split::kDev;
  if (name == "eval") return Split::kEval;
  throw ConfigError("unknown split \"" + name + "\"");
}

// ---------------------------------------------------------------------------

Corpus::Corpus(std::vector<std::string> phone_table, std::vector<UtteranceRecord> utterances,
               SplitManifest splits)
    : phone_table_(std::move(phone_table)),
      utterances_(std::move(utterances)),
      splits_(std::move(splits)) {
  std::sort(utterances_.begin(), utterances_.end(),
            [](const UtteranceRecord& a, const UtteranceRecord& b) { return a.id() < b.id(); });
  for (size_t i = 0; i < utterances_.size(); ++i) {
    if (!index_.emplace(utterances_[i].id(), i).second) {
      throw DataError("duplicate utterance id " + utterances_[i].id());
    }
  }
}

Eigen::Index Corpus::feature_dim() const {
  return utterances_.empty() ? 0 : utterances_.front().features.dim();
}

const UtteranceRecord& Corpus::Get(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw DataError("unknown utterance " + id);
  return utterances_[it->second];
}

std::vector<const UtteranceRecord*> Corpus::Select(const std::vector<std::string>& ids) const {
  std::vector<const UtteranceRecord*> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(&Get(id));
  return out;
}

void Corpus::Validate() const {
  if (utterances_.empty()) throw DataError("empty corpus");
  const Eigen::Index dim = feature_dim();
  for (const auto& u : utterances_) {
    ValidateFeatures(u.features);
    if (u.features.dim() != dim) {
      throw DataError(u.id() + ": feature dim " + std::to_string(u.features.dim()) +
                      " != corpus dim " + std::to_string(dim));
    }
    ValidatePosteriors(u.posteriors);
    if (u.posteriors.post.rows() != u.features.num_frames()) {
      throw DataError(u.id() + ": posteriorgram has " + std::to_string(u.posteriors.post.rows()) +
                      " frames, features have " + std::to_string(u.features.num_frames()));
    }
    if (u.posteriors.phone_table != phone_table_) {
      throw DataError(u.id() + ": posteriorgram phone table differs from corpus phone table");
    }
    ValidateAlignment(u.alignment, u.features.num_frames(), num_phones());
    if (u.label.rater_scores.empty()) throw DataError(u.id() + ": no rater scores");
  }
  std::set<std::string> seen;
  auto check = [&](const std::vector<std::string>& ids, const char* name) {
    for (const auto& id : ids) {
      if (!Contains(id)) throw DataError(std::string(name) + " split references unknown " + id);
    }
  };
  check(splits_.train_ids, "train");
  check(splits_.dev_ids, "dev");
  check(splits_.eval_ids, "eval");
  std::set<std::string> train(splits_.train_ids.begin(), splits_.train_ids.end());
  for (const auto& id : splits_.eval_ids) {
    if (train.count(id)) throw DataError("utterance " + id + " is in both train and eval");
  }
  for (const auto& id : splits_.dev_ids) {
    if (!train.count(id)) throw DataError("dev utterance " + id + " is not in train");
  }
}

// ---------------------------------------------------------------------------

void ValidateFeatures(const FeatureSequence& fs) {
  if (fs.frames.rows() < 1) throw DataError(fs.utterance_id + ": no frames");
  if (fs.frames.cols() < 1) throw DataError(fs.utterance_id + ": zero feature dim");
  if (!fs.frames.allFinite()) throw DataError(fs.utterance_id + ": non-finite feature value");
}

void ValidatePosteriors(const PosteriorGram& pg, double row_sum_tolerance) {
  if (pg.post.rows() < 1) throw DataError(pg.utterance_id + ": empty posteriorgram");
  if (pg.post.cols() != static_cast<Eigen::Index>(pg.phone_table.size())) {
    throw DataError(pg.utterance_id + ": posteriorgram has " + std::to_string(pg.post.cols()) +
                    " columns but " + std::to_string(pg.phone_table.size()) + " phones");
  }
  for (Eigen::Index t = 0; t < pg.post.rows(); ++t) {
    const auto row = pg.post.row(t);
    if (!row.allFinite() || row.minCoeff() < 0.0) {
      throw DataError(pg.utterance_id + ": posteriorgram row " + std::to_string(t) +
                      " has negative or non-finite entries");
    }
    const double sum = row.sum();
    if (std::abs(sum - 1.0) > row_sum_tolerance) {
      std::ostringstream msg;
      msg << pg.utterance_id << ": posteriorgram row " << t << " sums to " << sum;
      throw DataError(msg.str());
    }
  }
}

void ValidateAlignment(const PhoneAlignment& al, Eigen::Index num_frames, int num_phones) {
  if (al.segments.empty()) throw DataError(al.utterance_id + ": empty alignment");
  int prev_end = 0;
  for (size_t i = 0; i < al.segments.size(); ++i) {
    const auto& s = al.segments[i];
    const std::string where = al.utterance_id + ": segment " + std::to_string(i);
    if (s.phone < 0 || s.phone >= num_phones) throw DataError(where + " has invalid phone id");
    if (s.start >= s.end) throw DataError(where + " is empty or reversed");
    if (s.start < prev_end) throw DataError(where + " overlaps or is out of order");
    if (s.end > num_frames) throw DataError(where + " ends past the last frame");
    prev_end = s.end;
  }
}

void ValidatePrior(const PhonePrior& prior) {
  if (prior.prior.size() < 1) throw DataError("phone prior is empty");
  if (prior.prior.minCoeff() <= 0.0) throw DataError("phone prior has non-positive entries");
  if (std::abs(prior.prior.sum() - 1.0) > 1e-9) throw DataError("phone prior does not sum to 1");
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::string_view kMatrixMagic = "PRF1";

void WriteDims(ByteWriter& w, const Matrix& m) {
  w.U32(static_cast<uint32_t>(m.rows()));
  w.U32(static_cast<uint32_t>(m.cols()));
  w.MatrixBody(m);
}

Matrix ReadDims(ByteReader& r) {
  const uint32_t rows = r.U32();
  const uint32_t cols = r.U32();
  Matrix m = r.MatrixBody(rows, cols);
  r.ExpectEnd();
  return m;
}

}  // namespace

std::string EncodeFeatures(const Matrix& frames) {
  ByteWriter w;
  w.Magic(kMatrixMagic);
  w.U32(kFeatureFormatVersion);
  WriteDims(w, frames);
  return w.Take();
}

Matrix DecodeFeatures(std::string_view bytes, const std::string& what) {
  ByteReader r(bytes, what);
  r.ExpectMagic(kMatrixMagic);
  const uint32_t version = r.U32();
  if (version != kFeatureFormatVersion) {
    throw DataError(what + ": expected feature matrix (version 1), got version " +
                    std::to_string(version));
  }
  return ReadDims(r);
}

std::string EncodePosteriors(const Matrix& post, const std::vector<std::string>& phone_table) {
  ByteWriter w;
  w.Magic(kMatrixMagic);
  w.U32(kPosteriorFormatVersion);
  w.U32(static_cast<uint32_t>(phone_table.size()));
  for (const auto& name : phone_table) w.Str(name);
  WriteDims(w, post);
  return w.Take();
}

std::pair<Matrix, std::vector<std::string>> DecodePosteriors(std::string_view bytes,
                                                             const std::string& what) {
  ByteReader r(bytes, what);
  r.ExpectMagic(kMatrixMagic);
  const uint32_t version = r.U32();
  if (version != kPosteriorFormatVersion) {
    throw DataError(what + ": expected posteriorgram (version 2), got version " +
                    std::to_string(version));
  }
  const uint32_t n = r.U32();
  std::vector<std::string> table;
  table.reserve(n);
  for (uint32_t i = 0; i < n; ++i) table.push_back(r.Str());
  Matrix m = ReadDims(r);
  return {std::move(m), std::move(table)};
}

void WriteFeatureFile(const std::string& path, const Matrix& frames) {
  WriteFileBytes(path, EncodeFeatures(frames));
}

Matrix ReadFeatureFile(const std::string& path) {
  return DecodeFeatures(ReadFileBytes(path), path);
}

void WritePosteriorFile(const std::string& path, const PosteriorGram& pg) {
  WriteFileBytes(path, EncodePosteriors(pg.post, pg.phone_table));
}

PosteriorGram ReadPosteriorFile(const std::string& path, std::string utterance_id) {
  auto [post, table] = DecodePosteriors(ReadFileBytes(path), path);
  return PosteriorGram{std::move(utterance_id), std::move(post), std::move(table)};
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> SplitOn(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

int ParseInt(const std::string& s, const std::string& where) {
  size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    throw DataError(where + ": not an integer: \"" + s + "\"");
  }
  if (used != s.size()) throw DataError(where + ": not an integer: \"" + s + "\"");
  return v;
}

template <typename Fn>
void ForEachTsvLine(const std::string& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    fn(SplitOn(line, '\t'), path + ":" + std::to_string(lineno));
  }
}

std::ofstream OpenForWrite(const std::string& path) {
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  return out;
}

}  // namespace

void WriteAlignments(const std::string& path, const std::vector<PhoneAlignment>& alignments,
                     const std::vector<std::string>& phone_table) {
  auto out = OpenForWrite(path);
  for (const auto& al : alignments) {
    for (const auto& s : al.segments) {
      out << al.utterance_id << '\t' << phone_table.at(s.phone) << '\t' << s.start << '\t'
          << s.end << '\n';
    }
  }
}

std::map<std::string, PhoneAlignment> ReadAlignments(const std::string& path,
                                                     const std::vector<std::string>& phone_table) {
  std::map<std::string, int> phone_ids;
  for (size_t i = 0; i < phone_table.size(); ++i) phone_ids[phone_table[i]] = static_cast<int>(i);
  std::map<std::string, PhoneAlignment> out;
  ForEachTsvLine(path, [&](const std::vector<std::string>& f, const std::string& where) {
    if (f.size() != 4) throw DataError(where + ": expected 4 columns");
    auto it = phone_ids.find(f[1]);
    if (it == phone_ids.end()) throw DataError(where + ": unknown phone \"" + f[1] + "\"");
    auto& al = out[f[0]];
    al.utterance_id = f[0];
    al.segments.push_back({it->second, ParseInt(f[2], where), ParseInt(f[3], where)});
  });
  return out;
}

void WriteLabels(const std::string& path, const std::vector<RatedUtterance>& labels) {
  auto out = OpenForWrite(path);
  for (const auto& l : labels) {
    out << l.utterance_id << '\t';
    for (size_t i = 0; i < l.rater_scores.size(); ++i) {
      if (i) out << ',';
      out << l.rater_scores[i];
    }
    out << '\n';
  }
}

std::map<std::string, RatedUtterance> ReadLabels(const std::string& path) {
  std::map<std::string, RatedUtterance> out;
  ForEachTsvLine(path, [&](const std::vector<std::string>& f, const std::string& where) {
    if (f.size() != 2) throw DataError(where + ": expected 2 columns");
    std::vector<int> scores;
    for (const auto& s : SplitOn(f[1], ',')) {
      const int v = ParseInt(s, where);
      if (v < 1 || v > 5) throw DataError(where + ": rater score out of [1,5]");
      scores.push_back(v);
    }
    if (scores.empty()) throw DataError(where + ": no rater scores");
    if (!out.emplace(f[0], RatedUtterance::FromScores(f[0], std::move(scores))).second) {
      throw DataError(where + ": duplicate utterance " + f[0]);
    }
  });
  return out;
}

void WriteSplits(const std::string& path, const SplitManifest& splits) {
  auto out = OpenForWrite(path);
  std::set<std::string> dev(splits.dev_ids.begin(), splits.dev_ids.end());
  for (const auto& id : splits.train_ids) out << id << '\t' << (dev.count(id) ? "dev" : "train") << '\n';
  for (const auto& id : splits.eval_ids) out << id << "\teval\n";
}

SplitManifest ReadSplits(const std::string& path) {
  SplitManifest m;
  std::set<std::string> seen;
  ForEachTsvLine(path, [&](const std::vector<std::string>& f, const std::string& where) {
    if (f.size() != 2) throw DataError(where + ": expected 2 columns");
    if (!seen.insert(f[0]).second) throw DataError(where + ": duplicate utterance " + f[0]);
    Split split;
    try {
      split = ParseSplit(f[1]);
    } catch (const ConfigError& e) {
      throw DataError(where + ": " + e.what());
    }
    switch (split) {
      case Split::kTrain: m.train_ids.push_back(f[0]); break;
      case Split::kDev:
        m.train_ids.push_back(f[0]);
        m.dev_ids.push_back(f[0]);
        break;
      case Split::kEval: m.eval_ids.push_back(f[0]); break;
    }
  });
  return m;
}

// ---------------------------------------------------------------------------
// Manifest: JSON object with relative paths.
//   {"format": "proscore-corpus", "version": 1, "phones": "phones.txt",
//    "features": "features", "posteriors": "posteriors",
//    "alignments": "alignments.tsv", "labels": "labels.tsv",
//    "splits": "splits.tsv", "utterances": [...], "oracle": "oracle.tsv"}

std::string WriteCorpus(const std::string& dir, const Corpus& corpus,
                        const std::map<std::string, double>& oracle) {
  fs::create_directories(fs::path(dir) / "features");
  fs::create_directories(fs::path(dir) / "posteriors");
  {
    auto out = OpenForWrite((fs::path(dir) / "phones.txt").string());
    for (const auto& p : corpus.phone_table()) out << p << '\n';
  }
  std::vector<PhoneAlignment> alignments;
  std::vector<RatedUtterance> labels;
  json ids = json::array();
  for (const auto& u : corpus.utterances()) {
    WriteFeatureFile((fs::path(dir) / "features" / (u.id() + ".prf")).string(), u.features.frames);
    WritePosteriorFile((fs::path(dir) / "posteriors" / (u.id() + ".prf")).string(), u.posteriors);
    alignments.push_back(u.alignment);
    labels.push_back(u.label);
    ids.push_back(u.id());
  }
  WriteAlignments((fs::path(dir) / "alignments.tsv").string(), alignments, corpus.phone_table());
  WriteLabels((fs::path(dir) / "labels.tsv").string(), labels);
  WriteSplits((fs::path(dir) / "splits.tsv").string(), corpus.splits());

  json manifest = {{"format", "proscore-corpus"},
                   {"version", 1},
                   {"phones", "phones.txt"},
                   {"features", "features"},
                   {"posteriors", "posteriors"},
                   {"alignments", "alignments.tsv"},
                   {"labels", "labels.tsv"},
                   {"splits", "splits.tsv"},
                   {"utterances", ids}};
  if (!oracle.empty()) {
    auto out = OpenForWrite((fs::path(dir) / "oracle.tsv").string());
    out.precision(17);
    for (const auto& [id, rho] : oracle) out << id << '\t' << rho << '\n';
    manifest["oracle"] = "oracle.tsv";
  }
  const std::string manifest_path = (fs::path(dir) / "manifest.json").string();
  auto out = OpenForWrite(manifest_path);
  out << manifest.dump(2) << '\n';
  return manifest_path;
}

namespace {

json ReadManifest(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw DataError("cannot open manifest " + manifest_path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(manifest_path + ": " + e.what());
  }
}

std::string ManifestPath(const json& m, const std::string& manifest_path, const char* key) {
  if (!m.contains(key) || !m[key].is_string()) {
    throw DataError(manifest_path + ": missing \"" + key + "\" entry");
  }
  return (fs::path(manifest_path).parent_path() / m[key].get<std::string>()).string();
}

}  // namespace

Corpus LoadCorpus(const std::string& manifest_path) {
  const json m = ReadManifest(manifest_path);
  if (!m.contains("utterances") || !m["utterances"].is_array()) {
    throw DataError(manifest_path + ": missing \"utterances\" list");
  }
  if (m["utterances"].empty()) throw DataError("empty corpus");

  std::vector<std::string> phones;
  {
    const std::string path = ManifestPath(m, manifest_path, "phones");
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty()) phones.push_back(line);
    }
    if (phones.empty()) throw DataError(path + ": empty phone table");
  }
  const std::string feat_dir = ManifestPath(m, manifest_path, "features");
  const std::string post_dir = ManifestPath(m, manifest_path, "posteriors");
  auto alignments = ReadAlignments(ManifestPath(m, manifest_path, "alignments"), phones);
  auto labels = ReadLabels(ManifestPath(m, manifest_path, "labels"));
  SplitManifest splits = ReadSplits(ManifestPath(m, manifest_path, "splits"));

  std::vector<UtteranceRecord> records;
  for (const auto& idj : m["utterances"]) {
    const std::string id = idj.get<std::string>();
    UtteranceRecord rec;
    rec.features = {id, ReadFeatureFile((fs::path(feat_dir) / (id + ".prf")).string())};
    rec.posteriors = ReadPosteriorFile((fs::path(post_dir) / (id + ".prf")).string(), id);
    auto al = alignments.find(id);
    if (al == alignments.end()) throw DataError(id + ": no alignment");
    rec.alignment = std::move(al->second);
    alignments.erase(al);
    auto lab = labels.find(id);
    if (lab == labels.end()) throw DataError(id + ": no labels");
    rec.label = std::move(lab->second);
    labels.erase(lab);
    records.push_back(std::move(rec));
  }
  if (!alignments.empty()) {
    throw DataError("alignment references unknown utterance " + alignments.begin()->first);
  }
  Corpus corpus(std::move(phones), std::move(records), std::move(splits));
  corpus.Validate();
  return corpus;
}

std::map<std::string, double> LoadOracle(const std::string& manifest_path) {
  const json m = ReadManifest(manifest_path);
  std::map<std::string, double> out;
  if (!m.contains("oracle")) return out;
  ForEachTsvLine(ManifestPath(m, manifest_path, "oracle"),
                 [&](const std::vector<std::string>& f, const std::string& where) {
                   if (f.size() != 2) throw DataError(where + ": expected 2 columns");
                   out[f[0]] = std::stod(f[1]);
                 });
  return out;
}

// ---------------------------------------------------------------------------

FeatureSequence StackContext(const FeatureSequence& fs, int left, int right) {
  if (left < 0 || right < 0) throw std::invalid_argument("StackContext: negative context");
  const Eigen::Index T = fs.frames.rows();
  const Eigen::Index D = fs.frames.cols();
  const int width = left + right + 1;
  FeatureSequence out{fs.utterance_id, Matrix(T, D * width)};
  for (Eigen::Index t = 0; t < T; ++t) {
    for (int k = 0; k < width; ++k) {
      const Eigen::Index src = std::clamp<Eigen::Index>(t - left + k, 0, T - 1);
      out.frames.block(t, k * D, 1, D) = fs.frames.row(src);
    }
  }
  return out;
}

SplitManifest MakeSplits(std::vector<std::string> ids, double eval_fraction, double dev_fraction,
                         uint64_t seed) {
  if (eval_fraction < 0.0 || eval_fraction >= 1.0 || dev_fraction < 0.0 || dev_fraction >= 1.0) {
    throw ConfigError("split fractions must lie in [0, 1)");
  }
  std::sort(ids.begin(), ids.end());
  Rng rng(DeriveSeed(seed, 0x5711));
  rng.Shuffle(ids);
  const auto n_eval = static_cast<size_t>(std::llround(eval_fraction * static_cast<double>(ids.size())));
  SplitManifest m;
  m.eval_ids.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_eval));
  m.train_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_eval), ids.end());
  std::sort(m.eval_ids.begin(), m.eval_ids.end());
  std::sort(m.train_ids.begin(), m.train_ids.end());

  std::vector<std::string> shuffled = m.train_ids;
  Rng dev_rng(DeriveSeed(seed, 0xDE7));
  dev_rng.Shuffle(shuffled);
  const auto n_dev =
      static_cast<size_t>(std::llround(dev_fraction * static_cast<double>(shuffled.size())));
  m.dev_ids.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(n_dev));
  std::sort(m.dev_ids.begin(), m.dev_ids.end());
  return m;
}

// ---------------------------------------------------------------------------

void SynthConfig::Validate() const {
  auto positive = [](int v, const char* name) {
    if (v < 1) throw ConfigError(std::string("synth.") + name + " must be >= 1");
  };
  positive(num_phones, "num_phones");
  positive(feature_dim, "feature_dim");
  positive(num_speakers, "num_speakers");
  positive(utterances_per_speaker, "utterances_per_speaker");
  positive(min_phones_per_utterance, "min_phones_per_utterance");
  positive(min_frames_per_phone, "min_frames_per_phone");
  positive(num_raters, "num_raters");
  if (max_phones_per_utterance < min_phones_per_utterance) {
    throw ConfigError("synth.max_phones_per_utterance must be >= min_phones_per_utterance");
  }
  if (max_frames_per_phone < min_frames_per_phone) {
    throw ConfigError("synth.max_frames_per_phone must be >= min_frames_per_phone");
  }
  auto nonneg = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ConfigError(std::string("synth.") + name + " must be finite and >= 0");
    }
  };
  nonneg(prototype_scale, "prototype_scale");
  nonneg(shift_scale, "shift_scale");
  nonneg(frame_noise, "frame_noise");
  nonneg(proficiency_noise, "proficiency_noise");
  nonneg(label_noise, "label_noise");
  nonneg(speaker_noise_spread, "speaker_noise_spread");
  nonneg(channel_offset, "channel_offset");
  nonneg(voice_spread, "voice_spread");
  if (num_prompts < 0) throw ConfigError("synth.num_prompts must be >= 0");
  if (frame_noise <= 0.0) throw ConfigError("synth.frame_noise must be > 0");
  if (eval_fraction < 0.0 || eval_fraction >= 1.0) {
    throw ConfigError("synth.eval_fraction must lie in [0, 1)");
  }
  if (dev_fraction < 0.0 || dev_fraction >= 1.0) {
    throw ConfigError("synth.dev_fraction must lie in [0, 1)");
  }
}

namespace {

std::vector<std::string> PhoneNames(int n) {
  static const char* kArpabet[] = {"aa", "ae", "ah", "ao", "aw", "ay", "b",  "ch", "d",  "dh",
                                   "eh", "er", "ey", "f",  "g",  "hh", "ih", "iy", "jh", "k",
                                   "l",  "m",  "n",  "ng", "ow", "oy", "p",  "r",  "s",  "sh",
                                   "t",  "th", "uh", "uw", "v",  "w",  "y",  "z",  "zh"};
  constexpr int kCount = static_cast<int>(std::size(kArpabet));
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) {
    out.push_back(n <= kCount ? std::string(kArpabet[i]) : "p" + std::to_string(i));
  }
  return out;
}

// Frame posteriors under equal-variance isotropic Gaussians with uniform
// priors reduce to a softmax of scaled negative squared distances.
Matrix PhonePosteriors(const Matrix& frames, const Matrix& means, double variance) {
  const Eigen::Index T = frames.rows();
  const Eigen::Index P = means.rows();
  Matrix post(T, P);
  std::vector<double> logits(static_cast<size_t>(P));
  for (Eigen::Index t = 0; t < T; ++t) {
    for (Eigen::Index p = 0; p < P; ++p) {
      logits[static_cast<size_t>(p)] = -0.5 * (frames.row(t) - means.row(p)).squaredNorm() / variance;
    }
    const double lse = LogSumExp(logits.data(), logits.size());
    for (Eigen::Index p = 0; p < P; ++p) post(t, p) = std::exp(logits[static_cast<size_t>(p)] - lse);
  }
  return post;
}

}  // namespace

SynthCorpus SynthesizeCorpus(const SynthConfig& cfg) {
  cfg.Validate();
  const int P = cfg.num_phones;
  const int D = cfg.feature_dim;

  SynthCorpus out;
  out.native_means = Matrix(P, D);
  out.shifted_means = Matrix(P, D);
  {
    Rng rng(DeriveSeed(cfg.seed, 1));
    for (int p = 0; p < P; ++p) {
      for (int d = 0; d < D; ++d) out.native_means(p, d) = rng.Normal(0.0, cfg.prototype_scale);
      Vector dir(D);
      for (int d = 0; d < D; ++d) dir(d) = rng.Normal();
      dir.normalize();
      out.shifted_means.row(p) = out.native_means.row(p) + cfg.shift_scale * dir.transpose();
    }
  }

  auto draw_phones = [&](Rng& r) {
    const int M = static_cast<int>(
        r.UniformInt(cfg.min_phones_per_utterance, cfg.max_phones_per_utterance));
    std::vector<int> seq;
    for (int i = 0; i < M; ++i) seq.push_back(static_cast<int>(r.UniformInt(0, P - 1)));
    return seq;
  };
  std::vector<std::vector<int>> prompts;
  {
    Rng rng(DeriveSeed(cfg.seed, 3));
    for (int i = 0; i < cfg.num_prompts; ++i) prompts.push_back(draw_phones(rng));
  }

  const std::vector<std::string> phones = PhoneNames(P);
  const double variance = cfg.frame_noise * cfg.frame_noise;
  std::vector<UtteranceRecord> records;
  Rng rng(DeriveSeed(cfg.seed, 2));
  for (int s = 0; s < cfg.num_speakers; ++s) {
    const double speaker_rho = rng.Uniform();
    const double noise_mult = std::exp(cfg.speaker_noise_spread * rng.Normal());
    Vector offset(D);
    for (int d = 0; d < D; ++d) offset(d) = rng.Normal(0.0, cfg.channel_offset);
    // The recognizer is speaker-adapted: it scores frames against the native
    // prototypes under this speaker's channel offset and noise level.
    Matrix voice(P, D);
    for (int p = 0; p < P; ++p) {
      for (int d = 0; d < D; ++d) voice(p, d) = rng.Normal(0.0, cfg.voice_spread);
    }
    const Matrix adapted_means = (out.native_means + voice).rowwise() + offset.transpose();
    const double adapted_variance = noise_mult * noise_mult * variance;

    for (int u = 0; u < cfg.utterances_per_speaker; ++u) {
      char id_buf[64];
      std::snprintf(id_buf, sizeof(id_buf), "spk%03d_utt%02d", s, u);
      const std::string id = id_buf;
      const double rho =
          std::clamp(speaker_rho + cfg.proficiency_noise * rng.Normal(), 0.0, 1.0);

      std::vector<int> random_phones;
      if (prompts.empty()) random_phones = draw_phones(rng);
      const std::vector<int>& script =
          prompts.empty() ? random_phones : prompts[static_cast<size_t>(u % cfg.num_prompts)];
      PhoneAlignment al{id, {}};
      int t = 0;
      for (int phone : script) {
        const int dur =
            static_cast<int>(rng.UniformInt(cfg.min_frames_per_phone, cfg.max_frames_per_phone));
        al.segments.push_back({phone, t, t + dur});
        t += dur;
      }
      Matrix frames(t, D);
      for (const auto& seg : al.segments) {
        const Vector mean = (1.0 - rho) * out.shifted_means.row(seg.phone).transpose() +
                            rho * out.native_means.row(seg.phone).transpose() +
                            voice.row(seg.phone).transpose() + offset;
        for (int f = seg.start; f < seg.end; ++f) {
          for (int d = 0; d < D; ++d) {
            frames(f, d) = mean(d) + noise_mult * cfg.frame_noise * rng.Normal();
          }
        }
      }

      std::vector<int> scores;
      for (int r = 0; r < cfg.num_raters; ++r) {
        const double raw = 1.0 + 4.0 * rho + cfg.label_noise * rng.Normal();
        scores.push_back(static_cast<int>(std::clamp(std::floor(raw + 0.5), 1.0, 5.0)));
      }

      UtteranceRecord rec;
      rec.posteriors = {id, PhonePosteriors(frames, adapted_means, adapted_variance), phones};
      rec.features = {id, std::move(frames)};
      rec.alignment = std::move(al);
      rec.label = RatedUtterance::FromScores(id, std::move(scores));
      out.oracle[id] = rho;
      records.push_back(std::move(rec));
    }
  }

  std::vector<std::string> ids;
  for (const auto& r : records) ids.push_back(r.id());
  SplitManifest splits = MakeSplits(ids, cfg.eval_fraction, cfg.dev_fraction, cfg.seed);
  out.corpus = Corpus(phones, std::move(records), std::move(splits));
  return out;
}

}  // namespace proscore
