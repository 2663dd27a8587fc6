// proscore/src/pipeline.cc

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

#include "proscore/pipeline.h"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "proscore/binary_io.h"

namespace proscore {

namespace fs = std::filesystem;
using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Digests.

namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) {
      throw Error("SHA-256 initialization failed");
    }
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  Sha256& Update(std::string_view data) {
    // Length prefix keeps concatenations unambiguous.
    const uint64_t n = data.size();
    EVP_DigestUpdate(ctx_, &n, sizeof(n));
    EVP_DigestUpdate(ctx_, data.data(), data.size());
    return *this;
  }

  std::string HexDigest() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_, md, &len);
    static const char* kHex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out += kHex[md[i] >> 4];
      out += kHex[md[i] & 15];
    }
    return out;
  }

 private:
  EVP_MD_CTX* ctx_;
};

std::string FileDigest(const std::string& path) { return Sha256Hex(ReadFileBytes(path)); }

}  // namespace

std::string Sha256Hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 failed");
  }
  static const char* kHex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 15];
  }
  return out;
}

std::string CorpusDigest(const Corpus& corpus) {
  Sha256 h;
  for (const auto& p : corpus.phone_table()) h.Update(p);
  for (const auto& u : corpus.utterances()) {
    h.Update(u.id());
    h.Update(EncodeFeatures(u.features.frames));
    h.Update(EncodePosteriors(u.posteriors.post, u.posteriors.phone_table));
    std::string seg;
    for (const auto& s : u.alignment.segments) {
      seg += std::to_string(s.phone) + ":" + std::to_string(s.start) + ":" +
             std::to_string(s.end) + ";";
    }
    h.Update(seg);
    std::string scores;
    for (int r : u.label.rater_scores) scores += std::to_string(r) + ",";
    h.Update(scores);
  }
  for (const auto* ids : {&corpus.splits().train_ids, &corpus.splits().dev_ids,
                          &corpus.splits().eval_ids}) {
    std::string joined;
    for (const auto& id : *ids) joined += id + "\n";
    h.Update(joined);
  }
  return h.HexDigest();
}

// ---------------------------------------------------------------------------
// Config parsing.

namespace {

/// Reads one JSON object, tracking which keys were consumed so that unknown
/// keys can be rejected.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(Name("") + " must be an object");
  }

  bool Has(const std::string& key) const { return j_.contains(key); }

  template <typename T>
  T Get(const std::string& key, T fallback) {
    used_.insert(key);
    if (!j_.contains(key)) return fallback;
    return Convert<T>(key);
  }

  template <typename T>
  T Require(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) throw ConfigError("missing required field " + Name(key));
    return Convert<T>(key);
  }

  Section Sub(const std::string& key) {
    used_.insert(key);
    static const json kEmpty = json::object();
    return Section(j_.contains(key) ? j_.at(key) : kEmpty, Name(key));
  }

  const json& Raw(const std::string& key) const { return j_.at(key); }

  void Finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!used_.count(key)) throw ConfigError("unknown config field " + Name(key));
    }
  }

 private:
  std::string Name(const std::string& key) const {
    if (key.empty()) return path_.empty() ? "config" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  template <typename T>
  T Convert(const std::string& key) const {
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config field " + Name(key) + " has the wrong type");
    }
  }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

int PositiveInt(Section& s, const std::string& key, int fallback, const std::string& path) {
  const int v = s.Get<int>(key, fallback);
  if (v < 1) throw ConfigError(path + "." + key + " must be >= 1");
  return v;
}

SynthConfig SynthFromSection(Section s, uint64_t seed) {
  SynthConfig c;
  c.num_phones = s.Get("num_phones", c.num_phones);
  c.feature_dim = s.Get("feature_dim", c.feature_dim);
  c.num_speakers = s.Get("num_speakers", c.num_speakers);
  c.utterances_per_speaker = s.Get("utterances_per_speaker", c.utterances_per_speaker);
  c.min_phones_per_utterance = s.Get("min_phones_per_utterance", c.min_phones_per_utterance);
  c.max_phones_per_utterance = s.Get("max_phones_per_utterance", c.max_phones_per_utterance);
  c.min_frames_per_phone = s.Get("min_frames_per_phone", c.min_frames_per_phone);
  c.max_frames_per_phone = s.Get("max_frames_per_phone", c.max_frames_per_phone);
  c.prototype_scale = s.Get("prototype_scale", c.prototype_scale);
  c.shift_scale = s.Get("shift_scale", c.shift_scale);
  c.frame_noise = s.Get("frame_noise", c.frame_noise);
  c.proficiency_noise = s.Get("proficiency_noise", c.proficiency_noise);
  c.label_noise = s.Get("label_noise", c.label_noise);
  c.num_raters = s.Get("num_raters", c.num_raters);
  c.speaker_noise_spread = s.Get("speaker_noise_spread", c.speaker_noise_spread);
  c.channel_offset = s.Get("channel_offset", c.channel_offset);
  c.voice_spread = s.Get("voice_spread", c.voice_spread);
  c.num_prompts = s.Get("num_prompts", c.num_prompts);
  c.eval_fraction = s.Get("eval_fraction", c.eval_fraction);
  c.dev_fraction = s.Get("dev_fraction", c.dev_fraction);
  c.seed = s.Get<uint64_t>("seed", seed);
  s.Finish();
  c.Validate();
  return c;
}

void ParseAdam(Section& s, AdamConfig& a, const std::string& path) {
  a.learning_rate = s.Get("learning_rate", a.learning_rate);
  a.beta1 = s.Get("beta1", a.beta1);
  a.beta2 = s.Get("beta2", a.beta2);
  a.epsilon = s.Get("adam_epsilon", a.epsilon);
  a.batch_size = PositiveInt(s, "batch_size", a.batch_size, path);
  a.epochs = PositiveInt(s, "epochs", a.epochs, path);
  a.Validate();
}

void ParseFlowShape(Section& s, FlowConfig& f, const std::string& path) {
  f.num_layers = PositiveInt(s, "num_layers", f.num_layers, path);
  f.hidden = PositiveInt(s, "hidden", f.hidden, path);
  f.scale_cap = s.Get("scale_cap", f.scale_cap);
  if (!(f.scale_cap > 0.0)) throw ConfigError(path + ".scale_cap must be > 0");
}

std::string Canonical(const json& root, const std::string& key) {
  return root.contains(key) ? root.at(key).dump() : "{}";
}

}  // namespace

bool PipelineConfig::Runs(const std::string& system) const {
  return std::find(systems.begin(), systems.end(), system) != systems.end();
}

SynthConfig ParseSynthConfig(const std::string& json_text, uint64_t seed) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("synth config is not valid JSON: ") + e.what());
  }
  return SynthFromSection(Section(j, "synth"), seed);
}

PipelineConfig ParsePipelineConfig(const std::string& json_text,
                                   std::optional<uint64_t> seed_override) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  Section top(root, "");
  PipelineConfig c;
  c.seed = top.Get<uint64_t>("seed", 7);
  if (seed_override) c.seed = *seed_override;

  Section paths = top.Sub("paths");
  if (!root.contains("paths")) throw ConfigError("missing required field paths.manifest");
  c.manifest = paths.Require<std::string>("manifest");
  c.model_dir = paths.Require<std::string>("model_dir");
  c.report_dir = paths.Require<std::string>("report_dir");
  paths.Finish();

  if (root.contains("synth")) {
    json synth = root.at("synth");
    if (seed_override && synth.is_object()) synth.erase("seed");
    top.Sub("synth");
    c.synth = SynthFromSection(Section(synth, "synth"), c.seed);
  }

  Section fe = top.Sub("frontend");
  c.context_left = fe.Get("context_left", 0);
  c.context_right = fe.Get("context_right", 0);
  if (c.context_left < 0 || c.context_right < 0) {
    throw ConfigError("frontend context widths must be >= 0");
  }
  fe.Finish();

  Section gop = top.Sub("gop");
  const std::string pooling = gop.Get<std::string>("pooling", "mean_then_log");
  if (pooling == "mean_then_log") {
    c.pooling = SegmentPooling::kMeanThenLog;
  } else if (pooling == "mean_of_log") {
    c.pooling = SegmentPooling::kMeanOfLog;
  } else {
    throw ConfigError("gop.pooling must be mean_then_log or mean_of_log");
  }
  gop.Finish();

  Section gmm = top.Sub("gmm");
  c.gmm.num_components = PositiveInt(gmm, "num_components", c.gmm.num_components, "gmm");
  c.gmm.iterations = PositiveInt(gmm, "iterations", c.gmm.iterations, "gmm");
  c.gmm.kmeans_iterations = gmm.Get("kmeans_iterations", c.gmm.kmeans_iterations);
  c.gmm.variance_floor = gmm.Get("variance_floor", c.gmm.variance_floor);
  c.gmm.seed = c.seed;
  gmm.Finish();

  Section iv = top.Sub("ivector");
  c.ivector.ivector_dim = PositiveInt(iv, "ivector_dim", c.ivector.ivector_dim, "ivector");
  c.ivector.iterations = PositiveInt(iv, "iterations", c.ivector.iterations, "ivector");
  c.ivector.init_scale = iv.Get("init_scale", c.ivector.init_scale);
  c.ivector.seed = c.seed;
  iv.Finish();

  Section flow = top.Sub("flow");
  ParseFlowShape(flow, c.flow, "flow");
  ParseAdam(flow, c.flow_adam, "flow");
  c.flow.seed = c.seed;
  c.flow_adam.seed = c.seed;
  flow.Finish();

  Section dnf = top.Sub("dnf");
  ParseFlowShape(dnf, c.dnf.backbone, "dnf");
  ParseAdam(dnf, c.dnf.adam, "dnf");
  c.dnf.num_classes = dnf.Get("num_classes", c.dnf.num_classes);
  if (c.dnf.num_classes < 2) throw ConfigError("dnf.num_classes must be >= 2");
  c.dnf.backbone.seed = c.seed;
  c.dnf.adam.seed = c.seed;
  dnf.Finish();

  Section svr = top.Sub("svr");
  c.svr.C = svr.Get("C", c.svr.C);
  c.svr.epsilon = svr.Get("epsilon", c.svr.epsilon);
  const std::string kernel = svr.Get<std::string>("kernel", "rbf");
  if (kernel == "rbf") {
    c.svr.kernel = KernelType::kRbf;
  } else if (kernel == "linear") {
    c.svr.kernel = KernelType::kLinear;
  } else {
    throw ConfigError("svr.kernel must be rbf or linear");
  }
  if (svr.Has("gamma") && !svr.Raw("gamma").is_string()) {
    c.svr.gamma = svr.Get<double>("gamma", 0.0);
  } else if (svr.Get<std::string>("gamma", "scale") != "scale") {
    throw ConfigError("svr.gamma must be a number or \"scale\"");
  }
  c.svr.tolerance = svr.Get("tolerance", c.svr.tolerance);
  c.svr.max_iterations = svr.Get("max_iterations", c.svr.max_iterations);
  const std::string targets = svr.Get<std::string>("targets", "mean");
  if (targets != "mean" && targets != "per_rater") {
    throw ConfigError("svr.targets must be mean or per_rater");
  }
  c.per_rater_targets = targets == "per_rater";
  c.svr.Validate();
  svr.Finish();

  Section fusion = top.Sub("fusion");
  const std::string norm = fusion.Get<std::string>("normalization", "zscore");
  if (norm == "zscore") {
    c.fusion_normalization = Normalization::kZScore;
  } else if (norm == "none") {
    c.fusion_normalization = Normalization::kNone;
  } else {
    throw ConfigError("fusion.normalization must be zscore or none");
  }
  c.lambda_grid_step = fusion.Get("grid_step", c.lambda_grid_step);
  if (!(c.lambda_grid_step > 0.0 && c.lambda_grid_step <= 1.0)) {
    throw ConfigError("fusion.grid_step must lie in (0, 1]");
  }
  c.score_fusion = fusion.Get("score_fusion", true);
  c.feature_fusion = fusion.Get("feature_fusion", true);
  fusion.Finish();

  c.systems = top.Get<std::vector<std::string>>("systems", {"gop", "gmm", "ivector", "nf", "dnf"});
  for (const auto& s : c.systems) {
    if (s != "gop" && s != "gmm" && s != "ivector" && s != "nf" && s != "dnf") {
      throw ConfigError("unknown system \"" + s + "\" in systems");
    }
  }
  top.Finish();

  // Cache keys: the parsed section plus the resolved seed.
  const std::string seed = std::to_string(c.seed);
  c.synth_key = Canonical(root, "synth") + seed;
  c.frontend_key = Canonical(root, "frontend");
  c.gmm_key = Canonical(root, "gmm") + seed;
  c.ivector_key = Canonical(root, "ivector") + seed;
  c.flow_key = Canonical(root, "flow") + seed;
  c.dnf_key = Canonical(root, "dnf") + seed;
  c.svr_key = Canonical(root, "svr") + Canonical(root, "gop");
  c.fusion_key = Canonical(root, "fusion");
  return c;
}

PipelineConfig LoadPipelineConfig(const std::string& path, std::optional<uint64_t> seed_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ParsePipelineConfig(ss.str(), seed_override);
}

// ---------------------------------------------------------------------------
// Building blocks.

namespace {

size_t IndexOf(const Corpus& corpus, const std::string& id) {
  return static_cast<size_t>(&corpus.Get(id) - corpus.utterances().data());
}

}  // namespace

std::vector<FeatureSequence> FrontEnd(const Corpus& corpus, int left, int right) {
  std::vector<FeatureSequence> out;
  out.reserve(corpus.utterances().size());
  for (const auto& u : corpus.utterances()) {
    out.push_back(left == 0 && right == 0 ? u.features : StackContext(u.features, left, right));
  }
  return out;
}

Matrix FitFrames(const std::vector<FeatureSequence>& features, const Corpus& corpus,
                 const std::vector<std::string>& ids) {
  std::vector<const FeatureSequence*> seqs;
  for (const auto& id : ids) seqs.push_back(&features[IndexOf(corpus, id)]);
  return StackFrames(seqs);
}

std::vector<double> GopColumn(const Corpus& corpus, SegmentPooling pooling) {
  std::vector<double> out;
  for (const auto& u : corpus.utterances()) {
    out.push_back(GopScore(u.posteriors, u.alignment, pooling).gop);
  }
  return out;
}

std::vector<double> GmmLoglikColumn(const GmmModel& gmm, const std::vector<FeatureSequence>& fs) {
  std::vector<double> out;
  for (const auto& f : fs) out.push_back(GmmLogLikelihood(gmm, f).utterance_mean);
  return out;
}

std::vector<double> FlowLoglikColumn(const FlowModel& flow, const std::vector<FeatureSequence>& fs) {
  std::vector<double> out;
  for (const auto& f : fs) out.push_back(FlowLogProb(flow, f.frames).mean());
  return out;
}

Matrix IVectorEmbeddings(const IVectorModel& model, const std::vector<FeatureSequence>& fs) {
  Matrix out(static_cast<Eigen::Index>(fs.size()), model.ivector_dim());
  for (size_t i = 0; i < fs.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) =
        InferIVector(model, UbmStats(model.ubm(), fs[i])).mean.transpose();
  }
  return out;
}

Matrix FlowEmbeddings(const FlowModel& flow, const std::vector<FeatureSequence>& fs) {
  Matrix out(static_cast<Eigen::Index>(fs.size()), flow.dim());
  for (size_t i = 0; i < fs.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = FlowEmbed(flow, fs[i]).transpose();
  }
  return out;
}

Matrix SelectRows(const Matrix& all, const Corpus& corpus, const std::vector<std::string>& ids) {
  Matrix out(static_cast<Eigen::Index>(ids.size()), all.cols());
  for (size_t i = 0; i < ids.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = all.row(static_cast<Eigen::Index>(IndexOf(corpus, ids[i])));
  }
  return out;
}

SvrFit TrainSvrOnCorpus(const Matrix& inputs, const Corpus& corpus,
                        const std::vector<std::string>& ids, const SvrParams& params,
                        bool per_rater) {
  if (static_cast<Eigen::Index>(corpus.utterances().size()) != inputs.rows()) {
    throw DataError("SVR inputs do not cover the corpus");
  }
  std::vector<Eigen::Index> rows;
  std::vector<double> y;
  for (const auto& id : ids) {
    const size_t i = IndexOf(corpus, id);
    const auto& label = corpus.utterances()[i].label;
    if (per_rater) {
      for (int s : label.rater_scores) {
        rows.push_back(static_cast<Eigen::Index>(i));
        y.push_back(s);
      }
    } else {
      rows.push_back(static_cast<Eigen::Index>(i));
      y.push_back(label.mean_score);
    }
  }
  Matrix x(static_cast<Eigen::Index>(rows.size()), inputs.cols());
  for (size_t r = 0; r < rows.size(); ++r) x.row(static_cast<Eigen::Index>(r)) = inputs.row(rows[r]);
  return TrainSvr(x, y, params);
}

std::vector<int> FrameClasses(const std::vector<FeatureSequence>& features, const Corpus& corpus,
                              const std::vector<std::string>& ids) {
  std::vector<int> out;
  for (const auto& id : ids) {
    const size_t i = IndexOf(corpus, id);
    const int cls = ProficiencyClass(corpus.utterances()[i].label.mean_score);
    out.insert(out.end(), static_cast<size_t>(features[i].num_frames()), cls);
  }
  return out;
}

Standardizer FitGopStandardizer(const std::vector<double>& gop, const Corpus& corpus,
                                const std::vector<std::string>& ids) {
  Matrix col(static_cast<Eigen::Index>(ids.size()), 1);
  for (size_t i = 0; i < ids.size(); ++i) col(static_cast<Eigen::Index>(i), 0) = gop[IndexOf(corpus, ids[i])];
  return Standardizer::Fit(col);
}

void WriteTrace(const std::string& path, const std::string& header,
                const std::vector<double>& trace) {
  std::ostringstream out;
  out << header << "\tvalue\n";
  char buf[64];
  for (size_t i = 0; i < trace.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu\t%.17g\n", i + 1, trace[i]);
    out << buf;
  }
  WriteFileBytes(path, out.str());
}

// ---------------------------------------------------------------------------
// Orchestration.

namespace {

/// A cached stage: `output` is up to date when its stamp file holds `key`.
class Stage {
 public:
  Stage(std::string name, std::string output, std::string key, const RunOptions& opt,
        RunSummary& summary)
      : name_(std::move(name)), output_(std::move(output)), key_(Sha256Hex(key)), opt_(opt),
        summary_(summary) {}

  bool Fresh() const {
    if (opt_.force || !fs::exists(output_) || !fs::exists(StampPath())) return false;
    return ReadFileBytes(StampPath()) == key_ + "\n";
  }

  void Reuse() {
    summary_.reused.push_back(name_);
    Log("up to date, reusing " + output_);
  }

  void Commit() {
    WriteFileBytes(StampPath(), key_ + "\n");
    summary_.trained.push_back(name_);
  }

  void Log(const std::string& msg) const {
    if (opt_.log) *opt_.log << "[" << name_ << "] " << msg << std::endl;
  }

  const std::string& output() const { return output_; }

 private:
  std::string StampPath() const { return output_ + ".stamp"; }

  std::string name_, output_, key_;
  const RunOptions& opt_;
  RunSummary& summary_;
};

std::string Join(const std::string& dir, const std::string& file) {
  return (fs::path(dir) / file).string();
}

std::string Fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

void WriteLambdaCurve(const std::string& path, const LambdaSelection& sel) {
  std::ostringstream out;
  out << "lambda\tdev_pcc\n";
  char buf[64];
  for (const auto& [lambda, pcc] : sel.curve) {
    std::snprintf(buf, sizeof(buf), "%.2f\t%.6f\n", lambda, pcc);
    out << buf;
  }
  WriteFileBytes(path, out.str());
}

}  // namespace

RunSummary RunPipeline(const PipelineConfig& cfg, const RunOptions& opt) {
  RunSummary summary;
  auto log = [&](const std::string& msg) {
    if (opt.log) *opt.log << msg << std::endl;
  };
  fs::create_directories(cfg.model_dir);
  fs::create_directories(cfg.report_dir);

  if (cfg.synth) {
    Stage st("synth", cfg.manifest, "synth\n" + cfg.synth_key, opt, summary);
    if (st.Fresh()) {
      st.Reuse();
    } else {
      const SynthCorpus s = SynthesizeCorpus(*cfg.synth);
      const fs::path dir = fs::path(cfg.manifest).parent_path();
      const std::string written = WriteCorpus(dir.empty() ? "." : dir.string(), s.corpus, s.oracle);
      if (fs::path(written) != fs::path(cfg.manifest)) {
        fs::rename(written, cfg.manifest);
      }
      st.Log("synthesized " + std::to_string(s.corpus.utterances().size()) + " utterances");
      st.Commit();
    }
  }
  if (!fs::exists(cfg.manifest)) throw DataError("corpus manifest not found: " + cfg.manifest);

  const Corpus corpus = LoadCorpus(cfg.manifest);
  const std::string corpus_digest = CorpusDigest(corpus);
  const std::vector<FeatureSequence> features =
      FrontEnd(corpus, cfg.context_left, cfg.context_right);
  const std::vector<std::string> fit_ids = corpus.splits().FitIds();
  const std::vector<std::string>& dev_ids = corpus.splits().dev_ids;
  const std::vector<std::string>& eval_ids = corpus.splits().eval_ids;
  log("corpus: " + std::to_string(corpus.utterances().size()) + " utterances (" +
      std::to_string(fit_ids.size()) + " fit, " + std::to_string(dev_ids.size()) + " dev, " +
      std::to_string(eval_ids.size()) + " eval)");
  const std::string data_key = cfg.frontend_key + "\n" + corpus_digest;

  ScoreTable table;
  for (const auto& u : corpus.utterances()) table.AddRow(u.id(), u.label.mean_score);

  const bool fusion = cfg.score_fusion || cfg.feature_fusion;
  const std::vector<double> gop = GopColumn(corpus, cfg.pooling);
  if (cfg.Runs("gop") || fusion) table.SetColumn("gop", gop);

  std::map<std::string, Matrix> embeddings;
  std::map<std::string, std::string> embedding_model;

  std::optional<GmmModel> gmm;
  if (cfg.Runs("gmm") || cfg.Runs("ivector")) {
    Stage st("gmm", Join(cfg.model_dir, "gmm.pgmm"), "gmm\n" + cfg.gmm_key + "\n" + data_key, opt,
             summary);
    if (st.Fresh()) {
      st.Reuse();
      gmm = ReadGmm(st.output());
    } else {
      GmmTrainResult r = TrainGmm(FitFrames(features, corpus, fit_ids), cfg.gmm);
      WriteGmm(st.output(), r.model);
      WriteTrace(Join(cfg.model_dir, "gmm_trace.tsv"), "iteration", r.trace);
      st.Log("trained, final mean log-likelihood " + Fmt(r.trace.back()));
      gmm = std::move(r.model);
      st.Commit();
    }
    if (cfg.Runs("gmm")) table.SetColumn("gmm_loglik", GmmLoglikColumn(*gmm, features));
  }

  if (cfg.Runs("ivector")) {
    const std::string gmm_path = Join(cfg.model_dir, "gmm.pgmm");
    Stage st("ivector", Join(cfg.model_dir, "ivector.pivm"),
             "ivector\n" + cfg.ivector_key + "\n" + FileDigest(gmm_path) + "\n" + data_key, opt,
             summary);
    IVectorModel model;
    if (st.Fresh()) {
      st.Reuse();
      model = ReadIVectorModel(st.output());
    } else {
      std::vector<BaumWelchStats> stats;
      for (const auto& id : fit_ids) stats.push_back(UbmStats(*gmm, features[IndexOf(corpus, id)]));
      IVectorTrainResult r = TrainIVector(*gmm, stats, cfg.ivector);
      WriteIVectorModel(st.output(), r.model);
      WriteTrace(Join(cfg.model_dir, "ivector_trace.tsv"), "iteration", r.trace);
      st.Log("trained, final objective " + Fmt(r.trace.back()));
      model = std::move(r.model);
      st.Commit();
    }
    embeddings["ivector"] = IVectorEmbeddings(model, features);
    embedding_model["ivector"] = st.output();
  }

  if (cfg.Runs("nf")) {
    Stage st("nf", Join(cfg.model_dir, "nf.pnf1"), "nf\n" + cfg.flow_key + "\n" + data_key, opt,
             summary);
    FlowModel model;
    if (st.Fresh()) {
      st.Reuse();
      model = ReadFlow(st.output());
    } else {
      FlowConfig fc = cfg.flow;
      fc.dim = static_cast<int>(features.front().dim());
      FlowTrainResult r =
          TrainFlow(FlowModel::Create(fc), FitFrames(features, corpus, fit_ids), cfg.flow_adam);
      WriteFlow(st.output(), r.model);
      WriteTrace(Join(cfg.model_dir, "nf_trace.tsv"), "epoch", r.trace);
      st.Log("trained, final NLL " + Fmt(r.trace.back()));
      model = std::move(r.model);
      st.Commit();
    }
    table.SetColumn("nf_loglik", FlowLoglikColumn(model, features));
    embeddings["nf"] = FlowEmbeddings(model, features);
    embedding_model["nf"] = st.output();
  }

  if (cfg.Runs("dnf")) {
    Stage st("dnf", Join(cfg.model_dir, "dnf.pdnf"), "dnf\n" + cfg.dnf_key + "\n" + data_key, opt,
             summary);
    DnfModel model;
    if (st.Fresh()) {
      st.Reuse();
      model = ReadDnf(st.output());
    } else {
      const std::vector<int> classes = FrameClasses(features, corpus, fit_ids);
      DnfTrainResult r = TrainDnf(FitFrames(features, corpus, fit_ids), classes, cfg.dnf);
      WriteDnf(st.output(), r.model);
      WriteTrace(Join(cfg.model_dir, "dnf_trace.tsv"), "epoch", r.trace);
      st.Log("trained, final NLL " + Fmt(r.trace.back()));
      model = std::move(r.model);
      st.Commit();
    }
    embeddings["dnf"] = FlowEmbeddings(model.backbone, features);
    embedding_model["dnf"] = st.output();
  }

  const Standardizer gop_std = FitGopStandardizer(gop, corpus, fit_ids);
  std::map<std::string, double> lambdas;
  std::vector<std::string> fusion_columns;
  for (const auto& system : kEmbeddingSystems) {
    auto it = embeddings.find(system);
    if (it == embeddings.end()) continue;
    const Matrix& emb = it->second;
    const std::string model_digest = FileDigest(embedding_model[system]);

    auto train_svr = [&](const std::string& name, const Matrix& inputs, const std::string& extra) {
      Stage st("svr:" + name, Join(cfg.model_dir, "svr_" + name + ".psvr"),
               "svr\n" + cfg.svr_key + "\n" + extra + "\n" + model_digest + "\n" + data_key + "\n" +
                   (cfg.per_rater_targets ? "per_rater" : "mean"),
               opt, summary);
      SvrModel model;
      if (st.Fresh()) {
        st.Reuse();
        model = ReadSvr(st.output());
      } else {
        SvrFit fit = TrainSvrOnCorpus(inputs, corpus, fit_ids, cfg.svr, cfg.per_rater_targets);
        if (fit.model.status == SvrStatus::kIterationLimit) {
          st.Log("warning: solver hit the iteration limit");
        }
        WriteSvr(st.output(), fit.model);
        st.Log("trained, " + std::to_string(fit.model.support_vectors.rows()) +
               " support vectors");
        model = std::move(fit.model);
        st.Commit();
      }
      const Vector pred = model.PredictAll(inputs);
      return std::vector<double>(pred.data(), pred.data() + pred.size());
    };

    const std::string svr_column = system + "_svr";
    table.SetColumn(svr_column, train_svr(system, emb, ""));

    if (cfg.score_fusion) {
      const LambdaSelection sel = SelectLambda(table.Subset(dev_ids), "gop", svr_column,
                                               cfg.fusion_normalization, cfg.lambda_grid_step);
      WriteLambdaCurve(Join(cfg.report_dir, "lambda_" + system + ".tsv"), sel);
      const std::string fused = system + "_score_fusion";
      table = ScoreFuse(table, "gop", svr_column, fused, {sel.lambda, cfg.fusion_normalization},
                        sel.norm);
      lambdas[fused] = sel.lambda;
      log("[fusion:" + system + "] lambda* = " + Fmt(sel.lambda) + " (dev PCC " + Fmt(sel.pcc) +
          ")");
    }
    if (cfg.feature_fusion) {
      const Matrix fused_inputs = FeatureFuse(emb, gop, &gop_std);
      table.SetColumn(system + "_feature_fusion",
                      train_svr(system + "_gop", fused_inputs, "feature_fusion"));
    }
  }

  std::vector<ReportRow> rows = Evaluate(table, eval_ids, "eval", lambdas);
  if (!cfg.Runs("gop")) {
    rows.erase(std::remove_if(rows.begin(), rows.end(),
                              [](const ReportRow& r) { return r.system == "gop"; }),
               rows.end());
  }

  // Human agreement on the same split.
  const auto eval_records = corpus.Select(eval_ids);
  const size_t raters = eval_records.empty() ? 0 : eval_records.front()->label.rater_scores.size();
  const bool uniform_raters =
      raters >= 2 && std::all_of(eval_records.begin(), eval_records.end(), [&](const auto* r) {
        return r->label.rater_scores.size() == raters;
      });
  if (uniform_raters) {
    Matrix ratings(static_cast<Eigen::Index>(eval_records.size()), static_cast<Eigen::Index>(raters));
    for (size_t i = 0; i < eval_records.size(); ++i) {
      for (size_t r = 0; r < raters; ++r) {
        ratings(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r)) =
            eval_records[i]->label.rater_scores[r];
      }
    }
    const InterRaterResult human = InterRaterPcc(ratings);
    for (int r : human.excluded_raters) {
      log("warning: rater " + std::to_string(r) + " has constant scores and was excluded");
    }
    rows.push_back({"human_pairwise", "eval", human.pcc, std::nullopt});
  } else {
    log("warning: rater counts differ across eval utterances; human agreement skipped");
  }

  summary.scores_path = Join(cfg.report_dir, "scores.tsv");
  summary.report_path = Join(cfg.report_dir, "report.tsv");
  std::ostringstream scores;
  table.WriteTsv(scores);
  WriteFileBytes(summary.scores_path, scores.str());
  std::ostringstream report;
  WriteReport(report, rows);
  WriteFileBytes(summary.report_path, report.str());
  summary.rows = std::move(rows);
  return summary;
}

}  // namespace proscore
