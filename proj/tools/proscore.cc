// proscore/tools/proscore.cc

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

// Command-line driver: synthesize data, train marginal models and SVR
// predictors, score, fuse and evaluate.
//
// Exit codes: 0 success, 1 configuration error, 2 data error, 3 training
// divergence.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "proscore/assess.h"
#include "proscore/binary_io.h"
#include "proscore/pipeline.h"

namespace {

using namespace proscore;

struct Globals {
  std::optional<uint64_t> seed;
  bool force = false;
  std::string config;
};

/// Pipeline config from --config, or the defaults when no file is given.
PipelineConfig BaseConfig(const Globals& g) {
  if (!g.config.empty()) return LoadPipelineConfig(g.config, g.seed);
  PipelineConfig c = ParsePipelineConfig(
      R"({"paths": {"manifest": "", "model_dir": "", "report_dir": ""}})", g.seed);
  return c;
}

std::vector<std::string> SplitIds(const Corpus& corpus, const std::string& split) {
  if (split.empty() || split == "all") {
    std::vector<std::string> ids;
    for (const auto& u : corpus.utterances()) ids.push_back(u.id());
    return ids;
  }
  if (split == "fit") return corpus.splits().FitIds();
  switch (ParseSplit(split)) {
    case Split::kTrain:
      return corpus.splits().train_ids;
    case Split::kDev:
      return corpus.splits().dev_ids;
    case Split::kEval:
      return corpus.splits().eval_ids;
  }
  return {};
}

void WriteText(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    WriteFileBytes(path, text);
  }
}

/// Writes an n x d matrix as a TSV keyed by utterance id.
void WriteEmbeddings(const std::string& path, const Corpus& corpus, const Matrix& emb,
                     const std::vector<std::string>& ids) {
  ScoreTable t;
  for (const auto& id : ids) t.AddRow(id, 0.0);
  const Matrix rows = SelectRows(emb, corpus, ids);
  for (Eigen::Index c = 0; c < rows.cols(); ++c) {
    std::vector<double> col(static_cast<size_t>(rows.rows()));
    for (Eigen::Index r = 0; r < rows.rows(); ++r) col[static_cast<size_t>(r)] = rows(r, c);
    t.SetColumn("z" + std::to_string(c), std::move(col));
  }
  std::ostringstream out;
  t.WriteTsv(out);
  WriteText(path, out.str());
}

/// Reads an embedding TSV back into corpus order; every corpus utterance
/// must be present.
Matrix ReadEmbeddings(const std::string& path, const Corpus& corpus) {
  const ScoreTable t = ScoreTable::ReadTsv(path);
  const auto names = t.ColumnNames();
  Matrix out(static_cast<Eigen::Index>(corpus.utterances().size()),
             static_cast<Eigen::Index>(names.size()));
  std::vector<std::string> missing;
  for (size_t i = 0; i < corpus.utterances().size(); ++i) {
    const std::string& id = corpus.utterances()[i].id();
    if (!t.ids().empty() && std::find(t.ids().begin(), t.ids().end(), id) == t.ids().end()) {
      missing.push_back(id);
      continue;
    }
    const size_t row = t.RowOf(id);
    for (size_t c = 0; c < names.size(); ++c) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = t.Column(names[c])[row];
    }
  }
  if (!missing.empty()) {
    throw DataError(path + " lacks embeddings for " + std::to_string(missing.size()) +
                    " utterance(s), first " + missing.front());
  }
  return out;
}

ScoreTable WithLabels(ScoreTable t, const Corpus& corpus) {
  std::vector<double> labels;
  for (const auto& id : t.ids()) labels.push_back(corpus.Get(id).label.mean_score);
  t.SetLabels(std::move(labels));
  return t;
}

// Loaded scoring models, identified by file magic.
struct ScoringModels {
  std::optional<GmmModel> gmm;
  std::optional<IVectorModel> ivector;
  std::optional<FlowModel> flow;
  std::optional<DnfModel> dnf;
  std::optional<SvrModel> svr;
};

ScoringModels LoadModels(const std::vector<std::string>& paths) {
  ScoringModels m;
  for (const auto& path : paths) {
    const std::string magic = PeekMagic(path);
    if (magic == "PGMM") {
      m.gmm = ReadGmm(path);
    } else if (magic == "PIVM") {
      m.ivector = ReadIVectorModel(path);
    } else if (magic == "PNF1") {
      m.flow = ReadFlow(path);
    } else if (magic == "PDNF") {
      m.dnf = ReadDnf(path);
    } else if (magic == "PSVR") {
      m.svr = ReadSvr(path);
    } else {
      throw DataError(path + ": unknown model file magic");
    }
  }
  return m;
}

int CountEmbedders(const ScoringModels& m) {
  return (m.ivector ? 1 : 0) + (m.dnf ? 1 : 0) + (m.flow ? 1 : 0);
}

Matrix EmbedWith(const ScoringModels& m, const std::vector<FeatureSequence>& features) {
  if (m.ivector) return IVectorEmbeddings(*m.ivector, features);
  if (m.dnf) return FlowEmbeddings(m.dnf->backbone, features);
  return FlowEmbeddings(*m.flow, features);
}

int Dispatch(int argc, char** argv) {
  CLI::App app{"proscore: ASR-free pronunciation proficiency scoring"};
  app.require_subcommand(1);
  Globals g;
  uint64_t seed_value = 7;
  auto* seed_opt = app.add_option("--seed", seed_value, "Seed for every stochastic stage");
  app.add_flag("--force", g.force, "Re-run stages even when cached outputs are current");
  app.add_option("--config", g.config, "JSON pipeline config");

  // run
  auto* run = app.add_subcommand("run", "Run the configured pipeline end to end");
  std::string run_config;
  run->add_option("config", run_config, "Pipeline config (alternative to --config)");

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic corpus");
  std::string synth_out;
  synth->add_option("--out", synth_out, "Output directory")->required();

  // train-gmm
  auto* tgmm = app.add_subcommand("train-gmm", "Train the diagonal GMM / UBM");
  std::string manifest, out;
  std::optional<int> components, iterations;
  tgmm->add_option("--manifest", manifest)->required();
  tgmm->add_option("--out", out)->required();
  tgmm->add_option("--components", components);
  tgmm->add_option("--iterations", iterations);

  // train-ivector
  auto* tiv = app.add_subcommand("train-ivector", "Train the total-variability model");
  std::string ubm_path;
  std::optional<int> ivector_dim;
  tiv->add_option("--manifest", manifest)->required();
  tiv->add_option("--ubm", ubm_path)->required();
  tiv->add_option("--out", out)->required();
  tiv->add_option("--dim", ivector_dim);
  tiv->add_option("--iterations", iterations);

  // train-flow / train-dnf
  std::optional<int> epochs, layers, hidden;
  auto* tflow = app.add_subcommand("train-flow", "Train the normalizing flow");
  auto* tdnf = app.add_subcommand("train-dnf", "Train the discriminative normalizing flow");
  for (auto* sub : {tflow, tdnf}) {
    sub->add_option("--manifest", manifest)->required();
    sub->add_option("--out", out)->required();
    sub->add_option("--epochs", epochs);
    sub->add_option("--layers", layers);
    sub->add_option("--hidden", hidden);
  }

  // embed
  auto* embed = app.add_subcommand("embed", "Extract utterance embeddings");
  std::string model_path, split;
  embed->add_option("--manifest", manifest)->required();
  embed->add_option("--model", model_path, "PIVM, PNF1 or PDNF model")->required();
  embed->add_option("--out", out, "Output TSV ('-' for stdout)")->required();
  embed->add_option("--split", split, "train, dev, eval, fit or all");

  // train-svr
  auto* tsvr = app.add_subcommand("train-svr", "Train the SVR score predictor");
  std::string embeddings_path;
  bool with_gop = false;
  tsvr->add_option("--manifest", manifest)->required();
  tsvr->add_option("--embeddings", embeddings_path)->required();
  tsvr->add_option("--out", out)->required();
  tsvr->add_flag("--with-gop", with_gop, "Append the standardized GOP score (feature fusion)");

  // score
  auto* score = app.add_subcommand("score", "Score utterances with trained models");
  std::vector<std::string> model_paths;
  score->add_option("--manifest", manifest)->required();
  score->add_option("--model", model_paths, "Model files (type detected from magic)");
  score->add_option("--out", out)->required();
  score->add_option("--split", split);

  // fuse
  auto* fuse = app.add_subcommand("fuse", "Score fusion of GOP and a predicted score");
  std::string scores_path, gop_column = "gop", pred_column = "predicted", fused_column = "fused";
  std::optional<double> lambda;
  fuse->add_option("--manifest", manifest)->required();
  fuse->add_option("--scores", scores_path)->required();
  fuse->add_option("--out", out)->required();
  fuse->add_option("--gop-column", gop_column);
  fuse->add_option("--pred-column", pred_column);
  fuse->add_option("--fused-column", fused_column);
  fuse->add_option("--lambda", lambda, "Fixed lambda (default: selected on dev)");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "PCC of every score column");
  std::string eval_split = "eval";
  evaluate->add_option("--manifest", manifest)->required();
  evaluate->add_option("--scores", scores_path)->required();
  evaluate->add_option("--out", out)->required();
  evaluate->add_option("--split", eval_split);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Two-phone competition sweep");
  double a = 1.0, delta_min = -1.0, delta_max = 1.0;
  int steps = 21;
  simulate->add_option("--a", a, "Distance between the phone means (> 0)");
  simulate->add_option("--delta-min", delta_min);
  simulate->add_option("--delta-max", delta_max);
  simulate->add_option("--steps", steps);
  simulate->add_option("--out", out, "Output TSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  if (*seed_opt) g.seed = seed_value;

  if (run->parsed()) {
    if (!run_config.empty()) g.config = run_config;
    if (g.config.empty()) throw ConfigError("run needs a config file");
    const PipelineConfig cfg = LoadPipelineConfig(g.config, g.seed);
    const RunSummary s = RunPipeline(cfg, {g.force, &std::cerr});
    std::ifstream report(s.report_path);
    std::cout << report.rdbuf();
    return 0;
  }

  if (simulate->parsed()) {
    if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError("--a must be > 0");
    if (steps < 1) throw ConfigError("--steps must be >= 1");
    if (!std::isfinite(delta_min) || !std::isfinite(delta_max) || delta_max < delta_min) {
      throw ConfigError("invalid delta range");
    }
    std::vector<double> deltas;
    for (int i = 0; i < steps; ++i) {
      deltas.push_back(steps == 1 ? delta_min
                                  : delta_min + (delta_max - delta_min) * i / (steps - 1));
    }
    std::ostringstream os;
    WriteCompetitionTsv(os, CompetitionSweep(a, deltas));
    WriteText(out, os.str());
    return 0;
  }

  const PipelineConfig cfg = BaseConfig(g);

  if (synth->parsed()) {
    SynthConfig sc = cfg.synth ? *cfg.synth : ParseSynthConfig("{}", cfg.seed);
    if (g.seed) sc.seed = *g.seed;
    const SynthCorpus s = SynthesizeCorpus(sc);
    std::cout << WriteCorpus(synth_out, s.corpus, s.oracle) << '\n';
    return 0;
  }

  const Corpus corpus = LoadCorpus(manifest);
  const std::vector<FeatureSequence> features =
      FrontEnd(corpus, cfg.context_left, cfg.context_right);
  const std::vector<std::string> fit_ids = corpus.splits().FitIds();

  if (tgmm->parsed()) {
    GmmTrainConfig gc = cfg.gmm;
    if (components) gc.num_components = *components;
    if (iterations) gc.iterations = *iterations;
    const GmmTrainResult r = TrainGmm(FitFrames(features, corpus, fit_ids), gc);
    WriteGmm(out, r.model);
    std::cerr << "final mean log-likelihood " << r.trace.back() << '\n';
    return 0;
  }

  if (tiv->parsed()) {
    IVectorTrainConfig ic = cfg.ivector;
    if (ivector_dim) ic.ivector_dim = *ivector_dim;
    if (iterations) ic.iterations = *iterations;
    const GmmModel ubm = ReadGmm(ubm_path);
    std::vector<BaumWelchStats> stats;
    for (const auto& id : fit_ids) {
      stats.push_back(UbmStats(ubm, features[static_cast<size_t>(&corpus.Get(id) - corpus.utterances().data())]));
    }
    const IVectorTrainResult r = TrainIVector(ubm, stats, ic);
    WriteIVectorModel(out, r.model);
    std::cerr << "final objective " << r.trace.back() << '\n';
    return 0;
  }

  if (tflow->parsed() || tdnf->parsed()) {
    const bool dnf = tdnf->parsed();
    FlowConfig fc = dnf ? cfg.dnf.backbone : cfg.flow;
    AdamConfig ac = dnf ? cfg.dnf.adam : cfg.flow_adam;
    if (epochs) ac.epochs = *epochs;
    if (layers) fc.num_layers = *layers;
    if (hidden) fc.hidden = *hidden;
    fc.dim = static_cast<int>(features.front().dim());
    const Matrix frames = FitFrames(features, corpus, fit_ids);
    if (dnf) {
      DnfTrainConfig dc = cfg.dnf;
      dc.backbone = fc;
      dc.adam = ac;
      const DnfTrainResult r = TrainDnf(frames, FrameClasses(features, corpus, fit_ids), dc);
      WriteDnf(out, r.model);
      std::cerr << "final NLL " << r.trace.back() << '\n';
    } else {
      const FlowTrainResult r = TrainFlow(FlowModel::Create(fc), frames, ac);
      WriteFlow(out, r.model);
      std::cerr << "final NLL " << r.trace.back() << '\n';
    }
    return 0;
  }

  if (embed->parsed()) {
    const ScoringModels m = LoadModels({model_path});
    if (CountEmbedders(m) != 1) throw ConfigError(model_path + " is not an embedding model");
    WriteEmbeddings(out, corpus, EmbedWith(m, features), SplitIds(corpus, split));
    return 0;
  }

  if (tsvr->parsed()) {
    Matrix inputs = ReadEmbeddings(embeddings_path, corpus);
    if (with_gop) {
      const std::vector<double> gop = GopColumn(corpus, cfg.pooling);
      const Standardizer st = FitGopStandardizer(gop, corpus, fit_ids);
      inputs = FeatureFuse(inputs, gop, &st);
    }
    const SvrFit fit = TrainSvrOnCorpus(inputs, corpus, fit_ids, cfg.svr, cfg.per_rater_targets);
    WriteSvr(out, fit.model);
    std::cerr << fit.model.support_vectors.rows() << " support vectors\n";
    return 0;
  }

  if (score->parsed()) {
    const ScoringModels m = LoadModels(model_paths);
    ScoreTable t;
    for (const auto& u : corpus.utterances()) t.AddRow(u.id(), u.label.mean_score);
    const std::vector<double> gop = GopColumn(corpus, cfg.pooling);
    t.SetColumn("gop", gop);
    if (m.gmm) {
      if (m.gmm->dim() != features.front().dim()) {
        throw DataError("GMM dimension " + std::to_string(m.gmm->dim()) +
                        " does not match the features");
      }
      t.SetColumn("gmm_loglik", GmmLoglikColumn(*m.gmm, features));
    }
    if (m.flow && !m.svr) t.SetColumn("nf_loglik", FlowLoglikColumn(*m.flow, features));
    if (m.svr) {
      if (CountEmbedders(m) != 1) {
        throw ConfigError("an SVR needs exactly one embedding model (PIVM, PNF1 or PDNF)");
      }
      Matrix inputs = EmbedWith(m, features);
      if (m.svr->input_dim() == inputs.cols() + 1) {
        const Standardizer st = FitGopStandardizer(gop, corpus, fit_ids);
        inputs = FeatureFuse(inputs, gop, &st);
      }
      if (m.svr->input_dim() != inputs.cols()) {
        throw DataError("SVR expects " + std::to_string(m.svr->input_dim()) +
                        "-dim inputs, embedding model gives " + std::to_string(inputs.cols()));
      }
      const Vector pred = m.svr->PredictAll(inputs);
      t.SetColumn("predicted", std::vector<double>(pred.data(), pred.data() + pred.size()));
    } else if (m.ivector || m.dnf) {
      throw ConfigError("embedding models need an SVR to produce a score");
    }
    std::ostringstream os;
    t.Subset(SplitIds(corpus, split)).WriteTsv(os);
    WriteText(out, os.str());
    return 0;
  }

  if (fuse->parsed()) {
    const ScoreTable t = WithLabels(ScoreTable::ReadTsv(scores_path), corpus);
    const ScoreTable dev = t.Subset(corpus.splits().dev_ids);
    FusionNorm norm = FusionNorm::Fit(dev, gop_column, pred_column, cfg.fusion_normalization);
    double lam = 0.0;
    if (lambda) {
      lam = *lambda;
    } else {
      const LambdaSelection sel =
          SelectLambda(dev, gop_column, pred_column, cfg.fusion_normalization, cfg.lambda_grid_step);
      lam = sel.lambda;
      std::cerr << "lambda* = " << sel.lambda << " (dev PCC " << sel.pcc << ")\n";
    }
    const ScoreTable fused =
        ScoreFuse(t, gop_column, pred_column, fused_column, {lam, cfg.fusion_normalization}, norm);
    std::ostringstream os;
    fused.WriteTsv(os);
    WriteText(out, os.str());
    return 0;
  }

  if (evaluate->parsed()) {
    const ScoreTable t = WithLabels(ScoreTable::ReadTsv(scores_path), corpus);
    std::ostringstream os;
    WriteReport(os, Evaluate(t, SplitIds(corpus, eval_split), eval_split));
    WriteText(out, os.str());
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return Dispatch(argc, argv);
  } catch (const proscore::ConfigError& e) {
    std::cerr << "proscore: config error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "proscore: invalid argument: " << e.what() << '\n';
    return 1;
  } catch (const proscore::DivergenceError& e) {
    std::cerr << "proscore: training diverged: " << e.what() << '\n';
    return 3;
  } catch (const proscore::DataError& e) {
    std::cerr << "proscore: data error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "proscore: data error: " << e.what() << '\n';
    return 2;
  }
}
