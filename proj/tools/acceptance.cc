// proscore/tools/acceptance.cc

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

// Acceptance harness: prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "../tests/oracles.h"
#include "proscore/binary_io.h"
#include "proscore/pipeline.h"

namespace fs = std::filesystem;
using namespace proscore;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

double Seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---------------------------------------------------------------------------
// 1. Phone competition against direct density evaluation.
Outcome CheckCompetition() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(1);
  double worst = 0.0;
  bool monotone = true;
  for (int i = 0; i < 10000; ++i) {
    double a = 3.0 * rng.Uniform();
    while (a <= 0.0) a = 3.0 * rng.Uniform();
    const double delta = rng.Uniform(-3.0, 3.0);
    const double got = SimulateCompetition(a, delta).posterior;
    worst = std::max(worst, std::abs(got - oracle::CompetitionByDensities(a, delta)));
    // Strictly increasing in delta: compare with a slightly larger shift.
    if (!(SimulateCompetition(a, delta + 1e-3).posterior > got)) {
      // Saturation at 1.0 in double precision is not a violation.
      if (got < 1.0) monotone = false;
    }
  }
  const double at_one = SimulateCompetition(1.0, 0.0).posterior;
  const double secs = Seconds(t0);
  const bool pass = worst <= 1e-10 && monotone && std::abs(at_one - 0.731059) <= 1e-6 && secs < 1.0;
  return {pass, Fmt("max|closed-direct|=%.2e monotone=%s p(1,0)=%.7f time=%.3fs", worst,
                    monotone ? "yes" : "no", at_one, secs)};
}

// ---------------------------------------------------------------------------
// 2. Change of variables on a trained 2-D flow.
Outcome CheckChangeOfVariables() {
  const auto t0 = std::chrono::steady_clock::now();
  // Two curved clusters: a non-Gaussian target so the trained flow is far
  // from the identity.
  Rng rng(2);
  const int n = 1000;
  Matrix data(n, 2);
  for (int i = 0; i < n; ++i) {
    const double sign = (i % 2 == 0) ? 1.0 : -1.0;
    const double u = rng.Normal();
    data(i, 0) = sign * 1.5 + 0.5 * u;
    data(i, 1) = 0.4 * rng.Normal() + 0.5 * u * u - 0.5;
  }
  FlowConfig fc;
  fc.dim = 2;
  fc.num_layers = 4;
  fc.hidden = 16;
  fc.seed = 2;
  AdamConfig ac;
  ac.learning_rate = 1e-2;
  ac.batch_size = 100;
  ac.epochs = 20;  // 10 batches per epoch: 200 steps
  ac.seed = 2;
  const FlowModel flow = TrainFlow(FlowModel::Create(fc), data, ac).model;

  // Analytic inverse log-det vs the determinant of a numeric Jacobian.
  double worst_det = 0.0;
  for (int i = 0; i < 50; ++i) {
    Matrix probe(1, 2);
    probe << rng.Uniform(-3.0, 3.0), rng.Uniform(-2.0, 3.0);
    const double analytic = std::exp(FlowTransform(flow, FlowDirection::kInverse, probe).log_det(0));
    const auto inverse = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
      Matrix row(1, 2);
      row << x(0), x(1);
      return FlowTransform(flow, FlowDirection::kInverse, row).images.row(0).transpose();
    };
    const double numeric = oracle::NumericJacobian(inverse, probe.row(0).transpose()).determinant();
    worst_det = std::max(worst_det, std::abs(analytic - numeric) / std::abs(numeric));
  }

  // Midpoint quadrature of the modeled density on [-12, 12]^2.
  const int steps = 600;
  const double lo = -12.0, hi = 12.0, h = (hi - lo) / steps;
  Matrix grid(steps, 2);
  double mass = 0.0;
  for (int i = 0; i < steps; ++i) {
    for (int j = 0; j < steps; ++j) {
      grid(j, 0) = lo + (i + 0.5) * h;
      grid(j, 1) = lo + (j + 0.5) * h;
    }
    mass += FlowLogProb(flow, grid).array().exp().sum() * h * h;
  }
  const double secs = Seconds(t0);
  const bool pass = worst_det <= 1e-5 && mass >= 0.99 && mass <= 1.01 && secs < 30.0;
  return {pass, Fmt("max rel det err=%.2e mass=%.6f time=%.2fs", worst_det, mass, secs)};
}

// ---------------------------------------------------------------------------
// 3. Gradients of flow and DNF (including class means).
double FlowGradError(bool with_classes) {
  FlowConfig fc;
  fc.dim = 4;
  fc.num_layers = 3;
  fc.hidden = 8;
  fc.seed = 3;
  FlowModel model = FlowModel::Create(fc);
  model.Randomize(11, 0.3);
  Rng rng(12);
  const int n = 16;
  Matrix batch(n, 4);
  for (Eigen::Index i = 0; i < batch.size(); ++i) batch.data()[i] = rng.Normal();
  const int classes = with_classes ? 3 : 1;
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) labels[static_cast<size_t>(i)] = with_classes ? i % classes : 0;
  Matrix means = Matrix::Zero(classes, 4);
  if (with_classes) {
    for (Eigen::Index i = 0; i < means.size(); ++i) means.data()[i] = rng.Normal();
  }
  const FlowLossGrad g = FlowNllGradient(model, batch, labels, means);
  const Eigen::VectorXd p0 = model.GetParams();
  const auto loss_of_params = [&](const Eigen::VectorXd& p) {
    FlowModel m = model;
    m.SetParams(p);
    return FlowNll(m, batch, labels, means);
  };
  double worst = oracle::MaxRelativeError(g.backbone_grad, oracle::NumericGradient(loss_of_params, p0));
  if (with_classes) {
    const Eigen::VectorXd m0 = Eigen::Map<const Eigen::VectorXd>(means.data(), means.size());
    const auto loss_of_means = [&](const Eigen::VectorXd& v) {
      Matrix mm = Eigen::Map<const Matrix>(v.data(), classes, 4);
      return FlowNll(model, batch, labels, mm);
    };
    const Eigen::VectorXd analytic =
        Eigen::Map<const Eigen::VectorXd>(g.mean_grad.data(), g.mean_grad.size());
    worst = std::max(worst, oracle::MaxRelativeError(analytic, oracle::NumericGradient(loss_of_means, m0)));
  }
  return worst;
}

Outcome CheckGradients() {
  const auto t0 = std::chrono::steady_clock::now();
  const double flow_err = FlowGradError(false);
  const double dnf_err = FlowGradError(true);
  const double secs = Seconds(t0);
  const bool pass = flow_err < 1e-4 && dnf_err < 1e-4 && secs < 60.0;
  return {pass, Fmt("flow max rel err=%.2e dnf(+means) max rel err=%.2e time=%.2fs", flow_err,
                    dnf_err, secs)};
}

// ---------------------------------------------------------------------------
// 4. EM monotonicity of GMM and T-matrix training.
bool NonDecreasing(const std::vector<double>& trace, double rel_tol, double* worst) {
  bool ok = true;
  *worst = 0.0;
  for (size_t i = 1; i < trace.size(); ++i) {
    const double drop = (trace[i - 1] - trace[i]) / std::max(std::abs(trace[i - 1]), 1e-300);
    *worst = std::max(*worst, drop);
    if (drop > rel_tol) ok = false;
  }
  return ok;
}

Outcome CheckEmMonotone() {
  const auto t0 = std::chrono::steady_clock::now();
  SynthConfig sc;
  sc.num_speakers = 20;
  sc.seed = 4;
  const SynthCorpus synth = SynthesizeCorpus(sc);
  std::vector<const FeatureSequence*> seqs;
  for (const auto& u : synth.corpus.utterances()) seqs.push_back(&u.features);
  const Matrix frames = StackFrames(seqs);

  GmmTrainConfig gc;
  gc.num_components = 64;
  gc.iterations = 50;
  gc.seed = 4;
  const GmmTrainResult gmm = TrainGmm(frames, gc);
  double gmm_worst = 0.0;
  const bool gmm_ok = gmm.trace.size() == 50 && NonDecreasing(gmm.trace, 1e-10, &gmm_worst);

  std::vector<BaumWelchStats> stats;
  for (const auto* fs : seqs) stats.push_back(UbmStats(gmm.model, *fs));
  IVectorTrainConfig ic;
  ic.ivector_dim = 8;
  ic.iterations = 10;
  ic.seed = 4;
  const IVectorTrainResult iv = TrainIVector(gmm.model, stats, ic);
  double iv_worst = 0.0;
  const bool iv_ok = iv.trace.size() == 10 && NonDecreasing(iv.trace, 1e-10, &iv_worst);
  const double secs = Seconds(t0);
  return {gmm_ok && iv_ok && secs < 60.0,
          Fmt("gmm frames=%d steps=%zu worst rel drop=%.1e; tmatrix steps=%zu worst rel drop=%.1e; "
              "time=%.2fs",
              static_cast<int>(frames.rows()), gmm.trace.size(), gmm_worst, iv.trace.size(),
              iv_worst, secs)};
}

// ---------------------------------------------------------------------------
// 5. i-vector and SVR against independent oracles.
Outcome CheckOracles() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(5);
  double iv_worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int K = 1 + trial % 2, D = 1 + (trial / 2) % 2, R = 1 + (trial / 4) % 2;
    if (R > K * D) continue;  // the subspace cannot exceed the supervector
    Vector w(K);
    Matrix mu(K, D), var(K, D);
    for (int k = 0; k < K; ++k) {
      w(k) = 1.0 / K;
      for (int d = 0; d < D; ++d) {
        mu(k, d) = rng.Normal();
        var(k, d) = rng.Uniform(0.3, 2.0);
      }
    }
    std::vector<Eigen::MatrixXd> loadings;
    for (int k = 0; k < K; ++k) {
      Eigen::MatrixXd t(D, R);
      for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = rng.Normal();
      loadings.push_back(t);
    }
    const IVectorModel model(GmmModel(w, mu, var), loadings);
    BaumWelchStats st;
    st.zeroth = Vector(K);
    st.first_centered = Matrix(K, D);
    for (int k = 0; k < K; ++k) {
      st.zeroth(k) = rng.Uniform(0.5, 20.0);
      for (int d = 0; d < D; ++d) st.first_centered(k, d) = st.zeroth(k) * rng.Normal();
    }
    const IVectorPosterior got = InferIVector(model, st);
    const oracle::GaussianPosterior want = oracle::IVectorByConditioning(loadings, var, st);
    iv_worst = std::max(iv_worst, (got.mean - want.mean).cwiseAbs().maxCoeff());
    const Eigen::MatrixXd cov = got.precision.inverse();
    iv_worst = std::max(iv_worst, (cov - want.covariance).cwiseAbs().maxCoeff());
  }

  double svr_worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 4 + trial % 7;  // 4..10 points
    Matrix x(n, 2);
    std::vector<double> y(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      x(i, 0) = rng.Normal();
      x(i, 1) = rng.Normal();
      y[static_cast<size_t>(i)] = 3.0 + x(i, 0) - 0.5 * x(i, 1) * x(i, 1) + 0.5 * rng.Normal();
    }
    SvrParams p;
    p.kernel = trial % 2 == 0 ? KernelType::kRbf : KernelType::kLinear;
    p.C = trial % 3 == 0 ? 10.0 : 1.0;
    const SvrFit fit = TrainSvr(x, y, p);
    const Matrix xs = fit.model.standardizer.Apply(x);
    Eigen::MatrixXd gram(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        std::span<const double> a(xs.row(i).data(), 2), b(xs.row(j).data(), 2);
        gram(i, j) = p.kernel == KernelType::kRbf ? oracle::RbfKernel(fit.model.gamma, a, b)
                                                  : xs.row(i).dot(xs.row(j));
      }
    }
    const oracle::QpSolution qp = oracle::SvrDualByProjectedGradient(gram, y, p.C, p.epsilon);
    svr_worst = std::max(svr_worst, std::abs(fit.objective - qp.objective) / std::abs(qp.objective));
  }
  const double secs = Seconds(t0);
  return {iv_worst <= 1e-9 && svr_worst <= 1e-3 && secs < 30.0,
          Fmt("ivector max abs err=%.2e svr max rel objective gap=%.2e time=%.2fs", iv_worst,
              svr_worst, secs)};
}

// ---------------------------------------------------------------------------
// 6-7. Synthetic preset: ordering reproduction and determinism.
PipelineConfig PresetAt(const std::string& config_path, const fs::path& root) {
  PipelineConfig cfg = LoadPipelineConfig(config_path);
  cfg.manifest = (root / "corpus" / "manifest.json").string();
  cfg.model_dir = (root / "models").string();
  cfg.report_dir = (root / "reports").string();
  return cfg;
}

std::map<std::string, ReportRow> RowsBySystem(const std::vector<ReportRow>& rows) {
  std::map<std::string, ReportRow> out;
  for (const auto& r : rows) out[r.system] = r;
  return out;
}

Outcome CheckOrdering(const RunSummary& run, double secs) {
  auto rows = RowsBySystem(run.rows);
  auto pcc = [&](const std::string& s) {
    auto it = rows.find(s);
    if (it == rows.end()) throw DataError("report lacks row " + s);
    return it->second.pcc;
  };
  std::vector<std::string> failed;
  const double gmm = pcc("gmm_loglik"), nf_ll = pcc("nf_loglik");
  if (!(std::abs(gmm) < 0.2 && std::abs(nf_ll) < 0.2)) failed.push_back("a");
  const double iv = pcc("ivector_svr"), nf = pcc("nf_svr"), dnf = pcc("dnf_svr");
  if (!(iv >= 0.3 && nf >= 0.3 && dnf >= 0.3)) failed.push_back("b");
  if (!(dnf >= nf && nf >= iv - 0.02)) failed.push_back("c");
  const double gop = pcc("gop");
  bool fusion_ok = true, interior = true;
  std::string lambdas;
  for (const std::string sys : {"ivector", "nf", "dnf"}) {
    if (pcc(sys + "_score_fusion") < gop || pcc(sys + "_feature_fusion") < gop) fusion_ok = false;
    const auto& lam = rows.at(sys + "_score_fusion").lambda;
    if (!lam || !(*lam > 0.0 && *lam < 1.0)) interior = false;
    lambdas += Fmt("%s%.2f", lambdas.empty() ? "" : "/", lam ? *lam : -1.0);
  }
  if (!fusion_ok) failed.push_back("d");
  if (!interior) failed.push_back("e");
  if (secs >= 600.0) failed.push_back("runtime");
  std::string fails;
  for (const auto& f : failed) fails += (fails.empty() ? "" : ",") + f;
  return {failed.empty(),
          Fmt("gmm_ll=%.3f nf_ll=%.3f gop=%.3f iv=%.3f nf=%.3f dnf=%.3f lambda*=%s time=%.0fs%s%s",
              gmm, nf_ll, gop, iv, nf, dnf, lambdas.c_str(), secs,
              failed.empty() ? "" : " failed=", fails.c_str())};
}

std::vector<std::string> FilesUnder(const fs::path& dir) {
  std::vector<std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), dir).string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

Outcome CheckDeterminism(const fs::path& a, const fs::path& b) {
  int compared = 0;
  std::vector<std::string> differing;
  for (const std::string sub : {"corpus", "models", "reports"}) {
    const auto fa = FilesUnder(a / sub), fb = FilesUnder(b / sub);
    if (fa != fb) differing.push_back(sub + "/ (file sets differ)");
    for (const auto& f : fa) {
      if (!fs::exists(b / sub / f)) continue;
      ++compared;
      if (ReadFileBytes((a / sub / f).string()) != ReadFileBytes((b / sub / f).string())) {
        differing.push_back(sub + "/" + f);
      }
    }
  }
  std::string list;
  for (const auto& d : differing) list += " " + d;
  return {differing.empty() && compared > 0,
          Fmt("%d files compared%s%s", compared, differing.empty() ? ", all identical" : "; differ:",
              list.c_str())};
}

// ---------------------------------------------------------------------------
// 8. Binary format round trips.
Outcome CheckRoundTrips(const fs::path& dir) {
  fs::create_directories(dir);
  std::vector<std::string> failed;
  int checked = 0;
  auto check = [&](const std::string& name, const std::string& path,
                   const std::function<void(const std::string&)>& reread_and_write) {
    ++checked;
    const std::string copy = path + ".again";
    reread_and_write(copy);
    if (ReadFileBytes(path) != ReadFileBytes(copy)) failed.push_back(name);
  };
  Rng rng(8);
  Matrix frames(40, 3);
  for (Eigen::Index i = 0; i < frames.size(); ++i) frames.data()[i] = rng.Normal();
  const std::string prf1 = (dir / "feat.prf1").string();
  WriteFeatureFile(prf1, frames);
  check("PRF1/features", prf1, [&](const std::string& p) { WriteFeatureFile(p, ReadFeatureFile(prf1)); });

  PosteriorGram pg;
  pg.utterance_id = "u";
  pg.phone_table = {"aa", "b", "ch"};
  pg.post = Matrix(5, 3);
  for (int t = 0; t < 5; ++t) {
    Eigen::RowVector3d r(rng.Uniform() + 0.1, rng.Uniform() + 0.1, rng.Uniform() + 0.1);
    pg.post.row(t) = r / r.sum();
  }
  const std::string post = (dir / "post.prf1").string();
  WritePosteriorFile(post, pg);
  check("PRF1/posteriors", post, [&](const std::string& p) { WritePosteriorFile(p, ReadPosteriorFile(post, "u")); });

  GmmTrainConfig gc;
  gc.num_components = 4;
  gc.iterations = 5;
  const GmmModel gmm = TrainGmm(frames, gc).model;
  const std::string pgmm = (dir / "m.pgmm").string();
  WriteGmm(pgmm, gmm);
  check("PGMM", pgmm, [&](const std::string& p) { WriteGmm(p, ReadGmm(pgmm)); });

  FeatureSequence fs1{"u", frames};
  IVectorTrainConfig ic;
  ic.ivector_dim = 2;
  ic.iterations = 2;
  const IVectorModel ivm = TrainIVector(gmm, {UbmStats(gmm, fs1)}, ic).model;
  const std::string pivm = (dir / "m.pivm").string();
  WriteIVectorModel(pivm, ivm);
  check("PIVM", pivm, [&](const std::string& p) { WriteIVectorModel(p, ReadIVectorModel(pivm)); });

  FlowConfig fc;
  fc.dim = 3;
  fc.num_layers = 2;
  fc.hidden = 4;
  FlowModel flow = FlowModel::Create(fc);
  flow.Randomize(8, 0.2);
  const std::string pnf = (dir / "m.pnf1").string();
  WriteFlow(pnf, flow);
  check("PNF1", pnf, [&](const std::string& p) { WriteFlow(p, ReadFlow(pnf)); });

  DnfModel dnf{flow, UnitNormMeans(3, 3, 8)};
  const std::string pdnf = (dir / "m.pdnf").string();
  WriteDnf(pdnf, dnf);
  check("PDNF", pdnf, [&](const std::string& p) { WriteDnf(p, ReadDnf(pdnf)); });

  std::vector<double> y(40);
  for (int i = 0; i < 40; ++i) y[static_cast<size_t>(i)] = frames(i, 0) + rng.Normal();
  const SvrModel svr = TrainSvr(frames, y, SvrParams{}).model;
  const std::string psvr = (dir / "m.psvr").string();
  WriteSvr(psvr, svr);
  check("PSVR", psvr, [&](const std::string& p) { WriteSvr(p, ReadSvr(psvr)); });

  std::string list;
  for (const auto& f : failed) list += " " + f;
  return {failed.empty(), Fmt("%d formats, %zu mismatched%s", checked, failed.size(), list.c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"proscore acceptance checks"};
  std::string config = PROSCORE_SOURCE_DIR "/configs/synthetic.json";
  std::string workdir = (fs::temp_directory_path() / "proscore_acceptance").string();
  std::vector<int> only;
  app.add_option("--config", config, "synthetic preset");
  app.add_option("--workdir", workdir, "scratch directory (wiped)");
  app.add_option("--only", only, "criteria to run (default: all)");
  CLI11_PARSE(app, argc, argv);

  const std::set<int> selected(only.begin(), only.end());
  auto wanted = [&](int c) { return selected.empty() || selected.count(c) > 0; };
  const fs::path root(workdir);
  fs::remove_all(root);
  fs::create_directories(root);

  bool all_pass = true;
  auto report = [&](int id, const std::string& name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    all_pass = all_pass && o.pass;
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  };

  if (wanted(1)) report(1, "phone competition", CheckCompetition);
  if (wanted(2)) report(2, "change of variables", CheckChangeOfVariables);
  if (wanted(3)) report(3, "gradients", CheckGradients);
  if (wanted(4)) report(4, "EM monotonicity", CheckEmMonotone);
  if (wanted(5)) report(5, "oracle equivalence", CheckOracles);
  if (wanted(6) || wanted(7)) {
    std::optional<RunSummary> first;
    double secs = 0.0;
    std::string error;
    try {
      const auto t0 = std::chrono::steady_clock::now();
      first = RunPipeline(PresetAt(config, root / "run_a"), RunOptions{true, nullptr});
      secs = Seconds(t0);
    } catch (const std::exception& e) {
      error = e.what();
    }
    auto need_first = [&]() {
      if (!first) throw Error("preset run failed: " + error);
    };
    if (wanted(6)) {
      report(6, "table ordering", [&] {
        need_first();
        return CheckOrdering(*first, secs);
      });
    }
    if (wanted(7)) {
      report(7, "determinism", [&] {
        need_first();
        RunPipeline(PresetAt(config, root / "run_b"), RunOptions{true, nullptr});
        return CheckDeterminism(root / "run_a", root / "run_b");
      });
    }
  }
  if (wanted(8)) report(8, "format round trip", [&] { return CheckRoundTrips(root / "formats"); });
  return all_pass ? 0 : 1;
}
