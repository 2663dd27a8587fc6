// proscore/src/flow.cc

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

#include "proscore/flow.h"

#include <cmath>
#include <numeric>

#include "proscore/binary_io.h"

namespace proscore {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr std::string_view kFlowMagic = "PNF1";
constexpr uint32_t kFlowVersion = 1;

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

Mat Tanh(const Mat& a) {
  return a.unaryExpr([](double v) { return std::tanh(v); });
}

template <typename Fn>
void ForEachTensor(Mlp& net, Fn&& fn) {
  fn(net.w1.data(), net.w1.size());
  fn(net.b1.data(), net.b1.size());
  fn(net.w2.data(), net.w2.size());
  fn(net.b2.data(), net.b2.size());
  fn(net.w3.data(), net.w3.size());
  fn(net.b3.data(), net.b3.size());
}

template <typename Fn>
void ForEachTensor(CouplingLayer& layer, Fn&& fn) {
  ForEachTensor(layer.scale_net, fn);
  ForEachTensor(layer.shift_net, fn);
  fn(layer.scale_cap.data(), layer.scale_cap.size());
}

Mlp MakeMlp(Eigen::Index in, Eigen::Index hidden, Eigen::Index out) {
  Mlp m;
  m.w1 = Mat::Zero(hidden, in);
  m.b1 = Vec::Zero(hidden);
  m.w2 = Mat::Zero(hidden, hidden);
  m.b2 = Vec::Zero(hidden);
  m.w3 = Mat::Zero(out, hidden);
  m.b3 = Vec::Zero(out);
  return m;
}

struct MlpCache {
  Mat u, h1, h2;
};

Mat MlpForward(const Mlp& net, const Mat& u, MlpCache* cache) {
  Mat h1 = Tanh((net.w1 * u).colwise() + net.b1);
  Mat h2 = Tanh((net.w2 * h1).colwise() + net.b2);
  Mat out = (net.w3 * h2).colwise() + net.b3;
  if (cache) {
    cache->u = u;
    cache->h1 = std::move(h1);
    cache->h2 = std::move(h2);
  }
  return out;
}

// Accumulates parameter gradients into `grad` and returns d/du.
Mat MlpBackward(const Mlp& net, const MlpCache& c, const Mat& d_out, Mlp& grad) {
  grad.w3 += d_out * c.h2.transpose();
  grad.b3 += d_out.rowwise().sum();
  const Mat d_a2 = (net.w3.transpose() * d_out).cwiseProduct(
      (1.0 - c.h2.array().square()).matrix());
  grad.w2 += d_a2 * c.h1.transpose();
  grad.b2 += d_a2.rowwise().sum();
  const Mat d_a1 = (net.w2.transpose() * d_a2).cwiseProduct(
      (1.0 - c.h1.array().square()).matrix());
  grad.w1 += d_a1 * c.u.transpose();
  grad.b1 += d_a1.rowwise().sum();
  return net.w1.transpose() * d_a1;
}

Mat Gather(const Mat& x, const std::vector<int>& rows) {
  Mat out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
  return out;
}

void Scatter(Mat& x, const std::vector<int>& rows, const Mat& src) {
  for (size_t i = 0; i < rows.size(); ++i) x.row(rows[i]) = src.row(static_cast<Eigen::Index>(i));
}

void CheckFinite(const Mat& x, int layer) {
  if (!x.allFinite()) {
    throw DivergenceError("flow layer " + std::to_string(layer) + " produced non-finite values");
  }
}

CouplingLayer ZeroLike(const CouplingLayer& l) {
  CouplingLayer g = l;
  ForEachTensor(g, [](double* p, Eigen::Index n) { std::fill(p, p + n, 0.0); });
  return g;
}

struct LayerCache {
  MlpCache scale, shift;
  Mat th;   // tanh of raw scale output
  Mat s;    // cap * th
  Mat x_b;  // transformed half after the inverse step
};

// Data -> latent step of one layer. Subtracts sum(s) from log_det.
Mat InverseLayer(const CouplingLayer& l, const Mat& y, Vec& log_det, LayerCache* cache) {
  const Mat u = Gather(y, l.cond_dims);
  MlpCache* sc = cache ? &cache->scale : nullptr;
  MlpCache* sh = cache ? &cache->shift : nullptr;
  Mat th = Tanh(MlpForward(l.scale_net, u, sc));
  Mat s = l.scale_cap.asDiagonal() * th;
  const Mat t = MlpForward(l.shift_net, u, sh);
  Mat x_b = (Gather(y, l.trans_dims) - t).cwiseProduct((-s).array().exp().matrix());
  log_det -= s.colwise().sum().transpose();
  Mat x = y;
  Scatter(x, l.trans_dims, x_b);
  if (cache) {
    cache->th = std::move(th);
    cache->s = std::move(s);
    cache->x_b = std::move(x_b);
  }
  return x;
}

// Latent -> data step of one layer. Adds sum(s) to log_det.
Mat ForwardLayer(const CouplingLayer& l, const Mat& x, Vec& log_det) {
  const Mat u = Gather(x, l.cond_dims);
  const Mat s = l.scale_cap.asDiagonal() * Tanh(MlpForward(l.scale_net, u, nullptr));
  const Mat t = MlpForward(l.shift_net, u, nullptr);
  const Mat y_b = Gather(x, l.trans_dims).cwiseProduct(s.array().exp().matrix()) + t;
  log_det += s.colwise().sum().transpose();
  Mat y = x;
  Scatter(y, l.trans_dims, y_b);
  return y;
}

}  // namespace

// ---------------------------------------------------------------------------

Eigen::Index Mlp::num_params() const {
  return w1.size() + b1.size() + w2.size() + b2.size() + w3.size() + b3.size();
}

Eigen::Index CouplingLayer::num_params() const {
  return scale_net.num_params() + shift_net.num_params() + scale_cap.size();
}

FlowModel FlowModel::Create(const FlowConfig& cfg) {
  if (cfg.dim < 2) throw ConfigError("flow.dim must be >= 2");
  if (cfg.num_layers < 1) throw ConfigError("flow.layers must be >= 1");
  if (cfg.hidden < 1) throw ConfigError("flow.hidden must be >= 1");
  if (!(cfg.scale_cap > 0.0)) throw ConfigError("flow.scale_cap must be > 0");
  FlowModel m;
  m.dim_ = cfg.dim;
  const int half = cfg.dim / 2;
  Rng rng(DeriveSeed(cfg.seed, 0xF1));
  for (int l = 0; l < cfg.num_layers; ++l) {
    CouplingLayer layer;
    std::vector<int> first(static_cast<size_t>(half)), second(static_cast<size_t>(cfg.dim - half));
    std::iota(first.begin(), first.end(), 0);
    std::iota(second.begin(), second.end(), half);
    layer.cond_dims = (l % 2 == 0) ? first : second;
    layer.trans_dims = (l % 2 == 0) ? second : first;
    const auto in = static_cast<Eigen::Index>(layer.cond_dims.size());
    const auto out = static_cast<Eigen::Index>(layer.trans_dims.size());
    for (Mlp* net : {&layer.scale_net, &layer.shift_net}) {
      *net = MakeMlp(in, cfg.hidden, out);
      const double s1 = 1.0 / std::sqrt(static_cast<double>(in));
      const double s2 = 1.0 / std::sqrt(static_cast<double>(cfg.hidden));
      for (Eigen::Index i = 0; i < net->w1.size(); ++i) net->w1.data()[i] = s1 * rng.Normal();
      for (Eigen::Index i = 0; i < net->w2.size(); ++i) net->w2.data()[i] = s2 * rng.Normal();
    }
    layer.scale_cap = Vec::Constant(out, cfg.scale_cap);
    m.layers_.push_back(std::move(layer));
  }
  return m;
}

Eigen::Index FlowModel::num_params() const {
  Eigen::Index n = 0;
  for (const auto& l : layers_) n += l.num_params();
  return n;
}

Eigen::VectorXd FlowModel::GetParams() const {
  Vec out(num_params());
  Eigen::Index pos = 0;
  for (const auto& l : layers_) {
    ForEachTensor(const_cast<CouplingLayer&>(l), [&](double* p, Eigen::Index n) {
      std::copy(p, p + n, out.data() + pos);
      pos += n;
    });
  }
  return out;
}

void FlowModel::SetParams(const Eigen::VectorXd& params) {
  if (params.size() != num_params()) throw std::invalid_argument("flow parameter count mismatch");
  Eigen::Index pos = 0;
  for (auto& l : layers_) {
    ForEachTensor(l, [&](double* p, Eigen::Index n) {
      std::copy(params.data() + pos, params.data() + pos + n, p);
      pos += n;
    });
  }
}

void FlowModel::Randomize(uint64_t seed, double scale) {
  Rng rng(DeriveSeed(seed, 0xFA));
  for (auto& l : layers_) {
    ForEachTensor(l.scale_net, [&](double* p, Eigen::Index n) {
      for (Eigen::Index i = 0; i < n; ++i) p[i] = scale * rng.Normal();
    });
    ForEachTensor(l.shift_net, [&](double* p, Eigen::Index n) {
      for (Eigen::Index i = 0; i < n; ++i) p[i] = scale * rng.Normal();
    });
    for (Eigen::Index i = 0; i < l.scale_cap.size(); ++i) {
      l.scale_cap(i) = 1.0 + 0.5 * rng.Uniform();
    }
  }
}

std::string FlowModel::Encode() const {
  ByteWriter w;
  w.Magic(kFlowMagic);
  w.U32(kFlowVersion);
  w.U32(static_cast<uint32_t>(dim_));
  w.U32(static_cast<uint32_t>(layers_.size()));
  w.U32(layers_.empty() ? 0u : static_cast<uint32_t>(layers_[0].scale_net.w1.rows()));
  for (const auto& l : layers_) {
    std::vector<uint8_t> mask(static_cast<size_t>(dim_), 0);
    for (int d : l.cond_dims) mask[static_cast<size_t>(d)] = 1;
    for (uint8_t b : mask) w.U8(b);
    ForEachTensor(const_cast<CouplingLayer&>(l),
                  [&](double* p, Eigen::Index n) { w.Doubles(p, static_cast<size_t>(n)); });
  }
  return w.Take();
}

FlowModel FlowModel::Decode(std::string_view bytes, const std::string& what) {
  ByteReader r(bytes, what);
  r.ExpectMagic(kFlowMagic);
  if (r.U32() != kFlowVersion) throw DataError(what + ": unsupported PNF1 version");
  FlowModel m;
  m.dim_ = static_cast<int>(r.U32());
  const uint32_t num_layers = r.U32();
  const uint32_t hidden = r.U32();
  if (m.dim_ < 2 || hidden < 1) throw DataError(what + ": invalid flow header");
  for (uint32_t i = 0; i < num_layers; ++i) {
    CouplingLayer l;
    for (int d = 0; d < m.dim_; ++d) (r.U8() ? l.cond_dims : l.trans_dims).push_back(d);
    if (l.cond_dims.empty() || l.trans_dims.empty()) throw DataError(what + ": degenerate mask");
    const auto in = static_cast<Eigen::Index>(l.cond_dims.size());
    const auto out = static_cast<Eigen::Index>(l.trans_dims.size());
    l.scale_net = MakeMlp(in, hidden, out);
    l.shift_net = MakeMlp(in, hidden, out);
    l.scale_cap = Vec::Zero(out);
    ForEachTensor(l, [&](double* p, Eigen::Index n) { r.Doubles(p, static_cast<size_t>(n)); });
    m.layers_.push_back(std::move(l));
  }
  r.ExpectEnd();
  return m;
}

void WriteFlow(const std::string& path, const FlowModel& model) {
  WriteFileBytes(path, model.Encode());
}

FlowModel ReadFlow(const std::string& path) { return FlowModel::Decode(ReadFileBytes(path), path); }

// ---------------------------------------------------------------------------

FlowImages FlowTransform(const FlowModel& m, FlowDirection direction, const Matrix& batch) {
  if (batch.cols() != m.dim()) {
    throw DataError("flow input dim " + std::to_string(batch.cols()) + " != model dim " +
                    std::to_string(m.dim()));
  }
  if (!batch.allFinite()) throw DataError("flow input has non-finite values");
  Mat x = batch.transpose();
  Vec log_det = Vec::Zero(batch.rows());
  const int L = m.num_layers();
  if (direction == FlowDirection::kForward) {
    for (int l = 0; l < L; ++l) {
      x = ForwardLayer(m.layers()[static_cast<size_t>(l)], x, log_det);
      CheckFinite(x, l);
    }
  } else {
    for (int l = L - 1; l >= 0; --l) {
      x = InverseLayer(m.layers()[static_cast<size_t>(l)], x, log_det, nullptr);
      CheckFinite(x, l);
    }
  }
  return {x.transpose(), log_det};
}

double UnitGaussianLogDensity(const double* z, const double* mean, int dim) {
  double sq = 0.0;
  for (int d = 0; d < dim; ++d) {
    const double diff = z[d] - mean[d];
    sq += diff * diff;
  }
  return -0.5 * sq - 0.5 * dim * kLog2Pi;
}

Eigen::VectorXd FlowLogProb(const FlowModel& m, const Matrix& batch) {
  const FlowImages inv = FlowTransform(m, FlowDirection::kInverse, batch);
  const Vec zero = Vec::Zero(m.dim());
  Vec out(batch.rows());
  for (Eigen::Index n = 0; n < batch.rows(); ++n) {
    out(n) = UnitGaussianLogDensity(inv.images.data() + n * m.dim(), zero.data(), m.dim()) +
             inv.log_det(n);
  }
  return out;
}

Eigen::VectorXd FlowEmbed(const FlowModel& m, const FeatureSequence& fs) {
  if (fs.num_frames() < 1) throw DataError(fs.utterance_id + ": cannot embed an empty sequence");
  const FlowImages inv = FlowTransform(m, FlowDirection::kInverse, fs.frames);
  return inv.images.colwise().mean().transpose();
}

// ---------------------------------------------------------------------------

namespace {

double NllForward(const FlowModel& m, const Matrix& batch, std::span<const int> labels,
                  const Matrix& prior_means, std::vector<LayerCache>* caches, Mat* z_out,
                  Vec* ld_out) {
  const Eigen::Index N = batch.rows();
  const int D = m.dim();
  if (batch.cols() != D) throw DataError("flow batch dim mismatch");
  if (static_cast<Eigen::Index>(labels.size()) != N) throw DataError("flow label count mismatch");
  if (prior_means.cols() != D) throw DataError("prior mean dim mismatch");
  Mat x = batch.transpose();
  Vec log_det = Vec::Zero(N);
  const int L = m.num_layers();
  if (caches) caches->assign(static_cast<size_t>(L), LayerCache{});
  for (int l = L - 1; l >= 0; --l) {
    x = InverseLayer(m.layers()[static_cast<size_t>(l)], x, log_det,
                     caches ? &(*caches)[static_cast<size_t>(l)] : nullptr);
  }
  double total = 0.0;
  for (Eigen::Index n = 0; n < N; ++n) {
    const int c = labels[static_cast<size_t>(n)];
    if (c < 0 || c >= prior_means.rows()) throw DataError("class label out of range");
    total -= UnitGaussianLogDensity(x.data() + n * D, prior_means.data() + c * D, D) + log_det(n);
  }
  if (z_out) *z_out = std::move(x);
  if (ld_out) *ld_out = std::move(log_det);
  return total / static_cast<double>(N);
}

}  // namespace

double FlowNll(const FlowModel& m, const Matrix& batch, std::span<const int> labels,
               const Matrix& prior_means) {
  return NllForward(m, batch, labels, prior_means, nullptr, nullptr, nullptr);
}

FlowLossGrad FlowNllGradient(const FlowModel& m, const Matrix& batch, std::span<const int> labels,
                             const Matrix& prior_means) {
  const Eigen::Index N = batch.rows();
  const int D = m.dim();
  const int L = m.num_layers();
  std::vector<LayerCache> caches;
  Mat z;
  FlowLossGrad out;
  out.loss = NllForward(m, batch, labels, prior_means, &caches, &z, nullptr);

  const double inv_n = 1.0 / static_cast<double>(N);
  out.mean_grad = Matrix::Zero(prior_means.rows(), D);
  Mat dx(D, N);
  for (Eigen::Index n = 0; n < N; ++n) {
    const int c = labels[static_cast<size_t>(n)];
    for (int d = 0; d < D; ++d) {
      const double r = (z(d, n) - prior_means(c, d)) * inv_n;
      dx(d, n) = r;
      out.mean_grad(c, d) -= r;
    }
  }

  // Layers were applied L-1 .. 0 on the way to the latent space, so the
  // backward pass visits them 0 .. L-1.
  std::vector<CouplingLayer> grads;
  grads.reserve(static_cast<size_t>(L));
  for (const auto& l : m.layers()) grads.push_back(ZeroLike(l));
  for (int l = 0; l < L; ++l) {
    const auto& layer = m.layers()[static_cast<size_t>(l)];
    const auto& c = caches[static_cast<size_t>(l)];
    auto& g = grads[static_cast<size_t>(l)];
    const Mat d_xb = Gather(dx, layer.trans_dims);
    const Mat e = (-c.s).array().exp().matrix();
    const Mat d_yb = d_xb.cwiseProduct(e);
    // The loss carries +sum(s)/N through the inverse log-determinant.
    const Mat d_s = (-d_xb.cwiseProduct(c.x_b)).array() + inv_n;
    g.scale_cap += d_s.cwiseProduct(c.th).rowwise().sum();
    const Mat d_raw =
        layer.scale_cap.asDiagonal() * d_s.cwiseProduct((1.0 - c.th.array().square()).matrix());
    Mat d_u = MlpBackward(layer.scale_net, c.scale, d_raw, g.scale_net);
    d_u += MlpBackward(layer.shift_net, c.shift, -d_yb, g.shift_net);
    Scatter(dx, layer.trans_dims, d_yb);
    for (size_t i = 0; i < layer.cond_dims.size(); ++i) {
      dx.row(layer.cond_dims[i]) += d_u.row(static_cast<Eigen::Index>(i));
    }
  }

  out.backbone_grad.resize(m.num_params());
  Eigen::Index pos = 0;
  for (auto& g : grads) {
    ForEachTensor(g, [&](double* p, Eigen::Index n) {
      std::copy(p, p + n, out.backbone_grad.data() + pos);
      pos += n;
    });
  }
  return out;
}

// ---------------------------------------------------------------------------

void AdamConfig::Validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("adam.learning_rate must be > 0");
  if (!(beta1 > 0.0 && beta1 < 1.0)) throw ConfigError("adam.beta1 must lie in (0, 1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) throw ConfigError("adam.beta2 must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("adam.epsilon must be > 0");
  if (batch_size < 1) throw ConfigError("adam.batch_size must be >= 1");
  if (epochs < 1) throw ConfigError("adam.epochs must be >= 1");
}

Adam::Adam(const AdamConfig& cfg, Eigen::Index num_params)
    : cfg_(cfg), m_(Vec::Zero(num_params)), v_(Vec::Zero(num_params)) {
  cfg_.Validate();
}

void Adam::Step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  ++t_;
  m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * grad;
  v_ = cfg_.beta2 * v_ + (1.0 - cfg_.beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double m_hat = m_(i) / c1;
    const double v_hat = v_(i) / c2;
    params(i) -= cfg_.learning_rate * m_hat / (std::sqrt(v_hat) + cfg_.epsilon);
  }
}

Matrix UnitNormMeans(int count, int dim, uint64_t seed) {
  Rng rng(DeriveSeed(seed, 0xC1A5));
  Matrix out(count, dim);
  for (int c = 0; c < count; ++c) {
    for (int d = 0; d < dim; ++d) out(c, d) = rng.Normal();
    out.row(c).normalize();
  }
  return out;
}

namespace detail {

FlowTrainResult TrainFlowWithPriors(FlowModel model, Matrix prior_means, bool learn_means,
                                    const Matrix& frames, std::span<const int> labels,
                                    const AdamConfig& cfg) {
  cfg.Validate();
  const Eigen::Index N = frames.rows();
  const int D = model.dim();
  if (frames.cols() != D) throw DataError("flow training data dim mismatch");
  if (N < cfg.batch_size) {
    throw DataError("flow training needs at least batch_size=" + std::to_string(cfg.batch_size) +
                    " frames, got " + std::to_string(N));
  }
  if (!frames.allFinite()) throw DataError("flow training data has non-finite values");

  const Eigen::Index nb = model.num_params();
  const Eigen::Index nm = learn_means ? prior_means.size() : 0;
  Vec theta(nb + nm);
  theta.head(nb) = model.GetParams();
  if (nm) theta.tail(nm) = Eigen::Map<const Vec>(prior_means.data(), nm);
  Adam adam(cfg, theta.size());

  Rng rng(DeriveSeed(cfg.seed, 0xF10));
  std::vector<Eigen::Index> order(static_cast<size_t>(N));
  FlowTrainResult result;
  Matrix batch;
  std::vector<int> batch_labels;
  Vec grad(theta.size());
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    rng.Shuffle(order);
    double epoch_loss = 0.0;
    for (Eigen::Index start = 0; start < N; start += cfg.batch_size) {
      const Eigen::Index B = std::min<Eigen::Index>(cfg.batch_size, N - start);
      batch.resize(B, D);
      batch_labels.resize(static_cast<size_t>(B));
      for (Eigen::Index i = 0; i < B; ++i) {
        const Eigen::Index src = order[static_cast<size_t>(start + i)];
        batch.row(i) = frames.row(src);
        batch_labels[static_cast<size_t>(i)] = labels[static_cast<size_t>(src)];
      }
      FlowLossGrad lg;
      try {
        lg = FlowNllGradient(model, batch, batch_labels, prior_means);
      } catch (const DivergenceError& e) {
        throw DivergenceError(std::string(e.what()) + " at epoch " + std::to_string(epoch));
      }
      if (!std::isfinite(lg.loss) || !lg.backbone_grad.allFinite()) {
        throw DivergenceError("flow training diverged at epoch " + std::to_string(epoch));
      }
      epoch_loss += lg.loss * static_cast<double>(B);
      grad.head(nb) = lg.backbone_grad;
      if (nm) grad.tail(nm) = Eigen::Map<const Vec>(lg.mean_grad.data(), nm);
      adam.Step(theta, grad);
      model.SetParams(theta.head(nb));
      if (nm) Eigen::Map<Vec>(prior_means.data(), nm) = theta.tail(nm);
    }
    result.trace.push_back(epoch_loss / static_cast<double>(N));
  }
  result.model = std::move(model);
  result.prior_means = std::move(prior_means);
  return result;
}

}  // namespace detail

FlowTrainResult TrainFlow(FlowModel init, const Matrix& frames, const AdamConfig& cfg,
                          bool learn_prior_mean) {
  const int D = init.dim();
  Matrix means = learn_prior_mean ? UnitNormMeans(1, D, cfg.seed) : Matrix::Zero(1, D);
  std::vector<int> labels(static_cast<size_t>(frames.rows()), 0);
  return detail::TrainFlowWithPriors(std::move(init), std::move(means), learn_prior_mean, frames,
                                     labels, cfg);
}

}  // namespace proscore
