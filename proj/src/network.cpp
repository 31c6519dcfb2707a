#include "fraceig/network.hpp"

#include <cmath>
#include <string>

#include "fraceig/error.hpp"

namespace fraceig {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstRowMap = Eigen::Map<const RowMatrix>;
using RowMap = Eigen::Map<RowMatrix>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;
using VecMap = Eigen::Map<Eigen::VectorXd>;

// tanh(z) = 1 - 2 / (exp(2z) + 1); vectorizes through Eigen's exp.
void tanh_inplace(Eigen::MatrixXd& z) {
  z = 1.0 - 2.0 / ((2.0 * z.array()).exp() + 1.0);
}

// Copies block `b` of the points and features into fixed-size, zero-padded buffers.
void load_block(const EvalPoints& pts, std::size_t b, Eigen::MatrixXd& x, Eigen::MatrixXd& q) {
  const int d = pts.x.dim();
  const std::size_t first = b * kBlockSize;
  const std::size_t count = std::min<std::size_t>(kBlockSize, pts.size() - first);
  x.resize(d, kBlockSize);
  q.resize(pts.q.rows(), kBlockSize);
  if (count < static_cast<std::size_t>(kBlockSize)) {
    x.setZero();
    q.setZero();
  }
  x.leftCols(count) = Eigen::Map<const Eigen::MatrixXd>(pts.x.data() + first * d, d, count);
  q.leftCols(count) = pts.q.middleCols(first, count);
}

// Hidden activations r_1..r_l of one block.
void hidden_block(const NetworkParams& params, const Eigen::MatrixXd& x, std::vector<Eigen::MatrixXd>& r) {
  const Architecture& a = params.arch();
  const double* v = params.values().data();
  r.resize(a.l);
  for (int layer = 1; layer <= a.l; ++layer) {
    const int fan_in = layer == 1 ? a.d : a.m;
    const ConstRowMap w(v + params.weight_offset(layer), a.m, fan_in);
    const ConstVecMap bias(v + params.bias_offset(layer), a.m);
    const Eigen::MatrixXd& input = layer == 1 ? x : r[layer - 2];
    Eigen::MatrixXd& z = r[layer - 1];
    z.noalias() = w * input;
    z.colwise() += bias;
    tanh_inplace(z);
  }
}

Eigen::RowVectorXd head_block(const NetworkParams& params, const Eigen::MatrixXd& r_last, const Eigen::MatrixXd& q) {
  const ConstVecMap head(params.values().data() + params.head_offset(), params.arch().m);
  const Eigen::MatrixXd weighted = (r_last.array() * q.array()).matrix();
  return head.transpose() * weighted;
}

[[noreturn]] void report_overflow(const NetworkParams& params, const Eigen::MatrixXd& x, std::size_t first) {
  std::vector<Eigen::MatrixXd> r;
  hidden_block(params, x, r);
  for (int layer = 0; layer < static_cast<int>(r.size()); ++layer) {
    for (Eigen::Index c = 0; c < r[layer].cols(); ++c) {
      if (!r[layer].col(c).allFinite()) {
        throw NumericError("numeric overflow in layer " + std::to_string(layer + 1) + " at sample " +
                           std::to_string(first + c));
      }
    }
  }
  throw NumericError("numeric overflow in output layer " + std::to_string(params.arch().l + 1) +
                     " near sample " + std::to_string(first));
}

std::size_t block_count(std::size_t n) { return (n + kBlockSize - 1) / kBlockSize; }

// Deterministic pairwise sum of per-block gradient columns [lo, hi) into out.
void reduce_blocks(const Eigen::MatrixXd& blocks, Eigen::Index lo, Eigen::Index hi, Eigen::Ref<Eigen::VectorXd> out) {
  if (hi - lo == 1) {
    out = blocks.col(lo);
    return;
  }
  const Eigen::Index mid = lo + (hi - lo) / 2;
  Eigen::VectorXd right(out.size());
  reduce_blocks(blocks, lo, mid, out);
  reduce_blocks(blocks, mid, hi, right);
  out += right;
}

// Buffers reused across calls on the same thread; Eigen resizes to an equal
// shape without reallocating.
struct GradientWorkspace {
  std::vector<std::vector<Eigen::MatrixXd>> acts;
  Eigen::MatrixXd block_grads;
};

GradientWorkspace& workspace() {
  thread_local GradientWorkspace ws;
  return ws;
}

}  // namespace

std::size_t Architecture::parameter_count() const {
  const auto md = static_cast<std::size_t>(m);
  return md * d + md + static_cast<std::size_t>(l - 1) * (md * md + md) + md;
}

void Architecture::validate() const {
  if (d < 1) throw ConfigError("input dimension must be at least 1");
  if (l < 1) throw ConfigError("layer count must be at least 1");
  if (m < 1) throw ConfigError("width must be at least 1");
}

NetworkParams::NetworkParams(const Architecture& arch) : arch_(arch) {
  arch_.validate();
  values_.assign(arch_.parameter_count(), 0.0);
}

std::size_t NetworkParams::weight_offset(int layer) const {
  const auto m = static_cast<std::size_t>(arch_.m);
  if (layer == 1) return 0;
  return m * arch_.d + m + static_cast<std::size_t>(layer - 2) * (m * m + m);
}

std::size_t NetworkParams::bias_offset(int layer) const {
  const auto m = static_cast<std::size_t>(arch_.m);
  return weight_offset(layer) + m * (layer == 1 ? arch_.d : arch_.m);
}

NetworkParams init_params(const Architecture& arch, const StreamKey& key) {
  NetworkParams params(arch);
  SplitMix64 rng = key.generator(0);
  auto uniform = [&](double bound) { return bound * (2.0 * uniform01(rng) - 1.0); };
  std::span<double> v = params.values();
  for (int layer = 1; layer <= arch.l; ++layer) {
    const int fan_in = layer == 1 ? arch.d : arch.m;
    const double bound = std::sqrt(6.0 / (fan_in + arch.m));
    const std::size_t w = params.weight_offset(layer);
    for (std::size_t i = 0; i < static_cast<std::size_t>(arch.m) * fan_in; ++i) v[w + i] = uniform(bound);
  }
  const double head_bound = 1.0 / std::sqrt(static_cast<double>(arch.m));
  for (int j = 0; j < arch.m; ++j) v[params.head_offset() + j] = uniform(head_bound);
  return params;
}

EvalPoints prepare_points(const FeatureSet& features, PointSet points) {
  EvalPoints out;
  const auto n = static_cast<Eigen::Index>(points.size());
  out.q.resize(features.size(), n);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    features.eval(points[i], {out.q.col(i).data(), static_cast<std::size_t>(features.size())});
  }
  out.x = std::move(points);
  return out;
}

double forward(const NetworkParams& params, const FeatureSet& features, std::span<const double> x) {
  PointSet one(static_cast<int>(x.size()), 0);
  one.push_back(x);
  return forward_batch(params, prepare_points(features, std::move(one)))[0];
}

std::vector<double> forward_batch(const NetworkParams& params, const FeatureSet& features, const PointSet& xs) {
  return forward_batch(params, prepare_points(features, xs));
}

std::vector<double> forward_batch(const NetworkParams& params, const EvalPoints& points) {
  if (points.x.dim() != params.arch().d || points.q.rows() != params.arch().m) {
    throw ConfigError("network shape does not match the evaluation points");
  }
  const std::size_t n = points.size();
  std::vector<double> u(n);
  const auto blocks = static_cast<std::ptrdiff_t>(block_count(n));
  bool overflow = false;
  std::ptrdiff_t bad_block = 0;
#pragma omp parallel
  {
    Eigen::MatrixXd x, q;
    std::vector<Eigen::MatrixXd> r;
#pragma omp for schedule(static)
    for (std::ptrdiff_t b = 0; b < blocks; ++b) {
      load_block(points, b, x, q);
      hidden_block(params, x, r);
      const Eigen::RowVectorXd out = head_block(params, r.back(), q);
      const std::size_t first = b * kBlockSize;
      const std::size_t count = std::min<std::size_t>(kBlockSize, n - first);
      for (std::size_t c = 0; c < count; ++c) u[first + c] = out[c];
      if (!out.allFinite()) {
#pragma omp critical
        {
          if (!overflow || b < bad_block) bad_block = b;
          overflow = true;
        }
      }
    }
  }
  if (overflow) {
    Eigen::MatrixXd x, q;
    load_block(points, bad_block, x, q);
    report_overflow(params, x, bad_block * kBlockSize);
  }
  return u;
}

LossGradient loss_gradient(const NetworkParams& params, const EvalPoints& points, const LossEvaluator& evaluator) {
  const Architecture& a = params.arch();
  if (points.x.dim() != a.d || points.q.rows() != a.m) {
    throw ConfigError("network shape does not match the evaluation points");
  }
  const std::size_t n = points.size();
  const auto blocks = static_cast<std::ptrdiff_t>(block_count(n));

  // Forward pass, keeping activations per block.
  GradientWorkspace& ws = workspace();
  if (ws.acts.size() < static_cast<std::size_t>(blocks)) ws.acts.resize(blocks);
  std::vector<std::vector<Eigen::MatrixXd>>& acts = ws.acts;
  std::vector<double> u(n);
  bool overflow = false;
#pragma omp parallel
  {
    Eigen::MatrixXd x, q;
#pragma omp for schedule(static)
    for (std::ptrdiff_t b = 0; b < blocks; ++b) {
      load_block(points, b, x, q);
      hidden_block(params, x, acts[b]);
      const Eigen::RowVectorXd out = head_block(params, acts[b].back(), q);
      const std::size_t first = b * kBlockSize;
      const std::size_t count = std::min<std::size_t>(kBlockSize, n - first);
      for (std::size_t c = 0; c < count; ++c) u[first + c] = out[c];
      if (!out.allFinite()) {
#pragma omp atomic write
        overflow = true;
      }
    }
  }
  if (overflow) forward_batch(params, points);  // throws with the offending layer
  std::vector<double> du(n, 0.0);
  LossGradient result;
  result.loss = evaluator(u, du);
  if (!std::isfinite(result.loss)) throw NumericError("non-finite loss");

  const std::size_t p = params.size();
  // Every column is fully overwritten below.
  Eigen::MatrixXd& block_grads = ws.block_grads;
  if (block_grads.rows() != static_cast<Eigen::Index>(p) || block_grads.cols() < blocks) {
    block_grads.resize(static_cast<Eigen::Index>(p), std::max<std::ptrdiff_t>(blocks, 1));
  }
  const double* v = params.values().data();
  const ConstVecMap head(v + params.head_offset(), a.m);

#pragma omp parallel
  {
    Eigen::MatrixXd x, q;
    Eigen::RowVectorXd g(kBlockSize);
    Eigen::MatrixXd delta, next;
#pragma omp for schedule(static)
    for (std::ptrdiff_t b = 0; b < blocks; ++b) {
      load_block(points, b, x, q);
      const std::vector<Eigen::MatrixXd>& r = acts[b];
      const std::size_t first = b * kBlockSize;
      const std::size_t count = std::min<std::size_t>(kBlockSize, n - first);
      g.setZero();
      for (std::size_t c = 0; c < count; ++c) g[c] = du[first + c];

      double* out = block_grads.col(b).data();
      const Eigen::MatrixXd& r_last = r.back();
      VecMap(out + params.head_offset(), a.m).noalias() = (r_last.array() * q.array()).matrix() * g.transpose();

      delta = ((head * g).array() * q.array() * (1.0 - r_last.array().square())).matrix();
      for (int layer = a.l; layer >= 1; --layer) {
        const int fan_in = layer == 1 ? a.d : a.m;
        const Eigen::MatrixXd& input = layer == 1 ? x : r[layer - 2];
        RowMap(out + params.weight_offset(layer), a.m, fan_in).noalias() = delta * input.transpose();
        VecMap(out + params.bias_offset(layer), a.m) = delta.rowwise().sum();
        if (layer > 1) {
          const ConstRowMap w(v + params.weight_offset(layer), a.m, fan_in);
          next.noalias() = w.transpose() * delta;
          delta = (next.array() * (1.0 - r[layer - 2].array().square())).matrix();
        }
      }
    }
  }

  result.grad.assign(p, 0.0);
  if (blocks > 0) reduce_blocks(block_grads, 0, blocks, VecMap(result.grad.data(), static_cast<Eigen::Index>(p)));
  return result;
}

LossGradient loss_gradient(const NetworkParams& params, const FeatureSet& features, const PointSet& xs,
                           const LossEvaluator& evaluator) {
  return loss_gradient(params, prepare_points(features, xs), evaluator);
}

}  // namespace fraceig
