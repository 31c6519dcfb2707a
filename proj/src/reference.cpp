#include "fraceig/reference.hpp"

#include <cmath>

#include "fraceig/error.hpp"

namespace fraceig::reference {
namespace {

std::span<const double> column(const EvalPoints& points, std::size_t i) {
  return {points.q.data() + i * points.q.rows(), static_cast<std::size_t>(points.q.rows())};
}

// r[k] holds the activations of layer k+1.
void hidden(const NetworkParams& params, std::span<const double> x, std::vector<std::vector<double>>& r) {
  const Architecture& a = params.arch();
  const std::span<const double> v = params.values();
  r.assign(a.l, std::vector<double>(a.m));
  for (int layer = 1; layer <= a.l; ++layer) {
    const int fan_in = layer == 1 ? a.d : a.m;
    const double* w = v.data() + params.weight_offset(layer);
    const double* b = v.data() + params.bias_offset(layer);
    const double* input = layer == 1 ? x.data() : r[layer - 2].data();
    for (int i = 0; i < a.m; ++i) {
      double z = b[i];
      for (int k = 0; k < fan_in; ++k) z += w[i * fan_in + k] * input[k];
      r[layer - 1][i] = std::tanh(z);
    }
  }
}

}  // namespace

double forward(const NetworkParams& params, std::span<const double> x, std::span<const double> q) {
  std::vector<std::vector<double>> r;
  hidden(params, x, r);
  const double* head = params.values().data() + params.head_offset();
  double u = 0.0;
  for (int j = 0; j < params.arch().m; ++j) u += head[j] * r.back()[j] * q[j];
  if (!std::isfinite(u)) throw NumericError("numeric overflow");
  return u;
}

std::vector<double> forward_batch(const NetworkParams& params, const EvalPoints& points) {
  std::vector<double> u(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) u[i] = forward(params, points.x[i], column(points, i));
  return u;
}

LossGradient loss_gradient(const NetworkParams& params, const EvalPoints& points, const LossEvaluator& evaluator) {
  const Architecture& a = params.arch();
  const std::vector<double> u = reference::forward_batch(params, points);
  std::vector<double> du(u.size(), 0.0);
  LossGradient out;
  out.loss = evaluator(u, du);
  out.grad.assign(params.size(), 0.0);
  const std::span<const double> v = params.values();
  const double* head = v.data() + params.head_offset();
  std::vector<std::vector<double>> r;
  std::vector<double> delta(a.m), next(a.m);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const std::span<const double> x = points.x[i];
    const std::span<const double> q = column(points, i);
    hidden(params, x, r);
    for (int j = 0; j < a.m; ++j) {
      out.grad[params.head_offset() + j] += du[i] * r.back()[j] * q[j];
      delta[j] = du[i] * head[j] * q[j] * (1.0 - r.back()[j] * r.back()[j]);
    }
    for (int layer = a.l; layer >= 1; --layer) {
      const int fan_in = layer == 1 ? a.d : a.m;
      const double* input = layer == 1 ? x.data() : r[layer - 2].data();
      const std::size_t w = params.weight_offset(layer);
      const std::size_t b = params.bias_offset(layer);
      for (int j = 0; j < a.m; ++j) {
        for (int k = 0; k < fan_in; ++k) out.grad[w + j * fan_in + k] += delta[j] * input[k];
        out.grad[b + j] += delta[j];
      }
      if (layer > 1) {
        for (int k = 0; k < a.m; ++k) {
          double acc = 0.0;
          for (int j = 0; j < a.m; ++j) acc += v[w + j * a.m + k] * delta[j];
          next[k] = acc * (1.0 - r[layer - 2][k] * r[layer - 2][k]);
        }
        delta.swap(next);
      }
    }
  }
  return out;
}

}  // namespace fraceig::reference
