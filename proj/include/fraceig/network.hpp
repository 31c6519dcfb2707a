#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "fraceig/features.hpp"
#include "fraceig/geometry.hpp"
#include "fraceig/random.hpp"

namespace fraceig {

struct Architecture {
  int d = 1;
  int l = 3;
  int m = 40;

  [[nodiscard]] std::size_t parameter_count() const;
  void validate() const;
  bool operator==(const Architecture&) const = default;
};

/// All trainable parameters stored flat in checkpoint order:
/// W_1 (row-major m x d), b_1, W_2 (row-major m x m), b_2, ..., W_l, b_l, W_{l+1}.
class NetworkParams {
 public:
  NetworkParams() = default;
  explicit NetworkParams(const Architecture& arch);

  [[nodiscard]] const Architecture& arch() const { return arch_; }
  [[nodiscard]] std::size_t size() const { return values_.size(); }
  std::span<double> values() { return values_; }
  [[nodiscard]] std::span<const double> values() const { return values_; }

  /// Offsets of W_i and b_i for layer i in 1..l, and of the head W_{l+1}.
  [[nodiscard]] std::size_t weight_offset(int layer) const;
  [[nodiscard]] std::size_t bias_offset(int layer) const;
  [[nodiscard]] std::size_t head_offset() const { return values_.size() - arch_.m; }

  bool operator==(const NetworkParams&) const = default;

 private:
  Architecture arch_;
  std::vector<double> values_;
};

NetworkParams init_params(const Architecture& arch, const StreamKey& key);

/// Points with their feature values precomputed (q is m x n, column per point).
struct EvalPoints {
  PointSet x;
  Eigen::MatrixXd q;

  [[nodiscard]] std::size_t size() const { return x.size(); }
};

EvalPoints prepare_points(const FeatureSet& features, PointSet points);

/// Columns per evaluation block; every evaluation is padded to whole blocks so
/// that results do not depend on batch composition.
inline constexpr int kBlockSize = 256;

double forward(const NetworkParams& params, const FeatureSet& features, std::span<const double> x);
std::vector<double> forward_batch(const NetworkParams& params, const FeatureSet& features, const PointSet& xs);
std::vector<double> forward_batch(const NetworkParams& params, const EvalPoints& points);

/// Scalar loss of all network outputs; fills dloss/du for each output.
using LossEvaluator = std::function<double(std::span<const double> u, std::span<double> dloss_du)>;

struct LossGradient {
  double loss = 0.0;
  std::vector<double> grad;  // same layout as NetworkParams
};

LossGradient loss_gradient(const NetworkParams& params, const EvalPoints& points, const LossEvaluator& evaluator);
LossGradient loss_gradient(const NetworkParams& params, const FeatureSet& features, const PointSet& xs,
                           const LossEvaluator& evaluator);

/// Frozen trained network with its eigenvalue estimate.
struct ModeSnapshot {
  NetworkParams params;
  std::vector<FeatureSpec> features;
  double lambda_hat = 0.0;
  double lambda_se = 0.0;
  double l2_norm_sq = 0.0;
};

}  // namespace fraceig
