#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fraceig/geometry.hpp"

namespace fraceig {

enum class FeatureKind {
  kBallPower,
  kBoxProduct,
  kLShapeBoundary,
  kLShapeCorner,
  kDrumBoundary,
  kDrumCorner,
};

struct FeatureSpec {
  FeatureKind kind = FeatureKind::kBallPower;
  double exponent = 1.0;

  bool operator==(const FeatureSpec&) const = default;
};

/// Checkpoint token, e.g. "ball_power".
std::string_view token(FeatureKind kind);
FeatureKind parse_feature_kind(std::string_view text);

/// Boundary-type (true) or corner-type (false) feature.
bool is_boundary_kind(FeatureKind kind);

/// Feature kinds that make sense on the given domain.
FeatureKind boundary_kind_for(const Domain& domain);
FeatureKind corner_kind_for(const Domain& domain);
bool has_corner_features(const Domain& domain);

std::vector<double> linspace_exponents(double lo, double hi, int m);

/// exp(-1/(1-z^2)) on |z| < 1, zero elsewhere.
double bump(double z);

/// Ordered feature list bound to a domain (the domain supplies the affine
/// rescaling for boxes and balls and the polygon data for drums).
class FeatureSet {
 public:
  FeatureSet(Domain domain, std::vector<FeatureSpec> specs);

  /// boundary_count features with exponents on [boundary_lo, boundary_hi],
  /// followed by corner_count corner features on [corner_lo, corner_hi].
  static FeatureSet standard(const Domain& domain, int boundary_count, double boundary_lo, double boundary_hi,
                             int corner_count = 0, double corner_lo = 2.0 / 3.0, double corner_hi = 1.5);

  [[nodiscard]] int size() const { return static_cast<int>(specs_.size()); }
  [[nodiscard]] const std::vector<FeatureSpec>& specs() const { return specs_; }
  [[nodiscard]] const Domain& domain() const { return domain_; }

  /// out[j] = q_j(x).
  void eval(std::span<const double> x, std::span<double> out) const;

  /// Values and gradients; grad is feature-major (grad[j*d + k] = dq_j/dx_k).
  void eval_gradient(std::span<const double> x, std::span<double> values, std::span<double> grad) const;

 private:
  struct Group {
    FeatureKind kind;
    std::vector<int> index;
    std::vector<double> exponent;
  };

  Domain domain_;
  std::vector<FeatureSpec> specs_;
  std::vector<Group> groups_;
};

double eval_feature(const FeatureSpec& spec, const Domain& domain, std::span<const double> x);

}  // namespace fraceig
