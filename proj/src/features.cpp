#include "fraceig/features.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "fraceig/error.hpp"

namespace fraceig {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kDerivativeFloor = 1e-12;
constexpr int kMaxFeatures = 256;

using SmallArray = Eigen::Array<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxFeatures, 1>;

const ReentrantCorner kLShapeCorner{{0.0, 0.0}, std::numbers::pi / 2.0, 1.5 * std::numbers::pi, 0.5};

bool accepts(const Domain& domain, FeatureKind kind) {
  const DomainShape& shape = domain.shape();
  switch (kind) {
    case FeatureKind::kBallPower:
      return std::holds_alternative<BallShape>(shape) || std::holds_alternative<IntervalShape>(shape);
    case FeatureKind::kBoxProduct:
      return std::holds_alternative<BoxShape>(shape) || std::holds_alternative<IntervalShape>(shape);
    case FeatureKind::kLShapeBoundary:
    case FeatureKind::kLShapeCorner:
      return std::holds_alternative<LShapeShape>(shape);
    case FeatureKind::kDrumBoundary:
    case FeatureKind::kDrumCorner:
      return std::holds_alternative<DrumShape>(shape);
  }
  return false;
}

// Base of the power-type features together with its gradient.
double power_base(FeatureKind kind, const Domain& domain, std::span<const double> x, std::span<double> grad) {
  const int d = domain.dim();
  const bool want_grad = !grad.empty();
  if (want_grad) std::fill(grad.begin(), grad.end(), 0.0);
  const DomainShape& shape = domain.shape();

  if (kind == FeatureKind::kBallPower) {
    double center[16] = {};
    double radius = 1.0;
    if (const auto* s = std::get_if<IntervalShape>(&shape)) {
      center[0] = 0.5 * (s->a + s->b);
      radius = 0.5 * (s->b - s->a);
    } else {
      const auto& b = std::get<BallShape>(shape);
      std::copy(b.center.begin(), b.center.end(), center);
      radius = b.radius;
    }
    double r2 = 0.0;
    for (int k = 0; k < d; ++k) {
      const double z = (x[k] - center[k]) / radius;
      r2 += z * z;
    }
    const double base = 1.0 - r2;
    if (base <= 0.0) return 0.0;
    if (want_grad) {
      for (int k = 0; k < d; ++k) grad[k] = -2.0 * (x[k] - center[k]) / (radius * radius);
    }
    return base;
  }

  if (kind == FeatureKind::kBoxProduct) {
    double lo[16], hi[16];
    if (const auto* s = std::get_if<IntervalShape>(&shape)) {
      lo[0] = s->a;
      hi[0] = s->b;
    } else {
      const auto& b = std::get<BoxShape>(shape);
      std::copy(b.lo.begin(), b.lo.end(), lo);
      std::copy(b.hi.begin(), b.hi.end(), hi);
    }
    double f[16], dz[16];
    double base = 1.0;
    for (int k = 0; k < d; ++k) {
      const double scale = 2.0 / (hi[k] - lo[k]);
      const double z = (x[k] - lo[k]) * scale - 1.0;
      f[k] = 1.0 - z * z;
      if (f[k] <= 0.0) return 0.0;
      dz[k] = -2.0 * z * scale;
      base *= f[k];
    }
    if (want_grad) {
      for (int k = 0; k < d; ++k) {
        double others = 1.0;
        for (int i = 0; i < d; ++i) {
          if (i != k) others *= f[i];
        }
        grad[k] = others * dz[k];
      }
    }
    return base;
  }

  if (kind == FeatureKind::kLShapeBoundary) {
    const double x1 = x[0], x2 = x[1];
    const double s1 = std::max(-x1 * (x1 + 1.0), 0.0);
    const double t1 = std::max(1.0 - x2 * x2, 0.0);
    const double s2 = std::max(-x2 * (x2 + 1.0), 0.0);
    const double t2 = std::max(1.0 - x1 * x1, 0.0);
    const double first = s1 * t1;
    const double second = s2 * t2;
    if (first <= 0.0 && second <= 0.0) return 0.0;
    if (want_grad) {
      if (first >= second) {
        grad[0] = (-2.0 * x1 - 1.0) * t1;
        grad[1] = s1 * (-2.0 * x2);
      } else {
        grad[0] = s2 * (-2.0 * x1);
        grad[1] = (-2.0 * x2 - 1.0) * t2;
      }
    }
    return std::max(first, second);
  }

  // Drum boundary: maximum over convex pieces of the normalized edge-distance product.
  const TiledPolygon& poly = *std::get<DrumShape>(shape).polygon;
  double best = 0.0;
  int best_piece = -1;
  for (std::size_t p = 0; p < poly.pieces.size(); ++p) {
    const ConvexPiece& piece = poly.pieces[p];
    double prod = 1.0;
    for (std::size_t e = 0; e < piece.normals.size() && prod > 0.0; ++e) {
      const double dist = piece.normals[e].x * x[0] + piece.normals[e].y * x[1] - piece.offsets[e];
      prod *= std::max(dist / piece.heights[e], 0.0);
    }
    if (prod > best) {
      best = prod;
      best_piece = static_cast<int>(p);
    }
  }
  if (best_piece >= 0 && want_grad) {
    const ConvexPiece& piece = poly.pieces[best_piece];
    const std::size_t edges = piece.normals.size();
    for (std::size_t e = 0; e < edges; ++e) {
      double others = 1.0;
      for (std::size_t f = 0; f < edges; ++f) {
        if (f == e) continue;
        others *= (piece.normals[f].x * x[0] + piece.normals[f].y * x[1] - piece.offsets[f]) / piece.heights[f];
      }
      grad[0] += others * piece.normals[e].x / piece.heights[e];
      grad[1] += others * piece.normals[e].y / piece.heights[e];
    }
  }
  return best;
}

struct CornerTerm {
  double radial = 0.0;   // B(r / rho) * sin(omega * theta_rel)
  double log_r = 0.0;
  double gx = 0.0, gy = 0.0;  // gradient of B * sin
  // radial unit vector
  double ex = 0.0, ey = 0.0;
  double r = 0.0;
};

bool corner_term(const ReentrantCorner& c, std::span<const double> x, bool want_grad, CornerTerm& out) {
  const CornerPolar polar = corner_polar(x, c.position);
  if (polar.r <= 0.0 || polar.r >= c.bump_radius) return false;
  double rel = polar.theta - c.start_angle;
  if (rel < 0.0) rel += kTwoPi;
  if (rel > c.opening) return false;
  const double omega = std::numbers::pi / c.opening;
  const double z = polar.r / c.bump_radius;
  const double b = bump(z);
  const double sn = std::sin(omega * rel);
  out.radial = b * sn;
  out.log_r = std::log(polar.r);
  out.r = polar.r;
  if (want_grad) {
    const double one_minus = 1.0 - z * z;
    const double db_dr = b * (-2.0 * z / (one_minus * one_minus)) / c.bump_radius;
    const double ct = std::cos(polar.theta), st = std::sin(polar.theta);
    out.ex = ct;
    out.ey = st;
    const double along_r = db_dr * sn;
    const double along_theta = b * omega * std::cos(omega * rel) / polar.r;
    out.gx = along_r * ct - along_theta * st;
    out.gy = along_r * st + along_theta * ct;
  }
  return true;
}

std::span<const ReentrantCorner> corners_of(const Domain& domain) {
  if (std::holds_alternative<LShapeShape>(domain.shape())) return {&kLShapeCorner, 1};
  const auto& corners = std::get<DrumShape>(domain.shape()).polygon->corners;
  return {corners.data(), corners.size()};
}

}  // namespace

std::string_view token(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kBallPower: return "ball_power";
    case FeatureKind::kBoxProduct: return "box_product";
    case FeatureKind::kLShapeBoundary: return "lshape_boundary";
    case FeatureKind::kLShapeCorner: return "lshape_corner";
    case FeatureKind::kDrumBoundary: return "drum_boundary";
    case FeatureKind::kDrumCorner: return "drum_corner";
  }
  return "unknown";
}

FeatureKind parse_feature_kind(std::string_view text) {
  for (FeatureKind k : {FeatureKind::kBallPower, FeatureKind::kBoxProduct, FeatureKind::kLShapeBoundary,
                        FeatureKind::kLShapeCorner, FeatureKind::kDrumBoundary, FeatureKind::kDrumCorner}) {
    if (token(k) == text) return k;
  }
  throw FormatError("unknown feature type '" + std::string(text) + "'");
}

bool is_boundary_kind(FeatureKind kind) {
  return kind != FeatureKind::kLShapeCorner && kind != FeatureKind::kDrumCorner;
}

FeatureKind boundary_kind_for(const Domain& domain) {
  const DomainShape& shape = domain.shape();
  if (std::holds_alternative<BoxShape>(shape)) return FeatureKind::kBoxProduct;
  if (std::holds_alternative<LShapeShape>(shape)) return FeatureKind::kLShapeBoundary;
  if (std::holds_alternative<DrumShape>(shape)) return FeatureKind::kDrumBoundary;
  return FeatureKind::kBallPower;
}

FeatureKind corner_kind_for(const Domain& domain) {
  const DomainShape& shape = domain.shape();
  if (std::holds_alternative<LShapeShape>(shape)) return FeatureKind::kLShapeCorner;
  if (std::holds_alternative<DrumShape>(shape)) return FeatureKind::kDrumCorner;
  throw ConfigError("corner features require an lshape or drum domain");
}

bool has_corner_features(const Domain& domain) {
  const DomainShape& shape = domain.shape();
  return std::holds_alternative<LShapeShape>(shape) || std::holds_alternative<DrumShape>(shape);
}

std::vector<double> linspace_exponents(double lo, double hi, int m) {
  if (m < 1) throw ConfigError("feature count must be at least 1");
  if (lo > hi) throw ConfigError("exponent interval requires lo <= hi");
  std::vector<double> out(m);
  if (m == 1) {
    out[0] = lo;
    return out;
  }
  for (int k = 0; k < m; ++k) out[k] = lo + k * (hi - lo) / (m - 1);
  out[m - 1] = hi;
  return out;
}

double bump(double z) {
  const double t = 1.0 - z * z;
  return t > 0.0 ? std::exp(-1.0 / t) : 0.0;
}

FeatureSet::FeatureSet(Domain domain, std::vector<FeatureSpec> specs)
    : domain_(std::move(domain)), specs_(std::move(specs)) {
  if (specs_.empty()) throw ConfigError("feature set must be nonempty");
  if (domain_.dim() > 16) throw ConfigError("features support at most 16 dimensions");
  if (size() > kMaxFeatures) throw ConfigError("at most 256 features are supported");
  for (int j = 0; j < size(); ++j) {
    const FeatureSpec& spec = specs_[j];
    if (!accepts(domain_, spec.kind)) {
      throw ConfigError("feature type " + std::string(token(spec.kind)) + " does not match domain " + domain_.name());
    }
    if (!(spec.exponent > 0.0) || !std::isfinite(spec.exponent)) {
      throw ConfigError("feature exponent must be positive");
    }
    auto it = std::find_if(groups_.begin(), groups_.end(), [&](const Group& g) { return g.kind == spec.kind; });
    if (it == groups_.end()) {
      groups_.push_back({spec.kind, {}, {}});
      it = groups_.end() - 1;
    }
    it->index.push_back(j);
    it->exponent.push_back(spec.exponent);
  }
}

FeatureSet FeatureSet::standard(const Domain& domain, int boundary_count, double boundary_lo, double boundary_hi,
                                int corner_count, double corner_lo, double corner_hi) {
  std::vector<FeatureSpec> specs;
  const FeatureKind bk = boundary_kind_for(domain);
  for (double p : linspace_exponents(boundary_lo, boundary_hi, boundary_count)) specs.push_back({bk, p});
  if (corner_count > 0) {
    const FeatureKind ck = corner_kind_for(domain);
    for (double t : linspace_exponents(corner_lo, corner_hi, corner_count)) specs.push_back({ck, t});
  }
  return FeatureSet(domain, std::move(specs));
}

void FeatureSet::eval(std::span<const double> x, std::span<double> out) const {
  for (const Group& g : groups_) {
    const auto count = static_cast<Eigen::Index>(g.index.size());
    const Eigen::Map<const Eigen::ArrayXd> p(g.exponent.data(), count);
    SmallArray values;
    if (is_boundary_kind(g.kind)) {
      const double base = power_base(g.kind, domain_, x, {});
      if (base > 0.0) {
        values = (p * std::log(base)).exp();
      } else {
        values = SmallArray::Zero(count);
      }
    } else {
      values = SmallArray::Zero(count);
      for (const ReentrantCorner& c : corners_of(domain_)) {
        CornerTerm term;
        if (corner_term(c, x, false, term)) values += term.radial * (p * term.log_r).exp();
      }
    }
    for (Eigen::Index i = 0; i < count; ++i) out[g.index[i]] = values[i];
  }
}

void FeatureSet::eval_gradient(std::span<const double> x, std::span<double> values, std::span<double> grad) const {
  const int d = domain_.dim();
  std::fill(grad.begin(), grad.end(), 0.0);
  double base_grad[16];
  for (const Group& g : groups_) {
    for (std::size_t i = 0; i < g.index.size(); ++i) {
      const int j = g.index[i];
      const double p = g.exponent[i];
      if (is_boundary_kind(g.kind)) {
        const double base = power_base(g.kind, domain_, x, {base_grad, static_cast<std::size_t>(d)});
        if (base <= 0.0) {
          values[j] = 0.0;
          continue;
        }
        values[j] = std::pow(base, p);
        const double slope = p * std::pow(std::max(base, kDerivativeFloor), p - 1.0);
        for (int k = 0; k < d; ++k) grad[j * d + k] = slope * base_grad[k];
      } else {
        values[j] = 0.0;
        for (const ReentrantCorner& c : corners_of(domain_)) {
          CornerTerm term;
          if (!corner_term(c, x, true, term)) continue;
          const double rt = std::exp(p * term.log_r);
          values[j] += term.radial * rt;
          const double radial_power = term.radial * p * rt / term.r;
          grad[j * d + 0] += rt * term.gx + radial_power * term.ex;
          grad[j * d + 1] += rt * term.gy + radial_power * term.ey;
        }
      }
    }
  }
}

double eval_feature(const FeatureSpec& spec, const Domain& domain, std::span<const double> x) {
  const FeatureSet set(domain, {spec});
  double out = 0.0;
  set.eval(x, {&out, 1});
  return out;
}

}  // namespace fraceig
