#include "fraceig/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "fraceig/error.hpp"

namespace fraceig {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double cross(Vec2 o, Vec2 a, Vec2 b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

double segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

double signed_area(const std::vector<Vec2>& v) {
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2& a = v[i];
    const Vec2& b = v[(i + 1) % v.size()];
    acc += a.x * b.y - b.x * a.y;
  }
  return 0.5 * acc;
}

// Convex hull (monotone chain) without collinear points, counterclockwise.
std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }),
            pts.end());
  std::vector<Vec2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const Vec2& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 1e-12) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 1e-12) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

ConvexPiece make_piece(const std::vector<Vec2>& hull) {
  ConvexPiece piece;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Vec2 a = hull[i];
    const Vec2 b = hull[(i + 1) % hull.size()];
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    const Vec2 n{-(b.y - a.y) / len, (b.x - a.x) / len};
    const double offset = n.x * a.x + n.y * a.y;
    double height = 0.0;
    for (const Vec2& v : hull) height = std::max(height, n.x * v.x + n.y * v.y - offset);
    piece.normals.push_back(n);
    piece.offsets.push_back(offset);
    piece.heights.push_back(height);
  }
  return piece;
}

struct DrumData {
  std::vector<Vec2> vertices;
  std::vector<std::array<Vec2, 3>> tiles;
  std::vector<std::pair<int, int>> glued;
};

// Gordon-Webb-Wolpert pair: seven right isosceles triangles (unit legs) per
// drum, glued along the Schreier graphs of PSL(3,2) acting on the points and
// on the lines of the Fano plane. Drum A is the one with the smaller first
// fractional eigenvalue.
const DrumData& drum_data(DrumId id) {
  static const DrumData b{
      {{-1, -1}, {-2, -1}, {-1, 0}, {0, 0}, {0, 1}, {1, 1}, {1, 0}, {-1, -2}},
      {{{{0, 0}, {1, 0}, {0, 1}}},
       {{{0, 0}, {-1, 0}, {0, -1}}},
       {{{0, 0}, {1, 0}, {0, -1}}},
       {{{1, 1}, {1, 0}, {0, 1}}},
       {{{-1, -1}, {-1, 0}, {-2, -1}}},
       {{{-1, -1}, {-1, -2}, {0, -1}}},
       {{{-1, -1}, {-1, 0}, {0, -1}}}},
      {{0, 2}, {0, 3}, {1, 2}, {1, 6}, {4, 6}, {5, 6}}};
  static const DrumData a{
      {{0, -1}, {-1, 0}, {-1, 1}, {1, 1}, {1, 2}, {2, 1}, {1, 0}, {0, 0}},
      {{{{0, 0}, {1, 0}, {0, 1}}},
       {{{0, 0}, {-1, 0}, {0, -1}}},
       {{{0, 0}, {-1, 0}, {0, 1}}},
       {{{-1, 1}, {-1, 0}, {0, 1}}},
       {{{1, 1}, {1, 2}, {2, 1}}},
       {{{1, 1}, {1, 0}, {0, 1}}},
       {{{1, 1}, {1, 0}, {2, 1}}}},
      {{0, 2}, {0, 5}, {1, 2}, {2, 3}, {4, 6}, {5, 6}}};
  return id == DrumId::kA ? a : b;
}

std::shared_ptr<const TiledPolygon> build_polygon(const DrumData& data, double scale) {
  auto poly = std::make_shared<TiledPolygon>();
  for (const Vec2& v : data.vertices) poly->vertices.push_back({v.x * scale, v.y * scale});
  if (signed_area(poly->vertices) < 0.0) std::reverse(poly->vertices.begin(), poly->vertices.end());
  poly->area = signed_area(poly->vertices);
  for (const auto& t : data.tiles) {
    poly->tiles.push_back({Vec2{t[0].x * scale, t[0].y * scale}, Vec2{t[1].x * scale, t[1].y * scale},
                           Vec2{t[2].x * scale, t[2].y * scale}});
  }
  poly->glued = data.glued;
  for (const auto& [i, j] : poly->glued) {
    std::vector<Vec2> pts(poly->tiles[i].begin(), poly->tiles[i].end());
    pts.insert(pts.end(), poly->tiles[j].begin(), poly->tiles[j].end());
    poly->pieces.push_back(make_piece(convex_hull(pts)));
  }

  const auto& v = poly->vertices;
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 prev = v[(i + n - 1) % n];
    const Vec2 cur = v[i];
    const Vec2 next = v[(i + 1) % n];
    const double a_next = std::atan2(next.y - cur.y, next.x - cur.x);
    const double a_prev = std::atan2(prev.y - cur.y, prev.x - cur.x);
    double opening = std::fmod(a_prev - a_next + 2.0 * kTwoPi, kTwoPi);
    if (opening <= std::numbers::pi + 1e-9) continue;
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < n; ++e) {
      const std::size_t f = (e + 1) % n;
      if (e == i || f == i) continue;
      nearest = std::min(nearest, segment_distance(cur, v[e], v[f]));
    }
    double start = a_next < 0.0 ? a_next + kTwoPi : a_next;
    poly->corners.push_back({cur, start, opening, 0.5 * nearest});
  }
  return poly;
}

}  // namespace

bool TiledPolygon::contains(Vec2 p) const {
  const std::size_t n = vertices.size();
  const double tol = 1e-12 * std::sqrt(area);
  for (std::size_t i = 0; i < n; ++i) {
    if (segment_distance(p, vertices[i], vertices[(i + 1) % n]) <= tol) return true;
  }
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = vertices[i];
    const Vec2& b = vertices[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

std::shared_ptr<const TiledPolygon> drum_polygon(DrumId id, double scale) {
  if (!(scale > 0.0)) throw ConfigError("drum scale must be positive");
  return build_polygon(drum_data(id), scale);
}

std::string to_string(DrumId id) { return id == DrumId::kA ? "drumA" : "drumB"; }

Domain Domain::interval(double a, double b) {
  if (!(a < b)) throw ConfigError("interval requires a < b");
  return Domain(IntervalShape{a, b}, 1);
}

Domain Domain::box(std::vector<double> lo, std::vector<double> hi) {
  if (lo.empty() || lo.size() != hi.size()) throw ConfigError("box bounds must have equal, nonzero length");
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (!(lo[i] < hi[i])) throw ConfigError("box requires lo[i] < hi[i]");
  }
  const int d = static_cast<int>(lo.size());
  return Domain(BoxShape{std::move(lo), std::move(hi)}, d);
}

Domain Domain::ball(std::vector<double> center, double radius) {
  if (center.empty()) throw ConfigError("ball center must be nonempty");
  if (!(radius > 0.0)) throw ConfigError("ball radius must be positive");
  const int d = static_cast<int>(center.size());
  return Domain(BallShape{std::move(center), radius}, d);
}

Domain Domain::lshape() { return Domain(LShapeShape{}, 2); }

Domain Domain::drum(DrumId id, double scale) { return Domain(DrumShape{id, scale, drum_polygon(id, scale)}, 2); }

std::string Domain::name() const {
  struct {
    std::string operator()(const IntervalShape&) const { return "interval"; }
    std::string operator()(const BoxShape&) const { return "box"; }
    std::string operator()(const BallShape&) const { return "ball"; }
    std::string operator()(const LShapeShape&) const { return "lshape"; }
    std::string operator()(const DrumShape& d) const { return to_string(d.id); }
  } visitor;
  return std::visit(visitor, shape_);
}

bool Domain::contains(std::span<const double> x) const {
  if (const auto* s = std::get_if<IntervalShape>(&shape_)) return x[0] >= s->a && x[0] <= s->b;
  if (const auto* s = std::get_if<BoxShape>(&shape_)) {
    for (std::size_t i = 0; i < s->lo.size(); ++i) {
      if (x[i] < s->lo[i] || x[i] > s->hi[i]) return false;
    }
    return true;
  }
  if (const auto* s = std::get_if<BallShape>(&shape_)) {
    double r2 = 0.0;
    for (std::size_t i = 0; i < s->center.size(); ++i) {
      const double t = x[i] - s->center[i];
      r2 += t * t;
    }
    return r2 <= s->radius * s->radius;
  }
  if (std::holds_alternative<LShapeShape>(shape_)) {
    if (x[0] < -1.0 || x[0] > 1.0 || x[1] < -1.0 || x[1] > 1.0) return false;
    return x[0] <= 0.0 || x[1] <= 0.0;
  }
  const auto& drum = std::get<DrumShape>(shape_);
  return drum.polygon->contains({x[0], x[1]});
}

double Domain::volume() const {
  if (const auto* s = std::get_if<IntervalShape>(&shape_)) return s->b - s->a;
  if (const auto* s = std::get_if<BoxShape>(&shape_)) {
    double v = 1.0;
    for (std::size_t i = 0; i < s->lo.size(); ++i) v *= s->hi[i] - s->lo[i];
    return v;
  }
  if (const auto* s = std::get_if<BallShape>(&shape_)) return ball_volume(dim_, s->radius);
  if (std::holds_alternative<LShapeShape>(shape_)) return 3.0;
  return std::get<DrumShape>(shape_).polygon->area;
}

std::pair<std::vector<double>, std::vector<double>> Domain::bounding_box() const {
  if (const auto* s = std::get_if<IntervalShape>(&shape_)) return {{s->a}, {s->b}};
  if (const auto* s = std::get_if<BoxShape>(&shape_)) return {s->lo, s->hi};
  if (const auto* s = std::get_if<BallShape>(&shape_)) {
    std::vector<double> lo(s->center), hi(s->center);
    for (std::size_t i = 0; i < lo.size(); ++i) {
      lo[i] -= s->radius;
      hi[i] += s->radius;
    }
    return {lo, hi};
  }
  if (std::holds_alternative<LShapeShape>(shape_)) return {{-1.0, -1.0}, {1.0, 1.0}};
  const auto& verts = std::get<DrumShape>(shape_).polygon->vertices;
  std::vector<double> lo{verts[0].x, verts[0].y}, hi = lo;
  for (const Vec2& v : verts) {
    lo[0] = std::min(lo[0], v.x);
    lo[1] = std::min(lo[1], v.y);
    hi[0] = std::max(hi[0], v.x);
    hi[1] = std::max(hi[1], v.y);
  }
  return {lo, hi};
}

SamplingRegion SamplingRegion::box(std::vector<double> lo, std::vector<double> hi) {
  if (lo.empty() || lo.size() != hi.size()) throw ConfigError("region bounds must have equal, nonzero length");
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (!(lo[i] < hi[i])) throw ConfigError("region requires lo[i] < hi[i]");
  }
  SamplingRegion r;
  r.is_box_ = true;
  r.lo_or_center_ = std::move(lo);
  r.hi_ = std::move(hi);
  return r;
}

SamplingRegion SamplingRegion::ball(std::vector<double> center, double radius) {
  if (center.empty()) throw ConfigError("region center must be nonempty");
  if (!(radius > 0.0)) throw ConfigError("region radius must be positive");
  SamplingRegion r;
  r.is_box_ = false;
  r.lo_or_center_ = std::move(center);
  r.radius_ = radius;
  return r;
}

bool SamplingRegion::contains(std::span<const double> x) const {
  const std::size_t d = lo_or_center_.size();
  if (is_box_) {
    for (std::size_t i = 0; i < d; ++i) {
      if (x[i] < lo_or_center_[i] || x[i] > hi_[i]) return false;
    }
    return true;
  }
  double r2 = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double t = x[i] - lo_or_center_[i];
    r2 += t * t;
  }
  return r2 <= radius_ * radius_;
}

bool SamplingRegion::interior(std::span<const double> x) const {
  const std::size_t d = lo_or_center_.size();
  if (is_box_) {
    for (std::size_t i = 0; i < d; ++i) {
      if (!(x[i] > lo_or_center_[i] && x[i] < hi_[i])) return false;
    }
    return true;
  }
  double r2 = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double t = x[i] - lo_or_center_[i];
    r2 += t * t;
  }
  return r2 < radius_ * radius_;
}

std::string SamplingRegion::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (is_box_) {
    os << "box";
    for (std::size_t i = 0; i < lo_or_center_.size(); ++i) os << " [" << lo_or_center_[i] << "," << hi_[i] << "]";
  } else {
    os << "ball center (";
    for (std::size_t i = 0; i < lo_or_center_.size(); ++i) os << (i ? "," : "") << lo_or_center_[i];
    os << ") radius " << radius_;
  }
  return os.str();
}

void uniform_point(const SamplingRegion& region, SplitMix64& rng, std::span<double> out) {
  const int d = region.dim();
  for (;;) {
    if (region.is_box()) {
      for (int i = 0; i < d; ++i) {
        out[i] = region.lo()[i] + (region.hi()[i] - region.lo()[i]) * uniform01(rng);
      }
    } else {
      uniform_direction(d, rng, out);
      const double radius = region.radius() * std::pow(uniform01(rng), 1.0 / d);
      for (int i = 0; i < d; ++i) out[i] = region.center()[i] + radius * out[i];
    }
    if (region.interior(out)) return;
  }
}

void uniform_direction(int d, SplitMix64& rng, std::span<double> out) {
  if (d == 1) {
    out[0] = (rng() >> 63) != 0 ? 1.0 : -1.0;
    return;
  }
  std::normal_distribution<double> normal;
  for (;;) {
    double norm2 = 0.0;
    for (int i = 0; i < d; ++i) {
      out[i] = normal(rng);
      norm2 += out[i] * out[i];
    }
    if (norm2 > 1e-300) {
      const double inv = 1.0 / std::sqrt(norm2);
      for (int i = 0; i < d; ++i) out[i] *= inv;
      return;
    }
  }
}

double exit_distance(const SamplingRegion& region, std::span<const double> x, std::span<const double> xi) {
  if (!region.interior(x)) throw GeometryError("point not interior");
  const int d = region.dim();
  if (region.is_box()) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < d; ++i) {
      if (xi[i] > 0.0) {
        best = std::min(best, (region.hi()[i] - x[i]) / xi[i]);
      } else if (xi[i] < 0.0) {
        best = std::min(best, (region.lo()[i] - x[i]) / xi[i]);
      }
    }
    return best;
  }
  double b = 0.0;
  double c = -region.radius() * region.radius();
  for (int i = 0; i < d; ++i) {
    const double t = x[i] - region.center()[i];
    b += t * xi[i];
    c += t * t;
  }
  const double root = std::sqrt(b * b - c);
  // Positive root of t^2 + 2bt + c = 0 with c < 0, written without cancellation.
  return b <= 0.0 ? root - b : -c / (b + root);
}

double volume(const SamplingRegion& region) {
  if (region.is_box()) {
    double v = 1.0;
    for (int i = 0; i < region.dim(); ++i) v *= region.hi()[i] - region.lo()[i];
    return v;
  }
  return ball_volume(region.dim(), region.radius());
}

double sphere_area(int d) {
  if (d == 1) return 2.0;
  return 2.0 * std::exp(0.5 * d * std::log(std::numbers::pi) - std::lgamma(0.5 * d));
}

double ball_volume(int d, double radius) {
  return std::exp(0.5 * d * std::log(std::numbers::pi) + d * std::log(radius) - std::lgamma(0.5 * d + 1.0));
}

CornerPolar corner_polar(std::span<const double> x, Vec2 corner) {
  const double dx = x[0] - corner.x;
  const double dy = x[1] - corner.y;
  if (dx == 0.0 && dy == 0.0) return {0.0, 0.0};
  double theta = std::atan2(dy, dx);
  if (theta < 0.0) theta += kTwoPi;
  if (theta >= kTwoPi) theta = 0.0;
  return {std::hypot(dx, dy), theta};
}

SamplingRegion default_sampling_region(const Domain& domain) {
  const DomainShape& shape = domain.shape();
  if (const auto* s = std::get_if<BallShape>(&shape)) return SamplingRegion::ball(s->center, s->radius);
  auto [lo, hi] = domain.bounding_box();
  return SamplingRegion::box(std::move(lo), std::move(hi));
}

void check_region_contains(const Domain& domain, const SamplingRegion& region, std::size_t samples,
                           std::uint64_t seed) {
  if (region.dim() != domain.dim()) throw ConfigError("sampling region dimension differs from domain");
  auto [lo, hi] = domain.bounding_box();
  const SamplingRegion bbox = SamplingRegion::box(lo, hi);
  const StreamKey key = stream(seed, StreamPurpose::kRegionCheck);
  std::vector<double> x(domain.dim());
  std::size_t accepted = 0;
  for (std::uint64_t i = 0; accepted < samples; ++i) {
    SplitMix64 rng = key.generator(i);
    uniform_point(bbox, rng, x);
    if (!domain.contains(x)) continue;
    ++accepted;
    if (!region.contains(x)) throw ConfigError("sampling region does not contain the domain");
  }
}

}  // namespace fraceig
