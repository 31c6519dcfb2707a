#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fraceig/random.hpp"

namespace fraceig {

/// Contiguous storage for points of a fixed dimension (point-major).
class PointSet {
 public:
  PointSet() = default;
  PointSet(int dim, std::size_t count) : dim_(dim), coords_(static_cast<std::size_t>(dim) * count) {}

  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] std::size_t size() const { return dim_ == 0 ? 0 : coords_.size() / dim_; }
  [[nodiscard]] bool empty() const { return coords_.empty(); }

  std::span<double> operator[](std::size_t i) { return {coords_.data() + i * dim_, static_cast<std::size_t>(dim_)}; }
  std::span<const double> operator[](std::size_t i) const {
    return {coords_.data() + i * dim_, static_cast<std::size_t>(dim_)};
  }

  double* data() { return coords_.data(); }
  [[nodiscard]] const double* data() const { return coords_.data(); }

  void reserve(std::size_t count) { coords_.reserve(count * dim_); }
  void push_back(std::span<const double> x) { coords_.insert(coords_.end(), x.begin(), x.end()); }
  void resize(std::size_t count) { coords_.resize(count * dim_); }

 private:
  int dim_ = 0;
  std::vector<double> coords_;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Convex polygon given by half-planes n.x - offset >= 0, each scaled by
/// 1/height so that the normalized edge distances are at most one.
struct ConvexPiece {
  std::vector<Vec2> normals;
  std::vector<double> offsets;
  std::vector<double> heights;
};

/// Reentrant corner of a polygon: the domain occupies the wedge of opening
/// `opening` that starts at `start_angle` and sweeps counterclockwise.
struct ReentrantCorner {
  Vec2 position;
  double start_angle = 0.0;
  double opening = 0.0;
  double bump_radius = 0.0;
};

/// Polygon assembled from right isosceles triangles glued along edges.
struct TiledPolygon {
  std::vector<Vec2> vertices;  // counterclockwise
  std::vector<std::array<Vec2, 3>> tiles;
  std::vector<std::pair<int, int>> glued;
  std::vector<ConvexPiece> pieces;  // one per glued pair of tiles
  std::vector<ReentrantCorner> corners;
  double area = 0.0;

  [[nodiscard]] bool contains(Vec2 p) const;
};

enum class DrumId { kA, kB };

struct IntervalShape {
  double a = -1.0;
  double b = 1.0;
};

struct BoxShape {
  std::vector<double> lo;
  std::vector<double> hi;
};

struct BallShape {
  std::vector<double> center;
  double radius = 1.0;
};

/// [-1,1]^2 with the closed quadrant [0,1]^2 removed (its closure is used).
struct LShapeShape {};

struct DrumShape {
  DrumId id = DrumId::kA;
  double scale = 1.0;
  std::shared_ptr<const TiledPolygon> polygon;
};

using DomainShape = std::variant<IntervalShape, BoxShape, BallShape, LShapeShape, DrumShape>;

/// The bounded problem domain.
class Domain {
 public:
  static Domain interval(double a, double b);
  static Domain box(std::vector<double> lo, std::vector<double> hi);
  static Domain ball(std::vector<double> center, double radius);
  static Domain lshape();
  static Domain drum(DrumId id, double scale = 1.0);

  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] const DomainShape& shape() const { return shape_; }
  [[nodiscard]] std::string name() const;

  /// Closed-domain membership.
  [[nodiscard]] bool contains(std::span<const double> x) const;
  [[nodiscard]] double volume() const;
  [[nodiscard]] std::pair<std::vector<double>, std::vector<double>> bounding_box() const;

 private:
  Domain(DomainShape shape, int dim) : shape_(std::move(shape)), dim_(dim) {}

  DomainShape shape_;
  int dim_ = 1;
};

/// Convex sampling region D containing the domain.
class SamplingRegion {
 public:
  static SamplingRegion box(std::vector<double> lo, std::vector<double> hi);
  static SamplingRegion ball(std::vector<double> center, double radius);

  [[nodiscard]] int dim() const { return static_cast<int>(lo_or_center_.size()); }
  [[nodiscard]] bool is_box() const { return is_box_; }
  [[nodiscard]] const std::vector<double>& lo() const { return lo_or_center_; }
  [[nodiscard]] const std::vector<double>& hi() const { return hi_; }
  [[nodiscard]] const std::vector<double>& center() const { return lo_or_center_; }
  [[nodiscard]] double radius() const { return radius_; }

  [[nodiscard]] bool contains(std::span<const double> x) const;
  [[nodiscard]] bool interior(std::span<const double> x) const;
  [[nodiscard]] std::string describe() const;

 private:
  bool is_box_ = true;
  std::vector<double> lo_or_center_;
  std::vector<double> hi_;
  double radius_ = 0.0;
};

struct CornerPolar {
  double r = 0.0;
  double theta = 0.0;  // in [0, 2 pi)
};

/// Uniform draw from the region; points on the boundary are redrawn.
void uniform_point(const SamplingRegion& region, SplitMix64& rng, std::span<double> out);

/// Uniform unit vector on S^{d-1}; for d = 1 this is +1 or -1.
void uniform_direction(int d, SplitMix64& rng, std::span<double> out);

/// Distance from an interior point to the region boundary along xi.
/// Throws GeometryError("point not interior") otherwise.
double exit_distance(const SamplingRegion& region, std::span<const double> x, std::span<const double> xi);

inline bool contains(const Domain& domain, std::span<const double> x) { return domain.contains(x); }

double volume(const SamplingRegion& region);

/// Surface measure of the unit sphere S^{d-1} (2 for d = 1).
double sphere_area(int d);

/// Lebesgue measure of a d-ball of the given radius.
double ball_volume(int d, double radius);

/// Polar coordinates of x about `corner`; the corner itself maps to (0, 0).
CornerPolar corner_polar(std::span<const double> x, Vec2 corner = {});

/// D = Omega for convex domains, the axis-aligned bounding box otherwise.
SamplingRegion default_sampling_region(const Domain& domain);

/// Rejection test: draws `samples` uniform points of the domain and throws
/// ConfigError if any of them falls outside the region.
void check_region_contains(const Domain& domain, const SamplingRegion& region, std::size_t samples,
                           std::uint64_t seed);

/// Embedded vertex and tile data of the isospectral drum pair (unit legs).
std::shared_ptr<const TiledPolygon> drum_polygon(DrumId id, double scale);

std::string to_string(DrumId id);

}  // namespace fraceig
