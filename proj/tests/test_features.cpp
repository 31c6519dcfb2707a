#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "fraceig/error.hpp"
#include "fraceig/features.hpp"

using namespace fraceig;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> eval_all(const FeatureSet& f, std::vector<double> x) {
  std::vector<double> out(f.size());
  f.eval(x, out);
  return out;
}

struct Case {
  const char* name;
  FeatureSet features;
};

std::vector<Case> standard_sets() {
  const Domain lshape = Domain::lshape();
  const Domain a = Domain::drum(DrumId::kA);
  const Domain b = Domain::drum(DrumId::kB);
  return {
      {"interval", FeatureSet::standard(Domain::interval(-1.0, 1.0), 40, 0.05, 3.0)},
      {"square", FeatureSet::standard(Domain::box({-1.0, -1.0}, {1.0, 1.0}), 40, 0.5, 3.0)},
      {"ball3", FeatureSet::standard(Domain::ball({0.0, 0.0, 0.0}, 1.0), 40, 0.5, 3.0)},
      {"lshape", FeatureSet::standard(lshape, 40, 0.5, 3.0, 20)},
      {"drumA", FeatureSet::standard(a, 40, 0.5, 3.0, 20)},
      {"drumB", FeatureSet::standard(b, 40, 0.5, 3.0, 20)},
  };
}

}  // namespace

TEST_CASE("linspace_exponents") {
  CHECK(linspace_exponents(0.5, 3.0, 3) == std::vector<double>{0.5, 1.75, 3.0});
  const auto two = linspace_exponents(2.0 / 3.0, 1.5, 2);
  CHECK(two.front() == 2.0 / 3.0);
  CHECK(two.back() == 1.5);
  const auto forty = linspace_exponents(0.25, 3.0, 40);
  CHECK(forty.size() == 40);
  CHECK(forty[1] - forty[0] == doctest::Approx(2.75 / 39.0).epsilon(1e-12));
  CHECK(forty.back() == 3.0);
  CHECK_THROWS_AS(linspace_exponents(0.5, 3.0, 0), ConfigError);
  CHECK_THROWS_AS(linspace_exponents(3.0, 0.5, 4), ConfigError);
}

TEST_CASE("bump function") {
  CHECK(bump(0.0) == doctest::Approx(0.36787944117144233).epsilon(1e-15));
  CHECK(bump(1.0) == 0.0);
  CHECK(bump(-1.0) == 0.0);
  CHECK(bump(0.5) == doctest::Approx(std::exp(-4.0 / 3.0)).epsilon(1e-15));
  CHECK(bump(0.5) == doctest::Approx(0.263597138115727).epsilon(1e-12));
  CHECK(bump(2.0) == 0.0);
}

TEST_CASE("single feature values") {
  CHECK(eval_feature({FeatureKind::kBallPower, 1.0}, Domain::ball({0.0, 0.0}, 1.0), std::vector<double>{0.0, 0.0}) ==
        1.0);
  CHECK(eval_feature({FeatureKind::kLShapeBoundary, 1.0}, Domain::lshape(), std::vector<double>{-0.5, -0.5}) ==
        doctest::Approx(0.1875).epsilon(1e-15));
  // r = 0.25 at theta = 3 pi / 2: bump(0.5) * sin(2 pi / 3) * 0.25.
  const double corner = eval_feature({FeatureKind::kLShapeCorner, 1.0}, Domain::lshape(), std::vector<double>{0.0, -0.25});
  CHECK(corner == doctest::Approx(std::exp(-4.0 / 3.0) * std::sqrt(3.0) / 2.0 * 0.25).epsilon(1e-14));
  CHECK(corner == doctest::Approx(0.0570713).epsilon(1e-6));
  CHECK(eval_feature({FeatureKind::kBoxProduct, 2.0}, Domain::box({-1.0, -1.0}, {1.0, 1.0}),
                     std::vector<double>{0.5, 0.0}) == doctest::Approx(0.5625).epsilon(1e-15));
}

TEST_CASE("ball power set at the center is all ones") {
  const FeatureSet f(Domain::ball({0.0, 0.0, 0.0}, 1.0),
                     {{FeatureKind::kBallPower, 0.5}, {FeatureKind::kBallPower, 1.75}, {FeatureKind::kBallPower, 3.0}});
  CHECK(eval_all(f, {0.0, 0.0, 0.0}) == std::vector<double>{1.0, 1.0, 1.0});
}

TEST_CASE("feature sets reject mismatched kinds and exponents") {
  CHECK_THROWS_AS(FeatureSet(Domain::interval(-1, 1), {{FeatureKind::kLShapeBoundary, 1.0}}), ConfigError);
  CHECK_THROWS_AS(FeatureSet(Domain::lshape(), {{FeatureKind::kLShapeBoundary, 0.0}}), ConfigError);
  CHECK_THROWS_AS(FeatureSet(Domain::lshape(), {}), ConfigError);
  CHECK_THROWS_AS(FeatureSet::standard(Domain::interval(-1, 1), 10, 0.5, 3.0, 5), ConfigError);
}

TEST_CASE("tokens round-trip") {
  for (FeatureKind k : {FeatureKind::kBallPower, FeatureKind::kBoxProduct, FeatureKind::kLShapeBoundary,
                        FeatureKind::kLShapeCorner, FeatureKind::kDrumBoundary, FeatureKind::kDrumCorner}) {
    CHECK(parse_feature_kind(token(k)) == k);
  }
  CHECK_THROWS_AS(parse_feature_kind("triangle"), FormatError);
}

TEST_CASE("every feature vanishes on the exterior") {
  for (const Case& c : standard_sets()) {
    INFO(c.name);
    const Domain& domain = c.features.domain();
    const int d = domain.dim();
    auto [lo, hi] = domain.bounding_box();
    for (int k = 0; k < d; ++k) {
      const double pad = 0.5 * (hi[k] - lo[k]);
      lo[k] -= pad;
      hi[k] += pad;
    }
    const SamplingRegion wide = SamplingRegion::box(lo, hi);
    std::vector<double> x(d), out(c.features.size());
    int tested = 0;
    for (int i = 0; tested < 100000; ++i) {
      SplitMix64 g = StreamKey(11).generator(i);
      uniform_point(wide, g, x);
      if (domain.contains(x)) continue;
      ++tested;
      c.features.eval(x, out);
      for (double v : out) REQUIRE(v == 0.0);
    }
  }
}

TEST_CASE("features are positive inside") {
  for (const Case& c : standard_sets()) {
    INFO(c.name);
    const Domain& domain = c.features.domain();
    const SamplingRegion region = default_sampling_region(domain);
    std::vector<double> x(domain.dim()), out(c.features.size());
    for (int i = 0; i < 20000; ++i) {
      SplitMix64 g = StreamKey(12).generator(i);
      uniform_point(region, g, x);
      if (!domain.contains(x)) continue;
      c.features.eval(x, out);
      for (int j = 0; j < c.features.size(); ++j) {
        if (is_boundary_kind(c.features.specs()[j].kind)) REQUIRE(out[j] > 0.0);
      }
    }
  }
}

TEST_CASE("boundary features decay like distance^p") {
  // Approach the boundary of the unit disk along inward rays.
  const Domain disk = Domain::ball({0.0, 0.0}, 1.0);
  for (double p : {0.05, 0.5, 1.0, 3.0}) {
    for (int i = 0; i < 1000; ++i) {
      const double phi = 2.0 * kPi * i / 1000.0;
      const double delta = 1e-6;
      const std::vector<double> x{(1.0 - delta) * std::cos(phi), (1.0 - delta) * std::sin(phi)};
      const double v = eval_feature({FeatureKind::kBallPower, p}, disk, x);
      // 1 - |x|^2 = delta (2 - delta) <= 2 delta.
      REQUIRE(v <= std::pow(2.0 * delta, p) * (1.0 + 1e-12));
      if (p >= 1.0) REQUIRE(v < 1e-3);
    }
  }
  // L-shape: points 1e-6 inside each edge.
  const Domain l = Domain::lshape();
  const std::vector<std::vector<double>> near_edges{{-0.5, -1.0 + 1e-6}, {1.0 - 1e-6, -0.5}, {0.5, -1e-6},
                                                    {-1e-6, 0.5},        {-0.5, 1.0 - 1e-6}, {-1.0 + 1e-6, 0.3}};
  for (const auto& x : near_edges) {
    for (double p : {1.0, 2.0, 3.0}) CHECK(eval_feature({FeatureKind::kLShapeBoundary, p}, l, x) < 1e-3);
  }
}

TEST_CASE("L-shape corner angular factor vanishes on both walls") {
  const Domain l = Domain::lshape();
  for (double r : {0.01, 0.1, 0.3, 0.45}) {
    for (double t : {2.0 / 3.0, 1.0, 1.5}) {
      CHECK(eval_feature({FeatureKind::kLShapeCorner, t}, l, std::vector<double>{0.0, r}) == doctest::Approx(0.0));
      CHECK(eval_feature({FeatureKind::kLShapeCorner, t}, l, std::vector<double>{r, 0.0}) == doctest::Approx(0.0));
    }
  }
}

TEST_CASE("analytic gradients match central differences away from the boundary") {
  for (const Case& c : standard_sets()) {
    INFO(c.name);
    const FeatureSet& f = c.features;
    const Domain& domain = f.domain();
    const int d = domain.dim();
    const int m = f.size();
    const SamplingRegion region = default_sampling_region(domain);
    std::vector<double> x(d), xp(d), values(m), grad(m * d), plus(m), minus(m), plus2(m), minus2(m);
    int checked = 0;
    for (int i = 0; checked < 1000; ++i) {
      SplitMix64 g = StreamKey(13).generator(i);
      uniform_point(region, g, x);
      // Stay 0.05 away from the boundary and from the corners.
      bool ok = domain.contains(x);
      for (int k = 0; ok && k < 8; ++k) {
        const double phi = 2.0 * kPi * k / 8.0;
        xp = x;
        xp[0] += 0.05 * std::cos(phi);
        if (d > 1) xp[1] += 0.05 * std::sin(phi);
        if (!domain.contains(xp)) ok = false;
      }
      if (!ok) continue;
      f.eval_gradient(x, values, grad);
      const double h = 1e-5;
      bool kink = false;
      std::vector<double> fd(m * d);
      for (int k = 0; k < d; ++k) {
        xp = x;
        xp[k] = x[k] + h;
        f.eval(xp, plus);
        xp[k] = x[k] - h;
        f.eval(xp, minus);
        xp[k] = x[k] + 2 * h;
        f.eval(xp, plus2);
        xp[k] = x[k] - 2 * h;
        f.eval(xp, minus2);
        for (int j = 0; j < m; ++j) {
          fd[j * d + k] = (8.0 * (plus[j] - minus[j]) - (plus2[j] - minus2[j])) / (12.0 * h);
          // One-sided slopes disagree across the max-of-pieces seam (L-shape, drums).
          const double right = (plus[j] - values[j]) / h;
          const double left = (values[j] - minus[j]) / h;
          if (std::abs(right - left) > 1e-3 * (1.0 + std::abs(right))) kink = true;
        }
      }
      if (kink) continue;
      ++checked;
      for (int j = 0; j < m; ++j) {
        for (int k = 0; k < d; ++k) {
          const double a = grad[j * d + k];
          const double b = fd[j * d + k];
          REQUIRE(std::abs(a - b) <= 1e-6 * std::max({std::abs(a), std::abs(b), 1e-3}));
        }
      }
    }
  }
}

TEST_CASE("drum features vanish on the drum boundary") {
  for (DrumId id : {DrumId::kA, DrumId::kB}) {
    const Domain drum = Domain::drum(id);
    const FeatureSet f = FeatureSet::standard(drum, 10, 0.5, 3.0, 5);
    const auto& v = std::get<DrumShape>(drum.shape()).polygon->vertices;
    std::vector<double> out(f.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Vec2 a = v[i], b = v[(i + 1) % v.size()];
      for (double t : {0.1, 0.37, 0.5, 0.9}) {
        f.eval(std::vector<double>{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)}, out);
        // Rounding puts some edge points ~1e-16 off the edge; p = 0.5 lifts that to ~1e-8.
        for (double q : out) CHECK(q < 1e-7);
      }
    }
  }
}
