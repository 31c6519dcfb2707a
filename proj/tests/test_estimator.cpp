#include <doctest.h>

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numbers>
#include <vector>

#include "fraceig/error.hpp"
#include "fraceig/estimator.hpp"
#include "fraceig/oracle.hpp"

using namespace fraceig;

namespace {

constexpr double kPi = std::numbers::pi;

double half_disk(std::span<const double> x) { return x[0] * x[0] < 1.0 ? std::sqrt(1.0 - x[0] * x[0]) : 0.0; }

double power_profile(std::span<const double> x, double s) {
  return x[0] * x[0] < 1.0 ? std::pow(1.0 - x[0] * x[0], s) : 0.0;
}

Problem interval_problem(double s, Potential v = {}) {
  const Domain domain = Domain::interval(-1.0, 1.0);
  return Problem{domain, default_sampling_region(domain), s, v, FeatureSet::standard(domain, 40, s, 3.0),
                 Architecture{1, 3, 40}, 1e-4};
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  double sd = 0.0;
};

MeanSe summarize(const std::vector<double>& xs) {
  MeanSe out;
  for (double x : xs) out.mean += x;
  out.mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  out.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  out.se = out.sd / std::sqrt(static_cast<double>(xs.size()));
  return out;
}

MeanSe nonlocal_energy(const ScalarField& u, const SamplingRegion& region, double s, std::size_t batches,
                       std::size_t n, std::uint64_t seed) {
  std::vector<double> values;
  const StreamKey key(seed);
  for (std::size_t b = 0; b < batches; ++b) {
    const Batch batch = draw_batch(region, s, n, 1e-4, key.child(b));
    values.push_back(estimate_A1(u, batch, region, s) + estimate_A2(u, batch, region, s));
  }
  return summarize(values);
}

PointSet interval_points(std::size_t n, std::uint64_t seed) {
  const SamplingRegion region = SamplingRegion::box({-1.0}, {1.0});
  PointSet xs(1, n);
  for (std::size_t i = 0; i < n; ++i) {
    SplitMix64 g = StreamKey(seed).generator(i);
    uniform_point(region, g, xs[i]);
  }
  return xs;
}

}  // namespace

TEST_CASE("c_ds closed forms") {
  CHECK(c_ds(1, 0.5) == doctest::Approx(1.0 / kPi).epsilon(1e-14));
  CHECK(c_ds(2, 0.5) == doctest::Approx(1.0 / (2.0 * kPi)).epsilon(1e-14));
  CHECK(c_ds(3, 0.5) == doctest::Approx(1.0 / (kPi * kPi)).epsilon(1e-14));
  CHECK(c_ds(1, 0.25) == doctest::Approx(0.19947114020071633897).epsilon(1e-13));
  CHECK(c_ds(2, 0.9) == doctest::Approx(0.10084985986148906277).epsilon(1e-13));
  CHECK_THROWS_WITH_AS(c_ds(1, 0.0), "fractional order out of range", ConfigError);
  CHECK_THROWS_AS(c_ds(1, 1.0), ConfigError);
}

TEST_CASE("radial offsets") {
  CHECK(radial_offset(1.0, 0.3, 1.0) == 1.0);
  CHECK(radial_offset(0.7, 0.9, 1.0) == 0.7);
  CHECK(radial_offset(1.0, 0.5, 0.5) == 0.5);
  CHECK(radial_offset(1.0, 0.05, 1e-300) > 0.0);
  CHECK(radial_offset(1.0, 0.95, 1e-300) == DBL_MIN);
}

TEST_CASE("radial law matches its CDF (Kolmogorov-Smirnov)") {
  const std::size_t n = 1000000;
  std::vector<double> w(n);
  const StreamKey key(21);
  for (std::size_t i = 0; i < n; ++i) {
    SplitMix64 g = key.generator(i);
    w[i] = radial_offset(1.0, 0.75, uniform01(g));
  }
  std::sort(w.begin(), w.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double cdf = std::sqrt(w[i]);
    ks = std::max({ks, std::abs(cdf - static_cast<double>(i) / n), std::abs(cdf - static_cast<double>(i + 1) / n)});
  }
  CHECK(ks < 0.002);
}

TEST_CASE("batch invariants") {
  const SamplingRegion box = SamplingRegion::box({-1.0, -1.0}, {1.0, 1.0});
  const Batch b = draw_batch(box, 0.3, 5000, 1e-4, StreamKey(22));
  REQUIRE(b.size() == 5000);
  for (std::size_t i = 0; i < b.size(); ++i) {
    REQUIRE(box.interior(b.xs[i]));
    REQUIRE(std::hypot(b.xis[i][0], b.xis[i][1]) == doctest::Approx(1.0).epsilon(1e-14));
    REQUIRE(b.ws[i] > 0.0);
    REQUIRE(b.ws[i] <= b.w_plus[i]);
    REQUIRE(b.ws_clamped[i] == std::max(b.ws[i], 1e-4));
  }
  CHECK_THROWS_AS(draw_batch(box, 0.3, 0, 1e-4, StreamKey(22)), ConfigError);
  CHECK_THROWS_AS(draw_batch(box, 1.3, 10, 1e-4, StreamKey(22)), ConfigError);
}

TEST_CASE("chunked draws concatenate to the full draw") {
  const SamplingRegion ball = SamplingRegion::ball({0.0, 0.0, 0.0}, 1.0);
  const Batch full = draw_batch(ball, 0.6, 300, 1e-4, StreamKey(23));
  const Batch head = draw_batch(ball, 0.6, 120, 1e-4, StreamKey(23));
  const Batch tail = draw_batch(ball, 0.6, 180, 1e-4, StreamKey(23), 120);
  for (std::size_t i = 0; i < 300; ++i) {
    const Batch& part = i < 120 ? head : tail;
    const std::size_t j = i < 120 ? i : i - 120;
    for (int k = 0; k < 3; ++k) {
      REQUIRE(full.xs[i][k] == part.xs[j][k]);
      REQUIRE(full.xis[i][k] == part.xis[j][k]);
    }
    REQUIRE(full.ws[i] == part.ws[j]);
  }
}

TEST_CASE("inner products, norms and potentials") {
  const PointSet xs = interval_points(1000000, 24);
  const ScalarField one = [](std::span<const double>) { return 1.0; };
  const ScalarField ident = [](std::span<const double> x) { return x[0]; };
  const ScalarField zero = [](std::span<const double>) { return 0.0; };
  CHECK(estimate_inner(one, one, xs, 2.0) == 2.0);
  CHECK(estimate_l2(one, xs, 2.0) == 2.0);
  CHECK(estimate_l2(zero, xs, 2.0) == 0.0);

  // Standard errors from the per-point variance.
  const double n = static_cast<double>(xs.size());
  const double odd = estimate_inner(ident, one, xs, 2.0);
  CHECK(std::abs(odd) <= 3.0 * 2.0 * std::sqrt(1.0 / 3.0 / n));
  const double sq = estimate_inner(ident, ident, xs, 2.0);
  CHECK(std::abs(sq - 2.0 / 3.0) <= 3.0 * 2.0 * std::sqrt((1.0 / 5.0 - 1.0 / 9.0) / n));
  const double disk = estimate_l2(half_disk, xs, 2.0);
  CHECK(std::abs(disk - 4.0 / 3.0) <= 3.0 * 2.0 * std::sqrt((8.0 / 15.0 - 4.0 / 9.0) / n));

  CHECK(estimate_potential(one, Potential{}, xs, 2.0) == 0.0);
  const double harmonic = estimate_potential(one, Potential{PotentialKind::kHarmonic}, xs, 2.0);
  CHECK(std::abs(harmonic - 1.0 / 3.0) <= 3.0 * 2.0 * std::sqrt((1.0 / 20.0 - 1.0 / 36.0) / n));
  const double stiff = estimate_potential(one, Potential{PotentialKind::kStiffSine}, xs, 2.0);
  // Var of 50x^2 + sin(2 pi x) under U(-1,1) is below 600.
  CHECK(std::abs(stiff - 100.0 / 3.0) <= 3.0 * 2.0 * std::sqrt(600.0 / n));

  CHECK_THROWS_WITH_AS(estimate_l2(one, PointSet(1, 0), 2.0), "empty interior batch", NumericError);
}

TEST_CASE("potentials") {
  const std::vector<double> x{0.5, -1.0};
  CHECK(Potential{}(x) == 0.0);
  CHECK(Potential{PotentialKind::kHarmonic}(x) == 0.625);
  CHECK(Potential{PotentialKind::kStiffSine}(x) == doctest::Approx(62.5 + std::sin(kPi) + std::sin(-2 * kPi)));
  CHECK(Potential{PotentialKind::kInverseSquare}(x) == 0.4);
  for (auto k : {PotentialKind::kZero, PotentialKind::kHarmonic, PotentialKind::kStiffSine,
                 PotentialKind::kInverseSquare}) {
    CHECK(parse_potential(to_string(k)) == k);
  }
  CHECK_THROWS_AS(parse_potential("coulomb"), ConfigError);
}

TEST_CASE("nonlocal terms vanish for zero and constant fields") {
  const SamplingRegion region = SamplingRegion::box({-1.0}, {1.0});
  const Batch batch = draw_batch(region, 0.4, 2000, 1e-4, StreamKey(25));
  const ScalarField zero = [](std::span<const double>) { return 0.0; };
  const ScalarField three = [](std::span<const double>) { return 3.0; };
  CHECK(estimate_A1(zero, batch, region, 0.4) == 0.0);
  CHECK(estimate_A2(zero, batch, region, 0.4) == 0.0);
  CHECK(estimate_A1(three, batch, region, 0.4) == 0.0);

  // L-shape: a batch whose x points all lie in D \ Omega.
  const Domain l = Domain::lshape();
  const ScalarField corner_free = [&](std::span<const double> x) {
    return eval_feature({FeatureKind::kLShapeBoundary, 1.0}, l, x);
  };
  const SamplingRegion box = default_sampling_region(l);
  const Batch all = draw_batch(box, 0.5, 4000, 1e-4, StreamKey(26));
  Batch outside;
  outside.xs = PointSet(2, 0);
  outside.xis = PointSet(2, 0);
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (l.contains(all.xs[i])) continue;
    outside.xs.push_back(all.xs[i]);
    outside.xis.push_back(all.xis[i]);
    outside.w_plus.push_back(all.w_plus[i]);
    outside.ws.push_back(all.ws[i]);
    outside.ws_clamped.push_back(all.ws_clamped[i]);
  }
  REQUIRE(outside.size() > 500);
  CHECK(estimate_A2(corner_free, outside, box, 0.5) == 0.0);
  CHECK(estimate_A2(corner_free, all, box, 0.5) > 0.0);
}

TEST_CASE("A1 + A2 is unbiased for the closed-form profiles") {
  const SamplingRegion region = SamplingRegion::box({-1.0}, {1.0});
  for (double s : {0.25, 0.5, 0.75}) {
    INFO("s = " << s);
    const ScalarField u = [s](std::span<const double> x) { return power_profile(x, s); };
    const MeanSe e = nonlocal_energy(u, region, s, 200, 10000, 27);
    CHECK(std::abs(e.mean - closed_form_quadratic(s)) <= 3.0 * e.se);
  }
  const MeanSe half = nonlocal_energy(half_disk, region, 0.5, 200, 10000, 28);
  CHECK(std::abs(half.mean - kPi / 2.0) <= 3.0 * half.se);
}

TEST_CASE("standard error scales like 1/sqrt(N)") {
  const SamplingRegion region = SamplingRegion::box({-1.0}, {1.0});
  const ScalarField u = [](std::span<const double> x) { return power_profile(x, 0.75); };
  const MeanSe small = nonlocal_energy(u, region, 0.75, 400, 1000, 29);
  const MeanSe mid = nonlocal_energy(u, region, 0.75, 400, 10000, 30);
  const MeanSe large = nonlocal_energy(u, region, 0.75, 400, 100000, 31);
  CHECK(small.sd / mid.sd == doctest::Approx(std::sqrt(10.0)).epsilon(0.2));
  CHECK(mid.sd / large.sd == doctest::Approx(std::sqrt(10.0)).epsilon(0.2));
}

TEST_CASE("L-shape energy does not depend on the sampling region") {
  const Domain l = Domain::lshape();
  const ScalarField u = [&](std::span<const double> x) {
    return eval_feature({FeatureKind::kLShapeBoundary, 1.0}, l, x);
  };
  const SamplingRegion tight = default_sampling_region(l);
  const SamplingRegion wide = SamplingRegion::box({-1.5, -1.5}, {1.5, 1.5});
  const MeanSe a = nonlocal_energy(u, tight, 0.5, 200, 10000, 32);
  const MeanSe b = nonlocal_energy(u, wide, 0.5, 200, 10000, 33);
  CHECK(std::abs(a.mean - b.mean) <= 3.0 * std::hypot(a.se, b.se));
}

TEST_CASE("loss breakdown on a fixed batch") {
  const Problem p = interval_problem(0.5);
  const Batch batch = draw_batch(p.region, p.s, 20000, p.w_c, StreamKey(34));
  const LossBreakdown b = estimate_loss(half_disk, {}, {}, 0.0, p, batch);
  CHECK(b.inners.empty());
  CHECK(b.loss == (b.a1 + b.a2 + b.potential) / b.l2);
  CHECK(b.a1 + b.a2 == doctest::Approx(kPi / 2.0).epsilon(0.05));
  CHECK(b.l2 == doctest::Approx(4.0 / 3.0).epsilon(0.02));

  for (double c : {4.0, -0.25, 5.0, 0.01}) {
    INFO("c = " << c);
    const ScalarField scaled = [c](std::span<const double> x) { return c * half_disk(x); };
    const LossBreakdown s = estimate_loss(scaled, {}, {}, 0.0, p, batch);
    if (c == 4.0 || c == -0.25) {
      CHECK(s.loss == b.loss);
    } else {
      CHECK(s.loss == doctest::Approx(b.loss).epsilon(1e-14));
    }
  }

  const ScalarField zero = [](std::span<const double>) { return 0.0; };
  CHECK_THROWS_WITH_AS(estimate_loss(zero, {}, {}, 0.0, p, batch), "degenerate trial function", NumericError);
}

TEST_CASE("self-penalty equals beta") {
  const Domain l = Domain::lshape();
  const FeatureSet f = FeatureSet::standard(l, 40, 0.5, 3.0, 20);
  const Problem p{l, default_sampling_region(l), 0.5, {}, f, Architecture{2, 3, 60}, 1e-4};
  const NetworkParams prior = init_params(p.arch, StreamKey(35));
  const Batch batch = draw_batch(p.region, p.s, 20000, p.w_c, StreamKey(36));

  // With the prior norm taken on the same batch the identity is exact up to rounding.
  const ScalarField u = [&](std::span<const double> x) { return forward(prior, f, x); };
  const PointSet omega = interior_points(l, batch.xs);
  const double norm = estimate_l2(u, omega, l.volume());
  const ScalarField priors[] = {u};
  const double norms[] = {norm};
  const LossBreakdown with = estimate_loss(u, priors, norms, 10.0, p, batch);
  const LossBreakdown without = estimate_loss(u, {}, {}, 0.0, p, batch);
  CHECK(with.loss - without.loss == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(with.inners[0] == doctest::Approx(norm).epsilon(1e-12));

  // With the stored high-sample norm, the penalty is close to beta.
  const EigenEstimate est = estimate_eigenvalue(p, prior, 200000, 4, StreamKey(37));
  ModeSnapshot snap{prior, f.specs(), est.lambda_hat, est.se, est.l2_norm_sq};
  const LossModel model(p, batch, std::span<const ModeSnapshot>(&snap, 1), 10.0);
  const LossBreakdown m = model.evaluate(prior);
  CHECK((m.loss - (m.a1 + m.a2) / m.l2) == doctest::Approx(10.0).epsilon(0.05));
}

TEST_CASE("LossModel matches the scalar-field estimator and its gradient matches finite differences") {
  const Domain square = Domain::box({-1.0, -1.0}, {1.0, 1.0});
  const FeatureSet f = FeatureSet::standard(square, 12, 0.5, 3.0);
  const Problem p{square, default_sampling_region(square), 0.3, Potential{PotentialKind::kHarmonic}, f,
                  Architecture{2, 2, 12}, 1e-4};
  const NetworkParams prior = init_params(p.arch, StreamKey(38));
  const NetworkParams trial = init_params(p.arch, StreamKey(39));
  ModeSnapshot snap{prior, f.specs(), 0.0, 0.0, 0.7};
  const Batch batch = draw_batch(p.region, p.s, 3000, p.w_c, StreamKey(40));
  const LossModel model(p, batch, std::span<const ModeSnapshot>(&snap, 1), 7.0);

  const ScalarField u = [&](std::span<const double> x) { return forward(trial, f, x); };
  const ScalarField v = [&](std::span<const double> x) { return forward(prior, f, x); };
  const ScalarField priors[] = {v};
  const double norms[] = {0.7};
  const LossBreakdown direct = estimate_loss(u, priors, norms, 7.0, p, batch);
  const LossBreakdown blocked = model.evaluate(trial);
  CHECK(blocked.loss == doctest::Approx(direct.loss).epsilon(1e-12));
  CHECK(blocked.potential == doctest::Approx(direct.potential).epsilon(1e-12));

  std::vector<double> values = forward_batch(trial, model.points());
  std::vector<double> du(values.size());
  const LossBreakdown base = model.evaluate(values, du);
  CHECK(base.loss == blocked.loss);
  for (std::size_t k = 0; k < values.size(); k += 37) {
    const double h = 1e-6;
    std::vector<double> up = values, down = values;
    up[k] += h;
    down[k] -= h;
    const double fd = (model.evaluate(up, {}).loss - model.evaluate(down, {}).loss) / (2 * h);
    REQUIRE(fd == doctest::Approx(du[k]).epsilon(1e-5).scale(1e-6));
  }
  CHECK_THROWS_AS(LossModel(p, batch, std::span<const ModeSnapshot>(&snap, 1), 0.0), ConfigError);
}

TEST_CASE("eigenvalue estimate of the half-disk profile") {
  const Problem p = interval_problem(0.5);
  const EigenEstimate e = estimate_eigenvalue(p, half_disk, 100000, 40, StreamKey(41));
  CHECK(e.n_samples == 4000000);
  CHECK(std::abs(e.lambda_hat - 3.0 * kPi / 8.0) <= 3.0 * e.se);
  CHECK(e.lambda_hat >= 1.15777);
  CHECK(e.l2_norm_sq == doctest::Approx(4.0 / 3.0).epsilon(2e-3));
  CHECK_THROWS_AS(estimate_eigenvalue(p, half_disk, 0, 1, StreamKey(41)), ConfigError);
}

TEST_CASE("random networks respect the Rayleigh lower bound") {
  const Problem p = interval_problem(0.5);
  for (int i = 0; i < 100; ++i) {
    const NetworkParams net = init_params(p.arch, StreamKey(1000 + i));
    const EigenEstimate e = estimate_eigenvalue(p, net, 10000, 4, StreamKey(2000 + i));
    REQUIRE(e.lambda_hat >= 1.15777 - 3.0 * e.se);
  }
}

TEST_CASE("normalized overlap") {
  const Problem p = interval_problem(0.5);
  const NetworkParams a = init_params(p.arch, StreamKey(42));
  NetworkParams neg = a;
  for (std::size_t j = neg.head_offset(); j < neg.size(); ++j) neg.values()[j] *= -2.0;
  CHECK(normalized_overlap(p, a, a, 5000, StreamKey(43)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(normalized_overlap(p, a, neg, 5000, StreamKey(43)) == doctest::Approx(-1.0).epsilon(1e-14));
}
