#include "fraceig/estimator.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numbers>

#include "fraceig/error.hpp"
#include "fraceig/summation.hpp"

namespace fraceig {
namespace {

constexpr std::size_t kChunk = std::size_t{1} << 16;

// Per-sample weights of the two nonlocal terms without the common factor.
double near_weight(double w_plus, double w_clamped, double s) {
  return std::pow(w_plus, 2.0 - 2.0 * s) / ((2.0 - 2.0 * s) * w_clamped * w_clamped);
}

double tail_weight(double w_plus, double s) { return std::pow(w_plus, -2.0 * s) / (2.0 * s); }

double nonlocal_factor(const SamplingRegion& region, double s) {
  return c_ds(region.dim(), s) * volume(region) * sphere_area(region.dim());
}

void shifted_point(const Batch& batch, std::size_t i, std::span<double> out) {
  const std::span<const double> x = batch.xs[i];
  const std::span<const double> xi = batch.xis[i];
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = x[k] + batch.ws_clamped[i] * xi[k];
}

// Raw (unscaled) sums of one batch, combined across chunks.
struct RawSums {
  double a1 = 0.0;
  double a2 = 0.0;
  double l2 = 0.0;
  double pot = 0.0;
  std::size_t n_omega = 0;
};

// ux/uy hold u(x_i) and u(x_i + w~ xi_i) for every sample (zero outside the domain).
RawSums raw_sums(const Problem& p, const Batch& batch, const std::vector<double>& ux, const std::vector<double>& uy,
                 const std::vector<char>& in_omega) {
  const std::size_t n = batch.size();
  std::vector<double> t1(n), t2(n), tl(n), tp(n);
  RawSums out;
  for (std::size_t i = 0; i < n; ++i) {
    const double diff = uy[i] - ux[i];
    t1[i] = near_weight(batch.w_plus[i], batch.ws_clamped[i], p.s) * diff * diff;
    t2[i] = tail_weight(batch.w_plus[i], p.s) * ux[i] * ux[i];
    tl[i] = in_omega[i] ? ux[i] * ux[i] : 0.0;
    tp[i] = in_omega[i] && !p.potential.is_zero() ? p.potential(batch.xs[i]) * ux[i] * ux[i] : 0.0;
    out.n_omega += in_omega[i] ? 1 : 0;
  }
  out.a1 = pairwise_sum(t1);
  out.a2 = pairwise_sum(t2);
  out.l2 = pairwise_sum(tl);
  out.pot = pairwise_sum(tp);
  return out;
}

// Evaluates a trial function at the batch points; network evaluation only
// touches points inside the domain.
template <class Eval>
void sample_values(const Problem& p, const Batch& batch, Eval&& eval, std::vector<double>& ux, std::vector<double>& uy,
                   std::vector<char>& in_omega) {
  const std::size_t n = batch.size();
  const int d = p.domain.dim();
  ux.assign(n, 0.0);
  uy.assign(n, 0.0);
  in_omega.assign(n, 0);
  PointSet pts(d, 0);
  pts.reserve(2 * n);
  std::vector<std::size_t> where;
  std::vector<double> y(d);
  for (std::size_t i = 0; i < n; ++i) {
    if (p.domain.contains(batch.xs[i])) {
      in_omega[i] = 1;
      pts.push_back(batch.xs[i]);
      where.push_back(i);
    }
  }
  const std::size_t nx = where.size();
  for (std::size_t i = 0; i < n; ++i) {
    shifted_point(batch, i, y);
    if (p.domain.contains(y)) {
      pts.push_back(y);
      where.push_back(i);
    }
  }
  const std::vector<double> u = eval(pts);
  for (std::size_t k = 0; k < where.size(); ++k) (k < nx ? ux : uy)[where[k]] = u[k];
}

std::vector<double> field_values(const ScalarField& f, const PointSet& pts) {
  std::vector<double> out(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) out[i] = f(pts[i]);
  return out;
}

template <class Eval>
EigenEstimate eigen_estimate(const Problem& p, Eval&& eval, std::size_t n_final, std::size_t n_batches,
                             const StreamKey& key) {
  if (n_final < 1 || n_batches < 1) throw ConfigError("final estimate needs n_final >= 1 and n_batches >= 1");
  const double factor = nonlocal_factor(p.region, p.s) / static_cast<double>(n_final);
  const double vol = p.domain.volume();
  std::vector<double> ratios(n_batches), norms(n_batches);
  std::vector<double> ux, uy;
  std::vector<char> in_omega;
  for (std::size_t b = 0; b < n_batches; ++b) {
    const StreamKey batch_key = key.child(b);
    std::vector<double> a1, a2, l2, pot;
    std::size_t n_omega = 0;
    for (std::size_t first = 0; first < n_final; first += kChunk) {
      const std::size_t count = std::min(kChunk, n_final - first);
      const Batch batch = draw_batch(p.region, p.s, count, p.w_c, batch_key, first, p.potential);
      sample_values(p, batch, eval, ux, uy, in_omega);
      const RawSums sums = raw_sums(p, batch, ux, uy, in_omega);
      a1.push_back(sums.a1);
      a2.push_back(sums.a2);
      l2.push_back(sums.l2);
      pot.push_back(sums.pot);
      n_omega += sums.n_omega;
    }
    if (n_omega == 0) throw NumericError("empty interior batch");
    const double omega_weight = vol / static_cast<double>(n_omega);
    const double numerator =
        0.5 * factor * pairwise_sum(a1) + factor * pairwise_sum(a2) + omega_weight * pairwise_sum(pot);
    const double norm = omega_weight * pairwise_sum(l2);
    if (!(norm > 1e-12)) throw NumericError("degenerate trial function");
    ratios[b] = numerator / norm;
    norms[b] = norm;
  }
  EigenEstimate est;
  est.n_samples = n_final * n_batches;
  est.lambda_hat = pairwise_sum(ratios) / static_cast<double>(n_batches);
  est.l2_norm_sq = pairwise_sum(norms) / static_cast<double>(n_batches);
  if (n_batches > 1) {
    std::vector<double> dev(n_batches);
    for (std::size_t b = 0; b < n_batches; ++b) dev[b] = (ratios[b] - est.lambda_hat) * (ratios[b] - est.lambda_hat);
    est.se = std::sqrt(pairwise_sum(dev) / static_cast<double>(n_batches - 1) / static_cast<double>(n_batches));
  }
  return est;
}

detail::LossTerms make_terms(const Problem& p, const Batch& batch, PointSet& pts, double beta) {
  const int d = p.domain.dim();
  const std::size_t n = batch.size();
  detail::LossTerms t;
  t.n = n;
  t.beta = beta;
  const double factor = nonlocal_factor(p.region, p.s) / static_cast<double>(n);
  t.c1.resize(n);
  t.c2.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    t.c1[i] = 0.5 * factor * near_weight(batch.w_plus[i], batch.ws_clamped[i], p.s);
    t.c2[i] = factor * tail_weight(batch.w_plus[i], p.s);
  }
  pts = PointSet(d, 0);
  pts.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    if (p.domain.contains(batch.xs[i])) {
      t.x_index.push_back(i);
      pts.push_back(batch.xs[i]);
      if (!p.potential.is_zero()) t.v.push_back(p.potential(batch.xs[i]));
    }
  }
  if (t.x_index.empty()) throw NumericError("empty interior batch");
  std::vector<double> y(d);
  for (std::size_t i = 0; i < n; ++i) {
    shifted_point(batch, i, y);
    if (p.domain.contains(y)) {
      t.y_index.push_back(i);
      pts.push_back(y);
    }
  }
  t.omega_weight = p.domain.volume() / static_cast<double>(t.x_index.size());
  return t;
}

}  // namespace

LossBreakdown detail::LossTerms::evaluate(std::span<const double> u, std::span<double> du) const {
  const std::size_t nx = x_index.size();
  const std::size_t ny = y_index.size();
  if (u.size() != nx + ny) throw ConfigError("loss evaluation received the wrong number of outputs");
  std::vector<double> ux(n, 0.0), uy(n, 0.0);
  for (std::size_t k = 0; k < nx; ++k) ux[x_index[k]] = u[k];
  for (std::size_t k = 0; k < ny; ++k) uy[y_index[k]] = u[nx + k];

  std::vector<double> terms(n);
  for (std::size_t i = 0; i < n; ++i) terms[i] = c1[i] * (uy[i] - ux[i]) * (uy[i] - ux[i]);
  LossBreakdown out;
  out.a1 = pairwise_sum(terms);
  terms.resize(nx);
  for (std::size_t k = 0; k < nx; ++k) terms[k] = c2[x_index[k]] * u[k] * u[k];
  out.a2 = pairwise_sum(terms);
  for (std::size_t k = 0; k < nx; ++k) terms[k] = u[k] * u[k];
  out.l2 = omega_weight * pairwise_sum(terms);
  if (!v.empty()) {
    for (std::size_t k = 0; k < nx; ++k) terms[k] = v[k] * u[k] * u[k];
    out.potential = omega_weight * pairwise_sum(terms);
  }
  for (const auto& pv : prior_values) {
    for (std::size_t k = 0; k < nx; ++k) terms[k] = u[k] * pv[k];
    out.inners.push_back(omega_weight * pairwise_sum(terms));
  }
  if (!(out.l2 >= 1e-12)) throw NumericError("degenerate trial function");

  const double l2 = out.l2;
  const double numerator = out.a1 + out.a2 + out.potential;
  double penalty = 0.0;
  for (std::size_t j = 0; j < out.inners.size(); ++j) penalty += out.inners[j] * out.inners[j] / prior_norms[j];
  out.loss = numerator / l2 + beta * penalty / l2;
  if (!std::isfinite(out.loss)) {
    throw NumericError("non-finite loss (a1=" + std::to_string(out.a1) + ", a2=" + std::to_string(out.a2) +
                       ", potential=" + std::to_string(out.potential) + ", l2=" + std::to_string(l2) + ")");
  }
  if (du.empty()) return out;

  // dL/du = dnum/l2 + beta/l2 * dpen - (num + beta pen)/l2^2 * dl2
  const double total_over_l2sq = (numerator + beta * penalty) / (l2 * l2);
  std::vector<double> inner_coef(out.inners.size());
  for (std::size_t j = 0; j < out.inners.size(); ++j) {
    inner_coef[j] = beta * 2.0 * out.inners[j] * omega_weight / (prior_norms[j] * l2);
  }
  for (std::size_t k = 0; k < nx; ++k) {
    const std::size_t i = x_index[k];
    double dnum = -2.0 * c1[i] * (uy[i] - ux[i]) + 2.0 * c2[i] * u[k];
    if (!v.empty()) dnum += 2.0 * omega_weight * v[k] * u[k];
    double g = dnum / l2 - total_over_l2sq * 2.0 * omega_weight * u[k];
    for (std::size_t j = 0; j < inner_coef.size(); ++j) g += inner_coef[j] * prior_values[j][k];
    du[k] = g;
  }
  for (std::size_t k = 0; k < ny; ++k) {
    const std::size_t i = y_index[k];
    du[nx + k] = 2.0 * c1[i] * (uy[i] - ux[i]) / l2;
  }
  return out;
}


double c_ds(int d, double s) {
  if (!(s > 0.0 && s < 1.0)) throw ConfigError("fractional order out of range");
  if (d < 1) throw ConfigError("dimension must be at least 1");
  const double log_c = 2.0 * s * std::log(2.0) + std::log(s) + std::lgamma(s + 0.5 * d) -
                       0.5 * d * std::log(std::numbers::pi) - std::lgamma(1.0 - s);
  return std::exp(log_c);
}

double Potential::operator()(std::span<const double> x) const {
  double r2 = 0.0;
  for (double c : x) r2 += c * c;
  switch (kind) {
    case PotentialKind::kZero: return 0.0;
    case PotentialKind::kHarmonic: return 0.5 * r2;
    case PotentialKind::kStiffSine: {
      double v = 0.0;
      for (double c : x) v += 50.0 * c * c + std::sin(2.0 * std::numbers::pi * c);
      return v;
    }
    case PotentialKind::kInverseSquare: return 0.5 / r2;
  }
  return 0.0;
}

std::string to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::kZero: return "zero";
    case PotentialKind::kHarmonic: return "harmonic";
    case PotentialKind::kStiffSine: return "stiff_sine";
    case PotentialKind::kInverseSquare: return "inverse_square";
  }
  return "zero";
}

PotentialKind parse_potential(const std::string& text) {
  for (PotentialKind k :
       {PotentialKind::kZero, PotentialKind::kHarmonic, PotentialKind::kStiffSine, PotentialKind::kInverseSquare}) {
    if (to_string(k) == text) return k;
  }
  throw ConfigError("unknown potential '" + text + "' (expected zero, harmonic, stiff_sine, inverse_square)");
}

double radial_offset(double w_plus, double s, double u) {
  return std::max(w_plus * std::pow(u, 1.0 / (2.0 - 2.0 * s)), DBL_MIN);
}

Batch draw_batch(const SamplingRegion& region, double s, std::size_t n, double w_c, const StreamKey& key,
                 std::size_t first, const Potential& potential) {
  if (n < 1) throw ConfigError("batch size must be at least 1");
  if (!(s > 0.0 && s < 1.0)) throw ConfigError("fractional order out of range");
  const int d = region.dim();
  Batch batch;
  batch.xs = PointSet(d, n);
  batch.xis = PointSet(d, n);
  batch.w_plus.resize(n);
  batch.ws.resize(n);
  batch.ws_clamped.resize(n);
  const double exclusion = potential.exclusion_radius();
  std::size_t redraws = 0;
#pragma omp parallel for schedule(static) reduction(+ : redraws)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(n); ++k) {
    SplitMix64 rng = key.generator(first + k);
    const std::span<double> x = batch.xs[k];
    const std::span<double> xi = batch.xis[k];
    for (;;) {
      uniform_point(region, rng, x);
      if (exclusion <= 0.0) break;
      double r2 = 0.0;
      for (double c : x) r2 += c * c;
      if (r2 >= exclusion * exclusion) break;
      ++redraws;
    }
    uniform_direction(d, rng, xi);
    const double w_plus = exit_distance(region, x, xi);
    batch.w_plus[k] = w_plus;
    batch.ws[k] = radial_offset(w_plus, s, uniform01(rng));
    batch.ws_clamped[k] = std::max(batch.ws[k], w_c);
  }
  if (redraws * 1000 > n) throw NumericError("potential singularity too strong");
  return batch;
}

PointSet interior_points(const Domain& domain, const PointSet& xs) {
  PointSet out(xs.dim(), 0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (domain.contains(xs[i])) out.push_back(xs[i]);
  }
  return out;
}

double estimate_inner(const ScalarField& u, const ScalarField& v, const PointSet& omega_points, double vol_omega) {
  if (omega_points.empty()) throw NumericError("empty interior batch");
  std::vector<double> terms(omega_points.size());
  for (std::size_t i = 0; i < terms.size(); ++i) terms[i] = u(omega_points[i]) * v(omega_points[i]);
  return vol_omega * pairwise_sum(terms) / static_cast<double>(terms.size());
}

double estimate_l2(const ScalarField& u, const PointSet& omega_points, double vol_omega) {
  if (omega_points.empty()) throw NumericError("empty interior batch");
  std::vector<double> terms(omega_points.size());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const double value = u(omega_points[i]);
    terms[i] = value * value;
  }
  return vol_omega * pairwise_sum(terms) / static_cast<double>(terms.size());
}

double estimate_potential(const ScalarField& u, const Potential& v, const PointSet& omega_points, double vol_omega) {
  if (omega_points.empty()) throw NumericError("empty interior batch");
  if (v.is_zero()) return 0.0;
  std::vector<double> terms(omega_points.size());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const double value = u(omega_points[i]);
    terms[i] = v(omega_points[i]) * value * value;
  }
  return vol_omega * pairwise_sum(terms) / static_cast<double>(terms.size());
}

double estimate_A1(const ScalarField& u, const Batch& batch, const SamplingRegion& region, double s) {
  const std::size_t n = batch.size();
  std::vector<double> terms(n);
  std::vector<double> y(region.dim());
  for (std::size_t i = 0; i < n; ++i) {
    shifted_point(batch, i, y);
    const double diff = u(y) - u(batch.xs[i]);
    terms[i] = near_weight(batch.w_plus[i], batch.ws_clamped[i], s) * diff * diff;
    if (!std::isfinite(terms[i])) throw NumericError("non-finite near-field term at sample " + std::to_string(i));
  }
  return 0.5 * nonlocal_factor(region, s) / static_cast<double>(n) * pairwise_sum(terms);
}

double estimate_A2(const ScalarField& u, const Batch& batch, const SamplingRegion& region, double s) {
  const std::size_t n = batch.size();
  std::vector<double> terms(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double value = u(batch.xs[i]);
    terms[i] = tail_weight(batch.w_plus[i], s) * value * value;
    if (!std::isfinite(terms[i])) throw NumericError("non-finite tail term at sample " + std::to_string(i));
  }
  return nonlocal_factor(region, s) / static_cast<double>(n) * pairwise_sum(terms);
}

LossModel::LossModel(const Problem& problem, const Batch& batch, std::span<const ModeSnapshot> priors, double beta) {
  PointSet pts;
  detail::LossTerms t = make_terms(problem, batch, pts, beta);
  if (!priors.empty() && !(beta > 0.0)) throw ConfigError("penalty parameter must be positive when priors exist");
  points_ = prepare_points(problem.features, std::move(pts));
  if (!priors.empty()) {
    EvalPoints xs;
    const std::size_t nx = t.x_index.size();
    xs.x = PointSet(points_.x.dim(), nx);
    std::copy(points_.x.data(), points_.x.data() + nx * points_.x.dim(), xs.x.data());
    xs.q = points_.q.leftCols(static_cast<Eigen::Index>(nx));
    for (const ModeSnapshot& prior : priors) {
      t.prior_values.push_back(forward_batch(prior.params, xs));
      t.prior_norms.push_back(prior.l2_norm_sq);
    }
  }
  terms_ = std::move(t);
}

LossBreakdown LossModel::evaluate(std::span<const double> u, std::span<double> du) const {
  return terms_.evaluate(u, du);
}

LossBreakdown LossModel::evaluate(const NetworkParams& params) const {
  return evaluate(forward_batch(params, points_), {});
}

LossBreakdown estimate_loss(const ScalarField& u, std::span<const ScalarField> priors,
                            std::span<const double> prior_norms, double beta, const Problem& problem,
                            const Batch& batch) {
  PointSet pts;
  detail::LossTerms t = make_terms(problem, batch, pts, beta);
  const std::size_t nx = t.x_index.size();
  for (std::size_t j = 0; j < priors.size(); ++j) {
    std::vector<double> values(nx);
    for (std::size_t k = 0; k < nx; ++k) values[k] = priors[j](pts[k]);
    t.prior_values.push_back(std::move(values));
    t.prior_norms.push_back(prior_norms[j]);
  }
  return t.evaluate(field_values(u, pts), {});
}

EigenEstimate estimate_eigenvalue(const Problem& problem, const NetworkParams& params, std::size_t n_final,
                                  std::size_t n_batches, const StreamKey& key) {
  auto eval = [&](const PointSet& pts) { return forward_batch(params, problem.features, pts); };
  return eigen_estimate(problem, eval, n_final, n_batches, key);
}

EigenEstimate estimate_eigenvalue(const Problem& problem, const ScalarField& u, std::size_t n_final,
                                  std::size_t n_batches, const StreamKey& key) {
  auto eval = [&](const PointSet& pts) { return field_values(u, pts); };
  return eigen_estimate(problem, eval, n_final, n_batches, key);
}

double normalized_overlap(const Problem& problem, const NetworkParams& a, const NetworkParams& b, std::size_t n,
                          const StreamKey& key) {
  const int d = problem.domain.dim();
  std::vector<double> ab, aa, bb;
  std::vector<double> x(d);
  for (std::size_t first = 0; first < n; first += kChunk) {
    const std::size_t count = std::min(kChunk, n - first);
    PointSet pts(d, 0);
    pts.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      SplitMix64 rng = key.generator(first + i);
      uniform_point(problem.region, rng, x);
      if (problem.domain.contains(x)) pts.push_back(x);
    }
    const EvalPoints points = prepare_points(problem.features, std::move(pts));
    const std::vector<double> ua = forward_batch(a, points);
    const std::vector<double> ub = forward_batch(b, points);
    std::vector<double> t(ua.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = ua[i] * ub[i];
    ab.push_back(pairwise_sum(t));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = ua[i] * ua[i];
    aa.push_back(pairwise_sum(t));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = ub[i] * ub[i];
    bb.push_back(pairwise_sum(t));
  }
  const double denom = std::sqrt(pairwise_sum(aa) * pairwise_sum(bb));
  if (!(denom > 0.0)) throw NumericError("degenerate trial function");
  return pairwise_sum(ab) / denom;
}

}  // namespace fraceig
