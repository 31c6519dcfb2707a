#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fraceig/features.hpp"
#include "fraceig/geometry.hpp"
#include "fraceig/network.hpp"
#include "fraceig/random.hpp"

namespace fraceig {

/// Normalizing constant of the integral fractional Laplacian.
double c_ds(int d, double s);

enum class PotentialKind { kZero, kHarmonic, kStiffSine, kInverseSquare };

/// V(x): zero, |x|^2/2, sum_k (50 x_k^2 + sin(2 pi x_k)), or 1/(2|x|^2).
struct Potential {
  PotentialKind kind = PotentialKind::kZero;

  [[nodiscard]] double operator()(std::span<const double> x) const;
  [[nodiscard]] bool is_zero() const { return kind == PotentialKind::kZero; }
  /// Points closer than this to the origin are redrawn.
  [[nodiscard]] double exclusion_radius() const { return kind == PotentialKind::kInverseSquare ? 1e-8 : 0.0; }
};

std::string to_string(PotentialKind kind);
PotentialKind parse_potential(const std::string& text);

/// Monte Carlo draw shared by every term of one loss evaluation.
struct Batch {
  PointSet xs;
  PointSet xis;
  std::vector<double> w_plus;
  std::vector<double> ws;
  std::vector<double> ws_clamped;

  [[nodiscard]] std::size_t size() const { return w_plus.size(); }
};

/// Radial offset for a uniform variate: w = w_plus * u^(1/(2-2s)), floored at DBL_MIN.
double radial_offset(double w_plus, double s, double u);

/// Draws samples [first, first + n) of the stream identified by key. Sample i
/// always uses key.generator(i), so chunked draws concatenate to full draws.
Batch draw_batch(const SamplingRegion& region, double s, std::size_t n, double w_c, const StreamKey& key,
                 std::size_t first = 0, const Potential& potential = {});

using ScalarField = std::function<double(std::span<const double>)>;

/// Points of the batch that lie in the closed domain.
PointSet interior_points(const Domain& domain, const PointSet& xs);

double estimate_inner(const ScalarField& u, const ScalarField& v, const PointSet& omega_points, double vol_omega);
double estimate_l2(const ScalarField& u, const PointSet& omega_points, double vol_omega);
double estimate_potential(const ScalarField& u, const Potential& v, const PointSet& omega_points, double vol_omega);
double estimate_A1(const ScalarField& u, const Batch& batch, const SamplingRegion& region, double s);
double estimate_A2(const ScalarField& u, const Batch& batch, const SamplingRegion& region, double s);

/// Everything that defines one eigenvalue problem.
struct Problem {
  Domain domain;
  SamplingRegion region;
  double s = 0.5;
  Potential potential;
  FeatureSet features;
  Architecture arch;
  double w_c = 1e-4;
};

struct LossBreakdown {
  double a1 = 0.0;
  double a2 = 0.0;
  double potential = 0.0;
  double l2 = 0.0;
  std::vector<double> inners;
  double loss = 0.0;
};

namespace detail {

// Parameter-independent part of the loss on one batch.
struct LossTerms {
  std::size_t n = 0;
  double omega_weight = 0.0;  // |Omega| / N_Omega
  double beta = 0.0;
  std::vector<double> c1, c2;
  std::vector<std::size_t> x_index;  // batch index of each interior x point
  std::vector<std::size_t> y_index;  // batch index of each interior shifted point
  std::vector<double> v;             // potential at interior x points
  std::vector<std::vector<double>> prior_values;
  std::vector<double> prior_norms;

  LossBreakdown evaluate(std::span<const double> u, std::span<double> du) const;
};

}  // namespace detail

/// Loss on one fixed batch as a function of the network outputs at the
/// points that matter (x_i in the domain, then x_i + w~_i xi_i in the domain).
class LossModel {
 public:
  LossModel(const Problem& problem, const Batch& batch, std::span<const ModeSnapshot> priors, double beta);

  [[nodiscard]] const EvalPoints& points() const { return points_; }
  [[nodiscard]] std::size_t interior_count() const { return terms_.x_index.size(); }

  /// Fills du (one entry per evaluation point) when it is nonempty.
  LossBreakdown evaluate(std::span<const double> u, std::span<double> du) const;

  /// Convenience: evaluates network outputs then the loss.
  LossBreakdown evaluate(const NetworkParams& params) const;

 private:
  detail::LossTerms terms_;
  EvalPoints points_;
};

/// Same as LossModel::evaluate with a scalar trial function instead of a network.
LossBreakdown estimate_loss(const ScalarField& u, std::span<const ScalarField> priors,
                            std::span<const double> prior_norms, double beta, const Problem& problem,
                            const Batch& batch);

struct EigenEstimate {
  double lambda_hat = 0.0;
  double se = 0.0;
  std::size_t n_samples = 0;
  double l2_norm_sq = 0.0;  // mean of the per-batch L2 estimates
};

/// Mean of n_batches ratio estimates a(u,u)/|u|^2, each with n_final samples.
EigenEstimate estimate_eigenvalue(const Problem& problem, const NetworkParams& params, std::size_t n_final,
                                  std::size_t n_batches, const StreamKey& key);

/// Same estimator for an arbitrary trial function (used by oracle checks).
EigenEstimate estimate_eigenvalue(const Problem& problem, const ScalarField& u, std::size_t n_final,
                                  std::size_t n_batches, const StreamKey& key);

/// (u_a, u_b) / sqrt(|u_a|^2 |u_b|^2) from n uniform samples of the domain.
double normalized_overlap(const Problem& problem, const NetworkParams& a, const NetworkParams& b, std::size_t n,
                          const StreamKey& key);

}  // namespace fraceig
