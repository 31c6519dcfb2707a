#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "fraceig/config.hpp"
#include "fraceig/estimator.hpp"
#include "fraceig/trainer.hpp"

namespace fraceig {

inline constexpr const char* kEigenvaluesHeader = "k,lambda_hat,se";
inline constexpr const char* kTimingsHeader = "k,wall_seconds";
inline constexpr const char* kOverlapsHeader = "i,j,overlap";
inline constexpr const char* kIsospectralHeader = "s,k,lambda_A,se_A,lambda_B,se_B,R,significance";

const char* version();

// ---- solve ----

struct SolveOutcome {
  SolveResult result;
  Problem problem;
  std::vector<std::filesystem::path> checkpoints;
};

/// Trains config.K modes and writes eigenvalues.csv, timings.csv, overlaps.csv,
/// mode_<k>.fsev, progress.jsonl and manifest.txt into out_dir. Partial results
/// are written when a mode fails (result.failure is then set).
SolveOutcome run_solve(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream* log = nullptr);

void write_eigenvalues_csv(std::ostream& out, const SolveResult& result);
std::string manifest_text(const RunConfig& config, const Problem& problem, const SolveResult& result);

// ---- eigenfunction ----

/// "n1xn2[,lo:hi,...]": point counts per axis, then optional ranges
/// (defaulting to the domain's bounding box).
struct GridSpec {
  std::vector<std::size_t> counts;
  std::vector<std::pair<double, double>> ranges;
};

GridSpec parse_grid(const std::string& text, const Domain& domain);

/// CSV x1..xd,u on the tensor grid (first axis slowest), normalized to
/// max |u| = 1 and exactly zero outside the domain.
void write_eigenfunction_grid(std::ostream& out, const Domain& domain, const ModeSnapshot& snapshot,
                              const GridSpec& grid);

// ---- isospectral ----

struct IsospectralRow {
  double s = 0.0;
  int k = 0;
  double lambda_a = 0.0;
  double se_a = 0.0;
  double lambda_b = 0.0;
  double se_b = 0.0;
  double r = 0.0;
  double significance = 0.0;
};

/// (lambda_b - lambda_a) / mean, and |lambda_b - lambda_a| / sqrt(se_a^2 + se_b^2) (0 when equal).
double relative_difference(double lambda_a, double lambda_b);
double significance(double lambda_a, double se_a, double lambda_b, double se_b);
IsospectralRow make_isospectral_row(double s, int k, const ModeSnapshot& a, const ModeSnapshot& b);

/// Solves config.K modes on drum_a and drum_b for every s in s_list (or config.s),
/// each into out_dir/s_<s>/<drum>, and writes out_dir/isospectral.csv.
std::vector<IsospectralRow> run_isospectral(const RunConfig& config, const std::filesystem::path& out_dir,
                                            std::ostream* log = nullptr);
void write_isospectral_csv(std::ostream& out, const std::vector<IsospectralRow>& rows);

// ---- validation ----

/// Negative-control hooks for the validation suite.
struct ValidationHooks {
  double c_ds_scale = 1.0;        // multiplies the A1 + A2 estimate
  bool corrupt_gradient = false;  // scales analytic gradients by 1 + 1e-3
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckResult> checks;

  [[nodiscard]] bool passed() const;
};

struct UnbiasednessResult {
  double s = 0.0;
  double mean = 0.0;
  double se = 0.0;
  double target = 0.0;
  bool passed = false;
};

/// Mean of `batches` independent A1 + A2 estimates for u = (1-x^2)_+^s on (-1,1)
/// against closed_form_quadratic(s); passes within 3 standard errors.
UnbiasednessResult check_unbiasedness(double s, std::size_t batches, std::size_t n, std::uint64_t seed,
                                      double c_ds_scale = 1.0);

struct GradientCheckResult {
  std::size_t coordinates = 0;
  std::size_t failures = 0;
  double max_rel_error = 0.0;
  bool passed = false;
};

/// Relative error floor of the finite-difference comparison.
inline constexpr double kGradientCheckFloor = 1e-6;

/// Compares the analytic gradient of the full loss (one prior mode, penalty on)
/// with a five-point finite difference on `coordinates` random parameters.
GradientCheckResult check_gradient(const Problem& problem, std::size_t n, std::size_t coordinates,
                                   std::uint64_t seed, bool corrupt = false, double tolerance = 1e-5);

/// Largest relative change of the loss under u -> c u, c in {-3, 0.01, 7}.
double scale_invariance_error(const Problem& problem, std::size_t n, std::uint64_t seed);

ValidationReport run_validation(const ValidationHooks& hooks = {});

// ---- info ----

/// "d=1 l=3 m=40" -> "d=1 l=3 m=40: 3400 parameters".
std::string info_arch(const std::string& spec);
std::string info_schedule(const TrainConfig& config);
std::string info_domain(const RunConfig& config, const std::string& name);
std::string info_features(const RunConfig& config);
std::string info_keys();

}  // namespace fraceig
