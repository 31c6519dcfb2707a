#include "fraceig/experiments.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "fraceig/checkpoint.hpp"
#include "fraceig/error.hpp"
#include "fraceig/oracle.hpp"
#include "fraceig/reference.hpp"
#include "fraceig/summation.hpp"

namespace fraceig {
namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

std::string range_text(double lo, double hi) { return "[" + format_double(lo) + ", " + format_double(hi) + "]"; }

std::string vec_text(const std::vector<double>& v) {
  std::string out = "(";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_double(v[i]);
  return out + ")";
}

std::string point_text(Vec2 p) { return "(" + format_double(p.x) + ", " + format_double(p.y) + ")"; }

double quadratic_profile(std::span<const double> x, double s) {
  double r2 = 0.0;
  for (double v : x) r2 += v * v;
  return r2 < 1.0 ? std::pow(1.0 - r2, s) : 0.0;
}

std::string schedule_lines(const TrainConfig& c, const std::string& prefix) {
  std::ostringstream os;
  const std::size_t stages = (c.epochs + c.decay_every - 1) / c.decay_every;
  for (std::size_t i = 0; i < stages; ++i) {
    const std::size_t first = i * c.decay_every;
    const std::size_t last = std::min(c.epochs, first + c.decay_every) - 1;
    os << prefix << "stage " << i + 1 << ": epochs " << first << "-" << last << "  lr " << std::setprecision(6)
       << lr_at(c, first) << "  N " << n_at(c, first) << "\n";
  }
  return os.str();
}

}  // namespace

const char* version() { return FRACEIG_VERSION; }

// ---- solve ----

void write_eigenvalues_csv(std::ostream& out, const SolveResult& result) {
  out << kEigenvaluesHeader << "\n";
  for (std::size_t i = 0; i < result.modes.size(); ++i) {
    out << i + 1 << "," << format_double(result.modes[i].lambda_hat) << ","
        << format_double(result.modes[i].lambda_se) << "\n";
  }
}

std::string manifest_text(const RunConfig& config, const Problem& problem, const SolveResult& result) {
  std::ostringstream os;
  os << "# fraceig " << version() << " run manifest; the key = value lines reproduce this run\n";
  os << format_config(config);
  os << "# domain: " << problem.domain.name() << ", volume " << format_double(problem.domain.volume()) << "\n";
  os << "# sampling region: " << problem.region.describe() << "\n";
  if (std::holds_alternative<DrumShape>(problem.domain.shape())) {
    os << "# drum scale (triangle leg): " << format_double(config.drum_scale) << "\n";
  }
  const auto& specs = problem.features.specs();
  os << "# features: " << specs.size() << " (";
  for (std::size_t j = 0; j < specs.size(); ++j) {
    if (j == 0 || specs[j].kind != specs[j - 1].kind) os << (j ? "; " : "") << token(specs[j].kind) << ":";
    os << " " << format_double(specs[j].exponent);
  }
  os << ")\n";
  os << "# architecture: d=" << problem.arch.d << " l=" << problem.arch.l << " m=" << problem.arch.m << ", "
     << problem.arch.parameter_count() << " parameters, float64\n";
  os << "# initialization: hidden weights Glorot uniform, biases zero, head uniform(+-1/sqrt(m))\n";
  os << "# optimizer: adam beta1=" << format_double(config.train.adam.beta1)
     << " beta2=" << format_double(config.train.adam.beta2) << " eps=" << format_double(config.train.adam.eps)
     << "\n";
  os << "# penalty: beta = beta_factor * max found eigenvalue; prior norms from the final estimate\n";
  os << schedule_lines(config.train, "# schedule ");
  for (std::size_t i = 0; i < result.modes.size(); ++i) {
    const ModeSnapshot& m = result.modes[i];
    os << "# mode " << i + 1 << ": lambda_hat " << format_double(m.lambda_hat) << " se "
       << format_double(m.lambda_se) << " l2_norm_sq " << format_double(m.l2_norm_sq) << " beta "
       << format_double(result.betas[i]) << " wall_seconds " << std::fixed << std::setprecision(1)
       << result.wall_seconds[i] << std::defaultfloat << "\n";
  }
  for (std::size_t i = 0; i < result.overlaps.size(); ++i) {
    for (std::size_t j = 0; j < result.overlaps[i].size(); ++j) {
      os << "# overlap " << i + 1 << " " << j + 1 << ": " << format_double(result.overlaps[i][j]) << "\n";
    }
  }
  for (const std::string& w : result.warnings) os << "# warning: " << w << "\n";
  if (!result.failure.empty()) os << "# failure: " << result.failure << "\n";
  return os.str();
}

SolveOutcome run_solve(const RunConfig& config, const fs::path& out_dir, std::ostream* log) {
  validate(config);
  fs::create_directories(out_dir);
  SolveOutcome outcome{{}, build_problem(config, config.s), {}};

  std::ofstream progress_file(out_dir / "progress.jsonl");
  if (!progress_file) throw Error("cannot write " + (out_dir / "progress.jsonl").string());
  const ProgressSink sink = [&](const ProgressRecord& r) {
    const nlohmann::json j = {{"mode", r.mode}, {"epoch", r.epoch}, {"loss", r.loss}, {"lr", r.lr}, {"n", r.n}};
    progress_file << j.dump() << "\n";
    progress_file.flush();
    if (log != nullptr) *log << "mode " << r.mode << " epoch " << r.epoch << " loss " << r.loss << "\n";
  };
  outcome.result = solve_sequence(config.K, outcome.problem, config.train, sink);
  const SolveResult& result = outcome.result;

  std::ostringstream eig;
  write_eigenvalues_csv(eig, result);
  write_file(out_dir / "eigenvalues.csv", eig.str());

  std::ostringstream timings;
  timings << kTimingsHeader << "\n";
  for (std::size_t i = 0; i < result.wall_seconds.size(); ++i) {
    timings << i + 1 << "," << format_double(result.wall_seconds[i]) << "\n";
  }
  write_file(out_dir / "timings.csv", timings.str());

  std::ostringstream overlaps;
  overlaps << kOverlapsHeader << "\n";
  for (std::size_t i = 0; i < result.overlaps.size(); ++i) {
    for (std::size_t j = 0; j < result.overlaps[i].size(); ++j) {
      overlaps << i + 1 << "," << j + 1 << "," << format_double(result.overlaps[i][j]) << "\n";
    }
  }
  write_file(out_dir / "overlaps.csv", overlaps.str());

  for (std::size_t i = 0; i < result.modes.size(); ++i) {
    const fs::path path = out_dir / ("mode_" + std::to_string(i + 1) + ".fsev");
    save_checkpoint(path, result.modes[i]);
    outcome.checkpoints.push_back(path);
  }
  write_file(out_dir / "manifest.txt", manifest_text(config, outcome.problem, result));
  if (log != nullptr) {
    for (const std::string& w : result.warnings) *log << "warning: " << w << "\n";
  }
  return outcome;
}

// ---- eigenfunction ----

GridSpec parse_grid(const std::string& text, const Domain& domain) {
  GridSpec grid;
  std::vector<std::string> parts;
  {
    std::istringstream in(text);
    std::string part;
    while (std::getline(in, part, ',')) parts.push_back(part);
  }
  if (parts.empty()) throw ConfigError("empty grid spec");
  {
    std::istringstream in(parts[0]);
    std::string count;
    while (std::getline(in, count, 'x')) {
      std::size_t used = 0;
      long long n = 0;
      try {
        n = std::stoll(count, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != count.size() || n < 1) throw ConfigError("bad grid count '" + count + "'");
      grid.counts.push_back(static_cast<std::size_t>(n));
    }
  }
  const auto d = static_cast<std::size_t>(domain.dim());
  if (grid.counts.size() != d) {
    throw ConfigError("grid spec has " + std::to_string(grid.counts.size()) + " axes, domain has " +
                      std::to_string(d));
  }
  const auto [lo, hi] = domain.bounding_box();
  if (parts.size() == 1) {
    for (std::size_t k = 0; k < d; ++k) grid.ranges.emplace_back(lo[k], hi[k]);
  } else if (parts.size() == d + 1) {
    for (std::size_t k = 0; k < d; ++k) {
      const std::string& r = parts[k + 1];
      const auto colon = r.find(':', 1);
      if (colon == std::string::npos) throw ConfigError("bad grid range '" + r + "' (expected lo:hi)");
      try {
        grid.ranges.emplace_back(std::stod(r.substr(0, colon)), std::stod(r.substr(colon + 1)));
      } catch (const std::exception&) {
        throw ConfigError("bad grid range '" + r + "'");
      }
      if (!(grid.ranges.back().first <= grid.ranges.back().second)) throw ConfigError("grid range needs lo <= hi");
    }
  } else {
    throw ConfigError("grid spec needs either no ranges or one per axis");
  }
  return grid;
}

void write_eigenfunction_grid(std::ostream& out, const Domain& domain, const ModeSnapshot& snapshot,
                              const GridSpec& grid) {
  const int d = domain.dim();
  if (snapshot.params.arch().d != d) throw ConfigError("checkpoint dimension does not match the domain");
  const FeatureSet features(domain, snapshot.features);

  std::size_t total = 1;
  for (std::size_t n : grid.counts) total *= n;
  PointSet pts(d, total);
  std::vector<std::size_t> inside;
  PointSet interior(d, 0);
  for (std::size_t i = 0; i < total; ++i) {
    std::size_t rest = i;
    for (int k = d - 1; k >= 0; --k) {
      const std::size_t n = grid.counts[k];
      const std::size_t idx = rest % n;
      rest /= n;
      const auto [lo, hi] = grid.ranges[k];
      pts[i][k] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(idx) / static_cast<double>(n - 1);
    }
    if (domain.contains(pts[i])) {
      inside.push_back(i);
      interior.push_back(pts[i]);
    }
  }
  std::vector<double> u(total, 0.0);
  const std::vector<double> values = forward_batch(snapshot.params, features, interior);
  double peak = 0.0;
  for (std::size_t j = 0; j < inside.size(); ++j) {
    u[inside[j]] = values[j];
    peak = std::max(peak, std::abs(values[j]));
  }
  if (!(peak > 0.0)) throw NumericError("eigenfunction vanishes on the grid");

  for (int k = 0; k < d; ++k) out << "x" << k + 1 << ",";
  out << "u\n";
  for (std::size_t i = 0; i < total; ++i) {
    for (int k = 0; k < d; ++k) out << format_double(pts[i][k]) << ",";
    out << format_double(u[i] / peak) << "\n";
  }
}

// ---- isospectral ----

double relative_difference(double lambda_a, double lambda_b) {
  return (lambda_b - lambda_a) / ((lambda_a + lambda_b) / 2.0);
}

double significance(double lambda_a, double se_a, double lambda_b, double se_b) {
  const double diff = std::abs(lambda_b - lambda_a);
  if (diff == 0.0) return 0.0;
  return diff / std::sqrt(se_a * se_a + se_b * se_b);
}

IsospectralRow make_isospectral_row(double s, int k, const ModeSnapshot& a, const ModeSnapshot& b) {
  return {s,
          k,
          a.lambda_hat,
          a.lambda_se,
          b.lambda_hat,
          b.lambda_se,
          relative_difference(a.lambda_hat, b.lambda_hat),
          significance(a.lambda_hat, a.lambda_se, b.lambda_hat, b.lambda_se)};
}

void write_isospectral_csv(std::ostream& out, const std::vector<IsospectralRow>& rows) {
  out << kIsospectralHeader << "\n";
  for (const IsospectralRow& r : rows) {
    out << format_double(r.s) << "," << r.k << "," << format_double(r.lambda_a) << "," << format_double(r.se_a)
        << "," << format_double(r.lambda_b) << "," << format_double(r.se_b) << "," << format_double(r.r) << ","
        << format_double(r.significance) << "\n";
  }
}

std::vector<IsospectralRow> run_isospectral(const RunConfig& config, const fs::path& out_dir, std::ostream* log) {
  validate(config);
  const std::vector<double> s_values = config.s_list.empty() ? std::vector<double>{config.s} : config.s_list;
  std::vector<IsospectralRow> rows;
  std::string failures;
  for (double s : s_values) {
    const fs::path cell = out_dir / ("s_" + format_double(s));
    std::vector<SolveResult> results;
    const std::string names[] = {config.drum_a, config.drum_b};
    for (int side = 0; side < 2; ++side) {
      const std::string& name = names[side];
      RunConfig sub = config;
      sub.domain = name;
      sub.s = s;
      sub.s_list.clear();
      const fs::path dir = cell / ((side == 0 ? "A_" : "B_") + name);
      if (log != nullptr) *log << "isospectral: s=" << s << " " << name << "\n";
      results.push_back(run_solve(sub, dir, log).result);
      if (!results.back().failure.empty()) failures += name + " s=" + format_double(s) + ": " + results.back().failure + "; ";
    }
    const std::size_t k_max = std::min(results[0].modes.size(), results[1].modes.size());
    for (std::size_t k = 0; k < k_max; ++k) {
      rows.push_back(make_isospectral_row(s, static_cast<int>(k + 1), results[0].modes[k], results[1].modes[k]));
    }
  }
  std::ostringstream csv;
  write_isospectral_csv(csv, rows);
  write_file(out_dir / "isospectral.csv", csv.str());
  if (!failures.empty()) throw NumericError("isospectral sweep incomplete: " + failures);
  return rows;
}

// ---- validation ----

bool ValidationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

UnbiasednessResult check_unbiasedness(double s, std::size_t batches, std::size_t n, std::uint64_t seed,
                                      double c_ds_scale) {
  const Domain domain = Domain::interval(-1.0, 1.0);
  const SamplingRegion region = default_sampling_region(domain);
  const ScalarField u = [s](std::span<const double> x) { return quadratic_profile(x, s); };
  const StreamKey key = stream(seed, StreamPurpose::kValidation).child(std::bit_cast<std::uint64_t>(s));
  std::vector<double> values(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    const Batch batch = draw_batch(region, s, n, 1e-4, key.child(b));
    values[b] = c_ds_scale * (estimate_A1(u, batch, region, s) + estimate_A2(u, batch, region, s));
  }
  UnbiasednessResult r;
  r.s = s;
  r.mean = pairwise_sum(values) / static_cast<double>(batches);
  std::vector<double> sq(batches);
  for (std::size_t b = 0; b < batches; ++b) sq[b] = (values[b] - r.mean) * (values[b] - r.mean);
  r.se = std::sqrt(pairwise_sum(sq) / static_cast<double>(batches - 1) / static_cast<double>(batches));
  r.target = closed_form_quadratic(s);
  r.passed = std::abs(r.mean - r.target) <= 3.0 * r.se;
  return r;
}

GradientCheckResult check_gradient(const Problem& problem, std::size_t n, std::size_t coordinates,
                                   std::uint64_t seed, bool corrupt, double tolerance) {
  const StreamKey key = stream(seed, StreamPurpose::kValidation).child(0x67726164);
  ModeSnapshot prior;
  prior.params = init_params(problem.arch, key.child(1));
  prior.features = problem.features.specs();
  const EigenEstimate est = estimate_eigenvalue(problem, prior.params, 20000, 2, key.child(2));
  prior.lambda_hat = est.lambda_hat;
  prior.l2_norm_sq = est.l2_norm_sq;
  const std::vector<ModeSnapshot> priors{prior};

  NetworkParams params = init_params(problem.arch, key.child(3));
  const Batch batch = draw_batch(problem.region, problem.s, n, problem.w_c, key.child(4), 0, problem.potential);
  const LossModel model(problem, batch, priors, 4.0 * std::abs(prior.lambda_hat));
  const LossGradient lg = loss_gradient(params, model.points(), [&](std::span<const double> u, std::span<double> du) {
    return model.evaluate(u, du).loss;
  });
  std::vector<double> grad = lg.grad;
  if (corrupt) {
    for (double& g : grad) g *= 1.0 + 1e-3;
  }

  GradientCheckResult r;
  SplitMix64 rng = key.child(5).generator(0);
  std::uniform_int_distribution<std::size_t> pick(0, params.size() - 1);
  auto loss_at = [&](std::size_t i, double value) {
    NetworkParams p = params;
    p.values()[i] = value;
    return model.evaluate(p).loss;
  };
  for (std::size_t c = 0; c < coordinates; ++c) {
    const std::size_t i = pick(rng);
    const double x = params.values()[i];
    const double h = 1e-4 * std::max(1.0, std::abs(x));
    const double fd = (8.0 * (loss_at(i, x + h) - loss_at(i, x - h)) - (loss_at(i, x + 2 * h) - loss_at(i, x - 2 * h))) /
                      (12.0 * h);
    const double err = std::abs(grad[i] - fd) / std::max({std::abs(grad[i]), std::abs(fd), kGradientCheckFloor});
    r.max_rel_error = std::max(r.max_rel_error, err);
    if (!(err <= tolerance)) ++r.failures;
    ++r.coordinates;
  }
  r.passed = r.failures == 0;
  return r;
}

double scale_invariance_error(const Problem& problem, std::size_t n, std::uint64_t seed) {
  const StreamKey key = stream(seed, StreamPurpose::kValidation).child(0x7363616c65);
  const Batch batch = draw_batch(problem.region, problem.s, n, problem.w_c, key, 0, problem.potential);
  const double s = problem.s;
  const std::vector<ScalarField> priors{[](std::span<const double> x) {
    double v = 1.0;
    for (double c : x) v *= std::max(0.0, 1.0 - c * c) * (0.3 + c);
    return v;
  }};
  const std::vector<double> norms{0.1};
  auto loss_for = [&](double c) {
    const ScalarField u = [&, c](std::span<const double> x) {
      return c * quadratic_profile(x, s) * (1.0 + 0.5 * x[0]);
    };
    return estimate_loss(u, priors, norms, 5.0, problem, batch).loss;
  };
  const double base = loss_for(1.0);
  double worst = 0.0;
  for (double c : {-3.0, 0.01, 7.0}) worst = std::max(worst, std::abs(loss_for(c) - base) / std::abs(base));
  return worst;
}

ValidationReport run_validation(const ValidationHooks& hooks) {
  ValidationReport report;
  auto add = [&](std::string name, bool ok, std::string detail) {
    report.checks.push_back({std::move(name), ok, std::move(detail)});
  };
  auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
  std::ostringstream os;
  os << std::setprecision(10);

  {
    const double e1 = rel(c_ds(1, 0.5), 1.0 / std::numbers::pi);
    const double e3 = rel(c_ds(3, 0.5), 1.0 / (std::numbers::pi * std::numbers::pi));
    add("c_ds closed forms", std::max(e1, e3) < 1e-14, "max rel error " + format_double(std::max(e1, e3)));
  }
  for (double s : {0.25, 0.5, 0.75}) {
    const double q = seminorm_quadrature(s);
    const double c = closed_form_quadratic(s);
    add("quadratic profile seminorm s=" + format_double(s), rel(q, c) < 1e-6,
        "quadrature " + format_double(q) + " closed form " + format_double(c));
  }
  {
    const double e = rel(closed_form_quadratic(0.5), std::numbers::pi / 2.0);
    add("closed form at s=1/2 equals pi/2", e < 1e-14, "rel error " + format_double(e));
  }
  {
    const double e = std::max({rel(laplacian_limit("interval", 1), std::numbers::pi * std::numbers::pi / 4.0),
                               rel(laplacian_limit("square", 2), 5.0 * std::numbers::pi * std::numbers::pi / 4.0),
                               rel(laplacian_limit("ball3", 1), std::numbers::pi * std::numbers::pi)});
    add("Laplacian tables", e < 1e-12, "max rel error " + format_double(e));
  }
  {
    const bool ok = paper_reference("interval", 0.5, 1).digits == "1.15777" &&
                    paper_reference("square", 0.5, 1).digits == "1.83440" &&
                    paper_reference("lshape", 0.5, 1).digits == "2.43299";
    add("reference table lookups", ok, std::to_string(reference_table().size()) + " rows");
  }
  for (double s : {0.25, 0.5, 0.75}) {
    const UnbiasednessResult r = check_unbiasedness(s, 200, 10000, 1, hooks.c_ds_scale);
    os.str("");
    os << "mean " << r.mean << " +- " << r.se << " vs " << r.target;
    add("A1+A2 unbiased s=" + format_double(s), r.passed, os.str());
  }
  {
    const RunConfig config;
    const Problem problem = build_problem(config, 0.5);
    const GradientCheckResult g = check_gradient(problem, 1000, 100, 1, hooks.corrupt_gradient);
    add("finite-difference gradient", g.passed,
        std::to_string(g.failures) + "/" + std::to_string(g.coordinates) + " failures, max rel error " +
            format_double(g.max_rel_error));

    const double e = scale_invariance_error(problem, 10000, 1);
    add("loss scale invariance", e <= 1e-12, "max rel change " + format_double(e));

    const NetworkParams params = init_params(problem.arch, StreamKey(7));
    PointSet xs(1, 0);
    for (int i = 0; i <= 600; ++i) xs.push_back(std::vector<double>{-1.0 + i / 300.0});
    const EvalPoints pts = prepare_points(problem.features, xs);
    const std::vector<double> fast = forward_batch(params, pts);
    const std::vector<double> slow = reference::forward_batch(params, pts);
    double worst = 0.0;
    for (std::size_t i = 0; i < fast.size(); ++i) worst = std::max(worst, std::abs(fast[i] - slow[i]));
    add("blocked kernel matches serial reference", worst < 1e-12, "max abs diff " + format_double(worst));
  }
  {
    std::vector<double> theta{1.0};
    AdamState state(1);
    const double expected[] = {0.9000000005, 0.80041222869179215, 0.70158627294602955};
    double worst = 0.0;
    for (int t = 1; t <= 3; ++t) {
      const std::vector<double> g{2.0 * theta[0]};
      adam_step(theta, g, state, t, 0.1, AdamConstants{});
      worst = std::max(worst, std::abs(theta[0] - expected[t - 1]));
    }
    add("ADAM three-step trajectory", worst < 1e-12, "max abs error " + format_double(worst));
  }
  return report;
}

// ---- info ----

std::string info_arch(const std::string& spec) {
  Architecture a{0, 0, 0};
  std::istringstream in(spec);
  std::string item;
  bool seen_d = false, seen_l = false, seen_m = false;
  while (in >> item) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'd=.. l=.. m=..', got '" + item + "'");
    const std::string key = item.substr(0, eq);
    int value = 0;
    try {
      value = std::stoi(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw ConfigError("bad value in '" + item + "'");
    }
    if (key == "d") {
      a.d = value;
      seen_d = true;
    } else if (key == "l") {
      a.l = value;
      seen_l = true;
    } else if (key == "m") {
      a.m = value;
      seen_m = true;
    } else {
      throw ConfigError("unknown architecture key '" + key + "'");
    }
  }
  if (!(seen_d && seen_l && seen_m)) throw ConfigError("architecture needs d, l and m");
  a.validate();
  return "d=" + std::to_string(a.d) + " l=" + std::to_string(a.l) + " m=" + std::to_string(a.m) + ": " +
         std::to_string(a.parameter_count()) + " parameters\n";
}

std::string info_schedule(const TrainConfig& config) {
  config.validate();
  const std::size_t stages = (config.epochs + config.decay_every - 1) / config.decay_every;
  std::ostringstream os;
  os << config.epochs << " epochs, " << stages << " stages\n" << schedule_lines(config, "");
  return os.str();
}

std::string info_domain(const RunConfig& config, const std::string& name) {
  const Domain domain = build_domain(config, name);
  std::ostringstream os;
  os << "domain " << domain.name() << " (d=" << domain.dim() << "), volume " << format_double(domain.volume())
     << "\n";
  const auto [lo, hi] = domain.bounding_box();
  os << "bounding box " << vec_text(lo) << " - " << vec_text(hi) << "\n";
  os << "sampling region " << default_sampling_region(domain).describe() << "\n";
  const DomainShape& shape = domain.shape();
  if (const auto* iv = std::get_if<IntervalShape>(&shape)) {
    os << "interval " << range_text(iv->a, iv->b) << "\n";
  } else if (const auto* box = std::get_if<BoxShape>(&shape)) {
    for (std::size_t k = 0; k < box->lo.size(); ++k) os << "axis " << k + 1 << " " << range_text(box->lo[k], box->hi[k]) << "\n";
  } else if (const auto* ball = std::get_if<BallShape>(&shape)) {
    os << "center " << vec_text(ball->center) << " radius " << format_double(ball->radius) << "\n";
  } else if (std::holds_alternative<LShapeShape>(shape)) {
    os << "[-1,1]^2 without (0,1]^2\nvertices (counterclockwise):\n";
    for (Vec2 v : {Vec2{-1, -1}, Vec2{1, -1}, Vec2{1, 0}, Vec2{0, 0}, Vec2{0, 1}, Vec2{-1, 1}}) {
      os << "  " << point_text(v) << "\n";
    }
    os << "reentrant corner (0, 0), opening 3pi/2\n";
  } else if (const auto* drum = std::get_if<DrumShape>(&shape)) {
    const TiledPolygon& poly = *drum->polygon;
    os << "scale (triangle leg) " << format_double(drum->scale) << ", " << poly.tiles.size() << " tiles, "
       << poly.pieces.size() << " convex pieces\nvertices (counterclockwise):\n";
    for (Vec2 v : poly.vertices) os << "  " << point_text(v) << "\n";
    for (const ReentrantCorner& c : poly.corners) {
      os << "reentrant corner " << point_text(c.position) << ", opening " << format_double(c.opening / std::numbers::pi)
         << "pi, bump radius " << format_double(c.bump_radius) << "\n";
    }
  }
  return os.str();
}

std::string info_features(const RunConfig& config) {
  const Problem problem = build_problem(config, config.s);
  std::ostringstream os;
  os << problem.features.size() << " features on " << problem.domain.name() << " (s=" << format_double(config.s)
     << ")\n";
  const auto& specs = problem.features.specs();
  for (std::size_t j = 0; j < specs.size(); ++j) {
    os << "  " << j + 1 << " " << token(specs[j].kind) << " " << format_double(specs[j].exponent) << "\n";
  }
  return os.str();
}

std::string info_keys() {
  std::ostringstream os;
  for (const auto& [key, help] : config_keys()) os << "  " << std::left << std::setw(20) << key << help << "\n";
  return os.str();
}

}  // namespace fraceig
