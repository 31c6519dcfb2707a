#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "fraceig/checkpoint.hpp"
#include "fraceig/config.hpp"
#include "fraceig/error.hpp"
#include "fraceig/experiments.hpp"

namespace fs = std::filesystem;
using namespace fraceig;

namespace {

enum ExitCode { kOk = 0, kValidationFailed = 1, kConfigFailed = 2, kRuntimeFailed = 3 };

struct CommonFlags {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool with_out = true) {
  cmd->add_option("--config", flags.config, "configuration file (key = value)");
  cmd->add_option("--preset", flags.preset, "training preset")->check(CLI::IsMember({"paper", "desk"}));
  cmd->add_option("--seed", flags.seed, "random seed");
  if (with_out) cmd->add_option("--out", flags.out, "output directory");
}

RunConfig load(const CommonFlags& flags) {
  KeyValues overrides;
  if (!flags.preset.empty()) overrides.emplace_back("preset", flags.preset);
  if (flags.seed) overrides.emplace_back("seed", std::to_string(*flags.seed));
  if (!flags.out.empty()) overrides.emplace_back("output", flags.out);
  if (flags.config.empty()) return parse_config("", "defaults", overrides);
  return load_config(flags.config, overrides);
}

int solve(const CommonFlags& flags) {
  if (flags.config.empty()) throw ConfigError("solve needs --config");
  const RunConfig config = load(flags);
  const SolveOutcome outcome = run_solve(config, config.output, &std::cerr);
  std::cout << kEigenvaluesHeader << "\n";
  for (std::size_t i = 0; i < outcome.result.modes.size(); ++i) {
    std::cout << i + 1 << "," << format_double(outcome.result.modes[i].lambda_hat) << ","
              << format_double(outcome.result.modes[i].lambda_se) << "\n";
  }
  if (!outcome.result.failure.empty()) {
    std::cerr << "error: " << outcome.result.failure << " (partial results in " << config.output << ")\n";
    return kRuntimeFailed;
  }
  return kOk;
}

int eigenfunction(const CommonFlags& flags, const std::string& checkpoint, const std::string& grid_text) {
  const ModeSnapshot snapshot = load_checkpoint(checkpoint);
  CommonFlags f = flags;
  if (f.config.empty()) {
    const fs::path manifest = fs::path(checkpoint).parent_path() / "manifest.txt";
    if (!fs::exists(manifest)) throw ConfigError("no --config given and no manifest.txt next to the checkpoint");
    f.config = manifest.string();
  }
  f.out.clear();
  const RunConfig config = load(f);
  const Domain domain = build_domain(config);
  const GridSpec grid = parse_grid(grid_text, domain);
  if (flags.out.empty() || flags.out == "-") {
    write_eigenfunction_grid(std::cout, domain, snapshot, grid);
  } else {
    std::ofstream out(flags.out);
    if (!out) throw Error("cannot write " + flags.out);
    write_eigenfunction_grid(out, domain, snapshot, grid);
  }
  return kOk;
}

int isospectral(const CommonFlags& flags) {
  if (flags.config.empty()) throw ConfigError("isospectral needs --config");
  const RunConfig config = load(flags);
  const std::vector<IsospectralRow> rows = run_isospectral(config, config.output, &std::cerr);
  write_isospectral_csv(std::cout, rows);
  return kOk;
}

int validate_cmd(const ValidationHooks& hooks) {
  const ValidationReport report = run_validation(hooks);
  for (const CheckResult& c : report.checks) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
  }
  std::cout << (report.passed() ? "all checks passed" : "validation FAILED") << "\n";
  return report.passed() ? kOk : kValidationFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fractional Laplacian eigenvalues by Monte Carlo deep Ritz training"};
  app.require_subcommand(1);
  app.footer("Configuration keys (config file, one 'key = value' per line, '#' starts a comment):\n" + info_keys() +
             "\nExit codes: 0 success, 1 validation failure, 2 config error, 3 runtime failure.");

  CommonFlags solve_flags, eig_flags, iso_flags, info_flags;
  CLI::App* solve_cmd = app.add_subcommand("solve", "train K modes; writes eigenvalues.csv, checkpoints, manifest");
  add_common(solve_cmd, solve_flags);

  std::string checkpoint, grid = "201";
  CLI::App* eig_cmd = app.add_subcommand("eigenfunction", "evaluate a checkpoint on a grid (CSV)");
  add_common(eig_cmd, eig_flags);
  eig_cmd->add_option("--checkpoint", checkpoint, "FSEV1 checkpoint")->required();
  eig_cmd->add_option("--grid", grid, "n1xn2[,lo:hi,...] (default ranges: bounding box)");

  CLI::App* iso_cmd = app.add_subcommand("isospectral", "solve both drums for every s in s_list; writes isospectral.csv");
  add_common(iso_cmd, iso_flags);

  ValidationHooks hooks;
  CLI::App* val_cmd = app.add_subcommand("validate", "oracle, unbiasedness and gradient checks");
  val_cmd->add_option("--inject-cds-scale", hooks.c_ds_scale, "test hook: scale the A1+A2 estimate");
  val_cmd->add_flag("--inject-gradient-error", hooks.corrupt_gradient, "test hook: corrupt analytic gradients");

  std::string arch, domain_name;
  bool schedule = false, features = false, keys = false;
  CLI::App* info_cmd = app.add_subcommand("info", "print architectures, schedules, domains, features or keys");
  add_common(info_cmd, info_flags, false);
  info_cmd->add_option("--arch", arch, "\"d=1 l=3 m=40\"");
  info_cmd->add_flag("--schedule", schedule, "learning-rate and batch-size schedule");
  info_cmd->add_option("--domain", domain_name, "interval | box | ball | lshape | drumA | drumB");
  info_cmd->add_flag("--features", features, "resolved feature exponents");
  info_cmd->add_flag("--keys", keys, "configuration keys");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigFailed;
  }

  try {
    if (solve_cmd->parsed()) return solve(solve_flags);
    if (eig_cmd->parsed()) return eigenfunction(eig_flags, checkpoint, grid);
    if (iso_cmd->parsed()) return isospectral(iso_flags);
    if (val_cmd->parsed()) return validate_cmd(hooks);
    if (info_cmd->parsed()) {
      const RunConfig config = load(info_flags);
      bool any = false;
      if (!arch.empty()) std::cout << info_arch(arch), any = true;
      if (schedule) std::cout << info_schedule(config.train), any = true;
      if (!domain_name.empty()) std::cout << info_domain(config, domain_name), any = true;
      if (features) std::cout << info_features(config), any = true;
      if (keys) std::cout << info_keys(), any = true;
      if (!any) throw ConfigError("info needs a topic: --arch, --schedule, --domain, --features or --keys");
      return kOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigFailed;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kConfigFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeFailed;
  }
  return kOk;
}
