#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "fraceig/estimator.hpp"
#include "fraceig/trainer.hpp"

namespace fraceig {

/// Flat `key = value` run configuration. Every key has a default; unknown keys are rejected.
struct RunConfig {
  // domain
  std::string domain = "interval";  // interval, box, ball, lshape, drumA, drumB
  double a = -1.0;
  double b = 1.0;
  int dim = 0;  // box/ball dimension; 0 means "from lo/center", else 2 (box) or 3 (ball)
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<double> center;
  double radius = 1.0;
  double drum_scale = 1.0;

  // problem
  double s = 0.5;
  std::string potential = "zero";
  int K = 1;
  int boundary_features = 40;
  int corner_features = -1;  // -1: 20 on the L-shape and drums, 0 elsewhere
  std::string boundary_exponents = "s,3";
  std::string corner_exponents = "2/3,3/2";
  int layers = 3;

  // training
  std::string preset = "paper";
  TrainConfig train = TrainConfig::paper();

  // run
  std::string output = "out";
  std::vector<double> s_list;
  std::string drum_a = "drumA";
  std::string drum_b = "drumB";
};

/// Keys with a one-line description, in canonical order.
const std::vector<std::pair<std::string, std::string>>& config_keys();

/// Corner features actually used: the configured count, or the domain default.
int corner_feature_count(const RunConfig& config, const Domain& domain);

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Parses config text; `preset` (if present) is applied before the other keys.
/// Overrides (e.g. from command-line flags) replace values given in the text.
/// Errors carry the source name and line number.
RunConfig parse_config(const std::string& text, const std::string& source = "config",
                       const KeyValues& overrides = {});
RunConfig load_config(const std::filesystem::path& path, const KeyValues& overrides = {});

/// Replaces the training schedule with a preset, keeping seed and progress interval.
void apply_preset(RunConfig& config, const std::string& preset);

/// Throws ConfigError on inconsistent values.
void validate(const RunConfig& config);

/// Canonical listing of every key; parse_config(format_config(c)) reproduces c.
std::string format_config(const RunConfig& config);

Domain build_domain(const RunConfig& config, const std::string& domain_name = "");

/// Problem for fractional order s on the named domain (defaults to config.domain).
Problem build_problem(const RunConfig& config, double s, const std::string& domain_name = "");

/// "s,3" style interval where the token "s" stands for the fractional order.
std::pair<double, double> parse_interval(const std::string& text, double s);

/// Shortest decimal that reads back to the same double (17 significant digits at most).
std::string format_double(double x);

}  // namespace fraceig
