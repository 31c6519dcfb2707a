#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fraceig/estimator.hpp"
#include "fraceig/network.hpp"

namespace fraceig {

struct AdamConstants {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainConfig {
  std::size_t epochs = 120000;
  double lr0 = 5e-3;
  std::size_t decay_every = 20000;
  double decay_factor = 4.0;
  std::size_t n0 = 1000;
  std::size_t n_growth = 2;
  double beta_factor = 4.0;
  double w_c = 1e-4;
  std::uint64_t seed = 0;
  std::size_t n_final = 1000000;
  std::size_t n_batches_final = 100;
  AdamConstants adam;
  std::size_t progress_every = 1000;

  static TrainConfig paper();
  /// 30000 epochs with decays every 5000.
  static TrainConfig desk();
  void validate() const;
};

double lr_at(const TrainConfig& config, std::size_t epoch);
std::size_t n_at(const TrainConfig& config, std::size_t epoch);

/// No penalty for the first mode, otherwise beta_factor times the largest eigenvalue found.
std::optional<double> beta_for(std::span<const double> found, const TrainConfig& config);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;

  explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

/// One bias-corrected ADAM update at step t >= 1.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, std::size_t t, double lr,
               const AdamConstants& adam, std::size_t epoch = 0);

struct ProgressRecord {
  int mode = 0;
  std::size_t epoch = 0;
  double loss = 0.0;
  double lr = 0.0;
  std::size_t n = 0;
};

using ProgressSink = std::function<void(const ProgressRecord&)>;

ModeSnapshot train_mode(int k, std::span<const ModeSnapshot> priors, const Problem& problem,
                        const TrainConfig& config, const ProgressSink& progress = {});

struct SolveResult {
  std::vector<ModeSnapshot> modes;
  std::vector<double> wall_seconds;
  std::vector<double> betas;  // 0 for the first mode
  /// overlaps[i][j] for j < i: normalized inner product of modes i and j.
  std::vector<std::vector<double>> overlaps;
  std::vector<std::string> warnings;
  std::string failure;  // empty when every mode finished

  [[nodiscard]] double max_overlap() const;
};

SolveResult solve_sequence(int K, const Problem& problem, const TrainConfig& config,
                           const ProgressSink& progress = {});

}  // namespace fraceig
