#include "fraceig/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "fraceig/error.hpp"

namespace fraceig {

TrainConfig TrainConfig::paper() { return TrainConfig{}; }

TrainConfig TrainConfig::desk() {
  TrainConfig c;
  c.epochs = 30000;
  c.decay_every = 5000;
  c.n0 = 1000;
  return c;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (n0 < 1) throw ConfigError("n0 must be at least 1");
  if (!(lr0 > 0.0)) throw ConfigError("lr0 must be positive");
  if (!(decay_factor > 1.0)) throw ConfigError("decay_factor must exceed 1");
  if (decay_every < 1) throw ConfigError("decay_every must be at least 1");
  if (n_growth < 1) throw ConfigError("n_growth must be at least 1");
  if (!(beta_factor > 0.0)) throw ConfigError("beta_factor must be positive");
  if (!(w_c > 0.0)) throw ConfigError("w_c must be positive");
  if (n_final < 1 || n_batches_final < 1) throw ConfigError("n_final and n_batches_final must be at least 1");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0 && adam.eps > 0.0)) {
    throw ConfigError("invalid ADAM constants");
  }
}

double lr_at(const TrainConfig& config, std::size_t epoch) {
  return config.lr0 / std::pow(config.decay_factor, static_cast<double>(epoch / config.decay_every));
}

std::size_t n_at(const TrainConfig& config, std::size_t epoch) {
  std::size_t n = config.n0;
  for (std::size_t stage = epoch / config.decay_every; stage > 0; --stage) n *= config.n_growth;
  return n;
}

std::optional<double> beta_for(std::span<const double> found, const TrainConfig& config) {
  if (found.empty()) return std::nullopt;
  return config.beta_factor * *std::max_element(found.begin(), found.end());
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, std::size_t t, double lr,
               const AdamConstants& adam, std::size_t epoch) {
  if (t < 1) throw ConfigError("ADAM step index must be at least 1");
  const std::size_t n = params.size();
  if (state.m.size() != n) state = AdamState(n);
  const double correction1 = 1.0 - std::pow(adam.beta1, static_cast<double>(t));
  const double correction2 = 1.0 - std::pow(adam.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grads[i];
    state.m[i] = adam.beta1 * state.m[i] + (1.0 - adam.beta1) * g;
    state.v[i] = adam.beta2 * state.v[i] + (1.0 - adam.beta2) * g * g;
    const double m_hat = state.m[i] / correction1;
    const double v_hat = state.v[i] / correction2;
    const double updated = params[i] - lr * m_hat / (std::sqrt(v_hat) + adam.eps);
    if (!std::isfinite(updated)) {
      throw NumericError("optimizer divergence at epoch " + std::to_string(epoch) + ", parameter " +
                         std::to_string(i));
    }
    params[i] = updated;
  }
}

ModeSnapshot train_mode(int k, std::span<const ModeSnapshot> priors, const Problem& problem,
                        const TrainConfig& config, const ProgressSink& progress) {
  config.validate();
  if (static_cast<int>(priors.size()) != k - 1) throw ConfigError("mode k needs exactly k-1 priors");
  std::vector<double> found;
  for (const ModeSnapshot& p : priors) found.push_back(p.lambda_hat);
  const double beta = beta_for(found, config).value_or(0.0);

  NetworkParams params = init_params(problem.arch, stream(config.seed, StreamPurpose::kInit).child(k));
  AdamState state(params.size());
  const StreamKey batch_key = stream(config.seed, StreamPurpose::kBatch).child(k);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const std::size_t n = n_at(config, epoch);
    const double lr = lr_at(config, epoch);
    const Batch batch = draw_batch(problem.region, problem.s, n, problem.w_c, batch_key.child(epoch), 0,
                                   problem.potential);
    const LossModel model(problem, batch, priors, beta);
    const LossGradient lg = loss_gradient(params, model.points(), [&](std::span<const double> u, std::span<double> du) {
      return model.evaluate(u, du).loss;
    });
    adam_step(params.values(), lg.grad, state, epoch + 1, lr, config.adam, epoch);
    if (progress && config.progress_every > 0 &&
        (epoch % config.progress_every == 0 || epoch + 1 == config.epochs)) {
      progress({k, epoch, lg.loss, lr, n});
    }
  }

  const EigenEstimate est = estimate_eigenvalue(problem, params, config.n_final, config.n_batches_final,
                                                stream(config.seed, StreamPurpose::kFinal).child(k));
  ModeSnapshot snap;
  snap.params = std::move(params);
  snap.features = problem.features.specs();
  snap.lambda_hat = est.lambda_hat;
  snap.lambda_se = est.se;
  snap.l2_norm_sq = est.l2_norm_sq;
  return snap;
}

double SolveResult::max_overlap() const {
  double worst = 0.0;
  for (const auto& row : overlaps) {
    for (double v : row) worst = std::max(worst, std::abs(v));
  }
  return worst;
}

SolveResult solve_sequence(int K, const Problem& problem, const TrainConfig& config, const ProgressSink& progress) {
  if (K < 1) throw ConfigError("K must be >= 1");
  config.validate();
  SolveResult result;
  for (int k = 1; k <= K; ++k) {
    std::vector<double> found;
    for (const ModeSnapshot& m : result.modes) found.push_back(m.lambda_hat);
    const auto start = std::chrono::steady_clock::now();
    try {
      result.modes.push_back(train_mode(k, result.modes, problem, config, progress));
    } catch (const NumericError& e) {
      result.failure = "mode " + std::to_string(k) + ": " + e.what();
      break;
    }
    result.wall_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    result.betas.push_back(beta_for(found, config).value_or(0.0));

    const ModeSnapshot& cur = result.modes.back();
    if (k >= 2) {
      const ModeSnapshot& prev = result.modes[k - 2];
      if (cur.lambda_hat < prev.lambda_hat - 2.0 * (cur.lambda_se + prev.lambda_se)) {
        std::ostringstream os;
        os << "mode " << k << " eigenvalue " << cur.lambda_hat << " is below mode " << k - 1 << " ("
           << prev.lambda_hat << ")";
        result.warnings.push_back(os.str());
      }
      const double gap = cur.lambda_hat - result.modes.front().lambda_hat;
      if (!(result.betas.back() > gap)) {
        std::ostringstream os;
        os << "penalty " << result.betas.back() << " does not exceed lambda_" << k << " - lambda_1 = " << gap;
        result.warnings.push_back(os.str());
      }
    }
    std::vector<double> row;
    for (int j = 1; j < k; ++j) {
      row.push_back(normalized_overlap(problem, cur.params, result.modes[j - 1].params, config.n_final,
                                       stream(config.seed, StreamPurpose::kOverlap).child(k).child(j)));
    }
    result.overlaps.push_back(std::move(row));
  }
  return result;
}

}  // namespace fraceig
