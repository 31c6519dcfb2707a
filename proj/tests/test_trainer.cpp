#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "fraceig/error.hpp"
#include "fraceig/trainer.hpp"

using namespace fraceig;

namespace {

Problem interval_problem(double s) {
  const Domain domain = Domain::interval(-1.0, 1.0);
  return Problem{domain, default_sampling_region(domain), s, {}, FeatureSet::standard(domain, 40, s, 3.0),
                 Architecture{1, 3, 40}, 1e-4};
}

TrainConfig tiny(std::size_t epochs) {
  TrainConfig c;
  c.epochs = epochs;
  c.decay_every = 50;
  c.n0 = 200;
  c.n_final = 4000;
  c.n_batches_final = 2;
  c.seed = 5;
  c.progress_every = 1;
  return c;
}

// Textbook ADAM in long double for one scalar parameter.
std::vector<double> adam_oracle(double theta, int steps, double lr) {
  long double m = 0, v = 0, th = theta;
  std::vector<double> out;
  for (int t = 1; t <= steps; ++t) {
    const long double g = 2.0L * th;
    m = 0.9L * m + 0.1L * g;
    v = 0.999L * v + 0.001L * g * g;
    const long double mh = m / (1.0L - std::pow(0.9L, t));
    const long double vh = v / (1.0L - std::pow(0.999L, t));
    th -= lr * mh / (std::sqrt(vh) + 1e-8L);
    out.push_back(static_cast<double>(th));
  }
  return out;
}

}  // namespace

TEST_CASE("learning-rate schedule") {
  const TrainConfig c = TrainConfig::paper();
  CHECK(lr_at(c, 0) == 5e-3);
  CHECK(lr_at(c, 19999) == 5e-3);
  CHECK(lr_at(c, 20000) == 1.25e-3);
  CHECK(lr_at(c, 100000) == doctest::Approx(4.8828125e-6).epsilon(1e-15));
  CHECK(lr_at(c, 119999) == lr_at(c, 100000));
  const TrainConfig d = TrainConfig::desk();
  CHECK(d.epochs == 30000);
  CHECK(lr_at(d, 5000) == 1.25e-3);
  CHECK(lr_at(d, 29999) == doctest::Approx(4.8828125e-6).epsilon(1e-15));
}

TEST_CASE("sample-size schedule") {
  const TrainConfig c = TrainConfig::paper();
  CHECK(n_at(c, 0) == 1000);
  CHECK(n_at(c, 40000) == 4000);
  CHECK(n_at(c, 119999) == 32000);
  CHECK(n_at(TrainConfig::desk(), 29999) == 32000);
}

TEST_CASE("schedule is monotone over the whole run") {
  const TrainConfig c = TrainConfig::paper();
  for (std::size_t e = 1; e < c.epochs; ++e) {
    REQUIRE(lr_at(c, e) <= lr_at(c, e - 1));
    REQUIRE(n_at(c, e) >= n_at(c, e - 1));
    const bool boundary = e % c.decay_every == 0;
    REQUIRE((lr_at(c, e) == lr_at(c, e - 1)) == !boundary);
    if (boundary) {
      REQUIRE(lr_at(c, e) * 4.0 == lr_at(c, e - 1));
      REQUIRE(n_at(c, e) == 2 * n_at(c, e - 1));
    }
  }
}

TEST_CASE("penalty parameter") {
  const TrainConfig c;
  CHECK_FALSE(beta_for(std::vector<double>{}, c).has_value());
  CHECK(*beta_for(std::vector<double>{1.0, 2.5}, c) == 10.0);
  const std::vector<double> table{1.15780, 2.75496, 4.31666, 5.89386, 7.46028};
  CHECK(*beta_for(table, c) == doctest::Approx(29.84112).epsilon(1e-14));
}

TEST_CASE("ADAM steps") {
  std::vector<double> theta{0.5, -2.0};
  AdamState state(2);
  adam_step(theta, std::vector<double>{0.0, 0.0}, state, 1, 1e-3, AdamConstants{});
  CHECK(theta == std::vector<double>{0.5, -2.0});

  std::vector<double> one{0.0};
  AdamState s1(1);
  adam_step(one, std::vector<double>{1.0}, s1, 1, 1e-3, AdamConstants{});
  CHECK(one[0] == doctest::Approx(-1e-3 / (1.0 + 1e-8)).epsilon(1e-15));
  CHECK(one[0] == doctest::Approx(-9.9999999e-4).epsilon(1e-12));

  // Three steps on theta^2 from theta = 1, lr = 0.1.
  const std::vector<double> oracle = adam_oracle(1.0, 3, 0.1);
  const double frozen[] = {0.9000000005, 0.80041222869179215, 0.70158627294602955};
  std::vector<double> th{1.0};
  AdamState s3(1);
  for (int t = 1; t <= 3; ++t) {
    adam_step(th, std::vector<double>{2.0 * th[0]}, s3, t, 0.1, AdamConstants{});
    CHECK(th[0] == doctest::Approx(oracle[t - 1]).epsilon(1e-14));
    CHECK(th[0] == doctest::Approx(frozen[t - 1]).epsilon(1e-15));
  }

  CHECK_THROWS_AS(adam_step(th, std::vector<double>{1.0}, s3, 0, 0.1, AdamConstants{}), ConfigError);
  std::vector<double> bad{1.0};
  AdamState sb(1);
  CHECK_THROWS_WITH_AS(
      adam_step(bad, std::vector<double>{std::numeric_limits<double>::quiet_NaN()}, sb, 1, 0.1, AdamConstants{}, 17),
      "optimizer divergence at epoch 17, parameter 0", NumericError);
}

TEST_CASE("ADAM is deterministic over many steps") {
  auto run = [] {
    std::vector<double> th{0.3, -0.7, 1.1};
    AdamState s(3);
    for (int t = 1; t <= 1000; ++t) {
      std::vector<double> g{std::sin(th[0] * t), th[1] * th[1] - 0.2, th[2] - th[0]};
      adam_step(th, g, s, t, 1e-2, AdamConstants{});
    }
    return th;
  };
  CHECK(run() == run());
}

TEST_CASE("training configuration validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  c.epochs = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = TrainConfig{};
  c.decay_factor = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = TrainConfig{};
  c.lr0 = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_THROWS_WITH_AS(solve_sequence(0, interval_problem(0.5), TrainConfig{}), "K must be >= 1", ConfigError);
  CHECK_THROWS_AS(train_mode(2, {}, interval_problem(0.5), tiny(10)), ConfigError);
}

TEST_CASE("training is deterministic") {
  const Problem p = interval_problem(0.5);
  auto run = [&] {
    std::vector<double> losses;
    const ModeSnapshot m = train_mode(1, {}, p, tiny(100), [&](const ProgressRecord& r) { losses.push_back(r.loss); });
    return std::make_pair(m, losses);
  };
  const auto [a, la] = run();
  const auto [b, lb] = run();
  CHECK(la.size() == 100);
  CHECK(la == lb);
  CHECK(a.params == b.params);
  CHECK(a.lambda_hat == b.lambda_hat);
  CHECK(a.features == p.features.specs());
}

TEST_CASE("a short run approaches the first eigenvalue") {
  const Problem p = interval_problem(0.5);
  TrainConfig c = TrainConfig::desk();
  c.epochs = 2000;
  c.decay_every = 500;
  c.n0 = 500;
  c.n_final = 100000;
  c.n_batches_final = 10;
  c.seed = 1;
  const ModeSnapshot m = train_mode(1, {}, p, c);
  CHECK(m.lambda_hat == doctest::Approx(1.15777).epsilon(0.02));
  CHECK(m.lambda_hat >= 1.15777 - 3.0 * m.lambda_se);
  CHECK(m.l2_norm_sq > 0.0);
}

TEST_CASE("solve_sequence records betas, overlaps and timings") {
  const Problem p = interval_problem(0.5);
  const SolveResult r = solve_sequence(2, p, tiny(60));
  REQUIRE(r.failure.empty());
  REQUIRE(r.modes.size() == 2);
  CHECK(r.betas[0] == 0.0);
  CHECK(r.betas[1] == 4.0 * r.modes[0].lambda_hat);
  CHECK(r.overlaps[0].empty());
  REQUIRE(r.overlaps[1].size() == 1);
  CHECK(std::abs(r.overlaps[1][0]) <= 1.0);
  CHECK(r.max_overlap() == std::abs(r.overlaps[1][0]));
  CHECK(r.wall_seconds.size() == 2);
}

TEST_CASE("a diverging run reports a partial failure") {
  const Problem p = interval_problem(0.5);
  TrainConfig c = tiny(40);
  c.lr0 = 1e300;
  const SolveResult r = solve_sequence(2, p, c);
  CHECK_FALSE(r.failure.empty());
  CHECK(r.failure.rfind("mode 1: ", 0) == 0);
  CHECK(r.modes.empty());
}
