#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "epirenew/math_utils.hpp"
#include "epirenew/moment_match.hpp"
#include "epirenew/renewal.hpp"
#include "test_helpers.hpp"

using namespace epirenew;
using epirenew::testing::rel_err;

namespace {

/// Independent double-loop oracle for the deterministic recursion.
std::vector<double> brute_force(const std::vector<double>& seeds, int seed_start,
                                const std::vector<double>& reproduction,
                                const DiscretePmf& g) {
  const int horizon = static_cast<int>(reproduction.size());
  std::vector<double> values(static_cast<std::size_t>(horizon), 0.0);
  auto infections_at = [&](int s) -> double {
    if (s >= 1) return s <= horizon ? values[static_cast<std::size_t>(s - 1)] : 0.0;
    int k = s - seed_start;
    if (k < 0 || k >= static_cast<int>(seeds.size())) return 0.0;
    return seeds[static_cast<std::size_t>(k)];
  };
  for (int t = 1; t <= horizon; ++t) {
    double load = 0.0;
    for (int s = seed_start; s < t; ++s) load += infections_at(s) * g.at_lag(t - s);
    values[static_cast<std::size_t>(t - 1)] =
        reproduction[static_cast<std::size_t>(t - 1)] * load;
  }
  return values;
}

}  // namespace

TEST_SUITE_BEGIN("renewal");

TEST_CASE("unit-lag generation with R=2 doubles exactly") {
  DiscretePmf g = DiscretePmf::generation({1.0});
  std::vector<double> reproduction(20, 2.0);
  InfectionPath path = propagate_expected({1.0}, 0, reproduction, g);
  double expected = 1.0;
  for (int t = 1; t <= 20; ++t) {
    expected *= 2.0;
    CHECK(path.at(t) == expected);
  }
}

TEST_CASE("recursion matches the brute-force oracle") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    int glen = 1 + static_cast<int>(rng() % 6);
    std::vector<double> w(static_cast<std::size_t>(glen));
    double sum = 0.0;
    for (double& v : w) {
      v = 0.05 + unif(rng);
      sum += v;
    }
    for (double& v : w) v /= sum;
    DiscretePmf g = DiscretePmf::normalized_generation(w);

    int window = 1 + static_cast<int>(rng() % 4);
    std::vector<double> seeds(static_cast<std::size_t>(window));
    for (double& s : seeds) s = 10.0 * unif(rng);

    int horizon = 5 + static_cast<int>(rng() % 46);
    std::vector<double> reproduction(static_cast<std::size_t>(horizon));
    for (double& r : reproduction) r = 0.3 + 2.2 * unif(rng);

    InfectionPath path = propagate_expected(seeds, 1 - window, reproduction, g);
    std::vector<double> oracle = brute_force(seeds, 1 - window, reproduction, g);
    for (int t = 1; t <= horizon; ++t) {
      CHECK(std::abs(path.at(t) - oracle[static_cast<std::size_t>(t - 1)]) <=
            1e-12 * std::max(1.0, std::abs(oracle[static_cast<std::size_t>(t - 1)])));
    }
    // case_load consistency at a few days
    for (int t : {1, horizon / 2, horizon}) {
      double load = 0.0;
      for (int s = 1 - window; s < t; ++s) load += path.at(s) * g.at_lag(t - s);
      CHECK(rel_err(case_load(path, g, t), load) < 1e-12);
    }
  }
}

TEST_CASE("propagate_expected validates its inputs") {
  DiscretePmf g = DiscretePmf::generation({1.0});
  CHECK_THROWS(propagate_expected({1.0}, 1, {2.0}, g));
  CHECK_THROWS(propagate_expected({1.0, 1.0}, 0, {2.0}, g));
  CHECK_THROWS(propagate_expected({-1.0}, 0, {2.0}, g));
  CHECK_THROWS(propagate_expected({1.0}, 0, {0.0}, g));
}

TEST_CASE("population adjustment matches the closed form") {
  CHECK(adjust_population(2.0, 50.0, 1000.0, 100.0) ==
        doctest::Approx(85.64632376763643).epsilon(1e-14));
  // bounded by both the remaining population and the unadjusted value
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    double s0 = 100.0 + 10000.0 * unif(rng);
    double cum = s0 * 0.9 * unif(rng);
    double r = 0.1 + 4.0 * unif(rng);
    double load = 3000.0 * unif(rng);
    double adjusted = adjust_population(r, load, s0, cum);
    CHECK(adjusted >= 0.0);
    CHECK(adjusted <= (s0 - cum) * (1.0 + 1e-12));
    CHECK(adjusted <= r * load * (1.0 + 1e-12));
  }
}

TEST_CASE("population-adjusted paths never exceed the population") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  DiscretePmf g = DiscretePmf::normalized_generation({0.2, 0.5, 0.3});
  for (int i = 0; i < 200; ++i) {
    double s0 = 50.0 + 5000.0 * unif(rng);
    std::vector<double> seeds = {s0 * 0.02 * unif(rng), s0 * 0.02 * unif(rng)};
    std::vector<double> reproduction(30);
    for (double& r : reproduction) r = 0.2 + 6.0 * unif(rng);
    InfectionPath path = propagate_expected(seeds, -1, reproduction, g, s0);
    CHECK(path.total() <= s0 * (1.0 + 1e-12));
  }
}

TEST_CASE("latent step log densities match external values") {
  CHECK(latent_step_log_pdf(LagFamily::gamma, 6.0, 1.5, 4.0) ==
        doctest::Approx(-1.9214034849677073).epsilon(1e-12));
  CHECK(latent_step_log_pdf(LagFamily::lognormal, 6.0, 1.5, 4.0) ==
        doctest::Approx(-1.7488004025900273).epsilon(1e-12));
  CHECK(latent_step_log_pdf(LagFamily::weibull, 6.0, 1.5, 4.0) ==
        doctest::Approx(-2.0813330120416428).epsilon(1e-9));
  // zero mean: positive values are impossible, zero is certain
  CHECK(latent_step_log_pdf(LagFamily::gamma, 0.0, 1.5, 4.0) == kNegInf);
}

TEST_CASE("latent step gradients match finite differences") {
  const double h = 1e-6;
  for (LagFamily family : {LagFamily::gamma, LagFamily::lognormal}) {
    for (double value : {2.0, 6.0, 11.5}) {
      double mean = 5.0, d = 1.3;
      LatentStepGrad grad = latent_step_log_pdf_grad(family, mean, d, value);
      auto f = [&](double m, double dd, double v) {
        return latent_step_log_pdf(family, m, dd, v);
      };
      double fd_value = (f(mean, d, value + h) - f(mean, d, value - h)) / (2 * h);
      double fd_mean = (f(mean + h, d, value) - f(mean - h, d, value)) / (2 * h);
      double fd_d = (f(mean, d + h, value) - f(mean, d - h, value)) / (2 * h);
      CHECK(rel_err(grad.d_value, fd_value) < 1e-7);
      CHECK(rel_err(grad.d_mean, fd_mean) < 1e-7);
      CHECK(rel_err(grad.d_dispersion, fd_d) < 1e-7);
    }
  }
  CHECK_THROWS(latent_step_log_pdf_grad(LagFamily::weibull, 5.0, 1.3, 2.0));
}

TEST_CASE("truncated step density renormalizes by the cdf") {
  double mean = 6.0, d = 1.5, upper = 8.0;
  auto prior = MomentMatchedPrior::match(LagFamily::gamma, mean, d);
  double expected =
      latent_step_log_pdf(LagFamily::gamma, mean, d, 4.0) - std::log(prior.cdf(upper));
  CHECK(latent_step_log_pdf_truncated(LagFamily::gamma, mean, d, 4.0, upper) ==
        doctest::Approx(expected).epsilon(1e-12));
  CHECK(latent_step_log_pdf_truncated(LagFamily::gamma, mean, d, 9.0, upper) == kNegInf);
}

TEST_CASE("truncation gradient matches finite differences") {
  const double h = 1e-6;
  for (LagFamily family : {LagFamily::gamma, LagFamily::lognormal}) {
    double mean = 6.0, d = 1.5, upper = 8.0;
    TruncationGrad grad = latent_truncation_grad(family, mean, d, upper);
    auto normalizer = [&](double m, double dd, double up) {
      auto prior = MomentMatchedPrior::match(family, m, dd);
      return -std::log(prior.cdf(up));
    };
    double fd_mean = (normalizer(mean + h, d, upper) - normalizer(mean - h, d, upper)) / (2 * h);
    double fd_d = (normalizer(mean, d + h, upper) - normalizer(mean, d - h, upper)) / (2 * h);
    double fd_up = (normalizer(mean, d, upper + h) - normalizer(mean, d, upper - h)) / (2 * h);
    CHECK(rel_err(grad.d_mean, fd_mean) < 1e-6);
    CHECK(rel_err(grad.d_dispersion, fd_d) < 1e-6);
    CHECK(rel_err(grad.d_upper, fd_up) < 1e-6);
  }
  // numerically flat when the truncation bites nothing
  TruncationGrad flat = latent_truncation_grad(LagFamily::gamma, 2.0, 0.5, 1e6);
  CHECK(flat.d_mean == 0.0);
  CHECK(flat.d_upper == 0.0);
}

TEST_CASE("latent step sampling recovers mean and dispersion") {
  Rng rng = make_stream(23, 0);
  for (LagFamily family : {LagFamily::gamma, LagFamily::lognormal, LagFamily::weibull}) {
    Welford w;
    const int n = 30000;
    for (int i = 0; i < n; ++i) w.add(latent_step_sample(family, 7.0, 1.8, rng));
    double se = w.sd() / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(w.mean() - 7.0) < 5.0 * se);
    CHECK(w.variance() / w.mean() == doctest::Approx(1.8).epsilon(0.1));
  }
}

TEST_CASE("truncated sampling respects the bound") {
  Rng rng = make_stream(29, 0);
  double upper = 6.5;
  for (int i = 0; i < 2000; ++i) {
    double v = latent_step_sample_truncated(LagFamily::gamma, 6.0, 1.5, upper, rng);
    CHECK(v > 0.0);
    CHECK(v <= upper);
  }
}

TEST_CASE("propagate_latent is consistent with its own density") {
  Rng rng = make_stream(31, 0);
  DiscretePmf g = DiscretePmf::normalized_generation({0.3, 0.4, 0.3});
  std::vector<double> reproduction(15, 1.4);
  LatentPath lp = propagate_latent({4.0, 4.0}, -1, reproduction, g, 1.2, LagFamily::gamma, rng);
  CHECK(lp.path.horizon() == 15);
  double recomputed =
      latent_path_log_density(lp.path, reproduction, g, 1.2, LagFamily::gamma);
  CHECK(lp.log_density == doctest::Approx(recomputed).epsilon(1e-10));

  // truncated variant stays within the population
  for (int i = 0; i < 50; ++i) {
    LatentPath capped =
        propagate_latent({4.0, 4.0}, -1, reproduction, g, 1.2, LagFamily::gamma, rng, 300.0);
    CHECK(capped.path.total() <= 300.0 * (1.0 + 1e-12));
  }
}

TEST_CASE("path accessors and seeding window") {
  SeedingConfig seeding;
  seeding.window = 6;
  CHECK(seeding.seed_start() == -5);

  InfectionPath path;
  path.seed_start = -1;
  path.seeds = {2.0, 3.0};
  path.values = {4.0, 5.0};
  CHECK(path.horizon() == 2);
  CHECK(path.num_seed_days() == 2);
  CHECK(path.at(-1) == 2.0);
  CHECK(path.at(0) == 3.0);
  CHECK(path.at(1) == 4.0);
  CHECK(path.at(-2) == 0.0);
  CHECK(path.at(3) == 0.0);
  CHECK(path.total() == doctest::Approx(14.0).epsilon(1e-15));
}

TEST_SUITE_END();
