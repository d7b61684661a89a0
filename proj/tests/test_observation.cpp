#include <cmath>
#include <vector>

#include <doctest.h>

#include "epirenew/math_utils.hpp"
#include "epirenew/observation.hpp"
#include "epirenew/rng.hpp"
#include "test_helpers.hpp"

using namespace epirenew;
using epirenew::testing::rel_err;

TEST_SUITE_BEGIN("observation");

TEST_CASE("count log pmfs match external values") {
  CHECK(obs_log_pmf(ObsFamily::poisson, 3, 3.0, 0.0) ==
        doctest::Approx(-1.4959226032237259).epsilon(1e-14));
  CHECK(obs_log_pmf(ObsFamily::poisson, 7, 4.2, 0.0) ==
        doctest::Approx(-2.6795696840401559).epsilon(1e-13));
  CHECK(obs_log_pmf(ObsFamily::neg_binomial, 5, 3.5, 2.0) ==
        doctest::Approx(-2.491367972844191).epsilon(1e-13));
  CHECK(obs_log_pmf(ObsFamily::neg_binomial, 0, 2.0, 10.0) ==
        doctest::Approx(-1.8232155679395463).epsilon(1e-13));
  CHECK(obs_log_pmf(ObsFamily::quasi_poisson, 5, 3.5, 2.0) ==
        doctest::Approx(-2.3309491225876576).epsilon(1e-13));
  CHECK(obs_log_pmf(ObsFamily::quasi_poisson, 2, 6.0, 1.5) ==
        doctest::Approx(-2.7060970479446002).epsilon(1e-13));
  CHECK(binomial_log_pmf(4, 10, 0.3) ==
        doctest::Approx(-1.6088333502186696).epsilon(1e-13));
}

TEST_CASE("negative binomial interpolates between variance regimes") {
  // size phi: variance y + y^2/phi, so huge phi approaches the poisson
  double nb = obs_log_pmf(ObsFamily::neg_binomial, 4, 3.0, 1e9);
  double pois = obs_log_pmf(ObsFamily::poisson, 4, 3.0, 0.0);
  CHECK(rel_err(nb, pois) < 1e-7);
  // linear-variance family at phi just above 1 approaches the poisson too
  double qp = obs_log_pmf(ObsFamily::quasi_poisson, 4, 3.0, 1.0 + 1e-8);
  CHECK(rel_err(qp, pois) < 1e-6);
}

TEST_CASE("pmfs normalize over counts") {
  for (ObsFamily family :
       {ObsFamily::poisson, ObsFamily::neg_binomial, ObsFamily::quasi_poisson}) {
    double total = 0.0;
    for (long k = 0; k <= 200; ++k) total += std::exp(obs_log_pmf(family, k, 6.0, 2.5));
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
  }
  double total = 0.0;
  for (long k = 0; k <= 10; ++k) total += std::exp(binomial_log_pmf(k, 10, 0.3));
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("count pmf gradients match external values and finite differences") {
  ObsLogPmfGrad nb = obs_log_pmf_grad(ObsFamily::neg_binomial, 5, 3.5, 2.0);
  CHECK(nb.d_y == doctest::Approx(0.15584415584415584).epsilon(1e-12));
  CHECK(nb.d_phi == doctest::Approx(0.16567181559424735).epsilon(1e-12));
  ObsLogPmfGrad qp = obs_log_pmf_grad(ObsFamily::quasi_poisson, 5, 3.5, 2.0);
  CHECK(qp.d_y == doctest::Approx(0.28378699637423162).epsilon(1e-12));
  CHECK(qp.d_phi == doctest::Approx(-0.24325448730981069).epsilon(1e-12));

  const double h = 1e-6;
  struct Point {
    ObsFamily family;
    long count;
    double y, phi;
  };
  std::vector<Point> points = {
      {ObsFamily::poisson, 0, 2.5, 0.0},     {ObsFamily::poisson, 9, 4.0, 0.0},
      {ObsFamily::neg_binomial, 0, 1.5, 3.0}, {ObsFamily::neg_binomial, 12, 8.0, 0.7},
      {ObsFamily::quasi_poisson, 0, 2.0, 1.8}, {ObsFamily::quasi_poisson, 7, 5.5, 2.6}};
  for (const Point& p : points) {
    ObsLogPmfGrad g = obs_log_pmf_grad(p.family, p.count, p.y, p.phi);
    double fd_y = (obs_log_pmf(p.family, p.count, p.y + h, p.phi) -
                   obs_log_pmf(p.family, p.count, p.y - h, p.phi)) /
                  (2 * h);
    CHECK(rel_err(g.d_y, fd_y) < 1e-7);
    if (p.family != ObsFamily::poisson) {
      double fd_phi = (obs_log_pmf(p.family, p.count, p.y, p.phi + h) -
                       obs_log_pmf(p.family, p.count, p.y, p.phi - h)) /
                      (2 * h);
      CHECK(rel_err(g.d_phi, fd_phi) < 1e-7);
    }
  }

  double fd_p = (binomial_log_pmf(4, 10, 0.3 + h) - binomial_log_pmf(4, 10, 0.3 - h)) / (2 * h);
  CHECK(rel_err(binomial_log_pmf_grad(4, 10, 0.3), fd_p) < 1e-8);
}

TEST_CASE("pmf argument validation") {
  CHECK_THROWS(obs_log_pmf(ObsFamily::poisson, -1, 2.0, 0.0));
  CHECK_THROWS(obs_log_pmf(ObsFamily::neg_binomial, 3, 2.0, 0.0));
  CHECK_THROWS(obs_log_pmf(ObsFamily::quasi_poisson, 3, 2.0, 1.0));
  CHECK_THROWS(obs_log_pmf(ObsFamily::binomial, 3, 2.0, 1.0));
  CHECK_THROWS(binomial_log_pmf(5, 4, 0.3));
  CHECK_THROWS(binomial_log_pmf(1, 4, 1.5));
  CHECK(obs_log_pmf(ObsFamily::poisson, 0, 0.0, 0.0) == 0.0);
  CHECK(obs_log_pmf(ObsFamily::poisson, 2, 0.0, 0.0) == kNegInf);
}

TEST_CASE("family names round-trip") {
  for (ObsFamily family : {ObsFamily::poisson, ObsFamily::neg_binomial,
                           ObsFamily::quasi_poisson, ObsFamily::binomial}) {
    CHECK(obs_family_from_string(to_string(family)) == family);
  }
  CHECK_THROWS(obs_family_from_string("gaussian"));
}

namespace {

InfectionPath small_path() {
  InfectionPath path;
  path.seed_start = -1;
  path.seeds = {3.0, 5.0};
  path.values = {8.0, 12.0, 9.0, 14.0};
  return path;
}

}  // namespace

TEST_CASE("expected observations convolve over seeds and modeled days") {
  InfectionPath path = small_path();
  DiscretePmf delay = DiscretePmf::normalized_delay({0.2, 0.5, 0.3});
  std::vector<double> alpha = {0.5, 0.6, 0.7, 0.8};
  std::vector<double> y = expected_observations(path, alpha, delay);
  REQUIRE(y.size() == 4);
  for (int t = 1; t <= 4; ++t) {
    double conv = 0.0;
    for (int s = -1; s <= t; ++s) conv += path.at(s) * delay.at_lag(t - s);
    CHECK(y[static_cast<std::size_t>(t - 1)] ==
          doctest::Approx(alpha[static_cast<std::size_t>(t - 1)] * conv).epsilon(1e-13));
  }

  std::vector<double> bare = delay_convolution(path, delay);
  for (int t = 1; t <= 4; ++t) {
    CHECK(y[static_cast<std::size_t>(t - 1)] ==
          doctest::Approx(alpha[static_cast<std::size_t>(t - 1)] *
                          bare[static_cast<std::size_t>(t - 1)])
              .epsilon(1e-13));
  }
  CHECK_THROWS(expected_observations(path, {0.5, 0.6}, delay));
}

TEST_CASE("log likelihood skips masked days and records day indices") {
  ObservedSeries series;
  series.type_name = "cases";
  series.counts = {4, 999, 6, 3};
  series.mask = {true, false, true, true};
  std::vector<double> y = {3.5, 2.0, 5.5, 4.0};
  LogLikelihoodResult res = log_likelihood(series, ObsFamily::neg_binomial, y, 2.0);
  REQUIRE(res.pointwise.size() == 3);
  CHECK(res.days == std::vector<int>{1, 3, 4});
  double total = 0.0;
  for (double v : res.pointwise) total += v;
  CHECK(res.total == doctest::Approx(total).epsilon(1e-13));
  CHECK(res.pointwise[0] ==
        doctest::Approx(obs_log_pmf(ObsFamily::neg_binomial, 4, 3.5, 2.0)).epsilon(1e-13));

  // zero mean forces a zero count
  std::vector<double> y0 = {0.0, 2.0, 5.5, 4.0};
  series.counts[0] = 0;
  CHECK(log_likelihood(series, ObsFamily::neg_binomial, y0, 2.0).pointwise[0] == 0.0);
  series.counts[0] = 1;
  CHECK(log_likelihood(series, ObsFamily::neg_binomial, y0, 2.0).total == kNegInf);
}

TEST_CASE("binomial likelihood uses the cumulative attack rate") {
  ObservedSeries series;
  series.type_name = "sero";
  series.counts = {2, 5};
  series.trials = {10, 20};
  series.mask = {true, true};
  std::vector<double> cumulative = {40.0, 90.0};
  LogLikelihoodResult res = log_likelihood_binomial(series, cumulative, 200.0);
  REQUIRE(res.pointwise.size() == 2);
  CHECK(res.pointwise[0] == doctest::Approx(binomial_log_pmf(2, 10, 0.2)).epsilon(1e-13));
  CHECK(res.pointwise[1] == doctest::Approx(binomial_log_pmf(5, 20, 0.45)).epsilon(1e-13));
  CHECK(res.total == doctest::Approx(res.pointwise[0] + res.pointwise[1]).epsilon(1e-13));
}

TEST_CASE("sampled counts match the family mean-variance law") {
  Rng rng = make_stream(51, 0);
  const int n = 60000;
  struct Setting {
    ObsFamily family;
    double y, phi, want_ratio;
  };
  // variance-to-mean: poisson 1, quadratic 1 + y/phi, linear phi
  std::vector<Setting> settings = {{ObsFamily::poisson, 6.0, 0.0, 1.0},
                                   {ObsFamily::neg_binomial, 6.0, 3.0, 3.0},
                                   {ObsFamily::quasi_poisson, 6.0, 2.5, 2.5}};
  for (const Setting& s : settings) {
    Welford w;
    for (int i = 0; i < n; ++i)
      w.add(static_cast<double>(sample_count(s.family, s.y, s.phi, rng)));
    double se = w.sd() / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(w.mean() - s.y) < 5.0 * se);
    CHECK(w.variance() / w.mean() == doctest::Approx(s.want_ratio).epsilon(0.08));
  }
  CHECK(sample_count(ObsFamily::poisson, 0.0, 0.0, rng) == 0);
}

TEST_CASE("simulated series have the path horizon and full mask") {
  Rng rng = make_stream(53, 0);
  InfectionPath path = small_path();
  DiscretePmf delay = DiscretePmf::normalized_delay({0.1, 0.6, 0.3});
  std::vector<double> alpha(4, 0.9);
  ObservedSeries series =
      simulate_observations(path, alpha, delay, ObsFamily::neg_binomial, 8.0, rng);
  CHECK(series.horizon() == 4);
  REQUIRE(series.mask.size() == 4);
  for (bool m : series.mask) CHECK(m);
  for (long c : series.counts) CHECK(c >= 0);
}

TEST_SUITE_END();
