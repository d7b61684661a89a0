#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "epirenew/diagnostics.hpp"
#include "epirenew/draws.hpp"
#include "epirenew/math_utils.hpp"
#include "epirenew/rng.hpp"

using namespace epirenew;

namespace {

std::vector<std::vector<double>> iid_chains(int m, int n, std::uint64_t seed,
                                            double shift_last = 0.0) {
  std::vector<std::vector<double>> chains;
  for (int c = 0; c < m; ++c) {
    Rng rng = make_stream(seed, static_cast<std::uint64_t>(c));
    std::normal_distribution<double> normal(c == m - 1 ? shift_last : 0.0, 1.0);
    std::vector<double> draws(static_cast<std::size_t>(n));
    for (double& v : draws) v = normal(rng);
    chains.push_back(std::move(draws));
  }
  return chains;
}

std::vector<std::vector<double>> ar1_chains(int m, int n, double phi, std::uint64_t seed) {
  std::vector<std::vector<double>> chains;
  double innovation_sd = std::sqrt(1.0 - phi * phi);
  for (int c = 0; c < m; ++c) {
    Rng rng = make_stream(seed, static_cast<std::uint64_t>(c));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> draws(static_cast<std::size_t>(n));
    double x = normal(rng);
    for (double& v : draws) {
      x = phi * x + innovation_sd * normal(rng);
      v = x;
    }
    chains.push_back(std::move(draws));
  }
  return chains;
}

}  // namespace

TEST_SUITE_BEGIN("diagnostics");

TEST_CASE("well-mixed chains pass and shifted chains fail the scale reduction") {
  auto good = iid_chains(4, 1000, 3);
  CHECK(split_rhat(good) < 1.01);
  CHECK(split_rhat(good) >= 1.0 - 1e-8);

  auto bad = iid_chains(4, 1000, 3, 2.0);
  CHECK(split_rhat(bad) > 1.5);
}

TEST_CASE("within-chain drift is caught by splitting") {
  // both halves of every chain have the same mean only under stationarity
  std::vector<std::vector<double>> ramp;
  Rng rng = make_stream(5, 0);
  std::normal_distribution<double> normal(0.0, 0.05);
  for (int c = 0; c < 4; ++c) {
    std::vector<double> draws(1000);
    for (int t = 0; t < 1000; ++t) draws[static_cast<std::size_t>(t)] = t / 1000.0 + normal(rng);
    ramp.push_back(std::move(draws));
  }
  CHECK(split_rhat(ramp) > 1.5);
}

TEST_CASE("degenerate inputs yield NaN diagnostics") {
  std::vector<std::vector<double>> constant = {{1.0, 1.0, 1.0, 1.0}, {1.0, 1.0, 1.0, 1.0}};
  CHECK(std::isnan(split_rhat(constant)));
  CHECK(std::isnan(bulk_ess(constant)));
  std::vector<std::vector<double>> tiny = {{1.0, 2.0}};
  CHECK(std::isnan(split_rhat(tiny)));
  CHECK(std::isnan(split_rhat({})));
}

TEST_CASE("effective sample size tracks independence and autocorrelation") {
  auto independent = iid_chains(4, 1000, 7);
  double ess_iid = bulk_ess(independent);
  CHECK(ess_iid > 3000.0);
  CHECK(ess_iid < 5200.0);

  double phi = 0.9;
  auto sticky = ar1_chains(4, 1000, phi, 9);
  double ess_ar = bulk_ess(sticky);
  // theoretical efficiency (1-phi)/(1+phi) ~ 5.3%: 4000 draws -> ~210
  CHECK(ess_ar < 600.0);
  CHECK(ess_ar > 60.0);
  CHECK(ess_ar < ess_iid / 5.0);
}

TEST_CASE("splitting halves chains and rank normalization produces normal scores") {
  std::vector<std::vector<double>> chains = {{1, 2, 3, 4, 5, 6}, {7, 8, 9, 10, 11, 12}};
  auto split = split_chains(chains);
  REQUIRE(split.size() == 4);
  CHECK(split[0] == std::vector<double>{1, 2, 3});
  CHECK(split[1] == std::vector<double>{4, 5, 6});
  CHECK(split[2] == std::vector<double>{7, 8, 9});
  CHECK(split[3] == std::vector<double>{10, 11, 12});
  // odd lengths drop the middle draw
  auto odd = split_chains({{1, 2, 3, 4, 5}});
  CHECK(odd[0] == std::vector<double>{1, 2});
  CHECK(odd[1] == std::vector<double>{4, 5});

  auto scores = rank_normalize(chains);
  REQUIRE(scores.size() == 2);
  double total = 0.0;
  for (const auto& c : scores) {
    for (double v : c) total += v;
  }
  CHECK(std::abs(total) < 1e-8);
  // monotone in the source values, pooled across chains
  for (std::size_t t = 1; t < 6; ++t) CHECK(scores[0][t] > scores[0][t - 1]);
  CHECK(scores[1][0] > scores[0][5]);

  // rank normalization is invariant to monotone transforms
  std::vector<std::vector<double>> squashed = chains;
  for (auto& c : squashed) {
    for (double& v : c) v = std::exp(v);
  }
  auto squashed_scores = rank_normalize(squashed);
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t t = 0; t < 6; ++t) {
      CHECK(squashed_scores[c][t] == doctest::Approx(scores[c][t]).epsilon(1e-12));
    }
  }
}

TEST_CASE("rank normalization makes the scale reduction robust to heavy tails") {
  auto chains = iid_chains(4, 1000, 11);
  // cube one chain: same ranks, wildly different variance
  for (double& v : chains[0]) v = v * v * v * 50.0;
  CHECK(split_rhat(chains) < 1.01);
}

TEST_CASE("fit-level diagnostics aggregate across parameters") {
  PosteriorDraws draws({"a", "b"}, 2, 400);
  Rng rng = make_stream(13, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int c = 0; c < 2; ++c) {
    for (int d = 0; d < 400; ++d) {
      draws.at(c, d, 0) = normal(rng);
      // parameter b disagrees across chains
      draws.at(c, d, 1) = normal(rng) + (c == 0 ? 0.0 : 3.0);
    }
  }
  draws.stats[0].divergences = 2;
  draws.stats[1].max_depth_hits = 1;
  FitDiagnostics diag = diagnose(draws);
  REQUIRE(diag.params.size() == 2);
  CHECK(diag.params[0].name == "a");
  CHECK(diag.params[0].rhat < 1.02);
  CHECK(diag.params[1].rhat > 1.5);
  CHECK(diag.max_rhat == doctest::Approx(diag.params[1].rhat));
  CHECK(diag.min_ess <= diag.params[0].ess_bulk);
  CHECK(diag.total_divergences == 2);
  CHECK(diag.total_max_depth_hits == 1);
}

TEST_SUITE_END();
