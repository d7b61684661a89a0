#pragma once

#include <optional>
#include <string>
#include <vector>

#include "epirenew/discrete_pmf.hpp"
#include "epirenew/renewal.hpp"
#include "epirenew/rng.hpp"

namespace epirenew {

/// Sampling family for an observed count series.
///
/// neg_binomial uses the quadratic variance y + y^2/phi; quasi_poisson is
/// the linear-variance variant phi*y (phi > 1), realized as a negative
/// binomial. binomial models seroprevalence-style tested/positive pairs
/// against the cumulative attack rate.
enum class ObsFamily { poisson, neg_binomial, quasi_poisson, binomial };

ObsFamily obs_family_from_string(const std::string& name);
std::string to_string(ObsFamily family);

struct ObservedSeries {
  std::string type_name;
  std::vector<long> counts;          // day 1..T; ignored where masked
  std::vector<bool> mask;            // true = observed; masked days are excluded, never zero-filled
  std::vector<long> trials;          // binomial only: tests per day
  int horizon() const { return static_cast<int>(counts.size()); }
};

/// Expected observations y_t = alpha_t * sum_{s<=t} i_s pi_{t-s}; the sum
/// runs over the seed window as well.
std::vector<double> expected_observations(const InfectionPath& path,
                                          const std::vector<double>& ascertainment,
                                          const DiscretePmf& delay);

/// Convolution without the ascertainment factor.
std::vector<double> delay_convolution(const InfectionPath& path, const DiscretePmf& delay);

/// Log pmf of one count given mean y and auxiliary phi.
double obs_log_pmf(ObsFamily family, long count, double y, double phi);

struct ObsLogPmfGrad {
  double d_y = 0.0;
  double d_phi = 0.0;
};

/// Partial derivatives of obs_log_pmf in (y, phi); requires y > 0.
ObsLogPmfGrad obs_log_pmf_grad(ObsFamily family, long count, double y, double phi);

/// d/dp of binomial_log_pmf; requires 0 < p < 1.
double binomial_log_pmf_grad(long positives, long trials, double p);

/// Binomial log pmf for tested/positive pairs with success probability p.
double binomial_log_pmf(long positives, long trials, double p);

struct LogLikelihoodResult {
  double total = 0.0;
  std::vector<double> pointwise;  // one entry per unmasked day, in day order
  std::vector<int> days;          // matching day indices (1-based)
};

/// Sum of per-day log pmfs over unmasked days. Days with y=0 and count 0
/// contribute exactly 0; y=0 with a positive count yields -inf.
LogLikelihoodResult log_likelihood(const ObservedSeries& series, ObsFamily family,
                                   const std::vector<double>& y, double phi);

/// Binomial variant: expected seropositive probability per day is
/// cumulative_converted_t / population (clamped below 1).
LogLikelihoodResult log_likelihood_binomial(const ObservedSeries& series,
                                            const std::vector<double>& cumulative_converted,
                                            double population);

long sample_count(ObsFamily family, double y, double phi, Rng& rng);

/// Forward-samples an observed series with the family's mean/variance.
ObservedSeries simulate_observations(const InfectionPath& path,
                                     const std::vector<double>& ascertainment,
                                     const DiscretePmf& delay, ObsFamily family, double phi,
                                     Rng& rng);

}  // namespace epirenew
