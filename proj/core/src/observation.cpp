#include "epirenew/observation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <boost/math/special_functions/digamma.hpp>

#include "epirenew/math_utils.hpp"

namespace epirenew {

namespace {
double boost_digamma(double x) { return boost::math::digamma(x); }
}  // namespace

ObsFamily obs_family_from_string(const std::string& name) {
  if (name == "poisson") return ObsFamily::poisson;
  if (name == "neg_binomial") return ObsFamily::neg_binomial;
  if (name == "quasi_poisson") return ObsFamily::quasi_poisson;
  if (name == "binomial") return ObsFamily::binomial;
  throw std::invalid_argument("unknown observation family: " + name);
}

std::string to_string(ObsFamily family) {
  switch (family) {
    case ObsFamily::poisson: return "poisson";
    case ObsFamily::neg_binomial: return "neg_binomial";
    case ObsFamily::quasi_poisson: return "quasi_poisson";
    case ObsFamily::binomial: return "binomial";
  }
  throw std::logic_error("unreachable");
}

std::vector<double> delay_convolution(const InfectionPath& path, const DiscretePmf& delay) {
  const int horizon = path.horizon();
  std::vector<double> out(static_cast<std::size_t>(horizon), 0.0);
  for (int t = 1; t <= horizon; ++t) {
    double acc = 0.0;
    const int earliest = std::max(path.seed_start, t - delay.max_lag());
    for (int s = earliest; s <= t; ++s) {
      acc += path.at(s) * delay.at_lag(t - s);
    }
    out[static_cast<std::size_t>(t - 1)] = acc;
  }
  return out;
}

std::vector<double> expected_observations(const InfectionPath& path,
                                          const std::vector<double>& ascertainment,
                                          const DiscretePmf& delay) {
  std::vector<double> out = delay_convolution(path, delay);
  if (ascertainment.size() != out.size()) {
    throw std::invalid_argument("ascertainment length must equal the path horizon");
  }
  for (std::size_t t = 0; t < out.size(); ++t) {
    if (!(ascertainment[t] >= 0.0)) {
      throw std::invalid_argument("ascertainment must be nonnegative");
    }
    out[t] *= ascertainment[t];
  }
  return out;
}

namespace {

void check_phi(ObsFamily family, double phi) {
  if (family == ObsFamily::neg_binomial && !(phi > 0.0)) {
    throw std::invalid_argument("neg_binomial requires phi > 0");
  }
  if (family == ObsFamily::quasi_poisson && !(phi > 1.0)) {
    throw std::invalid_argument("quasi_poisson requires phi > 1; at phi = 1 use poisson");
  }
}

double poisson_log_pmf(long count, double y) {
  const double k = static_cast<double>(count);
  if (y <= 0.0) return count == 0 ? 0.0 : kNegInf;
  return k * std::log(y) - y - std::lgamma(k + 1.0);
}

// Negative binomial with size r and success probability p (mean r(1-p)/p).
double nb_log_pmf(long count, double r, double p) {
  const double k = static_cast<double>(count);
  return std::lgamma(k + r) - std::lgamma(r) - std::lgamma(k + 1.0) + r * std::log(p) +
         k * std::log1p(-p);
}

}  // namespace

double obs_log_pmf(ObsFamily family, long count, double y, double phi) {
  if (count < 0) throw std::invalid_argument("counts must be nonnegative");
  if (!std::isfinite(y) || y < 0.0) {
    throw std::invalid_argument("expected observation must be finite and nonnegative");
  }
  check_phi(family, phi);
  if (y == 0.0) return count == 0 ? 0.0 : kNegInf;
  switch (family) {
    case ObsFamily::poisson:
      return poisson_log_pmf(count, y);
    case ObsFamily::neg_binomial:
      // Var = y + y^2/phi: size phi, success probability phi/(phi+y).
      return nb_log_pmf(count, phi, phi / (phi + y));
    case ObsFamily::quasi_poisson:
      // Var = phi*y: size y/(phi-1), success probability 1/phi.
      return nb_log_pmf(count, y / (phi - 1.0), 1.0 / phi);
    case ObsFamily::binomial:
      throw std::invalid_argument("binomial series use log_likelihood_binomial");
  }
  throw std::logic_error("unreachable");
}

ObsLogPmfGrad obs_log_pmf_grad(ObsFamily family, long count, double y, double phi) {
  if (!(y > 0.0)) throw std::invalid_argument("gradient needs y > 0");
  check_phi(family, phi);
  const double k = static_cast<double>(count);
  ObsLogPmfGrad g;
  switch (family) {
    case ObsFamily::poisson:
      g.d_y = k / y - 1.0;
      return g;
    case ObsFamily::neg_binomial: {
      g.d_y = k / y - (k + phi) / (phi + y);
      g.d_phi = boost_digamma(k + phi) - boost_digamma(phi) + std::log(phi / (phi + y)) +
                1.0 - (k + phi) / (phi + y);
      return g;
    }
    case ObsFamily::quasi_poisson: {
      const double r = y / (phi - 1.0);
      const double dig = boost_digamma(k + r) - boost_digamma(r);
      // log p = -log phi for success probability p = 1/phi
      g.d_y = (dig - std::log(phi)) / (phi - 1.0);
      g.d_phi = -y * (dig - std::log(phi)) / square(phi - 1.0) - r / phi +
                k / (phi * (phi - 1.0));
      return g;
    }
    case ObsFamily::binomial:
      throw std::invalid_argument("binomial series use binomial_log_pmf_grad");
  }
  throw std::logic_error("unreachable");
}

double binomial_log_pmf_grad(long positives, long trials, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("gradient needs 0 < p < 1");
  const double k = static_cast<double>(positives);
  const double n = static_cast<double>(trials);
  return k / p - (n - k) / (1.0 - p);
}

double binomial_log_pmf(long positives, long trials, double p) {
  if (trials < 0 || positives < 0 || positives > trials) {
    throw std::invalid_argument("need 0 <= positives <= trials");
  }
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("probability outside [0,1]");
  const double k = static_cast<double>(positives);
  const double n = static_cast<double>(trials);
  if (p == 0.0) return positives == 0 ? 0.0 : kNegInf;
  if (p == 1.0) return positives == trials ? 0.0 : kNegInf;
  const double lchoose =
      std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  return lchoose + k * std::log(p) + (n - k) * std::log1p(-p);
}

LogLikelihoodResult log_likelihood(const ObservedSeries& series, ObsFamily family,
                                   const std::vector<double>& y, double phi) {
  if (series.counts.size() != y.size()) {
    throw std::invalid_argument("observed series and expectation length mismatch");
  }
  if (!series.mask.empty() && series.mask.size() != series.counts.size()) {
    throw std::invalid_argument("mask length mismatch");
  }
  LogLikelihoodResult result;
  for (std::size_t t = 0; t < y.size(); ++t) {
    if (!series.mask.empty() && !series.mask[t]) continue;
    const double ll = obs_log_pmf(family, series.counts[t], y[t], phi);
    result.pointwise.push_back(ll);
    result.days.push_back(static_cast<int>(t) + 1);
    result.total += ll;
  }
  return result;
}

LogLikelihoodResult log_likelihood_binomial(const ObservedSeries& series,
                                            const std::vector<double>& cumulative_converted,
                                            double population) {
  if (series.counts.size() != cumulative_converted.size()) {
    throw std::invalid_argument("observed series and expectation length mismatch");
  }
  if (series.trials.size() != series.counts.size()) {
    throw std::invalid_argument("binomial series needs trial counts for every day");
  }
  if (!(population > 0.0)) throw std::invalid_argument("population must be positive");
  LogLikelihoodResult result;
  for (std::size_t t = 0; t < series.counts.size(); ++t) {
    if (!series.mask.empty() && !series.mask[t]) continue;
    const double p = std::min(1.0, std::max(0.0, cumulative_converted[t] / population));
    const double ll = binomial_log_pmf(series.counts[t], series.trials[t], p);
    result.pointwise.push_back(ll);
    result.days.push_back(static_cast<int>(t) + 1);
    result.total += ll;
  }
  return result;
}

long sample_count(ObsFamily family, double y, double phi, Rng& rng) {
  check_phi(family, phi);
  if (y <= 0.0) return 0;
  switch (family) {
    case ObsFamily::poisson: {
      std::poisson_distribution<long> dist(y);
      return dist(rng);
    }
    case ObsFamily::neg_binomial: {
      // Gamma-Poisson mixture: rate ~ Gamma(shape=phi, scale=y/phi).
      std::gamma_distribution<double> mix(phi, y / phi);
      std::poisson_distribution<long> dist(std::max(mix(rng), 1e-300));
      return dist(rng);
    }
    case ObsFamily::quasi_poisson: {
      std::gamma_distribution<double> mix(y / (phi - 1.0), phi - 1.0);
      std::poisson_distribution<long> dist(std::max(mix(rng), 1e-300));
      return dist(rng);
    }
    case ObsFamily::binomial:
      throw std::invalid_argument("binomial series are sampled from tested/positive pairs");
  }
  throw std::logic_error("unreachable");
}

ObservedSeries simulate_observations(const InfectionPath& path,
                                     const std::vector<double>& ascertainment,
                                     const DiscretePmf& delay, ObsFamily family, double phi,
                                     Rng& rng) {
  const std::vector<double> y = expected_observations(path, ascertainment, delay);
  ObservedSeries series;
  series.type_name = to_string(family);
  series.counts.reserve(y.size());
  for (double mean : y) series.counts.push_back(sample_count(family, mean, phi, rng));
  series.mask.assign(y.size(), true);
  return series;
}

}  // namespace epirenew
