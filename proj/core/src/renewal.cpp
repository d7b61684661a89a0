#include "epirenew/renewal.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/lognormal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/digamma.hpp>

#include "epirenew/math_utils.hpp"
#include "epirenew/text_io.hpp"

namespace epirenew {

double InfectionPath::total() const {
  double s = 0.0;
  for (double v : seeds) s += v;
  for (double v : values) s += v;
  return s;
}

std::string InfectionPath::to_text() const {
  std::string out = "t,value\n";
  for (int t = seed_start; t <= horizon(); ++t) {
    if (t == 1 && num_seed_days() == 0) continue;
    out += std::to_string(t);
    out += ',';
    out += format_double(at(t));
    out += '\n';
  }
  return out;
}

double case_load(const InfectionPath& path, const DiscretePmf& g, int t) {
  if (t < 1 || t > path.horizon()) {
    throw std::out_of_range("case_load: t=" + std::to_string(t) + " outside [1," +
                            std::to_string(path.horizon()) + "]");
  }
  double load = 0.0;
  int lo = std::max(path.seed_start, t - g.max_lag());
  for (int s = lo; s < t; ++s) {
    load += path.at(s) * g.at_lag(t - s);
  }
  return load;
}

double adjust_population(double unadjusted_R, double case_load, double population,
                         double cumulative_infections) {
  if (!(population > 0.0)) throw std::invalid_argument("adjust_population: S0 must be positive");
  if (cumulative_infections < 0.0 || cumulative_infections > population) {
    throw std::invalid_argument("adjust_population: cumulative infections outside [0, S0]");
  }
  double remaining = population - cumulative_infections;
  // expm1 keeps the small-force regime exact.
  return remaining * one_minus_exp_neg(unadjusted_R * case_load / population);
}

namespace {

void check_propagation_inputs(const std::vector<double>& seeds, int seed_start,
                              const std::vector<double>& reproduction) {
  if (seed_start > 0) throw std::invalid_argument("propagate: seed_start must be <= 0");
  if (seeds.size() != static_cast<std::size_t>(1 - seed_start)) {
    throw std::invalid_argument("propagate: seeds must cover days seed_start..0");
  }
  for (double s : seeds) {
    if (!std::isfinite(s) || s < 0.0) {
      throw std::invalid_argument("propagate: seeds must be finite and nonnegative");
    }
  }
  for (double r : reproduction) {
    if (!std::isfinite(r) || r <= 0.0) {
      throw std::invalid_argument("propagate: reproduction numbers must be positive");
    }
  }
}

}  // namespace

InfectionPath propagate_expected(const std::vector<double>& seeds, int seed_start,
                                 const std::vector<double>& reproduction, const DiscretePmf& g,
                                 std::optional<double> population) {
  check_propagation_inputs(seeds, seed_start, reproduction);
  int horizon = static_cast<int>(reproduction.size());
  InfectionPath path;
  path.seed_start = seed_start;
  path.seeds = seeds;
  path.values.assign(static_cast<std::size_t>(horizon), 0.0);
  path.mode = PathMode::expected;
  path.population = population;

  double cumulative = 0.0;
  for (double s : seeds) cumulative += s;
  if (population && cumulative > *population) {
    throw std::invalid_argument("propagate_expected: seeds exceed the population");
  }
  for (int t = 1; t <= horizon; ++t) {
    double load = case_load(path, g, t);
    double r = reproduction[static_cast<std::size_t>(t - 1)];
    double value = population ? adjust_population(r, load, *population, cumulative) : r * load;
    path.values[static_cast<std::size_t>(t - 1)] = value;
    cumulative += value;
  }
  return path;
}

double latent_step_log_pdf(LagFamily family, double mean, double d, double value) {
  if (!(d > 0.0)) throw std::invalid_argument("latent_step_log_pdf: d must be positive");
  if (mean < 0.0) throw std::invalid_argument("latent_step_log_pdf: mean must be nonnegative");
  if (mean == 0.0) {
    // No infectious pressure: only a zero continuation has support.
    return value > 0.0 ? kNegInf : 0.0;
  }
  if (!(value > 0.0)) return kNegInf;
  switch (family) {
    case LagFamily::gamma: {
      double shape = mean / d;
      double rate = 1.0 / d;
      return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(value) -
             rate * value;
    }
    case LagFamily::lognormal: {
      double s2 = std::log1p(d / mean);
      double mu = std::log(mean) - 0.5 * s2;
      double r = std::log(value) - mu;
      return -std::log(value) - 0.5 * std::log(s2) - 0.5 * kLogTwoPi - r * r / (2.0 * s2);
    }
    case LagFamily::weibull:
      return MomentMatchedPrior::match(LagFamily::weibull, mean, d).log_pdf(value);
  }
  return kNegInf;
}

double latent_step_sample(LagFamily family, double mean, double d, Rng& rng) {
  if (mean <= 0.0) return 0.0;
  switch (family) {
    case LagFamily::gamma: {
      std::gamma_distribution<double> g(mean / d, d);
      return g(rng);
    }
    case LagFamily::lognormal: {
      double s2 = std::log1p(d / mean);
      std::lognormal_distribution<double> g(std::log(mean) - 0.5 * s2, std::sqrt(s2));
      return g(rng);
    }
    case LagFamily::weibull:
      return MomentMatchedPrior::match(LagFamily::weibull, mean, d).sample(rng);
  }
  return 0.0;
}

namespace {

double step_cdf(LagFamily family, double mean, double d, double x) {
  if (x <= 0.0) return 0.0;
  switch (family) {
    case LagFamily::gamma:
      return boost::math::cdf(boost::math::gamma_distribution<>(mean / d, d), x);
    case LagFamily::lognormal: {
      double s2 = std::log1p(d / mean);
      return boost::math::cdf(
          boost::math::lognormal_distribution<>(std::log(mean) - 0.5 * s2, std::sqrt(s2)), x);
    }
    case LagFamily::weibull:
      return MomentMatchedPrior::match(LagFamily::weibull, mean, d).cdf(x);
  }
  return 0.0;
}

double step_quantile(LagFamily family, double mean, double d, double p) {
  switch (family) {
    case LagFamily::gamma:
      return boost::math::quantile(boost::math::gamma_distribution<>(mean / d, d), p);
    case LagFamily::lognormal: {
      double s2 = std::log1p(d / mean);
      return boost::math::quantile(
          boost::math::lognormal_distribution<>(std::log(mean) - 0.5 * s2, std::sqrt(s2)), p);
    }
    case LagFamily::weibull:
      return MomentMatchedPrior::match(LagFamily::weibull, mean, d).quantile(p);
  }
  return 0.0;
}

}  // namespace

LatentStepGrad latent_step_log_pdf_grad(LagFamily family, double mean, double d,
                                        double value) {
  if (!(mean > 0.0 && d > 0.0 && value > 0.0)) {
    throw std::invalid_argument("latent step gradient needs mean, d, value > 0");
  }
  LatentStepGrad g;
  switch (family) {
    case LagFamily::gamma: {
      double shape = mean / d;
      double rate = 1.0 / d;
      double d_shape = std::log(rate) - boost::math::digamma(shape) + std::log(value);
      double d_rate = shape / rate - value;
      g.d_value = (shape - 1.0) / value - rate;
      g.d_mean = d_shape / d;
      g.d_dispersion = d_shape * (-mean / (d * d)) + d_rate * (-1.0 / (d * d));
      return g;
    }
    case LagFamily::lognormal: {
      double s2 = std::log1p(d / mean);
      double mu = std::log(mean) - 0.5 * s2;
      double r = std::log(value) - mu;
      double d_mu = r / s2;
      double d_s2 = -0.5 / s2 + r * r / (2.0 * s2 * s2);
      double ds2_dmean = -d / (mean * (mean + d));
      double ds2_dd = 1.0 / (mean + d);
      g.d_value = -(1.0 + r / s2) / value;
      g.d_mean = d_mu * (1.0 / mean - 0.5 * ds2_dmean) + d_s2 * ds2_dmean;
      g.d_dispersion = d_mu * (-0.5 * ds2_dd) + d_s2 * ds2_dd;
      return g;
    }
    case LagFamily::weibull:
      throw std::invalid_argument(
          "weibull latent family has no closed-form gradient; use a gradient-free sampler");
  }
  return g;
}

namespace {

/// d/da of the regularized lower incomplete gamma P(a, x), via
/// d/da P = int_0^x log(t) pdf(t; a, 1) dt - P(a, x) digamma(a).
double lower_gamma_p_da(double a, double x) {
  const double log_gamma_a = std::lgamma(a);
  auto integrand = [&](double t) {
    if (t <= 0.0) return 0.0;
    double log_t = std::log(t);
    return log_t * std::exp((a - 1.0) * log_t - t - log_gamma_a);
  };
  double integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      integrand, 0.0, x, 15, 1e-10);
  double p = boost::math::gamma_p(a, x);
  return integral - p * boost::math::digamma(a);
}

}  // namespace

TruncationGrad latent_truncation_grad(LagFamily family, double mean, double d, double upper) {
  if (!(mean > 0.0 && d > 0.0 && upper > 0.0)) {
    throw std::invalid_argument("truncation gradient needs mean, d, upper > 0");
  }
  TruncationGrad g;
  double mass = step_cdf(family, mean, d, upper);
  if (mass > 1.0 - 1e-10) return g;  // normalizer numerically flat
  if (!(mass > 0.0)) return g;       // handled as -inf by the caller
  switch (family) {
    case LagFamily::gamma: {
      double shape = mean / d;
      double rate = 1.0 / d;
      double x = rate * upper;
      double df_da = lower_gamma_p_da(shape, x);
      // d/d rate P(shape, rate*upper) = pdf(upper) * upper / rate
      double pdf = boost::math::pdf(boost::math::gamma_distribution<>(shape, d), upper);
      double df_db = pdf * upper / rate;
      double df_dmean = df_da / d;
      double df_dd = df_da * (-mean / (d * d)) + df_db * (-1.0 / (d * d));
      // the normalizer term is -log mass
      g.d_mean = -df_dmean / mass;
      g.d_dispersion = -df_dd / mass;
      g.d_upper = -pdf / mass;
      return g;
    }
    case LagFamily::lognormal: {
      double s2 = std::log1p(d / mean);
      double sigma = std::sqrt(s2);
      double mu = std::log(mean) - 0.5 * s2;
      double r = (std::log(upper) - mu) / sigma;
      double phi = std::exp(-0.5 * r * r) / std::sqrt(2.0 * M_PI);
      double df_dmu = -phi / sigma;
      double df_dsigma = -phi * r / sigma;
      double df_ds2 = df_dsigma / (2.0 * sigma);
      double ds2_dmean = -d / (mean * (mean + d));
      double ds2_dd = 1.0 / (mean + d);
      double df_dmean = df_dmu * (1.0 / mean - 0.5 * ds2_dmean) + df_ds2 * ds2_dmean;
      double df_dd = df_dmu * (-0.5 * ds2_dd) + df_ds2 * ds2_dd;
      double pdf = phi / (sigma * upper);
      g.d_mean = -df_dmean / mass;
      g.d_dispersion = -df_dd / mass;
      g.d_upper = -pdf / mass;
      return g;
    }
    case LagFamily::weibull:
      throw std::invalid_argument(
          "weibull latent family has no closed-form gradient; use a gradient-free sampler");
  }
  return g;
}

double latent_step_log_pdf_truncated(LagFamily family, double mean, double d, double value,
                                     double upper) {
  if (upper <= 0.0) return value > 0.0 ? kNegInf : 0.0;
  if (value > upper) return kNegInf;
  double base = latent_step_log_pdf(family, mean, d, value);
  if (base == kNegInf) return kNegInf;
  double mass = step_cdf(family, mean, d, upper);
  if (!(mass > 0.0)) return kNegInf;
  return base - std::log(mass);
}

double latent_step_sample_truncated(LagFamily family, double mean, double d, double upper,
                                    Rng& rng) {
  if (mean <= 0.0 || upper <= 0.0) return 0.0;
  double mass = step_cdf(family, mean, d, upper);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = unif(rng) * mass;
  if (!(u > 0.0)) return std::min(mean * 1e-12, upper * 0.5);
  return std::min(step_quantile(family, mean, d, u), upper);
}

LatentPath propagate_latent(const std::vector<double>& seeds, int seed_start,
                            const std::vector<double>& reproduction, const DiscretePmf& g,
                            double dispersion, LagFamily family, Rng& rng,
                            std::optional<double> population) {
  check_propagation_inputs(seeds, seed_start, reproduction);
  if (!(dispersion > 0.0)) throw std::invalid_argument("propagate_latent: d must be positive");
  int horizon = static_cast<int>(reproduction.size());
  LatentPath out;
  out.path.seed_start = seed_start;
  out.path.seeds = seeds;
  out.path.values.assign(static_cast<std::size_t>(horizon), 0.0);
  out.path.mode = PathMode::latent;
  out.path.population = population;

  double cumulative = 0.0;
  for (double s : seeds) cumulative += s;
  for (int t = 1; t <= horizon; ++t) {
    double load = case_load(out.path, g, t);
    double r = reproduction[static_cast<std::size_t>(t - 1)];
    double value;
    if (population) {
      double mean = adjust_population(r, load, *population, cumulative);
      double upper = *population - cumulative;
      value = latent_step_sample_truncated(family, mean, dispersion, upper, rng);
      out.log_density += latent_step_log_pdf_truncated(family, mean, dispersion, value, upper);
    } else {
      double mean = r * load;
      value = latent_step_sample(family, mean, dispersion, rng);
      out.log_density += latent_step_log_pdf(family, mean, dispersion, value);
    }
    out.path.values[static_cast<std::size_t>(t - 1)] = value;
    cumulative += value;
  }
  return out;
}

double latent_path_log_density(const InfectionPath& path,
                               const std::vector<double>& reproduction, const DiscretePmf& g,
                               double dispersion, LagFamily family) {
  if (static_cast<int>(reproduction.size()) != path.horizon()) {
    throw std::invalid_argument("latent_path_log_density: reproduction length != horizon");
  }
  double cumulative = 0.0;
  for (double s : path.seeds) cumulative += s;
  double total = 0.0;
  for (int t = 1; t <= path.horizon(); ++t) {
    double load = case_load(path, g, t);
    double r = reproduction[static_cast<std::size_t>(t - 1)];
    double value = path.at(t);
    if (path.population) {
      double mean = adjust_population(r, load, *path.population, cumulative);
      total += latent_step_log_pdf_truncated(family, mean, dispersion, value,
                                             *path.population - cumulative);
    } else {
      total += latent_step_log_pdf(family, r * load, dispersion, value);
    }
    if (total == kNegInf) return kNegInf;
    cumulative += value;
  }
  return total;
}

}  // namespace epirenew
