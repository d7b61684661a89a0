#include "epirenew/lag_density.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/lognormal.hpp>
#include <boost/math/distributions/weibull.hpp>

namespace epirenew {

LagFamily lag_family_from_string(const std::string& name) {
  if (name == "gamma") return LagFamily::gamma;
  if (name == "lognormal" || name == "log-normal") return LagFamily::lognormal;
  if (name == "weibull") return LagFamily::weibull;
  throw std::invalid_argument("unknown lag family '" + name + "'");
}

std::string to_string(LagFamily family) {
  switch (family) {
    case LagFamily::gamma: return "gamma";
    case LagFamily::lognormal: return "lognormal";
    case LagFamily::weibull: return "weibull";
  }
  return "?";
}

ContinuousLagDensity::ContinuousLagDensity(LagFamily family, double a, double b)
    : family_(family), a_(a), b_(b) {
  if (!std::isfinite(a) || !std::isfinite(b) || a <= 0.0 || b <= 0.0) {
    throw std::invalid_argument("ContinuousLagDensity: parameters must be finite and positive");
  }
}

double ContinuousLagDensity::pdf(double x) const {
  if (x <= 0.0) return 0.0;
  switch (family_) {
    case LagFamily::gamma:
      return boost::math::pdf(boost::math::gamma_distribution<>(a_, 1.0 / b_), x);
    case LagFamily::lognormal:
      return boost::math::pdf(boost::math::lognormal_distribution<>(a_, b_), x);
    case LagFamily::weibull:
      return boost::math::pdf(boost::math::weibull_distribution<>(a_, b_), x);
  }
  return 0.0;
}

double ContinuousLagDensity::cdf(double x) const {
  if (x <= 0.0) return 0.0;
  switch (family_) {
    case LagFamily::gamma:
      return boost::math::cdf(boost::math::gamma_distribution<>(a_, 1.0 / b_), x);
    case LagFamily::lognormal:
      return boost::math::cdf(boost::math::lognormal_distribution<>(a_, b_), x);
    case LagFamily::weibull:
      return boost::math::cdf(boost::math::weibull_distribution<>(a_, b_), x);
  }
  return 0.0;
}

double ContinuousLagDensity::mean() const {
  switch (family_) {
    case LagFamily::gamma: return a_ / b_;
    case LagFamily::lognormal: return std::exp(a_ + 0.5 * b_ * b_);
    case LagFamily::weibull: return b_ * std::tgamma(1.0 + 1.0 / a_);
  }
  return 0.0;
}

double ContinuousLagDensity::variance() const {
  switch (family_) {
    case LagFamily::gamma: return a_ / (b_ * b_);
    case LagFamily::lognormal: {
      double s2 = b_ * b_;
      return (std::exp(s2) - 1.0) * std::exp(2.0 * a_ + s2);
    }
    case LagFamily::weibull: {
      double g1 = std::tgamma(1.0 + 1.0 / a_);
      double g2 = std::tgamma(1.0 + 2.0 / a_);
      return b_ * b_ * (g2 - g1 * g1);
    }
  }
  return 0.0;
}

double ContinuousLagDensity::mode() const {
  switch (family_) {
    case LagFamily::gamma: return a_ > 1.0 ? (a_ - 1.0) / b_ : 0.0;
    case LagFamily::lognormal: return std::exp(a_ - b_ * b_);
    case LagFamily::weibull:
      return a_ > 1.0 ? b_ * std::pow((a_ - 1.0) / a_, 1.0 / a_) : 0.0;
  }
  return 0.0;
}

double ContinuousLagDensity::max_on(double lo, double hi) const {
  lo = std::max(lo, 0.0);
  if (hi <= lo) return pdf(lo);
  // Unimodal in every supported family: the sup on [lo,hi] is at the mode if
  // it lies inside, otherwise at the nearer endpoint.
  double m = mode();
  if (m > lo && m < hi) {
    if (m <= 0.0) return pdf(lo > 0.0 ? lo : 1e-12);
    return pdf(m);
  }
  // Densities with a pole at 0 (gamma shape<1, weibull shape<1).
  double at_lo = lo > 0.0 ? pdf(lo) : pdf(1e-12);
  return std::max(at_lo, pdf(hi));
}

namespace {

DiscretizeResult discretize_impl(const ContinuousLagDensity& density, int max_lag, int min_lag) {
  if (max_lag < 1) throw std::invalid_argument("discretize: max_lag must be >= 1");
  int n = max_lag - min_lag + 1;
  std::vector<double> mass(static_cast<std::size_t>(n));
  double captured = 0.0;
  for (int k = 0; k < n; ++k) {
    int lag = min_lag + k;
    // Generation bins are (k-1, k]; delay bins are [k, k+1).
    double lo = min_lag == 1 ? static_cast<double>(lag - 1) : static_cast<double>(lag);
    double hi = lo + 1.0;
    double m = density.cdf(hi) - density.cdf(lo);
    mass[static_cast<std::size_t>(k)] = std::max(m, 0.0);
    captured += mass[static_cast<std::size_t>(k)];
  }
  if (captured < 0.5) {
    throw std::invalid_argument("discretize: truncation at max_lag=" + std::to_string(max_lag) +
                                " captures only " + std::to_string(captured * 100.0) +
                                "% of the mass");
  }
  auto pmf = min_lag == 1 ? DiscretePmf::normalized_generation(std::move(mass))
                          : DiscretePmf::normalized_delay(std::move(mass));
  return DiscretizeResult{std::move(pmf), captured, captured < 0.99};
}

}  // namespace

DiscretizeResult discretize_generation(const ContinuousLagDensity& density, int max_lag) {
  return discretize_impl(density, max_lag, 1);
}

DiscretizeResult discretize_delay(const ContinuousLagDensity& density, int max_lag) {
  return discretize_impl(density, max_lag, 0);
}

}  // namespace epirenew
