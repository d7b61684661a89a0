#pragma once

#include <string>

#include "epirenew/discrete_pmf.hpp"

namespace epirenew {

enum class LagFamily { gamma, lognormal, weibull };

LagFamily lag_family_from_string(const std::string& name);
std::string to_string(LagFamily family);

/// Continuous density on (0, inf) for the time between an infection and a
/// downstream event (secondary infection or observation).
///
/// Parameter meaning per family:
///   gamma:     a = shape, b = rate
///   lognormal: a = meanlog, b = sdlog
///   weibull:   a = shape, b = scale
class ContinuousLagDensity {
 public:
  ContinuousLagDensity(LagFamily family, double a, double b);

  static ContinuousLagDensity gamma(double shape, double rate) {
    return {LagFamily::gamma, shape, rate};
  }
  static ContinuousLagDensity lognormal(double meanlog, double sdlog) {
    return {LagFamily::lognormal, meanlog, sdlog};
  }
  static ContinuousLagDensity weibull(double shape, double scale) {
    return {LagFamily::weibull, shape, scale};
  }

  LagFamily family() const { return family_; }
  double param_a() const { return a_; }
  double param_b() const { return b_; }

  double pdf(double x) const;
  double cdf(double x) const;
  double mean() const;
  double variance() const;

  /// Location of the density maximum (0 for monotone-decreasing families).
  double mode() const;

  /// Supremum of the density over [lo, hi]; used for thinning bounds.
  double max_on(double lo, double hi) const;

 private:
  LagFamily family_;
  double a_;
  double b_;
};

/// Bins a continuous lag density onto integer lags by interval mass and
/// renormalizes the truncated pmf to 1.
///
/// Generation pmfs take the mass on (k-1, k] for lag k = 1..max_lag;
/// observation-delay pmfs take the mass on [k, k+1) for lag k = 0..max_lag.
/// Throws if the truncation captures less than 50% of the mass; flags a
/// warning below 99%.
DiscretizeResult discretize_generation(const ContinuousLagDensity& density, int max_lag);
DiscretizeResult discretize_delay(const ContinuousLagDensity& density, int max_lag);

}  // namespace epirenew
