#pragma once

#include "epirenew/lag_density.hpp"
#include "epirenew/rng.hpp"

namespace epirenew {

/// Two-parameter distribution matched to a target mean and variance
/// d * mean, where d is the coefficient of dispersion.
class MomentMatchedPrior {
 public:
  /// Solves the family parameters so that the realized mean and variance
  /// agree with (mean, d*mean) to 1e-8 relative. Weibull inversion runs a
  /// bracketed solver to 1e-10 and throws if it fails to converge.
  static MomentMatchedPrior match(LagFamily family, double mean, double d);

  LagFamily family() const { return family_; }
  double target_mean() const { return mean_; }
  double dispersion() const { return d_; }

  /// Solved family parameters (same convention as ContinuousLagDensity).
  double param_a() const { return a_; }
  double param_b() const { return b_; }

  double realized_mean() const;
  double realized_variance() const;

  double log_pdf(double x) const;
  double cdf(double x) const;
  double quantile(double p) const;
  double sample(Rng& rng) const;

 private:
  MomentMatchedPrior(LagFamily family, double mean, double d, double a, double b)
      : family_(family), mean_(mean), d_(d), a_(a), b_(b) {}

  LagFamily family_;
  double mean_;
  double d_;
  double a_;
  double b_;
};

}  // namespace epirenew
