#include "epirenew/moment_match.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/lognormal.hpp>
#include <boost/math/distributions/weibull.hpp>

#include "epirenew/math_utils.hpp"

namespace epirenew {

namespace {

/// Squared coefficient of variation of a Weibull with shape k (scale-free).
double weibull_cv2(double k) {
  double g1 = std::lgamma(1.0 + 1.0 / k);
  double g2 = std::lgamma(1.0 + 2.0 / k);
  return std::expm1(g2 - 2.0 * g1);
}

double solve_weibull_shape(double cv2_target) {
  // cv2 is strictly decreasing in the shape; bracket then bisect.
  double lo = 1e-2, hi = 1e3;
  if (weibull_cv2(lo) < cv2_target || weibull_cv2(hi) > cv2_target) {
    throw std::invalid_argument("weibull moment inversion: target dispersion out of range");
  }
  for (int it = 0; it < 400; ++it) {
    double mid = 0.5 * (lo + hi);
    if (weibull_cv2(mid) > cv2_target) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-14 * mid) break;
  }
  double k = 0.5 * (lo + hi);
  if (std::abs(weibull_cv2(k) - cv2_target) > 1e-10 * std::max(1.0, cv2_target)) {
    throw std::invalid_argument("weibull moment inversion: no solution within tolerance 1e-10");
  }
  return k;
}

}  // namespace

MomentMatchedPrior MomentMatchedPrior::match(LagFamily family, double mean, double d) {
  if (!std::isfinite(mean) || mean <= 0.0) {
    throw std::invalid_argument("match_moments: mean must be finite and positive");
  }
  if (!std::isfinite(d) || d <= 0.0) {
    throw std::invalid_argument("match_moments: dispersion d must be finite and positive");
  }
  double variance = d * mean;
  switch (family) {
    case LagFamily::gamma: {
      // mean = shape/rate, variance = shape/rate^2  =>  rate = 1/d, shape = mean/d.
      return MomentMatchedPrior(family, mean, d, mean / d, 1.0 / d);
    }
    case LagFamily::lognormal: {
      double s2 = std::log1p(variance / (mean * mean));
      double mu = std::log(mean) - 0.5 * s2;
      return MomentMatchedPrior(family, mean, d, mu, std::sqrt(s2));
    }
    case LagFamily::weibull: {
      double k = solve_weibull_shape(variance / (mean * mean));
      double scale = mean / std::tgamma(1.0 + 1.0 / k);
      return MomentMatchedPrior(family, mean, d, k, scale);
    }
  }
  throw std::invalid_argument("match_moments: unknown family");
}

double MomentMatchedPrior::realized_mean() const {
  return ContinuousLagDensity(family_, a_, b_).mean();
}

double MomentMatchedPrior::realized_variance() const {
  return ContinuousLagDensity(family_, a_, b_).variance();
}

double MomentMatchedPrior::log_pdf(double x) const {
  if (!(x > 0.0)) return kNegInf;
  switch (family_) {
    case LagFamily::gamma:
      return a_ * std::log(b_) - std::lgamma(a_) + (a_ - 1.0) * std::log(x) - b_ * x;
    case LagFamily::lognormal: {
      double r = (std::log(x) - a_) / b_;
      return -std::log(x) - std::log(b_) - 0.5 * kLogTwoPi - 0.5 * r * r;
    }
    case LagFamily::weibull: {
      double z = x / b_;
      return std::log(a_ / b_) + (a_ - 1.0) * std::log(z) - std::pow(z, a_);
    }
  }
  return kNegInf;
}

double MomentMatchedPrior::cdf(double x) const {
  return ContinuousLagDensity(family_, a_, b_).cdf(x);
}

double MomentMatchedPrior::quantile(double p) const {
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return kPosInf;
  switch (family_) {
    case LagFamily::gamma:
      return boost::math::quantile(boost::math::gamma_distribution<>(a_, 1.0 / b_), p);
    case LagFamily::lognormal:
      return boost::math::quantile(boost::math::lognormal_distribution<>(a_, b_), p);
    case LagFamily::weibull:
      return boost::math::quantile(boost::math::weibull_distribution<>(a_, b_), p);
  }
  return 0.0;
}

double MomentMatchedPrior::sample(Rng& rng) const {
  switch (family_) {
    case LagFamily::gamma: {
      std::gamma_distribution<double> g(a_, 1.0 / b_);
      return g(rng);
    }
    case LagFamily::lognormal: {
      std::lognormal_distribution<double> g(a_, b_);
      return g(rng);
    }
    case LagFamily::weibull: {
      std::weibull_distribution<double> g(a_, b_);
      return g(rng);
    }
  }
  return 0.0;
}

}  // namespace epirenew
