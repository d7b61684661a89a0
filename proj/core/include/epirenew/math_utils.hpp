#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace epirenew {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();
inline constexpr double kLogTwoPi = 1.8378770664093454836;

inline double square(double x) { return x * x; }

/// log(sum(exp(x))) without overflow.
inline double log_sum_exp(std::span<const double> x) {
  if (x.empty()) return kNegInf;
  double m = *std::max_element(x.begin(), x.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

/// log(exp(a) + exp(b)) without overflow.
inline double log_sum_exp_pair(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

/// 1 - exp(-x), accurate for small x.
inline double one_minus_exp_neg(double x) { return -std::expm1(-x); }

/// Logistic function, stable for large |x|.
inline double logistic(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

inline double mean_of(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("mean_of: empty input");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

inline double variance_of(std::span<const double> x) {
  if (x.size() < 2) throw std::invalid_argument("variance_of: need at least 2 values");
  double m = mean_of(x);
  double s = 0.0;
  for (double v : x) s += square(v - m);
  return s / static_cast<double>(x.size() - 1);
}

inline double sd_of(std::span<const double> x) { return std::sqrt(variance_of(x)); }

/// Linear-interpolation quantile (R type 7). p in [0,1].
double quantile_of(std::vector<double> sorted_or_not, double p);

double median_of(std::vector<double> values);

/// Pearson correlation of two equal-length series.
double correlation_of(std::span<const double> x, std::span<const double> y);

/// Running mean/variance accumulator.
class Welford {
 public:
  void add(double x) {
    ++n_;
    double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }
  std::int64_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double sd() const { return std::sqrt(variance()); }

 private:
  std::int64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace epirenew
