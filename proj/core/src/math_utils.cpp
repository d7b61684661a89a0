#include "epirenew/math_utils.hpp"

#include <algorithm>

namespace epirenew {

double quantile_of(std::vector<double> x, double p) {
  if (x.empty()) throw std::invalid_argument("quantile_of: empty input");
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("quantile_of: p outside [0,1]");
  std::sort(x.begin(), x.end());
  if (x.size() == 1) return x[0];
  double h = p * static_cast<double>(x.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(h));
  auto hi = std::min(lo + 1, x.size() - 1);
  double w = h - static_cast<double>(lo);
  return (1.0 - w) * x[lo] + w * x[hi];
}

double median_of(std::vector<double> values) { return quantile_of(std::move(values), 0.5); }

double correlation_of(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("correlation_of: need equal-length inputs, n >= 2");
  }
  double mx = mean_of(x), my = mean_of(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += square(x[i] - mx);
    syy += square(y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace epirenew
