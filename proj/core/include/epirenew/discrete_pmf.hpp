#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace epirenew {

/// Probability mass function over integer lags.
///
/// Generation-interval pmfs start at lag 1 (an infection cannot cause a
/// same-day infection); infection-to-observation pmfs start at lag 0.
/// Immutable after construction; weights are validated to be nonnegative
/// and to sum to 1 within 1e-9.
class DiscretePmf {
 public:
  /// Empty pmf; invalid until replaced by one of the factories. Models
  /// reject empty generation and delay pmfs at construction.
  DiscretePmf() = default;

  static DiscretePmf generation(std::vector<double> weights);
  static DiscretePmf delay(std::vector<double> weights);

  /// Normalizes weights to sum exactly to 1, then constructs.
  static DiscretePmf normalized_generation(std::vector<double> weights);
  static DiscretePmf normalized_delay(std::vector<double> weights);

  int min_lag() const { return min_lag_; }
  int max_lag() const { return min_lag_ + static_cast<int>(weights_.size()) - 1; }
  int size() const { return static_cast<int>(weights_.size()); }

  /// Weight at the given lag; 0 outside the support.
  double at_lag(int lag) const {
    int k = lag - min_lag_;
    if (k < 0 || k >= static_cast<int>(weights_.size())) return 0.0;
    return weights_[static_cast<std::size_t>(k)];
  }

  const std::vector<double>& weights() const { return weights_; }

  double mean_lag() const;

  /// `lag,weight` rows with a header line; exact decimal formatting.
  std::string to_text() const;
  static DiscretePmf from_text(std::istream& in);
  static DiscretePmf load(const std::string& path);
  void save(const std::string& path) const;

 private:
  DiscretePmf(int min_lag, std::vector<double> weights);

  int min_lag_ = 0;
  std::vector<double> weights_;
};

/// Result of binning a continuous density onto integer lags.
struct DiscretizeResult {
  DiscretePmf pmf;
  double captured_mass;  // pre-renormalization mass within the truncation
  bool truncation_warning;  // captured_mass < 0.99
};

}  // namespace epirenew
