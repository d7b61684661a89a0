#include "epirenew/diagnostics.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <limits>
#include <numeric>

#include "epirenew/math_utils.hpp"

namespace epirenew {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

bool usable(const std::vector<std::vector<double>>& chains) {
  if (chains.empty()) return false;
  std::size_t n = chains.front().size();
  if (n < 4) return false;
  double first = chains.front().front();
  bool constant = true;
  for (const auto& c : chains) {
    if (c.size() != n) return false;
    for (double v : c) {
      if (!std::isfinite(v)) return false;
      if (v != first) constant = false;
    }
  }
  return !constant;
}

// Classic potential scale reduction over already-prepared chains.
double basic_rhat(const std::vector<std::vector<double>>& chains) {
  const double m = static_cast<double>(chains.size());
  const double n = static_cast<double>(chains.front().size());
  std::vector<double> means;
  std::vector<double> vars;
  for (const auto& c : chains) {
    means.push_back(mean_of(c));
    vars.push_back(variance_of(c));
  }
  double grand = mean_of(means);
  double b_over_n = 0.0;
  for (double mu : means) b_over_n += square(mu - grand);
  b_over_n /= (m - 1.0);
  double w = mean_of(vars);
  if (!(w > 0.0)) return kNan;
  double var_plus = (n - 1.0) / n * w + b_over_n;
  return std::sqrt(var_plus / w);
}

// Mean autocovariance at a given lag across chains, each demeaned separately.
double lag_autocov(const std::vector<std::vector<double>>& chains,
                   const std::vector<double>& means, std::size_t lag) {
  double acc = 0.0;
  for (std::size_t j = 0; j < chains.size(); ++j) {
    const auto& c = chains[j];
    const double mu = means[j];
    double s = 0.0;
    for (std::size_t t = 0; t + lag < c.size(); ++t) {
      s += (c[t] - mu) * (c[t + lag] - mu);
    }
    acc += s / static_cast<double>(c.size());
  }
  return acc / static_cast<double>(chains.size());
}

}  // namespace

std::vector<std::vector<double>> split_chains(const std::vector<std::vector<double>>& chains) {
  std::vector<std::vector<double>> out;
  for (const auto& c : chains) {
    std::size_t half = c.size() / 2;
    out.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(half));
    out.emplace_back(c.end() - static_cast<std::ptrdiff_t>(half), c.end());
  }
  return out;
}

std::vector<std::vector<double>> rank_normalize(const std::vector<std::vector<double>>& chains) {
  struct Entry {
    double value;
    std::size_t chain;
    std::size_t index;
  };
  std::vector<Entry> all;
  for (std::size_t j = 0; j < chains.size(); ++j) {
    for (std::size_t t = 0; t < chains[j].size(); ++t) {
      all.push_back({chains[j][t], j, t});
    }
  }
  std::sort(all.begin(), all.end(),
            [](const Entry& a, const Entry& b) { return a.value < b.value; });
  const double total = static_cast<double>(all.size());
  std::vector<std::vector<double>> out(chains.size());
  for (std::size_t j = 0; j < chains.size(); ++j) out[j].resize(chains[j].size());
  boost::math::normal_distribution<double> unit;
  std::size_t i = 0;
  while (i < all.size()) {
    std::size_t j = i;
    while (j < all.size() && all[j].value == all[i].value) ++j;
    // average rank for ties, then the fractional offset of Blom's formula
    double rank = 0.5 * static_cast<double>(i + j - 1) + 1.0;
    double z = boost::math::quantile(unit, (rank - 0.375) / (total + 0.25));
    for (std::size_t k = i; k < j; ++k) out[all[k].chain][all[k].index] = z;
    i = j;
  }
  return out;
}

double split_rhat(const std::vector<std::vector<double>>& chains) {
  if (!usable(chains)) return kNan;
  return basic_rhat(rank_normalize(split_chains(chains)));
}

double bulk_ess(const std::vector<std::vector<double>>& chains) {
  if (!usable(chains)) return kNan;
  auto z = rank_normalize(split_chains(chains));
  const double m = static_cast<double>(z.size());
  const double n = static_cast<double>(z.front().size());

  std::vector<double> means;
  std::vector<double> vars;
  for (const auto& c : z) {
    means.push_back(mean_of(c));
    vars.push_back(variance_of(c));
  }
  double w = mean_of(vars);
  double grand = mean_of(means);
  double b_over_n = 0.0;
  for (double mu : means) b_over_n += square(mu - grand);
  if (z.size() > 1) b_over_n /= (m - 1.0);
  double var_plus = (n - 1.0) / n * w + (z.size() > 1 ? b_over_n : 0.0);
  if (!(var_plus > 0.0)) return kNan;

  // rho_t = 1 - (W - mean_j acov_j(t)) / var_plus, summed in Geyer pairs
  auto rho_at = [&](std::size_t lag) {
    return 1.0 - (w - lag_autocov(z, means, lag)) / var_plus;
  };
  const std::size_t max_lag = static_cast<std::size_t>(n) - 1;
  double tau = 1.0;  // rho_0 contributes 1; pairs start at lags (1,2)
  double prev_pair = kPosInf;
  std::size_t lag = 1;
  while (lag + 1 <= max_lag) {
    double pair = rho_at(lag) + rho_at(lag + 1);
    if (pair < 0.0) break;
    pair = std::min(pair, prev_pair);
    tau += 2.0 * pair;
    prev_pair = pair;
    lag += 2;
  }
  double ess = m * n / tau;
  return std::min(ess, m * n * std::log10(m * n));
}

FitDiagnostics diagnose(const PosteriorDraws& draws) {
  FitDiagnostics out;
  out.max_rhat = 0.0;
  out.min_ess = kPosInf;
  out.total_divergences = 0;
  out.total_max_depth_hits = 0;
  for (const auto& s : draws.stats) {
    out.total_divergences += s.divergences;
    out.total_max_depth_hits += s.max_depth_hits;
  }
  for (int p = 0; p < draws.dim(); ++p) {
    auto chains = draws.column_by_chain(p);
    ParamDiagnostics pd;
    pd.name = draws.param_names()[static_cast<std::size_t>(p)];
    pd.rhat = split_rhat(chains);
    pd.ess_bulk = bulk_ess(chains);
    if (std::isfinite(pd.rhat)) out.max_rhat = std::max(out.max_rhat, pd.rhat);
    if (std::isfinite(pd.ess_bulk)) out.min_ess = std::min(out.min_ess, pd.ess_bulk);
    out.params.push_back(std::move(pd));
  }
  if (!std::isfinite(out.min_ess)) out.min_ess = kNan;
  return out;
}

}  // namespace epirenew
