#pragma once

#include <optional>
#include <string>
#include <vector>

#include "epirenew/discrete_pmf.hpp"
#include "epirenew/moment_match.hpp"
#include "epirenew/rng.hpp"

namespace epirenew {

enum class PathMode { expected, latent };

/// Infections over the seed window v..0 and the modeled days 1..T.
struct InfectionPath {
  int seed_start = 0;  // v <= 0; seeds cover days v..0
  std::vector<double> seeds;   // size -v+1, day v first
  std::vector<double> values;  // days 1..T
  PathMode mode = PathMode::expected;
  std::optional<double> population;  // S0, when population-adjusted

  int horizon() const { return static_cast<int>(values.size()); }
  int num_seed_days() const { return static_cast<int>(seeds.size()); }

  /// Infections on day t for t in [seed_start, horizon]; 0 outside.
  double at(int t) const {
    if (t >= 1) {
      return t <= horizon() ? values[static_cast<std::size_t>(t - 1)] : 0.0;
    }
    int k = t - seed_start;
    if (k < 0 || k >= num_seed_days()) return 0.0;
    return seeds[static_cast<std::size_t>(k)];
  }

  double total() const;

  /// `t,value` rows covering the seed window and modeled days.
  std::string to_text() const;
};

/// Per-day seeding: a shared log-scale level with optional iid per-day
/// multiplicative noise.
struct SeedingConfig {
  int window = 6;               // seed days v..0, v = 1 - window
  double level_prior_mean = 0.0;   // prior on log level
  double level_prior_sd = 1.0;
  double daily_noise_sd = 0.0;  // 0 disables per-day noise

  int seed_start() const { return 1 - window; }
};

/// Case load L_t = sum_{s<t} i_s g_{t-s}. Times before the seed window
/// contribute zero. Valid for t in [1, horizon].
double case_load(const InfectionPath& path, const DiscretePmf& g, int t);

/// Population-saturating expected infections:
/// (S0 - I_cum) * (1 - exp(-unadjusted_R * case_load / S0)).
double adjust_population(double unadjusted_R, double case_load, double population,
                         double cumulative_infections);

/// Deterministic renewal recursion i_t = R_t * L_t, optionally with the
/// population adjustment applied to the expected path.
InfectionPath propagate_expected(const std::vector<double>& seeds, int seed_start,
                                 const std::vector<double>& reproduction,
                                 const DiscretePmf& g,
                                 std::optional<double> population = std::nullopt);

/// Log density of one latent step with conditional mean `mean` and variance
/// d * mean. Zero mean with a positive value yields -inf, not an error.
double latent_step_log_pdf(LagFamily family, double mean, double d, double value);

/// Draws one latent step.
double latent_step_sample(LagFamily family, double mean, double d, Rng& rng);

struct LatentStepGrad {
  double d_value = 0.0;
  double d_mean = 0.0;
  double d_dispersion = 0.0;
};

/// Partial derivatives of latent_step_log_pdf. Gamma and lognormal only;
/// the weibull family has no closed-form parameter gradient here and
/// throws (use a gradient-free sampler with it).
LatentStepGrad latent_step_log_pdf_grad(LagFamily family, double mean, double d, double value);

struct TruncationGrad {
  double d_mean = 0.0;
  double d_dispersion = 0.0;
  double d_upper = 0.0;
};

/// Partial derivatives of the -log F(upper) normalizer used by the
/// truncated latent density. Returns zeros when F(upper) > 1 - 1e-10,
/// where the normalizer is numerically flat. Gamma and lognormal only.
TruncationGrad latent_truncation_grad(LagFamily family, double mean, double d, double upper);

/// Truncated-support version: values above `upper` get -inf, and the
/// normalizing constant log F(upper) is subtracted so densities remain
/// comparable across parameter values.
double latent_step_log_pdf_truncated(LagFamily family, double mean, double d, double value,
                                     double upper);

/// Draws one latent step conditioned on value <= upper (inverse-cdf).
double latent_step_sample_truncated(LagFamily family, double mean, double d, double upper,
                                    Rng& rng);

struct LatentPath {
  InfectionPath path;
  double log_density = 0.0;  // joint density of the sampled steps
};

/// Forward-samples latent infections I_t from the per-step prior given the
/// realized history, with saturating means and truncated support when
/// `population` is set.
LatentPath propagate_latent(const std::vector<double>& seeds, int seed_start,
                            const std::vector<double>& reproduction, const DiscretePmf& g,
                            double dispersion, LagFamily family, Rng& rng,
                            std::optional<double> population = std::nullopt);

/// Joint log density of a proposed latent path under the per-step priors.
double latent_path_log_density(const InfectionPath& path,
                               const std::vector<double>& reproduction, const DiscretePmf& g,
                               double dispersion, LagFamily family);

}  // namespace epirenew
