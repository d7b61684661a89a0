#pragma once

#include <optional>
#include <string>
#include <vector>

#include "epirenew/lag_density.hpp"
#include "epirenew/rng.hpp"

namespace epirenew {

/// Right-continuous step function on [0, inf); value i applies on
/// [i*step, (i+1)*step) and the last value extends to infinity.
struct PiecewiseConstant {
  std::vector<double> values;
  double step = 1.0;

  double at(double t) const;
  double max_on(double lo, double hi) const;
};

enum class EventMark { infection, observation };

struct Event {
  double time;
  EventMark mark;
};

/// Events sorted by time; ties keep insertion order.
struct EventLog {
  std::vector<Event> events;

  int count(EventMark mark) const;
  std::vector<double> times(EventMark mark) const;
  void save(const std::string& path) const;  // time,mark
};

/// Self-exciting infection process: each past infection at time s excites
/// future infections with kernel weight(t) * g(t - s), optionally damped by
/// the susceptible fraction (S0 - N(t)) / S0 where N counts all infections.
///
/// With gamma_mixing_rate = 0 the weight is R(t). With rate lambda > 0 each
/// infection draws its own weight G ~ Gamma(R(birth) * lambda, lambda),
/// which gives offspring counts a variance-to-mean ratio of 1 + 1/lambda.
struct IntensitySpec {
  PiecewiseConstant reproduction;
  ContinuousLagDensity generation;
  std::vector<double> seed_times;  // all <= 0
  std::optional<double> population;
  double gamma_mixing_rate = 0.0;
};

/// Exact sampling of the infection process by thinning with a dominating
/// rate recomputed over short lookahead windows. Throws when the event count
/// exceeds max_events.
EventLog simulate_thinning(const IntensitySpec& spec, double horizon, Rng& rng,
                           long max_events = 2000000);

/// Observation events driven by fixed infection times with intensity
/// alpha(t) * sum_j delay(t - t_j), sampled by the same thinning scheme.
std::vector<double> simulate_observation_times(const std::vector<double>& infection_times,
                                               const PiecewiseConstant& alpha,
                                               const ContinuousLagDensity& delay,
                                               double horizon, Rng& rng,
                                               long max_events = 2000000);

/// Infections per day: day t (1-based) covers times in (t-1, t].
std::vector<long> daily_infection_counts(const EventLog& log, int horizon);

/// Deterministic expected daily infections of the (population-free) process,
/// from midpoint-rule quadrature of the renewal integral on a fine grid.
std::vector<double> renewal_integral_daily(const PiecewiseConstant& reproduction,
                                           const ContinuousLagDensity& generation,
                                           const std::vector<double>& seed_times, int horizon,
                                           double grid_step = 0.05);

struct MonteCarloCheck {
  double empirical = 0.0;
  double expected = 0.0;
  double z = 0.0;
};

/// Saturating pure-birth process over one unit of time with the case load
/// frozen: intensity (S0 - n)/S0 * r_u * load. Compares the mean number of
/// new infections against (S0 - i0) * (1 - exp(-r_u * load / S0)).
MonteCarloCheck verify_population_lemma(double s0, double i0, double r_u, double load,
                                        int n_runs, Rng& rng);

/// Mean observations per infection against the ascertainment rate alpha,
/// accounting for delay mass lost past the padded horizon.
MonteCarloCheck verify_observation_intensity(const IntensitySpec& spec, double alpha,
                                             const ContinuousLagDensity& delay, double horizon,
                                             double pad, int n_runs, Rng& rng);

struct DispersionCheck {
  double mean = 0.0;
  double ratio = 0.0;           // empirical Var/Mean of offspring counts
  double expected_ratio = 0.0;  // 1 (pure Poisson) or 1 + 1/lambda
  double z_mean = 0.0;
  double z_ratio = 0.0;
};

/// Direct offspring counts of a single infection, simulated by thinning over
/// a horizon covering the kernel mass. The ratio z-score comes from batch
/// means over n_batches groups of replications.
DispersionCheck offspring_dispersion(double r, const ContinuousLagDensity& generation,
                                     double gamma_mixing_rate, int n_replications,
                                     int n_batches, Rng& rng);

}  // namespace epirenew
