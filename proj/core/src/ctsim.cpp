#include "epirenew/ctsim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include "epirenew/math_utils.hpp"
#include "epirenew/text_io.hpp"

namespace epirenew {

double PiecewiseConstant::at(double t) const {
  if (values.empty()) throw std::logic_error("empty step function");
  if (t < 0.0) return values.front();
  auto idx = static_cast<std::size_t>(t / step);
  return values[std::min(idx, values.size() - 1)];
}

double PiecewiseConstant::max_on(double lo, double hi) const {
  if (values.empty()) throw std::logic_error("empty step function");
  if (hi < lo) std::swap(lo, hi);
  auto first = lo <= 0.0 ? 0 : static_cast<std::size_t>(lo / step);
  auto last = hi <= 0.0 ? 0 : static_cast<std::size_t>(hi / step);
  first = std::min(first, values.size() - 1);
  last = std::min(last, values.size() - 1);
  double m = values[first];
  for (auto i = first; i <= last; ++i) m = std::max(m, values[i]);
  return m;
}

int EventLog::count(EventMark mark) const {
  int n = 0;
  for (const auto& e : events) {
    if (e.mark == mark) ++n;
  }
  return n;
}

std::vector<double> EventLog::times(EventMark mark) const {
  std::vector<double> out;
  for (const auto& e : events) {
    if (e.mark == mark) out.push_back(e.time);
  }
  return out;
}

void EventLog::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "time,mark\n";
  for (const auto& e : events) {
    out << format_double(e.time) << ','
        << (e.mark == EventMark::infection ? "infection" : "observation") << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path);
}

namespace {

// Shared thinning loop: sources at fixed times excite new events through a
// kernel; each source carries its own weight. Newly accepted events become
// sources themselves only when self_exciting.
struct ThinningProcess {
  const ContinuousLagDensity& kernel;
  std::vector<double> source_times;
  std::vector<double> source_weights;
  bool self_exciting = false;
  // weight applied to events born during the run (self-exciting case);
  // set by the caller per accepted event
  double lookahead = 0.5;

  double intensity(double t) const {
    double sum = 0.0;
    for (std::size_t j = 0; j < source_times.size(); ++j) {
      double lag = t - source_times[j];
      if (lag > 0.0) sum += source_weights[j] * kernel.pdf(lag);
    }
    return sum;
  }

  double bound(double lo, double hi) const {
    double sum = 0.0;
    for (std::size_t j = 0; j < source_times.size(); ++j) {
      double a = lo - source_times[j];
      double b = hi - source_times[j];
      if (b <= 0.0) continue;
      sum += source_weights[j] * kernel.max_on(std::max(a, 0.0), b);
    }
    return sum;
  }
};

}  // namespace

EventLog simulate_thinning(const IntensitySpec& spec, double horizon, Rng& rng,
                           long max_events) {
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be > 0");
  for (double s : spec.seed_times) {
    if (!(s <= 0.0) || !std::isfinite(s)) {
      throw std::invalid_argument("seed times must be finite and <= 0");
    }
  }
  for (double r : spec.reproduction.values) {
    if (!(r >= 0.0)) throw std::invalid_argument("reproduction values must be >= 0");
  }
  const bool mixed = spec.gamma_mixing_rate > 0.0;
  const double s0 = spec.population.value_or(0.0);
  if (spec.population.has_value() && !(s0 > 0.0)) {
    throw std::invalid_argument("population must be > 0");
  }

  ThinningProcess proc{spec.generation, {}, {}, true};
  std::exponential_distribution<double> expo(1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto weight_for = [&](double birth) {
    double r_birth = spec.reproduction.at(std::max(birth, 0.0));
    if (!mixed) return 1.0;  // weight enters through R(t) at event time instead
    if (r_birth <= 0.0) return 0.0;
    std::gamma_distribution<double> gamma(r_birth * spec.gamma_mixing_rate,
                                          1.0 / spec.gamma_mixing_rate);
    return gamma(rng);
  };

  EventLog log;
  long total = static_cast<long>(spec.seed_times.size());
  for (double s : spec.seed_times) {
    proc.source_times.push_back(s);
    proc.source_weights.push_back(weight_for(s));
  }

  auto depletion = [&] {
    if (!spec.population.has_value()) return 1.0;
    double left = (s0 - static_cast<double>(total)) / s0;
    return std::max(left, 0.0);
  };

  double t = 0.0;
  while (t < horizon) {
    double window_end = std::min(t + proc.lookahead, horizon);
    double kernel_bound = proc.bound(t, window_end);
    double rate_bound = mixed ? kernel_bound
                              : spec.reproduction.max_on(t, window_end) * kernel_bound;
    rate_bound *= depletion();
    if (!(rate_bound > 0.0)) {
      t = window_end;
      continue;
    }
    double candidate = t + expo(rng) / rate_bound;
    if (candidate >= window_end) {
      t = window_end;
      continue;
    }
    double rate = proc.intensity(candidate);
    if (!mixed) rate *= spec.reproduction.at(candidate);
    rate *= depletion();
    if (unit(rng) * rate_bound < rate) {
      log.events.push_back({candidate, EventMark::infection});
      proc.source_times.push_back(candidate);
      proc.source_weights.push_back(weight_for(candidate));
      if (++total > max_events) {
        throw std::runtime_error("event cap exceeded at " + std::to_string(total) +
                                 " events by time " + format_double(candidate));
      }
    }
    t = candidate;
  }
  return log;
}

std::vector<double> simulate_observation_times(const std::vector<double>& infection_times,
                                               const PiecewiseConstant& alpha,
                                               const ContinuousLagDensity& delay,
                                               double horizon, Rng& rng, long max_events) {
  ThinningProcess proc{delay, infection_times,
                       std::vector<double>(infection_times.size(), 1.0), false};
  std::exponential_distribution<double> expo(1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> out;
  double t = infection_times.empty()
                 ? horizon
                 : *std::min_element(infection_times.begin(), infection_times.end());
  while (t < horizon) {
    double window_end = std::min(t + proc.lookahead, horizon);
    double rate_bound = alpha.max_on(t, window_end) * proc.bound(t, window_end);
    if (!(rate_bound > 0.0)) {
      t = window_end;
      continue;
    }
    double candidate = t + expo(rng) / rate_bound;
    if (candidate >= window_end) {
      t = window_end;
      continue;
    }
    double rate = alpha.at(candidate) * proc.intensity(candidate);
    if (unit(rng) * rate_bound < rate) {
      out.push_back(candidate);
      if (static_cast<long>(out.size()) > max_events) {
        throw std::runtime_error("event cap exceeded in observation thinning");
      }
    }
    t = candidate;
  }
  return out;
}

std::vector<long> daily_infection_counts(const EventLog& log, int horizon) {
  std::vector<long> counts(static_cast<std::size_t>(horizon), 0);
  for (const auto& e : log.events) {
    if (e.mark != EventMark::infection) continue;
    if (e.time <= 0.0) continue;
    int day = static_cast<int>(std::ceil(e.time));
    if (day >= 1 && day <= horizon) ++counts[static_cast<std::size_t>(day - 1)];
  }
  return counts;
}

std::vector<double> renewal_integral_daily(const PiecewiseConstant& reproduction,
                                           const ContinuousLagDensity& generation,
                                           const std::vector<double>& seed_times, int horizon,
                                           double grid_step) {
  if (!(grid_step > 0.0 && grid_step <= 1.0)) {
    throw std::invalid_argument("grid step must be in (0, 1]");
  }
  const int per_day = std::max(1, static_cast<int>(std::round(1.0 / grid_step)));
  const double h = 1.0 / per_day;
  const int n = horizon * per_day;
  std::vector<double> lambda(static_cast<std::size_t>(n), 0.0);
  std::vector<double> daily(static_cast<std::size_t>(horizon), 0.0);
  for (int i = 0; i < n; ++i) {
    double t = (i + 0.5) * h;
    double excitation = 0.0;
    for (double s : seed_times) excitation += generation.pdf(t - s);
    for (int j = 0; j < i; ++j) {
      double lag = t - (j + 0.5) * h;
      excitation += h * lambda[static_cast<std::size_t>(j)] * generation.pdf(lag);
    }
    lambda[static_cast<std::size_t>(i)] = reproduction.at(t) * excitation;
    daily[static_cast<std::size_t>(i / per_day)] += h * lambda[static_cast<std::size_t>(i)];
  }
  return daily;
}

MonteCarloCheck verify_population_lemma(double s0, double i0, double r_u, double load,
                                        int n_runs, Rng& rng) {
  if (!(s0 > 0.0) || i0 < 0.0 || i0 > s0) {
    throw std::invalid_argument("need 0 <= i0 <= s0 with s0 > 0");
  }
  if (n_runs < 2) throw std::invalid_argument("need at least two runs");
  const double unit_rate = r_u * load / s0;
  std::exponential_distribution<double> expo(1.0);
  Welford acc;
  for (int run = 0; run < n_runs; ++run) {
    double n = i0;
    double t = 0.0;
    while (true) {
      double rate = (s0 - n) * unit_rate;
      if (!(rate > 0.0)) break;
      t += expo(rng) / rate;
      if (t > 1.0) break;
      n += 1.0;
    }
    acc.add(n - i0);
  }
  MonteCarloCheck out;
  out.empirical = acc.mean();
  out.expected = (s0 - i0) * one_minus_exp_neg(unit_rate);
  double se = acc.sd() / std::sqrt(static_cast<double>(n_runs));
  out.z = se > 0.0 ? (out.empirical - out.expected) / se : 0.0;
  return out;
}

MonteCarloCheck verify_observation_intensity(const IntensitySpec& spec, double alpha,
                                             const ContinuousLagDensity& delay, double horizon,
                                             double pad, int n_runs, Rng& rng) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
  PiecewiseConstant alpha_fn{{alpha}, 1.0};
  double total_mass = 0.0;
  long infections = 0;
  long observations = 0;
  for (int run = 0; run < n_runs; ++run) {
    EventLog log = simulate_thinning(spec, horizon, rng);
    std::vector<double> times = log.times(EventMark::infection);
    for (double s : spec.seed_times) times.push_back(s);
    for (double s : times) total_mass += delay.cdf(horizon + pad - s);
    infections += static_cast<long>(times.size());
    auto obs = simulate_observation_times(times, alpha_fn, delay, horizon + pad, rng);
    observations += static_cast<long>(obs.size());
  }
  MonteCarloCheck out;
  if (infections == 0) return out;
  out.empirical = static_cast<double>(observations) / static_cast<double>(infections);
  out.expected = alpha * total_mass / static_cast<double>(infections);
  // conditional on the infections, the total count is Poisson
  double expected_total = alpha * total_mass;
  out.z = expected_total > 0.0
              ? (static_cast<double>(observations) - expected_total) / std::sqrt(expected_total)
              : 0.0;
  return out;
}

DispersionCheck offspring_dispersion(double r, const ContinuousLagDensity& generation,
                                     double gamma_mixing_rate, int n_replications,
                                     int n_batches, Rng& rng) {
  if (n_batches < 2 || n_replications < 2 * n_batches) {
    throw std::invalid_argument("need at least two batches with two replications each");
  }
  // horizon covering essentially all kernel mass
  double horizon = generation.mean() + 12.0 * std::sqrt(generation.variance());
  while (generation.cdf(horizon) < 1.0 - 1e-9) horizon *= 1.5;

  PiecewiseConstant unit_alpha{{1.0}, 1.0};
  std::vector<double> parent{0.0};
  std::vector<long> counts;
  counts.reserve(static_cast<std::size_t>(n_replications));
  for (int i = 0; i < n_replications; ++i) {
    double weight = r;
    if (gamma_mixing_rate > 0.0) {
      std::gamma_distribution<double> gamma(r * gamma_mixing_rate, 1.0 / gamma_mixing_rate);
      weight = gamma(rng);
    }
    PiecewiseConstant rate{{weight}, 1.0};
    auto children = simulate_observation_times(parent, rate, generation, horizon, rng);
    counts.push_back(static_cast<long>(children.size()));
  }

  Welford overall;
  for (long c : counts) overall.add(static_cast<double>(c));
  DispersionCheck out;
  out.mean = overall.mean();
  out.ratio = overall.mean() > 0.0 ? overall.variance() / overall.mean() : 0.0;
  out.expected_ratio = gamma_mixing_rate > 0.0 ? 1.0 + 1.0 / gamma_mixing_rate : 1.0;
  double se_mean = overall.sd() / std::sqrt(static_cast<double>(n_replications));
  out.z_mean = se_mean > 0.0 ? (out.mean - r) / se_mean : 0.0;

  // batch means give an honest standard error for the variance ratio
  const int per_batch = n_replications / n_batches;
  Welford batch_acc;
  for (int b = 0; b < n_batches; ++b) {
    Welford w;
    for (int i = b * per_batch; i < (b + 1) * per_batch; ++i) {
      w.add(static_cast<double>(counts[static_cast<std::size_t>(i)]));
    }
    if (w.mean() > 0.0) batch_acc.add(w.variance() / w.mean());
  }
  double se_ratio = batch_acc.count() > 1
                        ? batch_acc.sd() / std::sqrt(static_cast<double>(batch_acc.count()))
                        : 0.0;
  out.z_ratio = se_ratio > 0.0 ? (batch_acc.mean() - out.expected_ratio) / se_ratio : 0.0;
  return out;
}

}  // namespace epirenew
