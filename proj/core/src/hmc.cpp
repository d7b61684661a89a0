#include "epirenew/hmc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

#include "epirenew/math_utils.hpp"
#include "epirenew/parallel.hpp"

namespace epirenew {

FunctionTarget::FunctionTarget(int dim, Fn fn, std::vector<std::string> names)
    : dim_(dim), fn_(std::move(fn)), names_(std::move(names)) {
  if (names_.empty()) {
    for (int i = 0; i < dim_; ++i) names_.push_back("x[" + std::to_string(i) + "]");
  }
  if (static_cast<int>(names_.size()) != dim_) {
    throw std::invalid_argument("parameter name count does not match dimension");
  }
}

double FunctionTarget::log_density(const Eigen::VectorXd& x, Eigen::VectorXd* grad) const {
  if (grad != nullptr) {
    grad->resize(dim_);
    grad->setZero();
  }
  return fn_(x, grad);
}

Eigen::VectorXd FunctionTarget::initial_point(Rng& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd x(dim_);
  for (int i = 0; i < dim_; ++i) x[i] = normal(rng);
  return x;
}

SamplerAlgorithm sampler_algorithm_from_string(const std::string& name) {
  if (name == "nuts") return SamplerAlgorithm::nuts;
  if (name == "random_walk") return SamplerAlgorithm::random_walk;
  throw std::invalid_argument("unknown sampler algorithm: " + name);
}

std::string to_string(SamplerAlgorithm algorithm) {
  return algorithm == SamplerAlgorithm::nuts ? "nuts" : "random_walk";
}

namespace {

constexpr double kDivergenceThreshold = 1000.0;

struct PhaseSpace {
  Eigen::VectorXd q;
  Eigen::VectorXd p;
  Eigen::VectorXd grad;
  double logp = 0.0;
};

double kinetic(const Eigen::VectorXd& p, const Eigen::VectorXd& inv_mass) {
  return 0.5 * p.dot(inv_mass.cwiseProduct(p));
}

void leapfrog(const TargetDensity& target, const Eigen::VectorXd& inv_mass, double eps,
              PhaseSpace& s) {
  s.p += 0.5 * eps * s.grad;
  s.q += eps * inv_mass.cwiseProduct(s.p);
  s.logp = target.log_density(s.q, &s.grad);
  s.p += 0.5 * eps * s.grad;
}

// Nesterov-style averaged step size adaptation.
struct DualAveraging {
  double mu = 0.0;
  double log_eps = 0.0;
  double log_eps_bar = 0.0;
  double h_bar = 0.0;
  int count = 0;
  static constexpr double gamma = 0.05;
  static constexpr double t0 = 10.0;
  static constexpr double kappa = 0.75;

  void restart(double eps) {
    mu = std::log(10.0 * eps);
    log_eps = std::log(eps);
    log_eps_bar = log_eps;
    h_bar = 0.0;
    count = 0;
  }
  void update(double accept, double target_accept) {
    ++count;
    double eta = 1.0 / (count + t0);
    h_bar = (1.0 - eta) * h_bar + eta * (target_accept - accept);
    log_eps = mu - std::sqrt(static_cast<double>(count)) / gamma * h_bar;
    double w = std::pow(static_cast<double>(count), -kappa);
    log_eps_bar = w * log_eps + (1.0 - w) * log_eps_bar;
  }
};

// Stan-style warmup schedule: a fast start buffer, doubling covariance
// windows, and a fast terminal buffer for final step size tuning.
struct AdaptSchedule {
  int init_buffer = 0;
  int term_buffer = 0;
  std::vector<int> window_ends;  // iteration indices where a window closes

  explicit AdaptSchedule(int warmup) {
    if (warmup <= 0) return;
    int init = 75;
    int term = 50;
    int base = 25;
    if (warmup < init + term + base) {
      init = std::max(1, warmup * 15 / 100);
      term = std::max(1, warmup * 10 / 100);
      base = std::max(1, warmup - init - term);
    }
    init_buffer = init;
    term_buffer = term;
    int pos = init;
    int width = base;
    while (pos < warmup - term) {
      int end = pos + width;
      if (end + 2 * width > warmup - term) end = warmup - term;
      window_ends.push_back(end);
      pos = end;
      width *= 2;
    }
  }

  bool in_mass_window(int iter) const {
    return !window_ends.empty() && iter >= init_buffer && iter < window_ends.back();
  }
  bool window_closes(int iter) const {
    return std::find(window_ends.begin(), window_ends.end(), iter + 1) != window_ends.end();
  }
};

Eigen::VectorXd draw_momentum(const Eigen::VectorXd& inv_mass, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd p(inv_mass.size());
  for (int i = 0; i < p.size(); ++i) p[i] = normal(rng) / std::sqrt(inv_mass[i]);
  return p;
}

double find_reasonable_epsilon(const TargetDensity& target, const Eigen::VectorXd& q,
                               const Eigen::VectorXd& inv_mass, Rng& rng) {
  double eps = 1.0;
  PhaseSpace base;
  base.q = q;
  base.logp = target.log_density(q, &base.grad);
  if (!std::isfinite(base.logp)) return 1e-2;
  base.p = draw_momentum(inv_mass, rng);
  double h0 = -base.logp + kinetic(base.p, inv_mass);

  auto joint_ratio = [&](double step) {
    PhaseSpace s = base;
    leapfrog(target, inv_mass, step, s);
    double h1 = std::isfinite(s.logp) ? -s.logp + kinetic(s.p, inv_mass) : kPosInf;
    return std::exp(h0 - h1);
  };

  double ratio = joint_ratio(eps);
  double dir = ratio > 0.5 ? 1.0 : -1.0;
  for (int i = 0; i < 50; ++i) {
    eps *= dir > 0 ? 2.0 : 0.5;
    if (eps < 1e-10 || eps > 1e10) break;
    ratio = joint_ratio(eps);
    if ((dir > 0 && ratio <= 0.5) || (dir < 0 && ratio >= 0.5)) break;
  }
  return std::clamp(eps, 1e-10, 1e10);
}

// Running accumulator for the diagonal mass matrix windows.
class VarianceAccumulator {
 public:
  explicit VarianceAccumulator(int dim) : welford_(static_cast<std::size_t>(dim)) {}
  void add(const Eigen::VectorXd& q) {
    for (int i = 0; i < q.size(); ++i) welford_[static_cast<std::size_t>(i)].add(q[i]);
  }
  long count() const { return welford_.empty() ? 0 : welford_.front().count(); }
  Eigen::VectorXd regularized_variance() const {
    Eigen::VectorXd v(static_cast<int>(welford_.size()));
    double n = static_cast<double>(count());
    for (int i = 0; i < v.size(); ++i) {
      double var = welford_[static_cast<std::size_t>(i)].variance();
      v[i] = n / (n + 5.0) * var + 1e-3 * (5.0 / (n + 5.0));
    }
    return v;
  }
  void reset() {
    for (auto& w : welford_) w = Welford();
  }

 private:
  std::vector<Welford> welford_;
};

struct TransitionResult {
  double accept_stat = 0.0;
  bool divergent = false;
  bool depth_saturated = false;
};

class NutsChain {
 public:
  NutsChain(const TargetDensity& target, const SamplerConfig& config, Rng rng)
      : target_(target), config_(config), rng_(std::move(rng)) {
    state_.q = target_.initial_point(rng_);
    state_.logp = target_.log_density(state_.q, &state_.grad);
    if (!std::isfinite(state_.logp)) {
      throw std::runtime_error("sampler started at a point of zero density");
    }
    inv_mass_ = Eigen::VectorXd::Ones(target_.dim());
  }

  void run(Eigen::MatrixXd& out, ChainStats& stats) {
    AdaptSchedule schedule(config_.warmup);
    VarianceAccumulator mass_acc(target_.dim());
    DualAveraging da;
    double eps = find_reasonable_epsilon(target_, state_.q, inv_mass_, rng_);
    da.restart(eps);

    for (int iter = 0; iter < config_.warmup; ++iter) {
      eps = std::exp(da.log_eps);
      TransitionResult res = transition(eps);
      da.update(res.accept_stat, config_.adapt_delta);
      if (schedule.in_mass_window(iter)) {
        mass_acc.add(state_.q);
        if (schedule.window_closes(iter) && mass_acc.count() >= 2) {
          inv_mass_ = mass_acc.regularized_variance();
          mass_acc.reset();
          double fresh = find_reasonable_epsilon(target_, state_.q, inv_mass_, rng_);
          da.restart(fresh);
        }
      }
    }

    eps = config_.warmup > 0 ? std::exp(da.log_eps_bar) : std::exp(da.log_eps);
    stats.step_size = eps;
    double accept_sum = 0.0;
    for (int d = 0; d < config_.draws; ++d) {
      TransitionResult res = transition(eps);
      accept_sum += res.accept_stat;
      if (res.divergent) ++stats.divergences;
      if (res.depth_saturated) ++stats.max_depth_hits;
      out.row(d) = state_.q.transpose();
    }
    stats.mean_accept = config_.draws > 0 ? accept_sum / config_.draws : 0.0;
  }

 private:
  struct Subtree {
    PhaseSpace minus;
    PhaseSpace plus;
    Eigen::VectorXd q_prop;
    double log_weight = kNegInf;
    double metro_sum = 0.0;
    int leaves = 0;
    bool divergent = false;
    bool ok = false;
  };

  bool no_uturn(const PhaseSpace& minus, const PhaseSpace& plus) const {
    Eigen::VectorXd span = plus.q - minus.q;
    return span.dot(inv_mass_.cwiseProduct(minus.p)) >= 0.0 &&
           span.dot(inv_mass_.cwiseProduct(plus.p)) >= 0.0;
  }

  Subtree build_tree(int depth, double eps, double dir, const PhaseSpace& from, double h0) {
    if (depth == 0) {
      Subtree leaf;
      leaf.minus = from;
      leapfrog(target_, inv_mass_, dir * eps, leaf.minus);
      leaf.plus = leaf.minus;
      double h = std::isfinite(leaf.minus.logp)
                     ? -leaf.minus.logp + kinetic(leaf.minus.p, inv_mass_)
                     : kPosInf;
      leaf.q_prop = leaf.minus.q;
      leaf.log_weight = -h;
      leaf.metro_sum = std::isfinite(h) ? std::min(1.0, std::exp(h0 - h)) : 0.0;
      leaf.leaves = 1;
      leaf.divergent = !(h - h0 < kDivergenceThreshold);
      leaf.ok = !leaf.divergent;
      return leaf;
    }
    Subtree inner = build_tree(depth - 1, eps, dir, from, h0);
    if (!inner.ok) return inner;
    const PhaseSpace& edge = dir > 0 ? inner.plus : inner.minus;
    Subtree outer = build_tree(depth - 1, eps, dir, edge, h0);
    Subtree merged;
    merged.minus = dir > 0 ? inner.minus : outer.minus;
    merged.plus = dir > 0 ? outer.plus : inner.plus;
    merged.log_weight = log_sum_exp_pair(inner.log_weight, outer.log_weight);
    merged.metro_sum = inner.metro_sum + outer.metro_sum;
    merged.leaves = inner.leaves + outer.leaves;
    merged.divergent = inner.divergent || outer.divergent;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double take_outer = std::exp(outer.log_weight - merged.log_weight);
    merged.q_prop = unit(rng_) < take_outer ? outer.q_prop : inner.q_prop;
    merged.ok = outer.ok && no_uturn(merged.minus, merged.plus);
    return merged;
  }

  TransitionResult transition(double eps) {
    TransitionResult res;
    state_.p = draw_momentum(inv_mass_, rng_);
    double h0 = -state_.logp + kinetic(state_.p, inv_mass_);

    PhaseSpace minus = state_;
    PhaseSpace plus = state_;
    Eigen::VectorXd q_prop = state_.q;
    double log_weight = -h0;
    double metro_sum = 0.0;
    int leaves = 0;

    std::uniform_int_distribution<int> coin(0, 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int depth = 0;
    for (; depth < config_.max_depth; ++depth) {
      double dir = coin(rng_) == 1 ? 1.0 : -1.0;
      Subtree tree = build_tree(depth, eps, dir, dir > 0 ? plus : minus, h0);
      metro_sum += tree.metro_sum;
      leaves += tree.leaves;
      if (tree.divergent) res.divergent = true;
      if (!tree.ok) break;
      // biased progressive update favours the fresh half of the trajectory
      if (unit(rng_) < std::exp(tree.log_weight - log_weight)) q_prop = tree.q_prop;
      log_weight = log_sum_exp_pair(log_weight, tree.log_weight);
      if (dir > 0) {
        plus = tree.plus;
      } else {
        minus = tree.minus;
      }
      if (!no_uturn(minus, plus)) break;
    }
    res.depth_saturated = depth == config_.max_depth;
    res.accept_stat = leaves > 0 ? metro_sum / leaves : 0.0;

    if (q_prop != state_.q) {
      state_.q = q_prop;
      state_.logp = target_.log_density(state_.q, &state_.grad);
    }
    return res;
  }

  const TargetDensity& target_;
  const SamplerConfig& config_;
  Rng rng_;
  PhaseSpace state_;
  Eigen::VectorXd inv_mass_;
};

class RandomWalkChain {
 public:
  RandomWalkChain(const TargetDensity& target, const SamplerConfig& config, Rng rng)
      : target_(target), config_(config), rng_(std::move(rng)) {
    q_ = target_.initial_point(rng_);
    logp_ = target_.log_density(q_, nullptr);
    if (!std::isfinite(logp_)) {
      throw std::runtime_error("sampler started at a point of zero density");
    }
    scale_ = Eigen::VectorXd::Ones(target_.dim());
    log_step_ = std::log(2.38 / std::sqrt(static_cast<double>(std::max(1, target_.dim()))));
  }

  void run(Eigen::MatrixXd& out, ChainStats& stats) {
    AdaptSchedule schedule(config_.warmup);
    VarianceAccumulator acc(target_.dim());
    for (int iter = 0; iter < config_.warmup; ++iter) {
      bool accepted = step();
      // Robbins-Monro drift towards the 0.234 acceptance target
      double lr = std::pow(static_cast<double>(iter + 1), -0.6);
      log_step_ += lr * ((accepted ? 1.0 : 0.0) - 0.234);
      if (schedule.in_mass_window(iter)) {
        acc.add(q_);
        if (schedule.window_closes(iter) && acc.count() >= 2) {
          scale_ = acc.regularized_variance().cwiseSqrt();
          acc.reset();
        }
      }
    }
    stats.step_size = std::exp(log_step_);
    double accepted_count = 0.0;
    for (int d = 0; d < config_.draws; ++d) {
      if (step()) accepted_count += 1.0;
      out.row(d) = q_.transpose();
    }
    stats.mean_accept = config_.draws > 0 ? accepted_count / config_.draws : 0.0;
  }

 private:
  bool step() {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::VectorXd prop = q_;
    double s = std::exp(log_step_);
    for (int i = 0; i < prop.size(); ++i) prop[i] += s * scale_[i] * normal(rng_);
    double lp = target_.log_density(prop, nullptr);
    if (std::log(unit(rng_)) < lp - logp_) {
      q_ = prop;
      logp_ = lp;
      return true;
    }
    return false;
  }

  const TargetDensity& target_;
  const SamplerConfig& config_;
  Rng rng_;
  Eigen::VectorXd q_;
  double logp_ = 0.0;
  Eigen::VectorXd scale_;
  double log_step_ = 0.0;
};

}  // namespace

PosteriorDraws run_sampler(const TargetDensity& target, const SamplerConfig& config) {
  if (config.chains < 1) throw std::invalid_argument("need at least one chain");
  if (config.draws < 1) throw std::invalid_argument("need at least one draw");
  if (config.warmup < 0) throw std::invalid_argument("warmup must be >= 0");
  if (!(config.adapt_delta > 0.0 && config.adapt_delta < 1.0)) {
    throw std::invalid_argument("adapt_delta must lie in (0, 1)");
  }
  if (config.max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");

  PosteriorDraws draws(target.param_names(), config.chains, config.draws);
  std::vector<Eigen::MatrixXd> outputs(static_cast<std::size_t>(config.chains),
                                       Eigen::MatrixXd::Zero(config.draws, target.dim()));
  std::vector<ChainStats> stats(static_cast<std::size_t>(config.chains));
  std::vector<std::string> errors(static_cast<std::size_t>(config.chains));

  auto run_chain = [&](int c) {
    try {
      Rng rng = make_stream(config.seed, static_cast<std::uint64_t>(c));
      if (config.algorithm == SamplerAlgorithm::nuts) {
        NutsChain chain(target, config, std::move(rng));
        chain.run(outputs[static_cast<std::size_t>(c)], stats[static_cast<std::size_t>(c)]);
      } else {
        RandomWalkChain chain(target, config, std::move(rng));
        chain.run(outputs[static_cast<std::size_t>(c)], stats[static_cast<std::size_t>(c)]);
      }
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(c)] = e.what();
    }
  };

  int threads = std::min(resolve_threads(config.threads), config.chains);
  if (threads <= 1) {
    for (int c = 0; c < config.chains; ++c) run_chain(c);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (int c = next.fetch_add(1); c < config.chains; c = next.fetch_add(1)) {
          run_chain(c);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  for (const auto& err : errors) {
    if (!err.empty()) throw std::runtime_error("chain failed: " + err);
  }
  for (int c = 0; c < config.chains; ++c) {
    for (int d = 0; d < config.draws; ++d) {
      for (int p = 0; p < target.dim(); ++p) {
        draws.at(c, d, p) = outputs[static_cast<std::size_t>(c)](d, p);
      }
    }
    draws.stats[static_cast<std::size_t>(c)] = stats[static_cast<std::size_t>(c)];
  }
  return draws;
}

}  // namespace epirenew
