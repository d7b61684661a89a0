#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "epirenew/draws.hpp"
#include "epirenew/rng.hpp"

namespace epirenew {

// Unnormalized log density over an unconstrained parameter vector. Points
// outside the support return -inf; when grad is non-null it is filled with
// the gradient (zeroed at -inf).
class TargetDensity {
 public:
  virtual ~TargetDensity() = default;
  virtual int dim() const = 0;
  virtual double log_density(const Eigen::VectorXd& x, Eigen::VectorXd* grad) const = 0;
  virtual Eigen::VectorXd initial_point(Rng& rng) const = 0;
  virtual std::vector<std::string> param_names() const = 0;
};

// Ad-hoc target built from a callable, for tests and small problems.
class FunctionTarget : public TargetDensity {
 public:
  using Fn = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>;
  FunctionTarget(int dim, Fn fn, std::vector<std::string> names = {});

  int dim() const override { return dim_; }
  double log_density(const Eigen::VectorXd& x, Eigen::VectorXd* grad) const override;
  Eigen::VectorXd initial_point(Rng& rng) const override;
  std::vector<std::string> param_names() const override { return names_; }

 private:
  int dim_;
  Fn fn_;
  std::vector<std::string> names_;
};

enum class SamplerAlgorithm { nuts, random_walk };

SamplerAlgorithm sampler_algorithm_from_string(const std::string& name);
std::string to_string(SamplerAlgorithm algorithm);

struct SamplerConfig {
  SamplerAlgorithm algorithm = SamplerAlgorithm::nuts;
  int chains = 4;
  int warmup = 1000;
  int draws = 1000;
  std::uint64_t seed = 1;
  double adapt_delta = 0.8;
  int max_depth = 10;
  int threads = 0;  // 0: one thread per chain up to the hardware limit
};

// Runs independent chains on deterministic per-chain random streams; the
// result does not depend on how chains are scheduled across threads.
PosteriorDraws run_sampler(const TargetDensity& target, const SamplerConfig& config);

}  // namespace epirenew
