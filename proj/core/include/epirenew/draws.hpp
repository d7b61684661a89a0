#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace epirenew {

// Per-chain sampler bookkeeping reported alongside the draws.
struct ChainStats {
  int divergences = 0;
  int max_depth_hits = 0;
  double step_size = 0.0;
  double mean_accept = 0.0;
};

// Post-warmup posterior draws, one matrix per chain (rows are draws, columns
// follow the parameter layout).
class PosteriorDraws {
 public:
  PosteriorDraws() = default;
  PosteriorDraws(std::vector<std::string> names, int n_chains, int n_draws);

  int dim() const { return static_cast<int>(names_.size()); }
  int n_chains() const { return n_chains_; }
  int n_draws() const { return n_draws_; }
  int total_draws() const { return n_chains_ * n_draws_; }
  const std::vector<std::string>& param_names() const { return names_; }

  // Index of a named parameter, -1 when absent.
  int param_index(const std::string& name) const;

  double& at(int chain, int draw, int param);
  double at(int chain, int draw, int param) const;
  Eigen::VectorXd draw_vector(int chain, int draw) const;

  // All chains concatenated in chain order.
  std::vector<double> column(int param) const;
  std::vector<double> column(const std::string& name) const;
  std::vector<std::vector<double>> column_by_chain(int param) const;

  std::vector<ChainStats> stats;

  // Long-format text table: chain,draw,param,value.
  void save(const std::string& path) const;
  static PosteriorDraws load(const std::string& path);

 private:
  std::vector<std::string> names_;
  int n_chains_ = 0;
  int n_draws_ = 0;
  std::vector<Eigen::MatrixXd> chains_;
};

}  // namespace epirenew
