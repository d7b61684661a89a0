#include "epirenew/waic.hpp"

#include <cmath>
#include <stdexcept>

#include "epirenew/math_utils.hpp"

namespace epirenew {

WaicResult waic(const Eigen::MatrixXd& log_lik) {
  const int n_draws = static_cast<int>(log_lik.rows());
  const int n_points = static_cast<int>(log_lik.cols());
  if (n_draws < 2 || n_points < 1) {
    throw std::invalid_argument("waic needs at least two draws and one observation");
  }
  WaicResult out;
  out.pointwise.resize(static_cast<std::size_t>(n_points));
  std::vector<double> column(static_cast<std::size_t>(n_draws));
  for (int i = 0; i < n_points; ++i) {
    for (int s = 0; s < n_draws; ++s) column[static_cast<std::size_t>(s)] = log_lik(s, i);
    double lppd = log_sum_exp(column) - std::log(static_cast<double>(n_draws));
    double p = variance_of(column);
    out.pointwise[static_cast<std::size_t>(i)] = lppd - p;
    out.elpd += lppd - p;
    out.p_eff += p;
  }
  double var_elpd = n_points > 1 ? variance_of(out.pointwise) : 0.0;
  out.se = std::sqrt(static_cast<double>(n_points) * var_elpd);
  return out;
}

WaicComparison compare_waic(const WaicResult& a, const WaicResult& b,
                            const std::string& name_a, const std::string& name_b) {
  if (a.pointwise.size() != b.pointwise.size()) {
    throw std::invalid_argument("waic comparison needs matching observation sets");
  }
  WaicComparison out;
  out.model_a = name_a;
  out.model_b = name_b;
  std::vector<double> diffs(a.pointwise.size());
  for (std::size_t i = 0; i < diffs.size(); ++i) diffs[i] = a.pointwise[i] - b.pointwise[i];
  out.elpd_diff = a.elpd - b.elpd;
  double n = static_cast<double>(diffs.size());
  out.se_diff = diffs.size() > 1 ? std::sqrt(n * variance_of(diffs)) : 0.0;
  return out;
}

namespace {

template <typename Model>
Eigen::MatrixXd stack_pointwise(const Model& model, const PosteriorDraws& draws, int stride,
                                int n_points) {
  if (stride < 1) throw std::invalid_argument("stride must be >= 1");
  std::vector<Eigen::VectorXd> rows;
  for (int c = 0; c < draws.n_chains(); ++c) {
    for (int d = 0; d < draws.n_draws(); d += stride) {
      Eigen::VectorXd params = draws.draw_vector(c, d);
      std::vector<double> ll = model.pointwise_log_likelihood(params);
      rows.emplace_back(Eigen::Map<Eigen::VectorXd>(ll.data(), static_cast<int>(ll.size())));
    }
  }
  Eigen::MatrixXd out(static_cast<int>(rows.size()), n_points);
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<int>(r)) = rows[r];
  return out;
}

}  // namespace

Eigen::MatrixXd pointwise_matrix(const RenewalModel& model, const PosteriorDraws& draws,
                                 int stride) {
  return stack_pointwise(model, draws, stride, model.n_pointwise());
}

Eigen::MatrixXd pointwise_matrix(const GaussianRegressionModel& model,
                                 const PosteriorDraws& draws, int stride) {
  return stack_pointwise(model, draws, stride, model.n_observations());
}

}  // namespace epirenew
