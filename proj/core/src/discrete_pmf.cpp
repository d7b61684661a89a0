#include "epirenew/discrete_pmf.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>

#include "epirenew/text_io.hpp"

namespace epirenew {

namespace {

void validate_weights(const std::vector<double>& w) {
  if (w.empty()) throw std::invalid_argument("DiscretePmf: empty weight vector");
  double sum = 0.0;
  for (double v : w) {
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument("DiscretePmf: weights must be finite and nonnegative");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("DiscretePmf: weights sum to " + format_double(sum) +
                                ", expected 1 within 1e-9");
  }
}

std::vector<double> normalize(std::vector<double> w) {
  double sum = 0.0;
  for (double v : w) sum += v;
  if (!(sum > 0.0) || !std::isfinite(sum)) {
    throw std::invalid_argument("DiscretePmf: cannot normalize weights with nonpositive sum");
  }
  for (double& v : w) v /= sum;
  return w;
}

}  // namespace

DiscretePmf::DiscretePmf(int min_lag, std::vector<double> weights)
    : min_lag_(min_lag), weights_(std::move(weights)) {
  validate_weights(weights_);
  if (max_lag() < 1) throw std::invalid_argument("DiscretePmf: max_lag must be >= 1");
}

DiscretePmf DiscretePmf::generation(std::vector<double> weights) {
  return DiscretePmf(1, std::move(weights));
}

DiscretePmf DiscretePmf::delay(std::vector<double> weights) {
  return DiscretePmf(0, std::move(weights));
}

DiscretePmf DiscretePmf::normalized_generation(std::vector<double> weights) {
  return DiscretePmf(1, normalize(std::move(weights)));
}

DiscretePmf DiscretePmf::normalized_delay(std::vector<double> weights) {
  return DiscretePmf(0, normalize(std::move(weights)));
}

double DiscretePmf::mean_lag() const {
  double m = 0.0;
  for (int k = 0; k < size(); ++k) {
    m += (min_lag_ + k) * weights_[static_cast<std::size_t>(k)];
  }
  return m;
}

std::string DiscretePmf::to_text() const {
  std::string out = "lag,weight\n";
  for (int k = 0; k < size(); ++k) {
    out += std::to_string(min_lag_ + k);
    out += ',';
    out += format_double(weights_[static_cast<std::size_t>(k)]);
    out += '\n';
  }
  return out;
}

DiscretePmf DiscretePmf::from_text(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "lag,weight") {
    throw std::invalid_argument("pmf text: expected header 'lag,weight'");
  }
  std::vector<std::pair<long, double>> rows;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (t.empty()) continue;
    auto fields = split_csv_line(t);
    if (fields.size() != 2) throw std::invalid_argument("pmf text: expected 2 columns");
    rows.emplace_back(parse_long(fields[0], "pmf lag"), parse_double(fields[1], "pmf weight"));
  }
  if (rows.empty()) throw std::invalid_argument("pmf text: no rows");
  long min_lag = rows.front().first;
  if (min_lag != 0 && min_lag != 1) {
    throw std::invalid_argument("pmf text: first lag must be 0 or 1");
  }
  std::vector<double> weights(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].first != min_lag + static_cast<long>(i)) {
      throw std::invalid_argument("pmf text: lags must be contiguous starting at " +
                                  std::to_string(min_lag));
    }
    weights[i] = rows[i].second;
  }
  return DiscretePmf(static_cast<int>(min_lag), std::move(weights));
}

DiscretePmf DiscretePmf::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open pmf file: " + path);
  return from_text(in);
}

void DiscretePmf::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write pmf file: " + path);
  out << to_text();
}

}  // namespace epirenew
