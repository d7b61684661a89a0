#include "epirenew/draws.hpp"

#include <fstream>
#include <map>
#include <stdexcept>

#include "epirenew/text_io.hpp"

namespace epirenew {

PosteriorDraws::PosteriorDraws(std::vector<std::string> names, int n_chains, int n_draws)
    : names_(std::move(names)), n_chains_(n_chains), n_draws_(n_draws) {
  if (n_chains < 1 || n_draws < 1) {
    throw std::invalid_argument("draws container needs at least one chain and one draw");
  }
  chains_.assign(static_cast<std::size_t>(n_chains),
                 Eigen::MatrixXd::Zero(n_draws, static_cast<int>(names_.size())));
  stats.resize(static_cast<std::size_t>(n_chains));
}

int PosteriorDraws::param_index(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return static_cast<int>(i);
  }
  return -1;
}

double& PosteriorDraws::at(int chain, int draw, int param) {
  return chains_[static_cast<std::size_t>(chain)](draw, param);
}

double PosteriorDraws::at(int chain, int draw, int param) const {
  return chains_[static_cast<std::size_t>(chain)](draw, param);
}

Eigen::VectorXd PosteriorDraws::draw_vector(int chain, int draw) const {
  return chains_[static_cast<std::size_t>(chain)].row(draw).transpose();
}

std::vector<double> PosteriorDraws::column(int param) const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(total_draws()));
  for (const auto& chain : chains_) {
    for (int d = 0; d < n_draws_; ++d) out.push_back(chain(d, param));
  }
  return out;
}

std::vector<double> PosteriorDraws::column(const std::string& name) const {
  int idx = param_index(name);
  if (idx < 0) throw std::invalid_argument("unknown parameter: " + name);
  return column(idx);
}

std::vector<std::vector<double>> PosteriorDraws::column_by_chain(int param) const {
  std::vector<std::vector<double>> out;
  out.reserve(chains_.size());
  for (const auto& chain : chains_) {
    std::vector<double> c(static_cast<std::size_t>(n_draws_));
    for (int d = 0; d < n_draws_; ++d) c[static_cast<std::size_t>(d)] = chain(d, param);
    out.push_back(std::move(c));
  }
  return out;
}

void PosteriorDraws::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "chain,draw,param,value\n";
  for (int c = 0; c < n_chains_; ++c) {
    for (int d = 0; d < n_draws_; ++d) {
      for (int p = 0; p < dim(); ++p) {
        out << c << ',' << d << ',' << names_[static_cast<std::size_t>(p)] << ','
            << format_double(at(c, d, p)) << '\n';
      }
    }
  }
  if (!out) throw std::runtime_error("failed writing " + path);
}

PosteriorDraws PosteriorDraws::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "chain,draw,param,value") {
    throw std::runtime_error(path + ": expected header chain,draw,param,value");
  }
  struct Cell {
    int chain;
    int draw;
    std::string param;
    double value;
  };
  std::vector<Cell> cells;
  std::vector<std::string> names;
  std::map<std::string, int> name_index;
  int max_chain = -1;
  int max_draw = -1;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 4) throw std::runtime_error(path + ": malformed row: " + line);
    Cell cell;
    cell.chain = static_cast<int>(parse_long(fields[0]));
    cell.draw = static_cast<int>(parse_long(fields[1]));
    cell.param = fields[2];
    cell.value = parse_double(fields[3]);
    if (name_index.emplace(cell.param, static_cast<int>(names.size())).second) {
      names.push_back(cell.param);
    }
    max_chain = std::max(max_chain, cell.chain);
    max_draw = std::max(max_draw, cell.draw);
    cells.push_back(std::move(cell));
  }
  if (cells.empty()) throw std::runtime_error(path + ": no draws");
  PosteriorDraws draws(names, max_chain + 1, max_draw + 1);
  for (const auto& cell : cells) {
    draws.at(cell.chain, cell.draw, name_index.at(cell.param)) = cell.value;
  }
  return draws;
}

}  // namespace epirenew
