#include "epirenew/summarize.hpp"

#include <fstream>
#include <limits>
#include <stdexcept>

#include "epirenew/math_utils.hpp"
#include "epirenew/text_io.hpp"

namespace epirenew {

std::vector<SummaryRow> summarize_draws(const PosteriorDraws& draws,
                                        const FitDiagnostics* diagnostics) {
  std::vector<SummaryRow> rows;
  rows.reserve(static_cast<std::size_t>(draws.dim()));
  for (int p = 0; p < draws.dim(); ++p) {
    std::vector<double> values = draws.column(p);
    SummaryRow row;
    row.name = draws.param_names()[static_cast<std::size_t>(p)];
    row.mean = mean_of(values);
    row.sd = values.size() > 1 ? sd_of(values) : 0.0;
    row.q025 = quantile_of(values, 0.025);
    row.q50 = quantile_of(values, 0.5);
    row.q975 = quantile_of(values, 0.975);
    if (diagnostics != nullptr) {
      row.rhat = diagnostics->params[static_cast<std::size_t>(p)].rhat;
      row.ess_bulk = diagnostics->params[static_cast<std::size_t>(p)].ess_bulk;
    } else {
      row.rhat = std::numeric_limits<double>::quiet_NaN();
      row.ess_bulk = std::numeric_limits<double>::quiet_NaN();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void save_summary(const std::vector<SummaryRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "name,mean,sd,q2.5,q50,q97.5,rhat,ess_bulk\n";
  for (const auto& row : rows) {
    out << row.name << ',' << format_double(row.mean) << ',' << format_double(row.sd) << ','
        << format_double(row.q025) << ',' << format_double(row.q50) << ','
        << format_double(row.q975) << ',' << format_double(row.rhat) << ','
        << format_double(row.ess_bulk) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path);
}

void save_series_report(const std::vector<SeriesQuantiles>& series, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "quantity,t,region,q2.5,q50,q97.5\n";
  for (const auto& s : series) {
    for (std::size_t t = 0; t < s.q50.size(); ++t) {
      out << s.quantity << ',' << (t + 1) << ',' << s.region << ','
          << format_double(s.q025[t]) << ',' << format_double(s.q50[t]) << ','
          << format_double(s.q975[t]) << '\n';
    }
  }
  if (!out) throw std::runtime_error("failed writing " + path);
}

std::vector<SeriesQuantiles> model_series_report(const RenewalModel& model,
                                                 const PosteriorDraws& draws, int stride) {
  if (stride < 1) throw std::invalid_argument("stride must be >= 1");
  const auto& data = model.data();
  const auto& spec = model.spec();
  // samples[quantity][region] is a horizon x n_samples matrix built up column
  // by column, then reduced to quantiles per day.
  struct Bucket {
    std::string quantity;
    std::string region;
    std::vector<std::vector<double>> per_day;
  };
  std::vector<Bucket> buckets;
  auto add_bucket = [&](const std::string& quantity, const std::string& region, int horizon) {
    Bucket b;
    b.quantity = quantity;
    b.region = region;
    b.per_day.resize(static_cast<std::size_t>(horizon));
    buckets.push_back(std::move(b));
  };
  for (const auto& region : data) {
    add_bucket("reproduction", region.name, region.horizon);
    add_bucket("infections", region.name, region.horizon);
    for (const auto& obs : spec.observations) {
      add_bucket("expected_" + obs.name, region.name, region.horizon);
    }
  }

  const int per_region = 2 + static_cast<int>(spec.observations.size());
  for (int c = 0; c < draws.n_chains(); ++c) {
    for (int d = 0; d < draws.n_draws(); d += stride) {
      ModelState state = model.evaluate(draws.draw_vector(c, d));
      for (int m = 0; m < model.n_regions(); ++m) {
        Bucket& rb = buckets[static_cast<std::size_t>(m * per_region)];
        Bucket& ib = buckets[static_cast<std::size_t>(m * per_region + 1)];
        const auto& repro = state.reproduction[static_cast<std::size_t>(m)];
        const auto& path = state.infections[static_cast<std::size_t>(m)];
        for (std::size_t t = 0; t < repro.size(); ++t) {
          rb.per_day[t].push_back(repro[t]);
          ib.per_day[t].push_back(path.values[t]);
        }
        for (std::size_t k = 0; k < spec.observations.size(); ++k) {
          Bucket& ob = buckets[static_cast<std::size_t>(m * per_region + 2) + k];
          const auto& y = state.expected_obs[static_cast<std::size_t>(m)][k];
          for (std::size_t t = 0; t < y.size(); ++t) ob.per_day[t].push_back(y[t]);
        }
      }
    }
  }

  std::vector<SeriesQuantiles> out;
  out.reserve(buckets.size());
  for (auto& bucket : buckets) {
    SeriesQuantiles sq;
    sq.quantity = bucket.quantity;
    sq.region = bucket.region;
    for (auto& day : bucket.per_day) {
      sq.q025.push_back(quantile_of(day, 0.025));
      sq.q50.push_back(quantile_of(day, 0.5));
      sq.q975.push_back(quantile_of(day, 0.975));
    }
    out.push_back(std::move(sq));
  }
  return out;
}

}  // namespace epirenew
