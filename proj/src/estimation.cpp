#include "diffdp/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "diffdp/dataset.hpp"
#include "diffdp/error.hpp"
#include "diffdp/numerics.hpp"

namespace diffdp {

namespace {

// Sorting first makes the sum independent of draw order.
double sorted_mean(std::span<const double> sorted) {
  double acc = 0.0;
  for (double x : sorted) acc += x;
  return acc / static_cast<double>(sorted.size());
}

CellSummary cell_summary(std::vector<double>& values) {
  std::sort(values.begin(), values.end());
  return {sorted_quantile(values, 0.025), sorted_quantile(values, 0.5),
          sorted_quantile(values, 0.975), sorted_mean(values)};
}

bool inside(double x, double lo, double hi) { return lo <= x && x <= hi; }

}  // namespace

double histogram_mode(std::span<const double> values, std::size_t bins, double mass) {
  if (values.empty()) throw DomainError("histogram_mode: no values");
  if (bins == 0 || !(mass > 0.0 && mass <= 1.0)) throw DomainError("histogram_mode: bad settings");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) return lo;
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<std::size_t> counts(bins, 0);
  for (double x : values) {
    auto b = static_cast<std::size_t>((x - lo) / width);
    counts[std::min(b, bins - 1)]++;
  }
  const auto need = static_cast<std::size_t>(std::ceil(mass * static_cast<double>(values.size())));
  std::size_t best_len = bins + 1, best_start = 0;
  // Two pointers over bin runs; the first narrowest run wins.
  std::size_t start = 0, held = 0;
  for (std::size_t end = 0; end < bins; ++end) {
    held += counts[end];
    while (start < end && held - counts[start] >= need) held -= counts[start++];
    if (held >= need && end - start + 1 < best_len) {
      best_len = end - start + 1;
      best_start = start;
    }
  }
  return lo + width * (static_cast<double>(best_start) + 0.5 * static_cast<double>(best_len));
}

DensitySurface summarize(const PosteriorDraws& draws, std::span<const double> y_grid) {
  if (draws.draws.empty()) throw DomainError("summarize: no draws");
  if (y_grid.empty()) throw DomainError("summarize: empty y grid");
  DensitySurface out;
  out.times = draws.times;
  out.y_grid.assign(y_grid.begin(), y_grid.end());
  out.num_draws = draws.draws.size();
  const std::size_t n_draws = draws.draws.size();
  const std::size_t n_grid = y_grid.size();

  std::vector<std::vector<double>> cell_values(n_grid, std::vector<double>(n_draws));
  std::vector<double> means(n_draws);
  for (std::size_t i = 0; i < out.times.size(); ++i) {
    for (std::size_t d = 0; d < n_draws; ++d) {
      const auto& state = draws.draws[d].measure;
      const auto w = state.weights_at(i);
      const double norm = 1.0 - w.deficit;
      double mean_acc = 0.0;
      for (std::size_t j = 0; j < w.weights.size(); ++j) mean_acc += w.weights[j] * state.atoms[j].mean;
      means[d] = mean_acc / norm;
      for (std::size_t k = 0; k < n_grid; ++k) {
        double f = 0.0;
        for (std::size_t j = 0; j < w.weights.size(); ++j)
          f += w.weights[j] * kernel_eval(y_grid[k], state.atoms[j]);
        cell_values[k][d] = f / norm;
      }
    }
    std::vector<CellSummary> row(n_grid);
    for (std::size_t k = 0; k < n_grid; ++k) row[k] = cell_summary(cell_values[k]);
    out.cells.push_back(std::move(row));

    std::sort(means.begin(), means.end());
    out.mean_functional.push_back({histogram_mode(means), sorted_mean(means),
                                   sorted_quantile(means, 0.025), sorted_quantile(means, 0.5),
                                   sorted_quantile(means, 0.975)});
  }
  return out;
}

double gelman_rubin(const std::vector<std::vector<double>>& chains) {
  if (chains.size() < 2) throw DomainError("gelman_rubin needs at least two chains");
  const std::size_t n = chains.front().size();
  if (n < 10) throw DomainError("gelman_rubin needs at least 10 values per chain");
  for (const auto& c : chains)
    if (c.size() != n) throw DomainError("gelman_rubin needs chains of equal length");
  const double nn = static_cast<double>(n);
  std::vector<double> chain_means, chain_vars;
  for (const auto& c : chains) {
    chain_means.push_back(mean_of(c));
    chain_vars.push_back(variance_of(c));
  }
  const double w = mean_of(chain_vars);
  if (!(w > 0.0)) throw DomainError("gelman_rubin: zero within-chain variance");
  const double b = nn * variance_of(chain_means);
  const double var_plus = (nn - 1.0) / nn * w + b / nn;
  return std::max(1.0, std::sqrt(var_plus / w));
}

double effective_sample_size(std::span<const double> trace) {
  const std::size_t n = trace.size();
  if (n < 10) throw DomainError("effective_sample_size needs at least 10 values");
  const double mu = mean_of(trace);
  std::vector<double> centered(n);
  for (std::size_t t = 0; t < n; ++t) centered[t] = trace[t] - mu;
  auto autocov = [&](std::size_t lag) {
    double acc = 0.0;
    for (std::size_t t = 0; t + lag < n; ++t) acc += centered[t] * centered[t + lag];
    return acc / static_cast<double>(n);
  };
  const double gamma0 = autocov(0);
  if (!(gamma0 > 0.0)) throw DomainError("effective_sample_size: constant trace");
  double sum_pairs = 0.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    double pair = (autocov(2 * k) + autocov(2 * k + 1)) / gamma0;
    if (!(pair > 0.0)) break;
    pair = std::min(pair, prev_pair);
    sum_pairs += pair;
    prev_pair = pair;
  }
  const double tau = std::max(-1.0 + 2.0 * sum_pairs, 1.0 / static_cast<double>(n));
  return std::min(static_cast<double>(n), static_cast<double>(n) / tau);
}

CoverageReport coverage_report(const DensitySurface& surface,
                               const std::function<double(double)>& true_mean,
                               const std::function<double(double, double)>& true_density) {
  std::vector<double> means;
  std::vector<std::vector<double>> dens;
  for (double t : surface.times) {
    means.push_back(true_mean(t));
    std::vector<double> row;
    for (double y : surface.y_grid) row.push_back(true_density(t, y));
    dens.push_back(std::move(row));
  }
  return coverage_report(surface, surface.times, means, dens);
}

CoverageReport coverage_report(const DensitySurface& surface, std::span<const double> times,
                               std::span<const double> true_means,
                               const std::vector<std::vector<double>>& true_density) {
  const std::size_t n = surface.times.size();
  if (times.size() != n || true_means.size() != n || true_density.size() != n)
    throw DomainError("coverage_report: truth grid does not match the surface");
  for (std::size_t i = 0; i < n; ++i) {
    if (times[i] != surface.times[i]) throw DomainError("coverage_report: time grids differ");
    if (true_density[i].size() != surface.y_grid.size())
      throw DomainError("coverage_report: y grids differ");
  }
  CoverageReport out;
  out.num_times = n;
  out.num_cells = n * surface.y_grid.size();
  std::size_t mean_hits = 0, cell_hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& mf = surface.mean_functional[i];
    if (inside(true_means[i], mf.q025, mf.q975)) ++mean_hits;
    for (std::size_t k = 0; k < surface.y_grid.size(); ++k) {
      const auto& c = surface.cells[i][k];
      if (inside(true_density[i][k], c.q025, c.q975)) ++cell_hits;
    }
  }
  out.mean_coverage = n ? static_cast<double>(mean_hits) / static_cast<double>(n) : 0.0;
  out.density_coverage =
      out.num_cells ? static_cast<double>(cell_hits) / static_cast<double>(out.num_cells) : 0.0;
  return out;
}

double mean_functional_rmse(const DensitySurface& surface,
                            const std::function<double(double)>& true_mean) {
  if (surface.times.empty()) throw DomainError("mean_functional_rmse: empty surface");
  double acc = 0.0;
  for (std::size_t i = 0; i < surface.times.size(); ++i) {
    const double e = surface.mean_functional[i].q50 - true_mean(surface.times[i]);
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(surface.times.size()));
}

void write_surface_csv(std::ostream& out, const DensitySurface& surface) {
  out << "t,y,q025,q50,q975,mean\n";
  for (std::size_t i = 0; i < surface.times.size(); ++i)
    for (std::size_t k = 0; k < surface.y_grid.size(); ++k) {
      const auto& c = surface.cells[i][k];
      out << format_double(surface.times[i]) << ',' << format_double(surface.y_grid[k]) << ','
          << format_double(c.q025) << ',' << format_double(c.q50) << ',' << format_double(c.q975)
          << ',' << format_double(c.mean) << '\n';
    }
}

void write_mean_functional_csv(std::ostream& out, const DensitySurface& surface) {
  out << "t,mode,mean,lo,hi\n";
  for (std::size_t i = 0; i < surface.times.size(); ++i) {
    const auto& mf = surface.mean_functional[i];
    out << format_double(surface.times[i]) << ',' << format_double(mf.mode) << ','
        << format_double(mf.mean) << ',' << format_double(mf.q025) << ','
        << format_double(mf.q975) << '\n';
  }
}

nlohmann::json surface_to_json(const DensitySurface& surface) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& row : surface.cells) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& c : row)
      r.push_back({{"q025", c.q025}, {"q50", c.q50}, {"q975", c.q975}, {"mean", c.mean}});
    cells.push_back(std::move(r));
  }
  nlohmann::json mf = nlohmann::json::array();
  for (const auto& m : surface.mean_functional)
    mf.push_back({{"mode", m.mode}, {"mean", m.mean}, {"q025", m.q025}, {"q50", m.q50},
                  {"q975", m.q975}});
  return {{"times", surface.times},
          {"y_grid", surface.y_grid},
          {"num_draws", surface.num_draws},
          {"cells", cells},
          {"mean_functional", mf}};
}

}  // namespace diffdp
