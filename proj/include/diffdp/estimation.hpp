#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include <json.hpp>

#include "diffdp/run_chain.hpp"

namespace diffdp {

struct CellSummary {
  double q025 = 0.0;
  double q50 = 0.0;
  double q975 = 0.0;
  double mean = 0.0;
};

struct MeanFunctionalSummary {
  double mode = 0.0;
  double mean = 0.0;
  double q025 = 0.0;
  double q50 = 0.0;
  double q975 = 0.0;
};

struct DensitySurface {
  std::vector<double> times;
  std::vector<double> y_grid;
  std::vector<std::vector<CellSummary>> cells;  // cells[i][k]: time i, grid point k
  std::vector<MeanFunctionalSummary> mean_functional;
  std::size_t num_draws = 0;
};

inline constexpr std::size_t kModeBins = 512;
inline constexpr double kModeMass = 0.1;

// Histogram mode: the narrowest run of adjacent bins (out of `bins` equal bins
// spanning the sample range) holding at least `mass` of the sample; returns
// the midpoint of that run.
double histogram_mode(std::span<const double> values, std::size_t bins = kModeBins,
                      double mass = kModeMass);

// Pointwise posterior summaries of the renormalized density and of the mean
// functional. DomainError on no draws or an empty grid.
DensitySurface summarize(const PosteriorDraws& draws, std::span<const double> y_grid);

// Potential scale reduction factor, at least 1. DomainError for fewer than two
// chains, unequal lengths, fewer than 10 values or zero within-chain variance.
double gelman_rubin(const std::vector<std::vector<double>>& chains);

// Initial monotone sequence estimator, capped at the trace length. DomainError
// for fewer than 10 values or a constant trace.
double effective_sample_size(std::span<const double> trace);

struct CoverageReport {
  double mean_coverage = 0.0;     // fraction of times with the true mean in the 95% band
  double density_coverage = 0.0;  // fraction of (t, y) cells with the true density in the band
  std::size_t num_times = 0;
  std::size_t num_cells = 0;
};

CoverageReport coverage_report(const DensitySurface& surface,
                               const std::function<double(double)>& true_mean,
                               const std::function<double(double, double)>& true_density);
// Tabulated truth on the surface grid; DomainError when the shapes or times differ.
CoverageReport coverage_report(const DensitySurface& surface, std::span<const double> times,
                               std::span<const double> true_means,
                               const std::vector<std::vector<double>>& true_density);

// Root mean square error of the posterior-median mean functional.
double mean_functional_rmse(const DensitySurface& surface,
                            const std::function<double(double)>& true_mean);

// Long format: t,y,q025,q50,q975,mean
void write_surface_csv(std::ostream& out, const DensitySurface& surface);
// t,mode,mean,lo,hi
void write_mean_functional_csv(std::ostream& out, const DensitySurface& surface);
nlohmann::json surface_to_json(const DensitySurface& surface);

}  // namespace diffdp
