#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace diffdp {

struct ValidationOptions {
  std::uint64_t seed = 1;
  bool quick = false;      // smaller Monte Carlo sizes
  double alpha = 0.001;    // p-value threshold for KS checks
  double sigmas = 3.0;     // standard-error multiple for moment checks
  double quad_tol = 1e-6;  // normalization tolerance
};

struct ValidationCheck {
  std::string name;
  bool pass = false;
  double statistic = 0.0;
  double threshold = 0.0;
  std::string detail;
};

// Analytic-identity battery: stationarity of the transition kernel,
// transition density normalization, stick-breaking moments and the
// autocorrelation identity. ConfigError for invalid options.
std::vector<ValidationCheck> run_validation(const ValidationOptions& options);
nlohmann::json validation_report(const std::vector<ValidationCheck>& checks);

// Integral of a transition density over (0,1) by tanh-sinh quadrature.
double transition_density_mass(double v0, double t, double a, double b, double c);

}  // namespace diffdp
