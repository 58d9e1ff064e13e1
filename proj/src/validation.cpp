#include "diffdp/validation.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <sstream>

#include "diffdp/dataset.hpp"
#include "diffdp/error.hpp"
#include "diffdp/measure.hpp"
#include "diffdp/numerics.hpp"
#include "diffdp/random.hpp"
#include "diffdp/stats.hpp"
#include "diffdp/wf_core.hpp"

namespace diffdp {

namespace {

std::string fmt(double x) { return format_double(x); }

void stationarity_checks(const ValidationOptions& opt, std::vector<ValidationCheck>& out) {
  const WFParams p{1.0, 4.0, 2.0};
  const std::size_t n = opt.quick ? 20000 : 100000;
  for (double t : {0.1, 1.0}) {
    Rng rng = make_rng(opt.seed, 100 + static_cast<std::uint64_t>(t * 10));
    std::vector<double> moved(n), fresh(n);
    for (auto& v : moved) v = sample_transition(sample_beta(rng, p.a, p.b), t, p, rng);
    for (auto& v : fresh) v = sample_beta(rng, p.a, p.b);
    const double pval = ks_two_sample_pvalue(moved, fresh);
    out.push_back({"stationarity_t=" + fmt(t), pval > opt.alpha, pval, opt.alpha,
                   "two-sample KS p-value, " + std::to_string(n) + " transitions from Beta(1,4)"});
  }
}

void normalization_checks(const ValidationOptions& opt, std::vector<ValidationCheck>& out) {
  double worst = 0.0;
  std::ostringstream detail;
  for (double v0 : {0.1, 0.5, 0.9})
    for (double t : {0.05, 0.5, 5.0}) {
      const double err = std::abs(transition_density_mass(v0, t, 1.0, 4.0, 2.0) - 1.0);
      if (err > worst) {
        worst = err;
        detail.str("");
        detail << "worst at v0=" << v0 << " t=" << t;
      }
    }
  out.push_back({"transition_normalization", worst < opt.quad_tol, worst, opt.quad_tol,
                 detail.str().empty() ? "all integrals exact" : detail.str()});
}

// P_t(A) for G(A) = 1/2: atoms are uniform labels, A = {label < 1/2}.
double half_set_mass(const MeasureState<double>& state, std::size_t i) {
  return measure_eval<double>(state, i, [](const double& x) { return x < 0.5; }).value;
}

void moment_checks(const ValidationOptions& opt, std::vector<ValidationCheck>& out) {
  const double theta = 1.0;
  const StickConfig cfg = StickConfig::dirichlet(theta, 0.5);
  const std::size_t n = opt.quick ? 3000 : 10000;
  Rng rng = make_rng(opt.seed, 200);
  const std::function<double(Rng&)> atom = [](Rng& r) { return sample_uniform(r); };
  std::vector<double> mass(n);
  for (auto& x : mass) x = half_set_mass(sample_marginal<double>(cfg, atom, 1e-8, rng), 0);
  const double mean = mean_of(mass);
  const double var = variance_of(mass);
  double m4 = 0.0;
  for (double x : mass) m4 += std::pow(x - mean, 4);
  m4 /= static_cast<double>(n);
  const double se_mean = std::sqrt(var / static_cast<double>(n));
  const double se_var = std::sqrt(std::max(m4 - var * var, 0.0) / static_cast<double>(n));
  const double want_var = 0.25 / (1.0 + theta);
  out.push_back({"dp_mean", std::abs(mean - 0.5) < opt.sigmas * se_mean,
                 std::abs(mean - 0.5) / se_mean, opt.sigmas,
                 "mean " + fmt(mean) + " vs 0.5 (z-score reported)"});
  out.push_back({"dp_variance", std::abs(var - want_var) < opt.sigmas * se_var,
                 std::abs(var - want_var) / se_var, opt.sigmas,
                 "variance " + fmt(var) + " vs " + fmt(want_var) + " (z-score reported)"});
}

void acf_checks(const ValidationOptions& opt, std::vector<ValidationCheck>& out) {
  const double theta = 1.0;
  const double c = 0.5 * theta;
  const StickConfig cfg = StickConfig::dirichlet(theta, c);
  const WFParams stick{1.0, theta, c};
  const std::size_t n = opt.quick ? 3000 : 10000;
  const std::function<double(Rng&)> atom = [](Rng& r) { return sample_uniform(r); };
  std::uint64_t stream = 300;
  for (double s : {0.5, 1.0, 2.0, 20.0}) {
    Rng rng = make_rng(opt.seed, stream++);
    std::vector<double> x(n), y(n);
    for (std::size_t k = 0; k < n; ++k) {
      const auto start = sample_marginal<double>(cfg, atom, 1e-6, rng);
      x[k] = half_set_mass(start, 0);
      y[k] = half_set_mass(evolve(start, cfg, s, rng), 0);
    }
    const double r = correlation(x, y);
    const double want = acf_from_stick_correlation(theta, conditional_mean_factor(s, stick));
    const double se = (1.0 - want * want) / std::sqrt(static_cast<double>(n));
    out.push_back({"acf_lag=" + fmt(s), std::abs(r - want) < opt.sigmas * se,
                   std::abs(r - want) / se, opt.sigmas,
                   "MC " + fmt(r) + " vs kernel identity " + fmt(want) +
                       "; exponential-decay formula gives " + fmt(theoretical_acf(theta, s))});
  }
}

}  // namespace

double transition_density_mass(double v0, double t, double a, double b, double c) {
  const WFParams p{a, b, c};
  p.validate();
  boost::math::quadrature::tanh_sinh<double> integrator;
  auto f = [&](double v) {
    if (!(v > 0.0 && v < 1.0)) return 0.0;
    return transition_density(v, v0, t, p);
  };
  return integrator.integrate(f, 0.0, 1.0, 1e-12);
}

std::vector<ValidationCheck> run_validation(const ValidationOptions& options) {
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
  if (!(options.sigmas > 0.0)) throw ConfigError("sigmas must be positive");
  if (!(options.quad_tol > 0.0)) throw ConfigError("quadrature tolerance must be positive");
  std::vector<ValidationCheck> out;
  stationarity_checks(options, out);
  normalization_checks(options, out);
  moment_checks(options, out);
  acf_checks(options, out);
  return out;
}

nlohmann::json validation_report(const std::vector<ValidationCheck>& checks) {
  nlohmann::json list = nlohmann::json::array();
  bool all = true;
  for (const auto& c : checks) {
    all = all && c.pass;
    list.push_back({{"name", c.name},
                    {"pass", c.pass},
                    {"statistic", c.statistic},
                    {"threshold", c.threshold},
                    {"detail", c.detail}});
  }
  return {{"all_pass", all}, {"checks", list}};
}

}  // namespace diffdp
