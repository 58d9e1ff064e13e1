#include "diffdp/wf_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/distributions/negative_binomial.hpp>

#include "diffdp/error.hpp"
#include "diffdp/numerics.hpp"

namespace diffdp {

void WFParams::validate() const {
  if (!(a > 0.0) || !(b > 0.0) || !(c > 0.0))
    throw ConfigError("Wright-Fisher parameters must be positive (a=" + std::to_string(a) +
                      ", b=" + std::to_string(b) + ", c=" + std::to_string(c) + ")");
  if (!(a + b > 1.0))
    throw ConfigError("Wright-Fisher parameters need a + b > 1 (a=" + std::to_string(a) +
                      ", b=" + std::to_string(b) + ")");
}

double invariant_density(double v, const WFParams& p) {
  if (!(v > 0.0 && v < 1.0)) throw DomainError("invariant_density: v outside (0,1)");
  return std::exp(log_beta_pdf(v, p.a, p.b));
}

namespace {

void check_time(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("transition time must be positive");
}

// log(1 - e^{-ct}) and log e^{-ct}
struct SeriesLogs {
  double log_success;
  double log_q;
};

SeriesLogs series_logs(double t, const WFParams& p) {
  return {log1m_exp_neg(p.c * t), -p.c * t};
}

}  // namespace

double log_nb_weight(int m, double t, const WFParams& p) {
  check_time(t);
  if (m < 0) return kNegInf;
  const double size = p.a + p.b;
  const auto [log_success, log_q] = series_logs(t, p);
  return log_pochhammer(size, m) - std::lgamma(m + 1.0) + m * log_q + size * log_success;
}

double nb_weight(int m, double t, const WFParams& p) { return std::exp(log_nb_weight(m, t, p)); }

double nb_tail(int M, double t, const WFParams& p) {
  check_time(t);
  if (M < 0) return 1.0;
  const double success = -std::expm1(-p.c * t);
  if (success >= 1.0) return 0.0;
  boost::math::negative_binomial_distribution<double> nb(p.a + p.b, success);
  return boost::math::cdf(boost::math::complement(nb, static_cast<double>(M)));
}

int series_truncation_index(double t, const WFParams& p, double tol, int cap) {
  check_time(t);
  if (!(tol > 0.0 && tol < 1.0)) throw DomainError("series tolerance must lie in (0,1)");
  if (nb_tail(0, t, p) < tol) return 0;
  if (nb_tail(cap, t, p) >= tol)
    throw TruncationError("transition series needs more than " + std::to_string(cap) +
                          " terms at t=" + std::to_string(t) + "; t is too small for tol=" +
                          std::to_string(tol));
  // Tail is decreasing in M: bracket then bisect.
  int lo = 0;
  int hi = 1;
  while (hi < cap && nb_tail(hi, t, p) >= tol) {
    lo = hi;
    hi = std::min(cap, 2 * hi);
  }
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    if (nb_tail(mid, t, p) >= tol) lo = mid; else hi = mid;
  }
  return hi;
}

double log_transition_mixture_component(double v1, int m, double v0, const WFParams& p) {
  if (!(v1 > 0.0 && v1 < 1.0)) throw DomainError("transition density: v1 outside (0,1)");
  if (!(v0 >= 0.0 && v0 <= 1.0)) throw DomainError("transition density: v0 outside [0,1]");
  if (m < 0) throw DomainError("transition density: negative series index");
  const double log_v1 = std::log(v1);
  const double log_1m_v1 = std::log1p(-v1);
  const double common = std::lgamma(p.a + p.b + m) + std::lgamma(m + 1.0);
  int k_lo = 0;
  int k_hi = m;
  if (v0 == 0.0) k_hi = 0;
  if (v0 == 1.0) k_lo = m;
  const double log_v0 = v0 > 0.0 ? std::log(v0) : 0.0;
  const double log_1m_v0 = v0 < 1.0 ? std::log1p(-v0) : 0.0;
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(k_hi - k_lo + 1));
  for (int k = k_lo; k <= k_hi; ++k) {
    const double shape1 = p.a + k;
    const double shape2 = p.b + m - k;
    const double log_beta = -std::lgamma(shape1) - std::lgamma(shape2) + (shape1 - 1.0) * log_v1 +
                            (shape2 - 1.0) * log_1m_v1;
    const double log_bin = -std::lgamma(k + 1.0) - std::lgamma(m - k + 1.0) +
                           (k > 0 ? k * log_v0 : 0.0) + (m - k > 0 ? (m - k) * log_1m_v0 : 0.0);
    terms.push_back(log_beta + log_bin);
  }
  return common + log_sum_exp(terms);
}

double transition_mixture_component(double v1, int m, double v0, const WFParams& p) {
  return std::exp(log_transition_mixture_component(v1, m, v0, p));
}

double transition_density(double v1, double v0, double t, const WFParams& p, double tol, int cap) {
  check_time(t);
  const int M = series_truncation_index(t, p, tol, cap);
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(M + 1));
  for (int m = 0; m <= M; ++m)
    terms.push_back(log_nb_weight(m, t, p) + log_transition_mixture_component(v1, m, v0, p));
  return std::exp(log_sum_exp(terms));
}

int sample_series_index(double t, const WFParams& p, Rng& rng, int cap) {
  check_time(t);
  const double size = p.a + p.b;
  const auto [log_success, log_q] = series_logs(t, p);
  const double u = sample_uniform(rng);
  double log_r = size * log_success;
  double cum = 0.0;
  const double mode = std::max(0.0, (size - 1.0) * std::exp(log_q) / std::exp(log_success));
  for (int m = 0; m <= cap; ++m) {
    const double r = std::exp(log_r);
    cum += r;
    if (u < cum) return m;
    // Past the mode with underflowed terms, the remaining mass is below
    // rounding of `cum`.
    if (m > mode && r == 0.0) return m;
    log_r += std::log(size + m) - std::log(m + 1.0) + log_q;
  }
  throw TruncationError("series index draw exceeded cap " + std::to_string(cap));
}

double sample_transition(double v0, double t, const WFParams& p, Rng& rng) {
  if (!(v0 >= 0.0 && v0 <= 1.0)) throw DomainError("sample_transition: v0 outside [0,1]");
  const int m = sample_series_index(t, p, rng);
  const int k = sample_binomial(rng, m, v0);
  return sample_beta(rng, p.a + k, p.b + m - k);
}

double mean_reversion_rate(const WFParams& p) { return p.c * (p.a + p.b) / (p.a + p.b - 1.0); }

double conditional_mean_factor(double t, const WFParams& p, double tol) {
  const int M = series_truncation_index(t, p, tol);
  const double size = p.a + p.b;
  double acc = 0.0;
  for (int m = 1; m <= M; ++m) acc += nb_weight(m, t, p) * m / (size + m);
  return acc;
}

namespace {

struct EulerCoefficients {
  double drift_scale;
  double diffusion_scale;
};

EulerCoefficients euler_coefficients(const WFParams& p) {
  const double denom = p.a + p.b - 1.0;
  return {p.c / denom, 2.0 * p.c / denom};
}

double euler_step(double v, double h, double sqrt_h, const WFParams& p,
                  const EulerCoefficients& k, std::normal_distribution<double>& z, Rng& rng,
                  bool with_noise) {
  double next = v + k.drift_scale * (p.a - (p.a + p.b) * v) * h;
  if (with_noise) next += std::sqrt(k.diffusion_scale * v * (1.0 - v)) * sqrt_h * z(rng);
  return std::clamp(next, kEulerClamp, 1.0 - kEulerClamp);
}

std::size_t euler_steps(double horizon, double step) {
  if (!(horizon > 0.0) || !(step > 0.0)) throw DomainError("euler: horizon and step must be positive");
  return static_cast<std::size_t>(std::llround(horizon / step));
}

}  // namespace

EulerPath euler_path(double v0, double horizon, double step, const WFParams& p, Rng& rng,
                     bool with_noise) {
  const std::size_t n = euler_steps(horizon, step);
  const auto k = euler_coefficients(p);
  const double sqrt_h = std::sqrt(step);
  EulerPath path{step, {}};
  path.values.reserve(n + 1);
  double v = std::clamp(v0, kEulerClamp, 1.0 - kEulerClamp);
  path.values.push_back(v);
  std::normal_distribution<double> z(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    v = euler_step(v, step, sqrt_h, p, k, z, rng, with_noise);
    path.values.push_back(v);
  }
  return path;
}

double euler_endpoint(double v0, double horizon, double step, const WFParams& p, Rng& rng) {
  const std::size_t n = euler_steps(horizon, step);
  const auto k = euler_coefficients(p);
  const double sqrt_h = std::sqrt(step);
  double v = std::clamp(v0, kEulerClamp, 1.0 - kEulerClamp);
  std::normal_distribution<double> z(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) v = euler_step(v, step, sqrt_h, p, k, z, rng, true);
  return v;
}

}  // namespace diffdp
