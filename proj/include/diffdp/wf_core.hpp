#pragma once

#include <vector>

#include "diffdp/random.hpp"

namespace diffdp {

// Parameters of one Wright–Fisher stick: Beta(a, b) invariant law and time
// scale c. The standard diffusion dv = ½[a(1-v) - bv]dt + sqrt(v(1-v))dB is
// the case c = (a + b - 1) / 2.
struct WFParams {
  double a = 1.0;
  double b = 1.0;
  double c = 0.5;

  // Throws ConfigError unless a, b, c > 0 and a + b > 1.
  void validate() const;
  static WFParams standard(double a, double b) { return {a, b, 0.5 * (a + b - 1.0)}; }
};

// Latent triple slicing one transition: slice variable o in (0, g(d)),
// binomial count k in {0..d}, series index d. o is kept on the log scale since
// g(d) underflows for large d.
struct TransitionAug {
  double log_o = -0.6931471805599453;
  int k = 0;
  int d = 0;
};

inline constexpr int kDefaultSeriesCap = 100000;
inline constexpr double kDefaultSeriesTol = 1e-10;
inline constexpr double kEulerClamp = 1e-12;

// Beta(a, b) density; DomainError unless 0 < v < 1.
double invariant_density(double v, const WFParams& p);

// Series weights r_t(m) = (a+b)_m e^{-mct} (1 - e^{-ct})^{a+b} / m!, i.e. the
// Negative-Binomial law with size a + b and success probability 1 - e^{-ct}.
double log_nb_weight(int m, double t, const WFParams& p);
double nb_weight(int m, double t, const WFParams& p);
// sum_{m > M} r_t(m)
double nb_tail(int M, double t, const WFParams& p);
// Smallest M with nb_tail(M) < tol. TruncationError if M would exceed `cap`.
int series_truncation_index(double t, const WFParams& p, double tol = kDefaultSeriesTol,
                            int cap = kDefaultSeriesCap);

// D(v1 | m, v0) = sum_k Beta(v1 | a + k, b + m - k) Bin(k | m, v0).
double log_transition_mixture_component(double v1, int m, double v0, const WFParams& p);
double transition_mixture_component(double v1, int m, double v0, const WFParams& p);

// p_t(v1 | v0) = sum_m r_t(m) D(v1 | m, v0), truncated where the remaining
// series mass drops below tol. All terms are positive, so the truncated value
// is a lower bound.
double transition_density(double v1, double v0, double t, const WFParams& p,
                          double tol = kDefaultSeriesTol, int cap = kDefaultSeriesCap);

// m ~ r_t(.) by inverse CDF.
int sample_series_index(double t, const WFParams& p, Rng& rng, int cap = kDefaultSeriesCap);

// Exact draw from p_t(. | v0) by composition: m ~ r_t, k ~ Bin(m, v0),
// v1 ~ Beta(a + k, b + m - k).
double sample_transition(double v0, double t, const WFParams& p, Rng& rng);

// c (a + b) / (a + b - 1): decay rate of E[v(t) | v0] under the diffusion.
double mean_reversion_rate(const WFParams& p);

// E[v1 | v0] = a/(a+b) + f(t) (v0 - a/(a+b)) holds for the series kernel with
// f(t) = sum_m r_t(m) m / (a + b + m). For stationary draws f(t) is also
// Corr(v0, v1).
double conditional_mean_factor(double t, const WFParams& p, double tol = 1e-14);

struct EulerPath {
  double step = 0.0;
  std::vector<double> values;  // values[i] is the state at time i * step
};

// Euler–Maruyama discretisation of
//   dv = c(a - (a+b)v)/(a+b-1) dt + sqrt(2c/(a+b-1) v(1-v)) dB
// with every step clamped to [1e-12, 1 - 1e-12]. Reference oracle only.
EulerPath euler_path(double v0, double horizon, double step, const WFParams& p, Rng& rng,
                     bool with_noise = true);
double euler_endpoint(double v0, double horizon, double step, const WFParams& p, Rng& rng);

}  // namespace diffdp
