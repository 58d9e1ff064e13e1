#include "diffdp/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "diffdp/error.hpp"
#include "diffdp/numerics.hpp"

namespace diffdp {

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x9e3779b9u};
  return Rng(seq);
}

std::string serialize_rng(const Rng& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

Rng deserialize_rng(const std::string& text) {
  std::istringstream is(text);
  Rng rng;
  is >> rng;
  if (!is) throw DataError("corrupt RNG state");
  return rng;
}

double sample_uniform(Rng& rng) {
  // 53 random bits mapped to the midpoints of a uniform grid: never 0 or 1.
  const auto bits = rng() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double sample_uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * sample_uniform(rng);
}

double sample_normal(Rng& rng, double mean, double sd) {
  std::normal_distribution<double> dist(mean, sd);
  return dist(rng);
}

double sample_log_gamma(Rng& rng, double shape) {
  if (!(shape > 0.0)) throw DomainError("gamma shape must be positive");
  if (shape >= 1.0) {
    std::gamma_distribution<double> dist(shape, 1.0);
    const double g = dist(rng);
    if (g > 0.0) return std::log(g);
    // Underflow is practically impossible for shape >= 1; fall through.
  }
  // Gamma(a) = Gamma(a + 1) * U^(1/a)
  std::gamma_distribution<double> dist(shape + 1.0, 1.0);
  return std::log(dist(rng)) + std::log(sample_uniform(rng)) / shape;
}

double sample_gamma(Rng& rng, double shape, double rate) {
  if (!(rate > 0.0)) throw DomainError("gamma rate must be positive");
  return std::exp(sample_log_gamma(rng, shape)) / rate;
}

double sample_beta(Rng& rng, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("beta shapes must be positive");
  const double la = sample_log_gamma(rng, a);
  const double lb = sample_log_gamma(rng, b);
  // v = Ga / (Ga + Gb) = 1 / (1 + exp(lb - la))
  const double v = 1.0 / (1.0 + std::exp(lb - la));
  constexpr double lo = std::numeric_limits<double>::min();
  constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
  return std::clamp(v, lo, hi);
}

int sample_binomial(Rng& rng, int trials, double p) {
  if (trials < 0) throw DomainError("binomial trials must be nonnegative");
  if (trials == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return trials;
  std::binomial_distribution<int> dist(trials, p);
  return dist(rng);
}

std::size_t sample_log_discrete(Rng& rng, std::span<const double> log_weights) {
  if (log_weights.empty()) throw NumericalError("empty discrete support");
  const double norm = log_sum_exp(log_weights);
  if (!std::isfinite(norm)) throw NumericalError("discrete law has no finite mass");
  const double u = sample_uniform(rng);
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    if (std::isnan(log_weights[i])) throw NumericalError("NaN in discrete law");
    const double p = std::exp(log_weights[i] - norm);
    if (p > 0.0) last_positive = i;
    cum += p;
    if (u < cum) return i;
  }
  // Rounding left the cumulative sum just below u.
  return last_positive;
}

}  // namespace diffdp
