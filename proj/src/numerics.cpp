#include "diffdp/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "diffdp/error.hpp"

namespace diffdp {

double log_sum_exp(std::span<const double> x) {
  if (x.empty()) return kNegInf;
  const double mx = *std::max_element(x.begin(), x.end());
  if (mx == kNegInf) return kNegInf;
  if (!std::isfinite(mx)) return mx;
  double acc = 0.0;
  for (double v : x) acc += std::exp(v - mx);
  return mx + std::log(acc);
}

double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double mx = std::max(a, b);
  return mx + std::log1p(std::exp(-std::abs(a - b)));
}

double log1m_exp_neg(double x) {
  if (!(x > 0.0)) throw DomainError("log1m_exp_neg requires x > 0");
  return x < std::numbers::ln2 ? std::log(-std::expm1(-x)) : std::log1p(-std::exp(-x));
}

double log_beta_fn(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double log_beta_pdf(double x, double a, double b) {
  if (x < 0.0 || x > 1.0) return kNegInf;
  double out = -log_beta_fn(a, b);
  if (a != 1.0) out += (a - 1.0) * std::log(x);
  if (b != 1.0) out += (b - 1.0) * std::log1p(-x);
  return out;
}

double log_binomial_coef(int n, int k) {
  if (k < 0 || k > n) return kNegInf;
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double log_binomial_pmf(int k, int n, double p) {
  if (k < 0 || k > n) return kNegInf;
  if (p <= 0.0) return k == 0 ? 0.0 : kNegInf;
  if (p >= 1.0) return k == n ? 0.0 : kNegInf;
  return log_binomial_coef(n, k) + k * std::log(p) + (n - k) * std::log1p(-p);
}

double log_pochhammer(double x, double n) {
  return std::lgamma(x + n) - std::lgamma(x);
}

double log_gamma_pdf(double x, double shape, double rate) {
  if (!(x > 0.0)) return kNegInf;
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

double normal_pdf(double y, double mean, double precision) {
  return std::exp(log_normal_pdf(y, mean, precision));
}

double log_normal_pdf(double y, double mean, double precision) {
  const double d = y - mean;
  return 0.5 * (std::log(precision) - std::log(2.0 * std::numbers::pi)) - 0.5 * precision * d * d;
}

double sorted_quantile(std::span<const double> sorted, double prob) {
  if (sorted.empty()) throw DomainError("quantile of empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(prob, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double mean_of(std::span<const double> x) {
  if (x.empty()) throw DomainError("mean of empty sample");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double variance_of(std::span<const double> x) {
  if (x.size() < 2) throw DomainError("variance needs at least two values");
  const double mu = mean_of(x);
  double s = 0.0;
  for (double v : x) s += (v - mu) * (v - mu);
  return s / static_cast<double>(x.size() - 1);
}

}  // namespace diffdp
