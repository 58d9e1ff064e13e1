#pragma once

#include <limits>
#include <span>
#include <vector>

namespace diffdp {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(sum(exp(x))) with max-shifting; returns -inf for an empty span or
// all -inf input.
double log_sum_exp(std::span<const double> x);
double log_add_exp(double a, double b);

// log(1 - exp(-x)) for x > 0, accurate near 0 and for large x.
double log1m_exp_neg(double x);

double log_beta_fn(double a, double b);
double log_beta_pdf(double x, double a, double b);
double log_binomial_coef(int n, int k);
// log Bin(k | n, p), with the p in {0,1} edge cases handled exactly.
double log_binomial_pmf(int k, int n, double p);
// log of the rising factorial (x)_n = Gamma(x + n) / Gamma(x).
double log_pochhammer(double x, double n);

double log_gamma_pdf(double x, double shape, double rate);
double normal_pdf(double y, double mean, double precision);
double log_normal_pdf(double y, double mean, double precision);

// Empirical quantile by linear interpolation between order statistics
// (Hyndman–Fan type 7). `sorted` must be ascending and nonempty.
double sorted_quantile(std::span<const double> sorted, double prob);

double mean_of(std::span<const double> x);
// Unbiased sample variance (n - 1 denominator).
double variance_of(std::span<const double> x);

}  // namespace diffdp
