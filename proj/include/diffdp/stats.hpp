#pragma once

#include <functional>
#include <span>
#include <vector>

namespace diffdp {

// Kolmogorov–Smirnov statistics. Inputs need not be sorted.
double ks_statistic(std::span<const double> x, std::span<const double> y);
double ks_statistic(std::span<const double> x, const std::function<double(double)>& cdf);

// Asymptotic Kolmogorov tail probability with Stephens' finite-sample
// correction; `effective_n` is n for one sample and n*m/(n+m) for two.
double ks_pvalue(double statistic, double effective_n);
double ks_two_sample_pvalue(std::span<const double> x, std::span<const double> y);

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double pvalue = 1.0;
};

// Goodness of fit of observed counts to expected probabilities. Cells with an
// expected count below `min_expected` are pooled into their neighbour.
ChiSquareResult chi_square_gof(std::span<const long> observed, std::span<const double> probs,
                               double min_expected = 5.0);

// 0.5 * sum |p - q|
double total_variation(std::span<const double> p, std::span<const double> q);

// Pearson correlation.
double correlation(std::span<const double> x, std::span<const double> y);

}  // namespace diffdp
