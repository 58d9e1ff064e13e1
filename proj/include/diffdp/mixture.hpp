#pragma once

#include <cstddef>

#include "diffdp/dataset.hpp"
#include "diffdp/measure.hpp"
#include "diffdp/random.hpp"

namespace diffdp {

// Gaussian kernel N(y | mean, 1 / precision).
struct KernelParam {
  double mean = 0.0;
  double precision = 1.0;
};

// Normal-gamma centering measure:
//   mean | precision ~ N(mean0, 1 / (precision_scale * precision))
//   precision ~ Gamma(shape, rate)
struct CenteringMeasure {
  double mean0 = 0.0;
  double precision_scale = 1e-3;
  double shape = 10.0;
  double rate = 1.0;

  void validate() const;
  KernelParam sample(Rng& rng) const;
  double log_density(const KernelParam& x) const;
};

// Conjugate update of the centering measure given observations assigned to
// one kernel; an empty span returns the prior unchanged.
CenteringMeasure normal_gamma_posterior(const CenteringMeasure& prior, std::span<const double> ys);

using MixtureState = MeasureState<KernelParam>;

double kernel_eval(double y, const KernelParam& x);
double log_kernel_eval(double y, const KernelParam& x);

// sum_{j<=m} w_j(t_i) K(y | x_j) divided by 1 - deficit, so the result is a
// proper density in y. density_eval_raw skips the renormalization.
double density_eval(const MixtureState& state, std::size_t time_index, double y);
double density_eval_raw(const MixtureState& state, std::size_t time_index, double y);

// First moment of the renormalized mixture at t_i.
double mean_functional(const MixtureState& state, std::size_t time_index);

// Toy design: equally spaced times on [0, t_max], per_time draws from
// N(cos(2t) + t/2, 1/10) at each.
TimeGridDataset simulate_toy(int n_times, int per_time, double t_max, Rng& rng);
double toy_mean(double t);
double toy_density(double t, double y);
inline constexpr double kToyVariance = 0.1;

}  // namespace diffdp
