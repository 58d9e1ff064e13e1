#include "diffdp/mixture.hpp"

#include <cmath>

#include "diffdp/error.hpp"
#include "diffdp/numerics.hpp"

namespace diffdp {

void CenteringMeasure::validate() const {
  if (!(precision_scale > 0.0) || !(shape > 0.0) || !(rate > 0.0) || !std::isfinite(mean0))
    throw ConfigError("centering measure needs positive precision_scale, shape and rate");
}

KernelParam CenteringMeasure::sample(Rng& rng) const {
  const double precision = sample_gamma(rng, shape, rate);
  const double mean = sample_normal(rng, mean0, 1.0 / std::sqrt(precision_scale * precision));
  return {mean, precision};
}

double CenteringMeasure::log_density(const KernelParam& x) const {
  return log_gamma_pdf(x.precision, shape, rate) +
         log_normal_pdf(x.mean, mean0, precision_scale * x.precision);
}

CenteringMeasure normal_gamma_posterior(const CenteringMeasure& prior, std::span<const double> ys) {
  if (ys.empty()) return prior;
  const double n = static_cast<double>(ys.size());
  double ybar = 0.0;
  for (double y : ys) ybar += y;
  ybar /= n;
  double ss = 0.0;
  for (double y : ys) ss += (y - ybar) * (y - ybar);
  CenteringMeasure post;
  post.precision_scale = prior.precision_scale + n;
  post.mean0 = (prior.precision_scale * prior.mean0 + n * ybar) / post.precision_scale;
  post.shape = prior.shape + 0.5 * n;
  const double dev = ybar - prior.mean0;
  post.rate = prior.rate + 0.5 * ss + 0.5 * prior.precision_scale * n * dev * dev / post.precision_scale;
  return post;
}

double kernel_eval(double y, const KernelParam& x) { return normal_pdf(y, x.mean, x.precision); }

double log_kernel_eval(double y, const KernelParam& x) {
  return log_normal_pdf(y, x.mean, x.precision);
}

double density_eval_raw(const MixtureState& state, std::size_t time_index, double y) {
  if (time_index >= state.num_times()) throw DomainError("density_eval: time index out of range");
  const auto w = state.weights_at(time_index);
  double f = 0.0;
  for (std::size_t j = 0; j < w.weights.size(); ++j) f += w.weights[j] * kernel_eval(y, state.atoms[j]);
  return f;
}

double density_eval(const MixtureState& state, std::size_t time_index, double y) {
  if (time_index >= state.num_times()) throw DomainError("density_eval: time index out of range");
  const auto w = state.weights_at(time_index);
  double f = 0.0;
  for (std::size_t j = 0; j < w.weights.size(); ++j) f += w.weights[j] * kernel_eval(y, state.atoms[j]);
  return f / (1.0 - w.deficit);
}

double mean_functional(const MixtureState& state, std::size_t time_index) {
  if (time_index >= state.num_times()) throw DomainError("mean_functional: time index out of range");
  const auto w = state.weights_at(time_index);
  double acc = 0.0;
  for (std::size_t j = 0; j < w.weights.size(); ++j) acc += w.weights[j] * state.atoms[j].mean;
  return acc / (1.0 - w.deficit);
}

double toy_mean(double t) { return std::cos(2.0 * t) + 0.5 * t; }

double toy_density(double t, double y) { return normal_pdf(y, toy_mean(t), 1.0 / kToyVariance); }

TimeGridDataset simulate_toy(int n_times, int per_time, double t_max, Rng& rng) {
  if (n_times < 1 || per_time < 1) throw ConfigError("simulate_toy needs n_times, per_time >= 1");
  if (n_times > 1 && !(t_max > 0.0)) throw ConfigError("simulate_toy needs t_max > 0");
  TimeGridDataset data;
  const double sd = std::sqrt(kToyVariance);
  for (int i = 0; i < n_times; ++i) {
    const double t = n_times == 1 ? 0.0 : t_max * i / (n_times - 1);
    data.times.push_back(t);
    auto& group = data.values.emplace_back();
    for (int r = 0; r < per_time; ++r) group.push_back(sample_normal(rng, toy_mean(t), sd));
  }
  return data;
}

}  // namespace diffdp
