#include "diffdp/measure.hpp"

#include <cmath>
#include <string>

namespace diffdp {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

}  // namespace

StickConfig StickConfig::dirichlet(double theta, double c) {
  StickConfig cfg;
  cfg.kind = DirichletSticks{theta};
  cfg.c = c;
  return cfg;
}

StickConfig StickConfig::pitman_yor(double theta, double sigma, double c) {
  StickConfig cfg;
  cfg.kind = PitmanYorSticks{theta, sigma};
  cfg.c = c;
  return cfg;
}

std::size_t StickConfig::max_sticks() const {
  std::size_t limit = std::numeric_limits<std::size_t>::max();
  if (const auto* gem = std::get_if<GeneralGemSticks>(&kind)) limit = gem->shapes.size();
  if (time_scale == TimeScaleMode::PerStick) limit = std::min(limit, per_stick_c.size());
  return limit;
}

WFParams StickConfig::params(std::size_t j) const {
  if (j == 0 || j > max_sticks())
    throw ConfigError("stick index " + std::to_string(j) + " outside the configured range");
  WFParams p = std::visit(
      Overloaded{
          [](const DirichletSticks& d) { return WFParams{1.0, d.theta, 0.0}; },
          [j](const PitmanYorSticks& py) {
            return WFParams{1.0 - py.sigma, py.theta + static_cast<double>(j) * py.sigma, 0.0};
          },
          [j](const GeneralGemSticks& g) {
            return WFParams{g.shapes[j - 1].first, g.shapes[j - 1].second, 0.0};
          }},
      kind);
  switch (time_scale) {
    case TimeScaleMode::Shared: p.c = c; break;
    case TimeScaleMode::PerStick: p.c = per_stick_c[j - 1]; break;
    case TimeScaleMode::Tied: p.c = 0.5 * (p.a + p.b - 1.0); break;
  }
  p.validate();
  return p;
}

bool StickConfig::has_theta() const { return !std::holds_alternative<GeneralGemSticks>(kind); }

double StickConfig::theta() const {
  if (const auto* d = std::get_if<DirichletSticks>(&kind)) return d->theta;
  if (const auto* py = std::get_if<PitmanYorSticks>(&kind)) return py->theta;
  throw ConfigError("general GEM sticks carry no concentration parameter");
}

StickConfig StickConfig::with_hyper(double theta, double rate) const {
  StickConfig out = *this;
  if (auto* d = std::get_if<DirichletSticks>(&out.kind)) d->theta = theta;
  if (auto* py = std::get_if<PitmanYorSticks>(&out.kind)) py->theta = theta;
  out.c = rate;
  return out;
}

void StickConfig::validate() const {
  if (const auto* d = std::get_if<DirichletSticks>(&kind)) {
    if (!(d->theta > 0.0)) throw ConfigError("Dirichlet sticks need theta > 0");
  } else if (const auto* py = std::get_if<PitmanYorSticks>(&kind)) {
    if (!(py->sigma >= 0.0 && py->sigma < 1.0))
      throw ConfigError("Pitman-Yor sticks need sigma in [0,1)");
    if (!(py->theta > -py->sigma)) throw ConfigError("Pitman-Yor sticks need theta > -sigma");
  } else {
    const auto& g = std::get<GeneralGemSticks>(kind);
    if (g.shapes.empty()) throw ConfigError("general GEM sticks need at least one (a, b) pair");
  }
  if (time_scale == TimeScaleMode::Shared && !(c > 0.0))
    throw ConfigError("time-scale rate c must be positive");
  if (time_scale == TimeScaleMode::PerStick && per_stick_c.empty())
    throw ConfigError("per-stick time scales requested but none given");
  // a_j + b_j > 1 is checked stick by stick. For Dirichlet and Pitman–Yor the
  // sum a_j + b_j is nondecreasing in j, so the first stick decides.
  if (has_theta()) {
    params(1);
  } else {
    for (std::size_t j = 1; j <= max_sticks(); ++j) params(j);
  }
}

std::optional<std::string> StickConfig::divergence_warning() const {
  const auto* g = std::get_if<GeneralGemSticks>(&kind);
  if (g == nullptr || g->shapes.size() < 4) return std::nullopt;
  const std::size_t n = g->shapes.size();
  // j * log(1 + a_j / b_j) decreasing over the second half of the prefix
  // suggests a summable series.
  bool decreasing = true;
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t j = n / 2; j < n; ++j) {
    const auto [a, b] = g->shapes[j];
    const double scaled = static_cast<double>(j + 1) * std::log1p(a / b);
    if (!(scaled < prev)) decreasing = false;
    prev = scaled;
  }
  if (!decreasing) return std::nullopt;
  return "stick increments log(1 + a_j/b_j) decay faster than 1/j on the given prefix; the "
         "weights may not sum to one";
}

StickWeights sticks_to_weights(std::span<const double> sticks) {
  StickWeights out;
  out.weights.reserve(sticks.size());
  double remaining = 1.0;
  for (std::size_t j = 0; j < sticks.size(); ++j) {
    const double v = sticks[j];
    const bool terminal = j + 1 == sticks.size() && v == 1.0;
    if (!(v > 0.0 && v < 1.0) && !terminal) throw DomainError("stick value outside (0,1)");
    out.weights.push_back(v * remaining);
    remaining *= 1.0 - v;
  }
  out.deficit = remaining;
  return out;
}

StickValues weights_to_sticks(std::span<const double> weights) {
  StickValues out;
  out.sticks.reserve(weights.size());
  double used = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double w = weights[i];
    if (!(w >= 0.0)) throw DomainError("negative weight");
    const double remaining = 1.0 - used;
    if (!(remaining > 0.0))
      throw DomainError("weights exhaust the unit mass before entry " + std::to_string(i + 1));
    double v = w / remaining;
    if (v > 1.0) {
      if (v > 1.0 + 1e-12) throw DomainError("weights sum above one");
      v = 1.0;
    }
    if (v == 0.0 || v == 1.0) out.boundary = true;
    out.sticks.push_back(v);
    used += w;
  }
  return out;
}

double acf_from_stick_correlation(double theta, double rho) {
  if (!(theta > 0.0)) throw DomainError("theta must be positive");
  const double c1 = 1.0 / ((1.0 + theta) * (1.0 + theta));
  const double c2 = theta / ((1.0 + theta) * (1.0 + theta) * (2.0 + theta));
  // E[v v'] = c1 + c2 rho, E[(1-v)(1-v')] = c1 theta^2 + c2 rho
  const double k = (c1 + c2 * rho) / (1.0 - c1 * theta * theta - c2 * rho);
  return (1.0 + theta) * k;
}

double acf_k(double theta, double s) {
  if (!(theta > 0.0)) throw DomainError("theta must be positive");
  if (!(s >= 0.0)) throw DomainError("lag must be nonnegative");
  const double e = std::exp(-0.5 * (1.0 + theta) * s);
  return ((2.0 + theta) + theta * e) / ((2.0 + theta) * (1.0 + 2.0 * theta) - theta * e);
}

double theoretical_acf(double theta, double s) {
  if (!(theta > 0.0)) throw DomainError("theta must be positive");
  if (!(s >= 0.0)) throw DomainError("lag must be nonnegative");
  const double e = std::exp(-0.5 * (1.0 + theta) * s);
  return (1.0 + theta) * ((2.0 + theta) + theta * e) /
         ((2.0 + theta) * (1.0 + 2.0 * theta) - theta * e);
}

}  // namespace diffdp
