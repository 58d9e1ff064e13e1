#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "diffdp/error.hpp"
#include "diffdp/random.hpp"
#include "diffdp/wf_core.hpp"

namespace diffdp {

// Stick laws. Stick j (1-based) follows WF(a_j, b_j):
//   Dirichlet:   a_j = 1,         b_j = theta
//   Pitman–Yor:  a_j = 1 - sigma, b_j = theta + j * sigma
//   General GEM: explicit (a_j, b_j) list
struct DirichletSticks {
  double theta = 1.0;
};
struct PitmanYorSticks {
  double theta = 1.0;
  double sigma = 0.0;
};
struct GeneralGemSticks {
  std::vector<std::pair<double, double>> shapes;
};
using StickKind = std::variant<DirichletSticks, PitmanYorSticks, GeneralGemSticks>;

enum class TimeScaleMode {
  Shared,    // one rate c for every stick
  PerStick,  // fixed per-stick rates
  Tied,      // c_j = (a_j + b_j - 1) / 2, the standard diffusion clock
};

struct StickConfig {
  StickKind kind = DirichletSticks{};
  TimeScaleMode time_scale = TimeScaleMode::Shared;
  double c = 0.5;
  std::vector<double> per_stick_c;

  static StickConfig dirichlet(double theta, double c);
  static StickConfig pitman_yor(double theta, double sigma, double c);

  // Parameters of stick j >= 1. ConfigError if j exceeds max_sticks() or the
  // implied triple violates WFParams::validate().
  WFParams params(std::size_t j) const;
  std::size_t max_sticks() const;

  bool has_theta() const;
  double theta() const;
  // Copy with concentration theta (ignored for General GEM) and shared rate c.
  StickConfig with_hyper(double theta, double c) const;

  void validate() const;
  // Heuristic check that sum_j log(1 + a_j / b_j) keeps growing on the listed
  // prefix; returns a message when the increments shrink faster than 1/j.
  std::optional<std::string> divergence_warning() const;
};

struct StickWeights {
  std::vector<double> weights;
  double deficit = 1.0;  // prod_j (1 - v_j)
};

// w_1 = v_1, w_i = v_i prod_{j<i}(1 - v_j). DomainError for entries outside
// (0,1), except that the last entry may be exactly 1 (a finite stick-breaking
// measure, deficit 0).
StickWeights sticks_to_weights(std::span<const double> sticks);

struct StickValues {
  std::vector<double> sticks;
  bool boundary = false;  // some stick is exactly 0 or 1
};

// Inverse map v_i = w_i / (1 - sum_{k<i} w_k). DomainError when the remaining
// mass is exhausted before the last entry. Relative accuracy degrades once the
// remaining mass approaches rounding level.
StickValues weights_to_sticks(std::span<const double> weights);

// Truncated diffusive random measure: fixed atoms, stick values at each time.
template <class Atom>
struct MeasureState {
  std::vector<double> times;
  std::vector<Atom> atoms;                  // x_1 .. x_m
  std::vector<std::vector<double>> sticks;  // sticks[j][i] = v_{j+1}(t_i)

  std::size_t truncation() const { return atoms.size(); }
  std::size_t num_times() const { return times.size(); }

  std::vector<double> sticks_at(std::size_t i) const {
    std::vector<double> out;
    out.reserve(sticks.size());
    for (const auto& row : sticks) out.push_back(row.at(i));
    return out;
  }
  StickWeights weights_at(std::size_t i) const {
    const auto v = sticks_at(i);
    return sticks_to_weights(v);
  }
};

inline constexpr double kDefaultTruncTol = 1e-4;
inline constexpr std::size_t kMarginalStickCap = 1000000;

// Single-time draw: sticks v_j ~ Beta(a_j, b_j), atoms ~ G, added until the
// weight deficit falls below trunc_tol.
template <class Atom>
MeasureState<Atom> sample_marginal(const StickConfig& config,
                                   const std::function<Atom(Rng&)>& atom_sampler,
                                   double trunc_tol, Rng& rng, double time = 0.0) {
  if (!(trunc_tol > 0.0 && trunc_tol < 1.0)) throw DomainError("trunc_tol must lie in (0,1)");
  config.validate();
  MeasureState<Atom> state;
  state.times = {time};
  double deficit = 1.0;
  const std::size_t cap = std::min(config.max_sticks(), kMarginalStickCap);
  std::size_t j = 0;
  while (deficit >= trunc_tol) {
    if (j >= cap)
      throw TruncationError("sample_marginal: deficit " + std::to_string(deficit) +
                            " still above tolerance after " + std::to_string(j) + " sticks");
    ++j;
    const WFParams p = config.params(j);
    const double v = sample_beta(rng, p.a, p.b);
    state.sticks.push_back({v});
    state.atoms.push_back(atom_sampler(rng));
    deficit *= 1.0 - v;
  }
  return state;
}

// Advance the last time slice by dt: each stick moves by an exact transition
// draw, atoms stay fixed. Returns a single-time state at t_last + dt.
template <class Atom>
MeasureState<Atom> evolve(const MeasureState<Atom>& state, const StickConfig& config, double dt,
                          Rng& rng) {
  if (!(dt > 0.0)) throw DomainError("evolve: dt must be positive");
  if (state.times.empty()) throw DomainError("evolve: state has no time slice");
  const std::size_t last = state.times.size() - 1;
  MeasureState<Atom> out;
  out.times = {state.times[last] + dt};
  out.atoms = state.atoms;
  out.sticks.reserve(state.sticks.size());
  for (std::size_t j = 0; j < state.sticks.size(); ++j) {
    const WFParams p = config.params(j + 1);
    out.sticks.push_back({sample_transition(state.sticks[j][last], dt, p, rng)});
  }
  return out;
}

// P_t(A) on the truncated measure; the true value lies in [value, value + deficit].
struct MeasureValue {
  double value = 0.0;
  double deficit = 0.0;
};

template <class Atom>
MeasureValue measure_eval(const MeasureState<Atom>& state, std::size_t time_index,
                          const std::function<bool(const Atom&)>& in_set) {
  if (time_index >= state.times.size()) throw DomainError("measure_eval: time index out of range");
  const auto w = state.weights_at(time_index);
  MeasureValue out{0.0, w.deficit};
  for (std::size_t j = 0; j < w.weights.size(); ++j)
    if (in_set(state.atoms[j])) out.value += w.weights[j];
  return out;
}

// Closed-form autocorrelation of P_t(A) for the diffusive Dirichlet process
// with stick correlation e^{-lambda s}, lambda = (1 + theta) / 2.
double theoretical_acf(double theta, double s);
// k_s = sum_i E[w_i(t) w_i(t+s)]; Corr = (1 + theta) k_s.
double acf_k(double theta, double s);
// Same identity for an arbitrary stick correlation rho = Corr(v(t), v(t+s)).
double acf_from_stick_correlation(double theta, double rho);

}  // namespace diffdp
