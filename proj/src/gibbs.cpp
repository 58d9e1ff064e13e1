#include "diffdp/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "diffdp/error.hpp"
#include "diffdp/numerics.hpp"

namespace diffdp {

namespace {

int component_cap(const SamplerConfig& cfg) {
  const std::size_t law_cap = cfg.stick_config.max_sticks();
  return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(cfg.m_cap), law_cap));
}

bool clamped(const SamplerConfig& cfg) { return cfg.truncation == TruncationPolicy::Clamp; }

void check_gamma_prior(const GammaPrior& g, const char* name) {
  if (!(g.shape > 0.0 && g.rate > 0.0))
    throw ConfigError(std::string(name) + " prior needs positive shape and rate");
}

// Largest d with g(d) > o, i.e. -eta' d > log_o.
int trans_support_max(double log_o, double eta) {
  int d = static_cast<int>(std::ceil(-log_o / eta)) - 1;
  if (d < 0) d = 0;
  while (-eta * (d + 1) > log_o) ++d;
  while (d >= 0 && !(-eta * d > log_o)) --d;
  return d;
}

TransitionAug prior_transition(double v_prev, double tau, const WFParams& p, double eta,
                               Rng& rng) {
  TransitionAug aug;
  aug.d = sample_series_index(tau, p, rng);
  aug.k = sample_binomial(rng, aug.d, v_prev);
  aug.log_o = -eta * aug.d + std::log(sample_uniform(rng));
  return aug;
}

// Appends component j = state.m + 1 with its stick path, latents and atom
// drawn from the prior.
void append_prior_component(ChainState& state, const ObservationIndex& index,
                            const SamplerConfig& cfg, Rng& rng) {
  const int j = state.m + 1;
  const std::size_t n = state.measure.times.size();
  std::vector<double> path(n);
  std::vector<TransitionAug> augs(n - 1);
  if (is_terminal_stick(state, cfg, j)) {
    std::fill(path.begin(), path.end(), 1.0);
    for (auto& aug : augs) aug = TransitionAug{std::log(sample_uniform(rng)), 0, 0};
  } else {
    const WFParams p = effective_sticks(state, cfg).params(static_cast<std::size_t>(j));
    path[0] = sample_beta(rng, p.a, p.b);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      augs[i] = prior_transition(path[i], index.tau[i], p, cfg.trans_slice_eta, rng);
      path[i + 1] = sample_beta(rng, p.a + augs[i].k, p.b + augs[i].d - augs[i].k);
    }
  }
  state.measure.sticks.push_back(std::move(path));
  state.trans_aug.push_back(std::move(augs));
  state.measure.atoms.push_back(cfg.centering.sample(rng));
  state.m = j;
}

void resize_components(ChainState& state, int target, const ObservationIndex& index,
                       const SamplerConfig& cfg, Rng& rng) {
  while (state.m < target) append_prior_component(state, index, cfg, rng);
  if (state.m > target) {
    state.measure.sticks.resize(static_cast<std::size_t>(target));
    state.trans_aug.resize(static_cast<std::size_t>(target));
    state.measure.atoms.resize(static_cast<std::size_t>(target));
    state.m = target;
  }
}

int truncation_from_slices(const ChainState& state, const SamplerConfig& cfg) {
  int m = 1;
  for (double u : state.u) m = std::max(m, slice_psi_inverse_floor(cfg.slice_eta, u));
  const int cap = component_cap(cfg);
  if (m > cap) {
    if (clamped(cfg)) return cap;
    throw TruncationError("slice variables require " + std::to_string(m) +
                          " components, above the cap of " + std::to_string(cap));
  }
  return m;
}

double draw_slice(int s, double eta, Rng& rng) {
  const double psi = slice_psi(eta, s);
  double u = psi * sample_uniform(rng);
  while (!(u < psi)) u = psi * sample_uniform(rng);
  return u;
}

// log w_j(t_i) for j = 1..m at one time.
std::vector<double> log_weights_at(const ChainState& state, std::size_t i) {
  std::vector<double> lw(static_cast<std::size_t>(state.m));
  double log_rem = 0.0;
  for (int j = 0; j < state.m; ++j) {
    const double v = state.measure.sticks[j][i];
    lw[j] = std::log(v) + log_rem;
    log_rem += std::log1p(-v);
  }
  return lw;
}

void mh_step(MhTuning& tuning, double& value, double& current_lp, bool adapt, double target,
             const std::function<double(double)>& log_target, Rng& rng) {
  const double proposal = value * std::exp(std::exp(tuning.log_scale) * sample_normal(rng, 0.0, 1.0));
  const double lp = log_target(proposal);
  const double log_alpha = lp - current_lp + std::log(proposal) - std::log(value);
  const bool accept = std::isfinite(lp) && std::log(sample_uniform(rng)) < log_alpha;
  ++tuning.proposals;
  if (accept) {
    ++tuning.accepted;
    value = proposal;
    current_lp = lp;
  }
  if (adapt) {
    ++tuning.adapt_steps;
    const double gain = 1.0 / std::sqrt(static_cast<double>(tuning.adapt_steps));
    tuning.log_scale += gain * ((accept ? 1.0 : 0.0) - target);
  }
}

}  // namespace

void SamplerConfig::validate() const {
  stick_config.validate();
  centering.validate();
  if (!(slice_eta > 0.0 && slice_eta < 1.0)) throw ConfigError("slice_eta must lie in (0,1)");
  if (!(trans_slice_eta > 0.0 && trans_slice_eta < 1.0))
    throw ConfigError("trans_slice_eta must lie in (0,1)");
  if (iters < 1) throw ConfigError("iters must be at least 1");
  if (burn_in < 0) throw ConfigError("burn_in must be nonnegative");
  if (!(burn_in < iters)) throw ConfigError("burn_in must be smaller than iters");
  if (thin < 1) throw ConfigError("thin must be at least 1");
  if (m_cap < 1) throw ConfigError("m_cap must be at least 1");
  check_gamma_prior(theta_prior, "theta");
  check_gamma_prior(c_prior, "c");
  if (fix_theta && !(*fix_theta > 0.0)) throw ConfigError("fixed theta must be positive");
  if (fix_c && !(*fix_c > 0.0)) throw ConfigError("fixed c must be positive");
  if (fix_theta && !stick_config.has_theta())
    throw ConfigError("fix_theta given for a stick law without theta");
  if (!(target_acceptance > 0.0 && target_acceptance < 1.0))
    throw ConfigError("target acceptance must lie in (0,1)");
}

bool SamplerConfig::samples_theta() const { return !fix_theta && stick_config.has_theta(); }
bool SamplerConfig::samples_c() const {
  return !fix_c && stick_config.time_scale == TimeScaleMode::Shared;
}

double slice_psi(double eta, int s) { return std::exp(-eta * s); }

int slice_psi_inverse_floor(double eta, double u) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("slice variable outside (0,1)");
  int s = static_cast<int>(std::floor(-std::log(u) / eta));
  while (slice_psi(eta, s + 1) > u) ++s;
  while (s > 0 && !(slice_psi(eta, s) > u)) --s;
  return s;
}

double MhTuning::acceptance_rate() const {
  return proposals == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposals);
}

ObservationIndex::ObservationIndex(const TimeGridDataset& data) {
  for (std::size_t i = 0; i < data.times.size(); ++i) {
    for (double y_val : data.values[i]) {
      time_of.push_back(i);
      y.push_back(y_val);
    }
    if (i + 1 < data.times.size()) tau.push_back(data.times[i + 1] - data.times[i]);
  }
}

StickConfig effective_sticks(const ChainState& state, const SamplerConfig& cfg) {
  return cfg.stick_config.with_hyper(state.theta, state.c);
}

bool is_terminal_stick(const ChainState&, const SamplerConfig& cfg, int j) {
  return clamped(cfg) && j == component_cap(cfg);
}

ChainState init_chain(const TimeGridDataset& data, const SamplerConfig& cfg, Rng& rng) {
  cfg.validate();
  data.validate();
  const ObservationIndex index(data);
  ChainState state;
  state.measure.times = data.times;

  if (cfg.stick_config.has_theta())
    state.theta = cfg.fix_theta ? *cfg.fix_theta
                  : cfg.samples_theta()
                      ? sample_gamma(rng, cfg.theta_prior.shape, cfg.theta_prior.rate)
                      : cfg.stick_config.theta();
  if (cfg.stick_config.time_scale == TimeScaleMode::Shared)
    state.c = cfg.fix_c ? *cfg.fix_c : sample_gamma(rng, cfg.c_prior.shape, cfg.c_prior.rate);
  else
    state.c = cfg.stick_config.c;

  const std::size_t n_obs = index.y.size();
  const int m0 = std::min(
      std::max(10, static_cast<int>(std::ceil(std::log(static_cast<double>(n_obs))))),
      component_cap(cfg));

  state.s.resize(n_obs);
  for (auto& s : state.s) s = 1 + static_cast<int>(std::floor(sample_uniform(rng) * m0));

  const StickConfig sticks = effective_sticks(state, cfg);
  const std::size_t n = data.times.size();
  for (int j = 1; j <= m0; ++j) {
    std::vector<double> path(n);
    std::vector<TransitionAug> augs(n - 1);
    if (is_terminal_stick(state, cfg, j)) {
      std::fill(path.begin(), path.end(), 1.0);
      for (auto& aug : augs) aug = TransitionAug{std::log(sample_uniform(rng)), 0, 0};
    } else {
      const WFParams p = sticks.params(static_cast<std::size_t>(j));
      for (auto& v : path) v = sample_beta(rng, p.a, p.b);
      for (std::size_t i = 0; i + 1 < n; ++i)
        augs[i] = prior_transition(path[i], index.tau[i], p, cfg.trans_slice_eta, rng);
    }
    state.measure.sticks.push_back(std::move(path));
    state.trans_aug.push_back(std::move(augs));
  }
  for (int j = 0; j < m0; ++j) state.measure.atoms.push_back(cfg.centering.sample(rng));
  state.m = m0;

  state.u.resize(n_obs);
  for (std::size_t o = 0; o < n_obs; ++o) state.u[o] = draw_slice(state.s[o], cfg.slice_eta, rng);
  resize_components(state, truncation_from_slices(state, cfg), index, cfg, rng);
  return state;
}

void update_slice_and_truncation(ChainState& state, const TimeGridDataset& data,
                                 const SamplerConfig& cfg, Rng& rng) {
  const ObservationIndex index(data);
  for (std::size_t o = 0; o < state.u.size(); ++o)
    state.u[o] = draw_slice(state.s[o], cfg.slice_eta, rng);
  resize_components(state, truncation_from_slices(state, cfg), index, cfg, rng);
}

void update_membership(ChainState& state, const TimeGridDataset& data, const SamplerConfig& cfg,
                       Rng& rng) {
  const ObservationIndex index(data);
  std::vector<std::vector<double>> log_w(data.times.size());
  for (std::size_t i = 0; i < data.times.size(); ++i) log_w[i] = log_weights_at(state, i);

  std::vector<double> masses;
  for (std::size_t o = 0; o < index.y.size(); ++o) {
    const std::size_t i = index.time_of[o];
    auto fill = [&] {
      const int cand = std::min(slice_psi_inverse_floor(cfg.slice_eta, state.u[o]), state.m);
      masses.assign(static_cast<std::size_t>(cand), 0.0);
      for (int j = 0; j < cand; ++j)
        masses[j] = log_w[i][j] + cfg.slice_eta * (j + 1) +
                    log_kernel_eval(index.y[o], state.measure.atoms[j]);
    };
    fill();
    std::size_t pick = 0;
    try {
      pick = sample_log_discrete(rng, masses);
    } catch (const NumericalError&) {
      state.u[o] = draw_slice(state.s[o], cfg.slice_eta, rng);
      fill();
      try {
        pick = sample_log_discrete(rng, masses);
      } catch (const NumericalError&) {
        std::ostringstream msg;
        msg << "membership masses vanish for observation " << o << " (y=" << index.y[o]
            << ", t=" << data.times[i] << ", m=" << state.m << ", u=" << state.u[o] << ")";
        throw NumericalError(msg.str());
      }
    }
    state.s[o] = static_cast<int>(pick) + 1;
  }
}

void update_locations(ChainState& state, const TimeGridDataset& data, const SamplerConfig& cfg,
                      Rng& rng) {
  const ObservationIndex index(data);
  std::vector<std::vector<double>> members(static_cast<std::size_t>(state.m));
  for (std::size_t o = 0; o < index.y.size(); ++o) members[state.s[o] - 1].push_back(index.y[o]);
  for (int j = 0; j < state.m; ++j)
    state.measure.atoms[j] = normal_gamma_posterior(cfg.centering, members[j]).sample(rng);
}

std::vector<double> latent_k_log_masses(int d, double v_prev, double v_cur, const WFParams& p) {
  const double odds = std::log(v_prev) + std::log(v_cur) - std::log1p(-v_prev) - std::log1p(-v_cur);
  std::vector<double> out(static_cast<std::size_t>(d) + 1);
  for (int k = 0; k <= d; ++k)
    out[k] = log_binomial_coef(d, k) - std::lgamma(p.a + k) - std::lgamma(p.b + d - k) + k * odds;
  return out;
}

std::vector<double> latent_d_log_masses(int k, int d_max, double v_prev, double v_cur, double tau,
                                        const WFParams& p, double trans_eta) {
  const double slope = std::log1p(-v_prev) + std::log1p(-v_cur) - p.c * tau + trans_eta;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(std::max(0, d_max - k + 1)));
  for (int d = k; d <= d_max; ++d)
    out.push_back(2.0 * std::lgamma(p.a + p.b + d) - std::lgamma(p.b + d - k) -
                  std::lgamma(d - k + 1.0) + d * slope);
  return out;
}

void update_single_transition(TransitionAug& aug, double v_prev, double v_cur, double tau,
                              const WFParams& p, double trans_eta, Rng& rng) {
  aug.log_o = -trans_eta * aug.d + std::log(sample_uniform(rng));
  aug.k = static_cast<int>(sample_log_discrete(rng, latent_k_log_masses(aug.d, v_prev, v_cur, p)));
  const int d_max = trans_support_max(aug.log_o, trans_eta);
  if (d_max < aug.k)
    throw NumericalError("transition latent support is empty (k=" + std::to_string(aug.k) +
                         ", d_max=" + std::to_string(d_max) + ")");
  const auto masses = latent_d_log_masses(aug.k, d_max, v_prev, v_cur, tau, p, trans_eta);
  aug.d = aug.k + static_cast<int>(sample_log_discrete(rng, masses));
}

void update_transition_latents(ChainState& state, const TimeGridDataset& data,
                               const SamplerConfig& cfg, Rng& rng) {
  const ObservationIndex index(data);
  const StickConfig sticks = effective_sticks(state, cfg);
  for (int j = 1; j <= state.m; ++j) {
    if (is_terminal_stick(state, cfg, j)) continue;
    const WFParams p = sticks.params(static_cast<std::size_t>(j));
    const auto& path = state.measure.sticks[j - 1];
    auto& augs = state.trans_aug[j - 1];
    for (std::size_t i = 0; i < augs.size(); ++i)
      update_single_transition(augs[i], path[i], path[i + 1], index.tau[i], p,
                               cfg.trans_slice_eta, rng);
  }
}

namespace {

// eq[i][j]: observations at t_i in component j+1; gt[i][j]: beyond it.
struct MembershipCounts {
  std::vector<std::vector<int>> eq, gt;
};

MembershipCounts membership_counts(const ChainState& state, const TimeGridDataset& data) {
  const ObservationIndex index(data);
  const std::size_t n = data.times.size();
  const std::size_t m = static_cast<std::size_t>(state.m);
  MembershipCounts c{std::vector<std::vector<int>>(n, std::vector<int>(m, 0)),
                     std::vector<std::vector<int>>(n, std::vector<int>(m, 0))};
  for (std::size_t o = 0; o < index.y.size(); ++o) ++c.eq[index.time_of[o]][state.s[o] - 1];
  for (std::size_t i = 0; i < n; ++i) {
    int above = 0;
    for (std::size_t j = m; j-- > 0;) {
      c.gt[i][j] = above;
      above += c.eq[i][j];
    }
  }
  return c;
}

std::pair<double, double> stick_shapes(const ChainState& state, const MembershipCounts& counts,
                                       const WFParams& p, int j, std::size_t i) {
  const auto& augs = state.trans_aug[j - 1];
  double shape1 = p.a + counts.eq[i][j - 1];
  double shape2 = p.b + counts.gt[i][j - 1];
  if (i > 0) {
    shape1 += augs[i - 1].k;
    shape2 += augs[i - 1].d - augs[i - 1].k;
  }
  if (i < augs.size()) {
    shape1 += augs[i].k;
    shape2 += augs[i].d - augs[i].k;
  }
  return {shape1, shape2};
}

}  // namespace

std::pair<double, double> stick_conditional_shapes(const ChainState& state,
                                                   const TimeGridDataset& data,
                                                   const SamplerConfig& cfg, int j,
                                                   std::size_t i) {
  if (j < 1 || j > state.m || i >= data.times.size())
    throw DomainError("stick_conditional_shapes: index out of range");
  const WFParams p = effective_sticks(state, cfg).params(static_cast<std::size_t>(j));
  return stick_shapes(state, membership_counts(state, data), p, j, i);
}

void update_stick_values(ChainState& state, const TimeGridDataset& data, const SamplerConfig& cfg,
                         Rng& rng) {
  const MembershipCounts counts = membership_counts(state, data);
  const StickConfig sticks = effective_sticks(state, cfg);
  for (int j = 1; j <= state.m; ++j) {
    if (is_terminal_stick(state, cfg, j)) continue;
    const WFParams p = sticks.params(static_cast<std::size_t>(j));
    auto& path = state.measure.sticks[j - 1];
    for (std::size_t i = 0; i < path.size(); ++i) {
      const auto [shape1, shape2] = stick_shapes(state, counts, p, j, i);
      path[i] = sample_beta(rng, shape1, shape2);
    }
  }
}

double log_hyper_conditional(const ChainState& state, const TimeGridDataset& data,
                             const SamplerConfig& cfg, double theta, double c) {
  if (!(theta > 0.0 && c > 0.0)) return kNegInf;
  const ObservationIndex index(data);
  double lp = 0.0;
  if (cfg.samples_theta()) lp += log_gamma_pdf(theta, cfg.theta_prior.shape, cfg.theta_prior.rate);
  if (cfg.samples_c()) lp += log_gamma_pdf(c, cfg.c_prior.shape, cfg.c_prior.rate);
  const StickConfig sticks = cfg.stick_config.with_hyper(theta, c);
  for (int j = 1; j <= state.m; ++j) {
    if (is_terminal_stick(state, cfg, j)) continue;
    WFParams p;
    try {
      p = sticks.params(static_cast<std::size_t>(j));
    } catch (const ConfigError&) {
      return kNegInf;
    }
    const auto& path = state.measure.sticks[j - 1];
    const auto& augs = state.trans_aug[j - 1];
    lp += log_beta_pdf(path[0], p.a, p.b);
    for (std::size_t i = 0; i < augs.size(); ++i)
      lp += log_nb_weight(augs[i].d, index.tau[i], p) +
            log_beta_pdf(path[i + 1], p.a + augs[i].k, p.b + augs[i].d - augs[i].k);
  }
  return lp;
}

void update_hyperparams(ChainState& state, const TimeGridDataset& data, const SamplerConfig& cfg,
                        Rng& rng) {
  if (!cfg.samples_theta() && !cfg.samples_c()) return;
  double current = log_hyper_conditional(state, data, cfg, state.theta, state.c);
  if (!std::isfinite(current)) {
    std::ostringstream msg;
    msg << "non-finite hyperparameter log posterior at sweep " << state.sweep
        << " (theta=" << state.theta << ", c=" << state.c << ", m=" << state.m << ")";
    throw NumericalError(msg.str());
  }
  const bool adapt = state.sweep <= static_cast<std::uint64_t>(cfg.burn_in);
  if (cfg.samples_theta()) {
    const double c = state.c;
    mh_step(state.theta_mh, state.theta, current, adapt, cfg.target_acceptance,
            [&](double th) { return log_hyper_conditional(state, data, cfg, th, c); }, rng);
  }
  if (cfg.samples_c()) {
    const double theta = state.theta;
    mh_step(state.c_mh, state.c, current, adapt, cfg.target_acceptance,
            [&](double cc) { return log_hyper_conditional(state, data, cfg, theta, cc); }, rng);
  }
}

void gibbs_sweep(ChainState& state, const TimeGridDataset& data, const SamplerConfig& cfg,
                 Rng& rng) {
  ++state.sweep;
  update_slice_and_truncation(state, data, cfg, rng);
  update_transition_latents(state, data, cfg, rng);
  update_stick_values(state, data, cfg, rng);
  update_locations(state, data, cfg, rng);
  update_hyperparams(state, data, cfg, rng);
  update_membership(state, data, cfg, rng);
}

double log_likelihood(const ChainState& state, const TimeGridDataset& data) {
  const ObservationIndex index(data);
  std::vector<std::vector<double>> log_w(data.times.size());
  for (std::size_t i = 0; i < data.times.size(); ++i) log_w[i] = log_weights_at(state, i);
  double total = 0.0;
  std::vector<double> terms(static_cast<std::size_t>(state.m));
  for (std::size_t o = 0; o < index.y.size(); ++o) {
    for (int j = 0; j < state.m; ++j)
      terms[j] = log_w[index.time_of[o]][j] + log_kernel_eval(index.y[o], state.measure.atoms[j]);
    total += log_sum_exp(terms);
  }
  return total;
}

std::string check_invariants(const ChainState& state, const TimeGridDataset& data,
                             const SamplerConfig& cfg) {
  const ObservationIndex index(data);
  const std::size_t n = data.times.size();
  const std::size_t m = static_cast<std::size_t>(state.m);
  if (state.m < 1) return "truncation below 1";
  if (state.measure.sticks.size() != m || state.measure.atoms.size() != m ||
      state.trans_aug.size() != m)
    return "component arrays disagree with m";
  if (state.s.size() != index.y.size() || state.u.size() != index.y.size())
    return "per-observation arrays have the wrong length";
  int m_slice = 1;
  for (std::size_t o = 0; o < index.y.size(); ++o) {
    const int s = state.s[o];
    const double u = state.u[o];
    if (s < 1 || s > state.m) return "membership " + std::to_string(o) + " outside 1..m";
    if (!(u > 0.0 && u < slice_psi(cfg.slice_eta, s)))
      return "slice variable " + std::to_string(o) + " violates u < psi_s";
    const int floor_inv = slice_psi_inverse_floor(cfg.slice_eta, u);
    if (s > floor_inv) return "membership " + std::to_string(o) + " exceeds floor(psi*(u))";
    m_slice = std::max(m_slice, floor_inv);
  }
  if (clamped(cfg)) m_slice = std::min(m_slice, component_cap(cfg));
  if (m_slice != state.m) return "m differs from max floor(psi*(u))";
  for (std::size_t j = 0; j < m; ++j) {
    if (state.measure.sticks[j].size() != n) return "stick path has the wrong length";
    if (state.trans_aug[j].size() + 1 != n) return "latent row has the wrong length";
    const bool terminal = is_terminal_stick(state, cfg, static_cast<int>(j) + 1);
    for (double v : state.measure.sticks[j]) {
      if (terminal ? v != 1.0 : !(v > 0.0 && v < 1.0))
        return "stick " + std::to_string(j + 1) + " outside its range";
    }
    for (const auto& aug : state.trans_aug[j]) {
      if (aug.k < 0 || aug.k > aug.d) return "latent with k outside 0..d";
      if (!(aug.log_o < -cfg.trans_slice_eta * aug.d)) return "latent with o >= g(d)";
    }
  }
  return {};
}

}  // namespace diffdp
