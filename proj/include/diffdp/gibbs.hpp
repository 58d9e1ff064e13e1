#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "diffdp/dataset.hpp"
#include "diffdp/measure.hpp"
#include "diffdp/mixture.hpp"
#include "diffdp/random.hpp"
#include "diffdp/wf_core.hpp"

namespace diffdp {

struct GammaPrior {
  double shape = 2.0;
  double rate = 0.5;
};

// What happens when the slice variables ask for more than m_cap components.
enum class TruncationPolicy {
  Error,  // TruncationError
  Clamp,  // finite stick-breaking: stick m_cap is fixed at 1 and never moves
};

struct SamplerConfig {
  StickConfig stick_config = StickConfig::dirichlet(1.0, 0.5);
  CenteringMeasure centering;
  double slice_eta = 0.5;        // psi_s = exp(-eta s)
  double trans_slice_eta = 0.5;  // g(d) = exp(-eta' d)
  int iters = 10000;
  int burn_in = 5000;
  int thin = 5;
  GammaPrior theta_prior;
  GammaPrior c_prior;
  std::optional<double> fix_theta;
  std::optional<double> fix_c;
  int m_cap = 1000;
  TruncationPolicy truncation = TruncationPolicy::Error;
  std::uint64_t rng_seed = 1;
  double target_acceptance = 0.44;

  void validate() const;
  // True when theta / c are sampled rather than fixed or implied by the stick law.
  bool samples_theta() const;
  bool samples_c() const;
};

double slice_psi(double eta, int s);
// Largest s with psi_s > u, i.e. floor(-log(u) / eta).
int slice_psi_inverse_floor(double eta, double u);

// Log-scale random-walk proposal scale for one hyperparameter, with counters.
struct MhTuning {
  double log_scale = std::log(0.5);
  std::uint64_t proposals = 0;
  std::uint64_t accepted = 0;
  std::uint64_t adapt_steps = 0;

  double acceptance_rate() const;
};

struct ChainState {
  int m = 0;
  std::vector<int> s;       // membership per observation (1-based), time-major
  std::vector<double> u;    // slice variable per observation
  MixtureState measure;     // sticks v_{1:m} at every time and atoms x_{1:m}
  // trans_aug[j][i] slices the transition of stick j+1 from t_i to t_{i+1}.
  std::vector<std::vector<TransitionAug>> trans_aug;
  double theta = 1.0;
  double c = 0.5;
  MhTuning theta_mh;
  MhTuning c_mh;
  std::uint64_t sweep = 0;
};

// Flattened view of a dataset: observation o sits at time time_of[o].
struct ObservationIndex {
  std::vector<std::size_t> time_of;
  std::vector<double> y;
  std::vector<double> tau;  // tau[i] = t_{i+1} - t_i
  explicit ObservationIndex(const TimeGridDataset& data);
};

// Stick law with the current hyperparameters substituted.
StickConfig effective_sticks(const ChainState& state, const SamplerConfig& cfg);
// True when stick j (1-based) is the fixed terminal stick of a clamped chain.
bool is_terminal_stick(const ChainState& state, const SamplerConfig& cfg, int j);

ChainState init_chain(const TimeGridDataset& data, const SamplerConfig& cfg, Rng& rng);

void update_slice_and_truncation(ChainState& state, const TimeGridDataset& data,
                                 const SamplerConfig& cfg, Rng& rng);
void update_membership(ChainState& state, const TimeGridDataset& data, const SamplerConfig& cfg,
                       Rng& rng);
void update_locations(ChainState& state, const TimeGridDataset& data, const SamplerConfig& cfg,
                      Rng& rng);
void update_transition_latents(ChainState& state, const TimeGridDataset& data,
                               const SamplerConfig& cfg, Rng& rng);
void update_stick_values(ChainState& state, const TimeGridDataset& data, const SamplerConfig& cfg,
                         Rng& rng);
void update_hyperparams(ChainState& state, const TimeGridDataset& data, const SamplerConfig& cfg,
                        Rng& rng);
void gibbs_sweep(ChainState& state, const TimeGridDataset& data, const SamplerConfig& cfg,
                 Rng& rng);

// Single-transition conditionals, exposed for the oracle tests. Unnormalized
// log masses over k in {0..d} and over d in {k..d_max}.
std::vector<double> latent_k_log_masses(int d, double v_prev, double v_cur, const WFParams& p);
std::vector<double> latent_d_log_masses(int k, int d_max, double v_prev, double v_cur, double tau,
                                        const WFParams& p, double trans_eta);
// One (o, k, d) Gibbs step for a single transition.
void update_single_transition(TransitionAug& aug, double v_prev, double v_cur, double tau,
                              const WFParams& p, double trans_eta, Rng& rng);

// Beta shapes of the full conditional of v_j(t_i), j 1-based, i 0-based.
std::pair<double, double> stick_conditional_shapes(const ChainState& state,
                                                   const TimeGridDataset& data,
                                                   const SamplerConfig& cfg, int j,
                                                   std::size_t i);

// Log full conditional of the stick-law hyperparameters given the sticks and
// transition latents, up to a constant: prior + sum over non-terminal sticks
// of log Beta(v_j(t_1)) + sum_i [log r_tau(d) + log Beta(v_j(t_{i+1}) | a+k, b+d-k)].
double log_hyper_conditional(const ChainState& state, const TimeGridDataset& data,
                             const SamplerConfig& cfg, double theta, double c);

// Observed-data log likelihood of the truncated mixture.
double log_likelihood(const ChainState& state, const TimeGridDataset& data);

// Empty string when every ChainState invariant holds, else a description of
// the first violation.
std::string check_invariants(const ChainState& state, const TimeGridDataset& data,
                             const SamplerConfig& cfg);

}  // namespace diffdp
