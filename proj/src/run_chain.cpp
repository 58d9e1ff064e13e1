#include "diffdp/run_chain.hpp"

#include <ostream>
#include <sstream>

#include "diffdp/chain_io.hpp"
#include "diffdp/dataset.hpp"

namespace diffdp {

std::uint64_t total_sweeps(const SamplerConfig& cfg) {
  return static_cast<std::uint64_t>(cfg.burn_in) + static_cast<std::uint64_t>(cfg.iters);
}

ChainRun begin_chain(const TimeGridDataset& data, const SamplerConfig& cfg, Rng rng) {
  ChainRun run{ChainState{}, std::move(rng), PosteriorDraws{}};
  run.state = init_chain(data, cfg, run.rng);
  run.draws.times = data.times;
  return run;
}

std::string telemetry_line(const ChainState& state, const TimeGridDataset& data,
                           const SamplerConfig& cfg, int chain_id) {
  std::ostringstream out;
  out << "chain=" << chain_id << " sweep=" << state.sweep
      << " phase=" << (state.sweep <= static_cast<std::uint64_t>(cfg.burn_in) ? "burn" : "sample")
      << " m=" << state.m << " theta=" << format_double(state.theta)
      << " c=" << format_double(state.c)
      << " acc_theta=" << format_double(state.theta_mh.acceptance_rate())
      << " acc_c=" << format_double(state.c_mh.acceptance_rate())
      << " loglik=" << format_double(log_likelihood(state, data));
  return out.str();
}

bool advance_chain(ChainRun& run, const TimeGridDataset& data, const SamplerConfig& cfg,
                   const RunOptions& opts) {
  const std::uint64_t total = total_sweeps(cfg);
  const std::uint64_t burn = static_cast<std::uint64_t>(cfg.burn_in);
  const std::uint64_t thin = static_cast<std::uint64_t>(cfg.thin);
  while (run.state.sweep < total) {
    if (opts.stop_after > 0 && run.state.sweep >= opts.stop_after) {
      if (opts.checkpoint_path) save_checkpoint(*opts.checkpoint_path, run, cfg);
      return false;
    }
    gibbs_sweep(run.state, data, cfg, run.rng);
    const std::uint64_t sweep = run.state.sweep;
    if (sweep > burn && (sweep - burn) % thin == 0)
      run.draws.draws.push_back({sweep, run.state.theta, run.state.c, run.state.measure});
    if (opts.telemetry && opts.telemetry_every > 0 && sweep % opts.telemetry_every == 0)
      *opts.telemetry << telemetry_line(run.state, data, cfg, opts.chain_id) << '\n';
    if (opts.checkpoint_path && opts.checkpoint_every > 0 && sweep % opts.checkpoint_every == 0)
      save_checkpoint(*opts.checkpoint_path, run, cfg);
  }
  return true;
}

PosteriorDraws run_chain(const TimeGridDataset& data, const SamplerConfig& cfg, Rng& rng,
                         const RunOptions& opts) {
  ChainRun run = begin_chain(data, cfg, rng);
  advance_chain(run, data, cfg, opts);
  rng = run.rng;
  return std::move(run.draws);
}

}  // namespace diffdp
