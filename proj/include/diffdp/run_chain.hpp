#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "diffdp/gibbs.hpp"

namespace diffdp {

struct PosteriorDraw {
  std::uint64_t sweep = 0;
  double theta = 0.0;
  double c = 0.0;
  MixtureState measure;
};

struct PosteriorDraws {
  std::vector<double> times;
  std::vector<PosteriorDraw> draws;
};

struct RunOptions {
  std::ostream* telemetry = nullptr;  // key=value line per reported sweep
  std::uint64_t telemetry_every = 1;
  int chain_id = 0;
  std::optional<std::filesystem::path> checkpoint_path;
  std::uint64_t checkpoint_every = 0;  // 0: only when stopping early
  std::uint64_t stop_after = 0;        // stop once this many sweeps are done; 0 runs to the end
};

// A chain in flight: everything needed to continue it bit-exactly.
struct ChainRun {
  ChainState state;
  Rng rng;
  PosteriorDraws draws;
};

std::uint64_t total_sweeps(const SamplerConfig& cfg);

ChainRun begin_chain(const TimeGridDataset& data, const SamplerConfig& cfg, Rng rng);
// Runs sweeps until burn_in + iters are done or opts.stop_after is reached.
// Returns true when the chain is complete.
bool advance_chain(ChainRun& run, const TimeGridDataset& data, const SamplerConfig& cfg,
                   const RunOptions& opts = {});

// burn_in + iters sweeps; every thin-th post-burn-in state is stored.
PosteriorDraws run_chain(const TimeGridDataset& data, const SamplerConfig& cfg, Rng& rng,
                         const RunOptions& opts = {});

std::string telemetry_line(const ChainState& state, const TimeGridDataset& data,
                           const SamplerConfig& cfg, int chain_id);

}  // namespace diffdp
