#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "diffdp/gibbs.hpp"
#include "diffdp/run_chain.hpp"

namespace diffdp {

inline constexpr int kCheckpointVersion = 1;
inline constexpr std::uint32_t kDrawsVersion = 1;

nlohmann::json config_to_json(const SamplerConfig& cfg);
// Missing keys keep the values already in `base`; unknown keys are a ConfigError.
SamplerConfig config_from_json(const nlohmann::json& j, SamplerConfig base = {});
// FNV-1a of the canonical JSON form.
std::uint64_t config_hash(const SamplerConfig& cfg);

nlohmann::json state_to_json(const ChainState& state);
ChainState state_from_json(const nlohmann::json& j);

// Text checkpoint: version, config hash, engine state, chain state and the
// draws stored so far. Loading checks the version and the config hash.
void save_checkpoint(const std::filesystem::path& path, const ChainRun& run,
                     const SamplerConfig& cfg);
ChainRun load_checkpoint(const std::filesystem::path& path, const SamplerConfig& cfg);

// Binary draws archive, little-endian: magic "DDPDRAWS", u32 version, u64
// time count, times, u64 draw count, then per draw u64 sweep, f64 theta,
// f64 c, u32 m, m (mean, precision) pairs and m rows of stick values.
void write_draws(std::ostream& out, const PosteriorDraws& draws);
void write_draws(const std::filesystem::path& path, const PosteriorDraws& draws);
PosteriorDraws read_draws(std::istream& in);
PosteriorDraws read_draws(const std::filesystem::path& path);

}  // namespace diffdp
