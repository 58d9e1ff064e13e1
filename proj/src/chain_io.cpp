#include "diffdp/chain_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "diffdp/error.hpp"

namespace diffdp {

using nlohmann::json;

namespace {

constexpr char kDrawsMagic[8] = {'D', 'D', 'P', 'D', 'R', 'A', 'W', 'S'};
constexpr const char* kCheckpointFormat = "diffdp-checkpoint";

json prior_json(const GammaPrior& g) { return {{"shape", g.shape}, {"rate", g.rate}}; }

GammaPrior prior_from(const json& j, GammaPrior base) {
  for (const auto& [key, value] : j.items()) {
    if (key == "shape") base.shape = value.get<double>();
    else if (key == "rate") base.rate = value.get<double>();
    else throw ConfigError("unknown prior key '" + key + "'");
  }
  return base;
}

json optional_json(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

std::optional<double> optional_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

json tuning_json(const MhTuning& t) {
  return {{"log_scale", t.log_scale},
          {"proposals", t.proposals},
          {"accepted", t.accepted},
          {"adapt_steps", t.adapt_steps}};
}

MhTuning tuning_from(const json& j) {
  MhTuning t;
  t.log_scale = j.at("log_scale").get<double>();
  t.proposals = j.at("proposals").get<std::uint64_t>();
  t.accepted = j.at("accepted").get<std::uint64_t>();
  t.adapt_steps = j.at("adapt_steps").get<std::uint64_t>();
  return t;
}

json measure_json(const MixtureState& m) {
  json atoms = json::array();
  for (const auto& a : m.atoms) atoms.push_back({a.mean, a.precision});
  return {{"atoms", atoms}, {"sticks", m.sticks}};
}

MixtureState measure_from(const json& j, const std::vector<double>& times) {
  MixtureState m;
  m.times = times;
  for (const auto& a : j.at("atoms")) m.atoms.push_back({a.at(0).get<double>(), a.at(1).get<double>()});
  m.sticks = j.at("sticks").get<std::vector<std::vector<double>>>();
  return m;
}

std::string hex64(std::uint64_t x) {
  std::ostringstream out;
  out << std::hex << x;
  return out.str();
}

template <class T>
void put(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T)))
    throw DataError("draws archive is truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

json config_to_json(const SamplerConfig& cfg) {
  json j;
  const auto& sc = cfg.stick_config;
  if (const auto* d = std::get_if<DirichletSticks>(&sc.kind)) {
    j["stick_law"] = "dirichlet";
    j["theta"] = d->theta;
  } else if (const auto* py = std::get_if<PitmanYorSticks>(&sc.kind)) {
    j["stick_law"] = "pitman_yor";
    j["theta"] = py->theta;
    j["sigma"] = py->sigma;
  } else {
    j["stick_law"] = "gem";
    json shapes = json::array();
    for (const auto& [a, b] : std::get<GeneralGemSticks>(sc.kind).shapes) shapes.push_back({a, b});
    j["gem_shapes"] = shapes;
  }
  j["time_scale"] = sc.time_scale == TimeScaleMode::Shared   ? "shared"
                    : sc.time_scale == TimeScaleMode::PerStick ? "per_stick"
                                                               : "tied";
  j["c"] = sc.c;
  j["per_stick_c"] = sc.per_stick_c;
  j["centering"] = {{"mean0", cfg.centering.mean0},
                    {"precision_scale", cfg.centering.precision_scale},
                    {"shape", cfg.centering.shape},
                    {"rate", cfg.centering.rate}};
  j["slice_eta"] = cfg.slice_eta;
  j["trans_slice_eta"] = cfg.trans_slice_eta;
  j["iters"] = cfg.iters;
  j["burn_in"] = cfg.burn_in;
  j["thin"] = cfg.thin;
  j["theta_prior"] = prior_json(cfg.theta_prior);
  j["c_prior"] = prior_json(cfg.c_prior);
  j["fix_theta"] = optional_json(cfg.fix_theta);
  j["fix_c"] = optional_json(cfg.fix_c);
  j["m_cap"] = cfg.m_cap;
  j["truncation"] = cfg.truncation == TruncationPolicy::Error ? "error" : "clamp";
  j["seed"] = cfg.rng_seed;
  j["target_acceptance"] = cfg.target_acceptance;
  return j;
}

SamplerConfig config_from_json(const json& j, SamplerConfig cfg) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  try {
    // The stick law is rebuilt from its own keys first so that their order
    // in the file does not matter.
    std::string law;
    if (j.contains("stick_law")) law = j.at("stick_law").get<std::string>();
    else if (std::holds_alternative<DirichletSticks>(cfg.stick_config.kind)) law = "dirichlet";
    else if (std::holds_alternative<PitmanYorSticks>(cfg.stick_config.kind)) law = "pitman_yor";
    else law = "gem";
    const double theta = j.contains("theta")        ? j.at("theta").get<double>()
                         : cfg.stick_config.has_theta() ? cfg.stick_config.theta()
                                                        : 1.0;
    if (law == "dirichlet") {
      cfg.stick_config.kind = DirichletSticks{theta};
    } else if (law == "pitman_yor") {
      double sigma = 0.0;
      if (const auto* py = std::get_if<PitmanYorSticks>(&cfg.stick_config.kind)) sigma = py->sigma;
      if (j.contains("sigma")) sigma = j.at("sigma").get<double>();
      cfg.stick_config.kind = PitmanYorSticks{theta, sigma};
    } else if (law == "gem") {
      GeneralGemSticks gem;
      if (const auto* g = std::get_if<GeneralGemSticks>(&cfg.stick_config.kind)) gem = *g;
      if (j.contains("gem_shapes")) {
        gem.shapes.clear();
        for (const auto& pair : j.at("gem_shapes"))
          gem.shapes.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
      }
      cfg.stick_config.kind = gem;
    } else {
      throw ConfigError("unknown stick_law '" + law + "'");
    }

    for (const auto& [key, value] : j.items()) {
      if (key == "stick_law" || key == "theta" || key == "sigma" || key == "gem_shapes") continue;
      if (key == "time_scale") {
        const auto mode = value.get<std::string>();
        if (mode == "shared") cfg.stick_config.time_scale = TimeScaleMode::Shared;
        else if (mode == "per_stick") cfg.stick_config.time_scale = TimeScaleMode::PerStick;
        else if (mode == "tied") cfg.stick_config.time_scale = TimeScaleMode::Tied;
        else throw ConfigError("unknown time_scale '" + mode + "'");
      } else if (key == "c") {
        cfg.stick_config.c = value.get<double>();
      } else if (key == "per_stick_c") {
        cfg.stick_config.per_stick_c = value.get<std::vector<double>>();
      } else if (key == "centering") {
        for (const auto& [ck, cv] : value.items()) {
          if (ck == "mean0") cfg.centering.mean0 = cv.get<double>();
          else if (ck == "precision_scale") cfg.centering.precision_scale = cv.get<double>();
          else if (ck == "shape") cfg.centering.shape = cv.get<double>();
          else if (ck == "rate") cfg.centering.rate = cv.get<double>();
          else throw ConfigError("unknown centering key '" + ck + "'");
        }
      } else if (key == "slice_eta") {
        cfg.slice_eta = value.get<double>();
      } else if (key == "trans_slice_eta") {
        cfg.trans_slice_eta = value.get<double>();
      } else if (key == "iters") {
        cfg.iters = value.get<int>();
      } else if (key == "burn_in") {
        cfg.burn_in = value.get<int>();
      } else if (key == "thin") {
        cfg.thin = value.get<int>();
      } else if (key == "theta_prior") {
        cfg.theta_prior = prior_from(value, cfg.theta_prior);
      } else if (key == "c_prior") {
        cfg.c_prior = prior_from(value, cfg.c_prior);
      } else if (key == "fix_theta") {
        cfg.fix_theta = optional_from(value);
      } else if (key == "fix_c") {
        cfg.fix_c = optional_from(value);
      } else if (key == "m_cap") {
        cfg.m_cap = value.get<int>();
      } else if (key == "truncation") {
        const auto policy = value.get<std::string>();
        if (policy == "error") cfg.truncation = TruncationPolicy::Error;
        else if (policy == "clamp") cfg.truncation = TruncationPolicy::Clamp;
        else throw ConfigError("unknown truncation policy '" + policy + "'");
      } else if (key == "seed") {
        cfg.rng_seed = value.get<std::uint64_t>();
      } else if (key == "target_acceptance") {
        cfg.target_acceptance = value.get<double>();
      } else {
        throw ConfigError("unknown configuration key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
  return cfg;
}

std::uint64_t config_hash(const SamplerConfig& cfg) {
  const std::string text = config_to_json(cfg).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

json state_to_json(const ChainState& state) {
  json aug = json::array();
  for (const auto& row : state.trans_aug) {
    json r = json::array();
    for (const auto& a : row) r.push_back({a.log_o, a.k, a.d});
    aug.push_back(r);
  }
  return {{"m", state.m},
          {"s", state.s},
          {"u", state.u},
          {"times", state.measure.times},
          {"measure", measure_json(state.measure)},
          {"trans_aug", aug},
          {"theta", state.theta},
          {"c", state.c},
          {"theta_mh", tuning_json(state.theta_mh)},
          {"c_mh", tuning_json(state.c_mh)},
          {"sweep", state.sweep}};
}

ChainState state_from_json(const json& j) {
  try {
    ChainState state;
    state.m = j.at("m").get<int>();
    state.s = j.at("s").get<std::vector<int>>();
    state.u = j.at("u").get<std::vector<double>>();
    state.measure = measure_from(j.at("measure"), j.at("times").get<std::vector<double>>());
    for (const auto& row : j.at("trans_aug")) {
      std::vector<TransitionAug> r;
      for (const auto& a : row)
        r.push_back({a.at(0).get<double>(), a.at(1).get<int>(), a.at(2).get<int>()});
      state.trans_aug.push_back(std::move(r));
    }
    state.theta = j.at("theta").get<double>();
    state.c = j.at("c").get<double>();
    state.theta_mh = tuning_from(j.at("theta_mh"));
    state.c_mh = tuning_from(j.at("c_mh"));
    state.sweep = j.at("sweep").get<std::uint64_t>();
    return state;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed chain state: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const ChainRun& run,
                     const SamplerConfig& cfg) {
  json draws = json::array();
  for (const auto& d : run.draws.draws)
    draws.push_back({{"sweep", d.sweep},
                     {"theta", d.theta},
                     {"c", d.c},
                     {"measure", measure_json(d.measure)}});
  const json doc = {{"format", kCheckpointFormat},
                    {"version", kCheckpointVersion},
                    {"config_hash", hex64(config_hash(cfg))},
                    {"rng", serialize_rng(run.rng)},
                    {"state", state_to_json(run.state)},
                    {"times", run.draws.times},
                    {"draws", draws}};
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw DataError("cannot write checkpoint " + tmp.string());
    out << doc.dump();
    if (!out) throw DataError("failed writing checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

ChainRun load_checkpoint(const std::filesystem::path& path, const SamplerConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("checkpoint " + path.string() + " is not valid JSON: " + e.what());
  }
  if (doc.value("format", "") != kCheckpointFormat)
    throw DataError(path.string() + " is not a checkpoint");
  if (doc.value("version", 0) != kCheckpointVersion)
    throw DataError("unsupported checkpoint version in " + path.string());
  if (doc.value("config_hash", "") != hex64(config_hash(cfg)))
    throw ConfigError("checkpoint " + path.string() + " was written with a different configuration");
  ChainRun run;
  run.rng = deserialize_rng(doc.at("rng").get<std::string>());
  run.state = state_from_json(doc.at("state"));
  try {
    run.draws.times = doc.at("times").get<std::vector<double>>();
    for (const auto& d : doc.at("draws"))
      run.draws.draws.push_back({d.at("sweep").get<std::uint64_t>(), d.at("theta").get<double>(),
                                 d.at("c").get<double>(),
                                 measure_from(d.at("measure"), run.draws.times)});
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed checkpoint draws: ") + e.what());
  }
  return run;
}

void write_draws(std::ostream& out, const PosteriorDraws& draws) {
  out.write(kDrawsMagic, sizeof(kDrawsMagic));
  put<std::uint32_t>(out, kDrawsVersion);
  put<std::uint64_t>(out, draws.times.size());
  for (double t : draws.times) put<double>(out, t);
  put<std::uint64_t>(out, draws.draws.size());
  for (const auto& d : draws.draws) {
    put<std::uint64_t>(out, d.sweep);
    put<double>(out, d.theta);
    put<double>(out, d.c);
    const auto m = static_cast<std::uint32_t>(d.measure.atoms.size());
    if (d.measure.sticks.size() != m) throw DomainError("draw has mismatched atoms and sticks");
    put<std::uint32_t>(out, m);
    for (const auto& a : d.measure.atoms) {
      put<double>(out, a.mean);
      put<double>(out, a.precision);
    }
    for (const auto& row : d.measure.sticks) {
      if (row.size() != draws.times.size()) throw DomainError("stick row length differs from time grid");
      for (double v : row) put<double>(out, v);
    }
  }
  if (!out) throw DataError("failed writing draws archive");
}

void write_draws(const std::filesystem::path& path, const PosteriorDraws& draws) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write draws archive " + path.string());
  write_draws(out, draws);
}

PosteriorDraws read_draws(std::istream& in) {
  char magic[sizeof(kDrawsMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kDrawsMagic, sizeof(magic)) != 0)
    throw DataError("not a draws archive (bad magic)");
  const auto version = get<std::uint32_t>(in);
  if (version != kDrawsVersion)
    throw DataError("unsupported draws archive version " + std::to_string(version));
  PosteriorDraws out;
  const auto n_times = get<std::uint64_t>(in);
  if (n_times == 0 || n_times > (1ULL << 32)) throw DataError("draws archive has a bad time count");
  out.times.resize(n_times);
  for (auto& t : out.times) t = get<double>(in);
  const auto n_draws = get<std::uint64_t>(in);
  for (std::uint64_t k = 0; k < n_draws; ++k) {
    PosteriorDraw d;
    d.sweep = get<std::uint64_t>(in);
    d.theta = get<double>(in);
    d.c = get<double>(in);
    const auto m = get<std::uint32_t>(in);
    if (m == 0 || m > (1U << 24)) throw DataError("draws archive has a bad component count");
    d.measure.times = out.times;
    d.measure.atoms.resize(m);
    for (auto& a : d.measure.atoms) {
      a.mean = get<double>(in);
      a.precision = get<double>(in);
    }
    d.measure.sticks.assign(m, std::vector<double>(n_times));
    for (auto& row : d.measure.sticks)
      for (auto& v : row) v = get<double>(in);
    out.draws.push_back(std::move(d));
  }
  return out;
}

PosteriorDraws read_draws(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open draws archive " + path.string());
  return read_draws(in);
}

}  // namespace diffdp
