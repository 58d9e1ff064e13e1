#include "commands.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include "diffdp/chain_io.hpp"
#include "diffdp/dataset.hpp"
#include "diffdp/error.hpp"
#include "diffdp/estimation.hpp"
#include "diffdp/mixture.hpp"
#include "diffdp/run_chain.hpp"
#include "diffdp/validation.hpp"

namespace diffdp::cli {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

// Keys of the run configuration that are not sampler settings.
struct RunSettings {
  std::optional<std::string> data;
  std::string out_dir = ".";
  int chains = 1;
  bool date_column = false;
  std::uint64_t telemetry_every = 100;
  std::uint64_t checkpoint_every = 0;
};

RunSettings extract_run_settings(json& j) {
  RunSettings rs;
  auto take = [&](const char* key, auto& target) {
    if (j.contains(key)) {
      try {
        target = j.at(key).get<std::decay_t<decltype(target)>>();
      } catch (const json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
      }
      j.erase(key);
    }
  };
  if (j.contains("data")) {
    rs.data = j.at("data").get<std::string>();
    j.erase("data");
  }
  take("out_dir", rs.out_dir);
  take("chains", rs.chains);
  take("date_column", rs.date_column);
  take("telemetry_every", rs.telemetry_every);
  take("checkpoint_every", rs.checkpoint_every);
  return rs;
}

struct FitArgs {
  std::string config_path;
  std::string data;
  std::string out_dir;
  int chains = 1;
  bool date_column = false;
  int burn_in = 0, iters = 0, thin = 0, m_cap = 0;
  std::uint64_t seed = 0, telemetry_every = 0, checkpoint_every = 0;
  double fix_theta = 0, fix_c = 0, theta = 0, sigma = 0, c = 0, slice_eta = 0, trans_eta = 0;
  std::string stick_law, time_scale, truncation;
  bool resume = false;
  bool quiet = false;
};

struct SimulateArgs {
  int times = 100;
  int per_time = 1;
  double t_max = 10.0;
  std::uint64_t seed = 1;
  std::string out;
};

struct SummarizeArgs {
  std::vector<std::string> draws;
  std::string out_prefix;
  std::string data;
  std::optional<double> y_min, y_max;
  int y_points = 200;
  std::string truth;
};

struct ValidateArgs {
  std::uint64_t seed = 1;
  bool quick = false;
  double alpha = 0.001;
  double sigmas = 3.0;
  double quad_tol = 1e-6;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  Rng rng = make_rng(a.seed);
  const auto data = simulate_toy(a.times, a.per_time, a.t_max, rng);
  if (a.out == "-") {
    write_dataset_csv(out, data);
    err << "simulated " << data.num_observations() << " observations at " << data.num_times()
        << " times\n";
  } else {
    write_dataset_csv(std::filesystem::path(a.out), data);
    out << "wrote " << data.num_observations() << " rows (" << data.num_times() << " times x "
        << a.per_time << ") to " << a.out << '\n';
  }
  return kExitOk;
}

int cmd_fit(const FitArgs& a, const CLI::App& sub, std::ostream& out) {
  json file = a.config_path.empty() ? json::object() : read_config_file(a.config_path);
  RunSettings rs = extract_run_settings(file);
  SamplerConfig cfg = config_from_json(file);

  auto given = [&](const char* name) { return sub.count(name) > 0; };
  json overrides = json::object();
  if (given("--burn-in")) overrides["burn_in"] = a.burn_in;
  if (given("--iters")) overrides["iters"] = a.iters;
  if (given("--thin")) overrides["thin"] = a.thin;
  if (given("--m-cap")) overrides["m_cap"] = a.m_cap;
  if (given("--seed")) overrides["seed"] = a.seed;
  if (given("--fix-theta")) overrides["fix_theta"] = a.fix_theta;
  if (given("--fix-c")) overrides["fix_c"] = a.fix_c;
  if (given("--theta")) overrides["theta"] = a.theta;
  if (given("--sigma")) overrides["sigma"] = a.sigma;
  if (given("--c")) overrides["c"] = a.c;
  if (given("--slice-eta")) overrides["slice_eta"] = a.slice_eta;
  if (given("--trans-eta")) overrides["trans_slice_eta"] = a.trans_eta;
  if (given("--stick-law")) overrides["stick_law"] = a.stick_law;
  if (given("--time-scale")) overrides["time_scale"] = a.time_scale;
  if (given("--truncation")) overrides["truncation"] = a.truncation;
  cfg = config_from_json(overrides, cfg);
  cfg.validate();

  if (given("--data")) rs.data = a.data;
  if (given("--out-dir")) rs.out_dir = a.out_dir;
  if (given("--chains")) rs.chains = a.chains;
  if (given("--date-column")) rs.date_column = a.date_column;
  if (given("--telemetry-every")) rs.telemetry_every = a.telemetry_every;
  if (given("--checkpoint-every")) rs.checkpoint_every = a.checkpoint_every;
  if (!rs.data) throw ConfigError("no dataset given (--data or 'data' in the config file)");
  if (rs.chains < 1) throw ConfigError("--chains must be at least 1");

  const TimeGridDataset data = read_dataset_csv(std::filesystem::path(*rs.data), {rs.date_column});
  const std::filesystem::path dir(rs.out_dir);
  std::filesystem::create_directories(dir);

  const int n_chains = rs.chains;
  std::vector<PosteriorDraws> results(static_cast<std::size_t>(n_chains));
  std::vector<ChainState> finals(static_cast<std::size_t>(n_chains));
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(n_chains));
  auto chain_file = [&](int k, const std::string& ext) {
    return dir / ("chain_" + std::to_string(k) + ext);
  };

  auto work = [&](int k) {
    try {
      const auto ckpt = chain_file(k, ".checkpoint.json");
      ChainRun run = (a.resume && std::filesystem::exists(ckpt))
                         ? load_checkpoint(ckpt, cfg)
                         : begin_chain(data, cfg, make_rng(cfg.rng_seed, static_cast<std::uint64_t>(k)));
      std::ofstream telemetry(chain_file(k, ".telemetry"), a.resume ? std::ios::app : std::ios::trunc);
      RunOptions opts;
      opts.chain_id = k;
      opts.telemetry = telemetry ? &telemetry : nullptr;
      opts.telemetry_every = rs.telemetry_every;
      if (rs.checkpoint_every > 0) {
        opts.checkpoint_path = ckpt;
        opts.checkpoint_every = rs.checkpoint_every;
      }
      advance_chain(run, data, cfg, opts);
      write_draws(chain_file(k, ".draws"), run.draws);
      results[static_cast<std::size_t>(k)] = std::move(run.draws);
      finals[static_cast<std::size_t>(k)] = std::move(run.state);
    } catch (...) {
      failures[static_cast<std::size_t>(k)] = std::current_exception();
    }
  };
  std::vector<std::thread> threads;
  for (int k = 1; k < n_chains; ++k) threads.emplace_back(work, k);
  work(0);
  for (auto& t : threads) t.join();
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);

  json summary;
  summary["config"] = config_to_json(cfg);
  summary["chains"] = n_chains;
  summary["draws_per_chain"] = results.front().draws.size();
  json chains = json::array();
  for (int k = 0; k < n_chains; ++k) {
    const auto& st = finals[static_cast<std::size_t>(k)];
    chains.push_back({{"archive", chain_file(k, ".draws").string()},
                      {"final_m", st.m},
                      {"acceptance_theta", st.theta_mh.acceptance_rate()},
                      {"acceptance_c", st.c_mh.acceptance_rate()}});
  }
  summary["chain_runs"] = chains;

  // Scalar traces for diagnostics: theta, c and the mean functional at the
  // middle time point.
  const std::size_t mid = data.num_times() / 2;
  std::map<std::string, std::vector<std::vector<double>>> traces;
  for (const auto& r : results) {
    std::vector<double> th, cc, mf;
    for (const auto& d : r.draws) {
      th.push_back(d.theta);
      cc.push_back(d.c);
      mf.push_back(mean_functional(d.measure, mid));
    }
    traces["theta"].push_back(th);
    traces["c"].push_back(cc);
    traces["mean_functional_mid"].push_back(mf);
  }
  json diag = json::object();
  for (const auto& [name, tr] : traces) {
    json entry;
    try {
      entry["ess"] = effective_sample_size(tr.front());
    } catch (const DomainError&) {
      entry["ess"] = nullptr;
    }
    if (tr.size() >= 2) {
      try {
        entry["psrf"] = gelman_rubin(tr);
      } catch (const DomainError&) {
        entry["psrf"] = nullptr;
      }
    }
    diag[name] = entry;
  }
  summary["diagnostics"] = diag;
  std::ofstream(dir / "fit_summary.json") << summary.dump(2) << '\n';
  if (!a.quiet) out << summary.dump(2) << '\n';
  return kExitOk;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) g[k] = n == 1 ? lo : lo + (hi - lo) * k / (n - 1);
  return g;
}

int cmd_summarize(const SummarizeArgs& a, std::ostream& out, std::ostream&) {
  PosteriorDraws pooled;
  for (const auto& path : a.draws) {
    PosteriorDraws d = read_draws(std::filesystem::path(path));
    if (pooled.times.empty()) pooled.times = d.times;
    else if (pooled.times != d.times) throw DataError("draw archives use different time grids");
    for (auto& x : d.draws) pooled.draws.push_back(std::move(x));
  }
  if (pooled.draws.empty()) throw DataError("draw archives contain no draws");

  double lo = 0.0, hi = 0.0;
  if (a.y_min && a.y_max) {
    lo = *a.y_min;
    hi = *a.y_max;
  } else if (!a.data.empty()) {
    const auto data = read_dataset_csv(std::filesystem::path(a.data));
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    for (const auto& g : data.values)
      for (double y : g) {
        lo = std::min(lo, y);
        hi = std::max(hi, y);
      }
    const double pad = 0.1 * (hi - lo) + 0.5;
    lo = a.y_min.value_or(lo - pad);
    hi = a.y_max.value_or(hi + pad);
  } else {
    throw ConfigError("give --y-min and --y-max, or --data to derive the y grid");
  }
  if (!(hi > lo) || a.y_points < 1) throw ConfigError("y grid is empty");

  const auto grid = linspace(lo, hi, a.y_points);
  const DensitySurface surface = summarize(pooled, grid);
  const std::string prefix = a.out_prefix;
  {
    std::ofstream f(prefix + "_surface.csv");
    if (!f) throw DataError("cannot write " + prefix + "_surface.csv");
    write_surface_csv(f, surface);
  }
  std::ofstream(prefix + "_surface.json") << surface_to_json(surface).dump() << '\n';
  {
    std::ofstream f(prefix + "_mean.csv");
    write_mean_functional_csv(f, surface);
  }
  json report = {{"draws", surface.num_draws},
                 {"times", surface.times.size()},
                 {"y_points", grid.size()},
                 {"outputs",
                  {prefix + "_surface.csv", prefix + "_surface.json", prefix + "_mean.csv"}}};
  if (!a.truth.empty()) {
    if (a.truth != "toy") throw ConfigError("unknown truth '" + a.truth + "' (supported: toy)");
    const auto cov = coverage_report(surface, toy_mean, toy_density);
    const double rmse = mean_functional_rmse(surface, toy_mean);
    report["coverage"] = {{"mean_band", cov.mean_coverage},
                          {"density_band", cov.density_coverage},
                          {"median_mean_rmse", rmse}};
    std::ofstream(prefix + "_coverage.json") << report["coverage"].dump(2) << '\n';
  }
  out << report.dump(2) << '\n';
  return kExitOk;
}

int cmd_validate(const ValidateArgs& a, std::ostream& out, std::ostream&) {
  ValidationOptions opt;
  opt.seed = a.seed;
  opt.quick = a.quick;
  opt.alpha = a.alpha;
  opt.sigmas = a.sigmas;
  opt.quad_tol = a.quad_tol;
  const auto checks = run_validation(opt);
  const json report = validation_report(checks);
  out << report.dump(2) << '\n';
  return report.at("all_pass").get<bool>() ? kExitOk : kExitNumerical;
}

}  // namespace

json parse_key_value_config(std::istream& in) {
  json root = json::object();
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + " has no '='");
    const std::string key = trim(line.substr(0, eq));
    const std::string raw = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + " has no key");
    json value;
    try {
      value = json::parse(raw);
    } catch (const json::exception&) {
      value = raw;
    }
    json* node = &root;
    std::string rest = key;
    for (auto dot = rest.find('.'); dot != std::string::npos; dot = rest.find('.')) {
      node = &(*node)[rest.substr(0, dot)];
      rest.erase(0, dot + 1);
    }
    (*node)[rest] = value;
  }
  return root;
}

json read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    try {
      return json::parse(text);
    } catch (const json::exception& e) {
      throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
  }
  std::istringstream lines(text);
  return parse_key_value_config(lines);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Diffusive Dirichlet process mixtures: simulate, fit, summarize, validate"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate the toy dataset N(cos(2t)+t/2, 1/10)");
  simulate->add_option("--times", sim.times, "Number of equally spaced times")->check(CLI::PositiveNumber);
  simulate->add_option("--per-time", sim.per_time, "Observations per time")->check(CLI::PositiveNumber);
  simulate->add_option("--t-max", sim.t_max, "Last time point (first is 0)");
  simulate->add_option("--seed", sim.seed, "RNG seed");
  simulate->add_option("--out", sim.out, "Output CSV path, '-' for stdout")->required();

  FitArgs fit;
  auto* fitc = app.add_subcommand("fit", "Run the Gibbs sampler on a dataset");
  fitc->add_option("--config", fit.config_path, "Config file (JSON or key = value)");
  fitc->add_option("--data", fit.data, "Dataset CSV with header time,value");
  fitc->add_flag("--date-column", fit.date_column, "Parse the time column as YYYY-MM-DD dates");
  fitc->add_option("--out-dir", fit.out_dir, "Directory for archives, telemetry and summary");
  fitc->add_option("--chains", fit.chains, "Number of independent chains");
  fitc->add_option("--burn-in", fit.burn_in, "Burn-in sweeps");
  fitc->add_option("--iters", fit.iters, "Post-burn-in sweeps");
  fitc->add_option("--thin", fit.thin, "Keep every thin-th post-burn-in sweep");
  fitc->add_option("--seed", fit.seed, "RNG seed; chain k uses stream k");
  fitc->add_option("--fix-theta", fit.fix_theta, "Hold theta at this value");
  fitc->add_option("--fix-c", fit.fix_c, "Hold the time scale c at this value");
  fitc->add_option("--theta", fit.theta, "Concentration used when theta is not sampled");
  fitc->add_option("--sigma", fit.sigma, "Pitman-Yor discount");
  fitc->add_option("--c", fit.c, "Time scale used when c is not sampled");
  fitc->add_option("--stick-law", fit.stick_law, "dirichlet | pitman_yor | gem");
  fitc->add_option("--time-scale", fit.time_scale, "shared | per_stick | tied");
  fitc->add_option("--truncation", fit.truncation, "error | clamp");
  fitc->add_option("--m-cap", fit.m_cap, "Largest number of represented components");
  fitc->add_option("--slice-eta", fit.slice_eta, "psi_s = exp(-eta s)");
  fitc->add_option("--trans-eta", fit.trans_eta, "g(d) = exp(-eta d)");
  fitc->add_option("--telemetry-every", fit.telemetry_every, "Telemetry line every N sweeps");
  fitc->add_option("--checkpoint-every", fit.checkpoint_every, "Checkpoint every N sweeps");
  fitc->add_flag("--resume", fit.resume, "Continue from checkpoints in --out-dir");
  fitc->add_flag("--quiet", fit.quiet, "Do not print the run summary");

  SummarizeArgs summ;
  auto* summc = app.add_subcommand("summarize", "Posterior density surface and mean functional");
  summc->add_option("--draws", summ.draws, "Draw archives (pooled)")->required();
  summc->add_option("--out-prefix", summ.out_prefix, "Prefix for the output files")->required();
  summc->add_option("--data", summ.data, "Dataset used to derive the y grid range");
  summc->add_option("--y-min", summ.y_min, "Lower end of the y grid");
  summc->add_option("--y-max", summ.y_max, "Upper end of the y grid");
  summc->add_option("--y-points", summ.y_points, "Grid points")->check(CLI::PositiveNumber);
  summc->add_option("--truth", summ.truth, "Known truth for a coverage report (toy)");

  ValidateArgs val;
  auto* valc = app.add_subcommand("validate", "Run the analytic-identity test battery");
  valc->add_option("--seed", val.seed, "RNG seed");
  valc->add_flag("--quick", val.quick, "Smaller Monte Carlo sizes");
  valc->add_option("--alpha", val.alpha, "p-value threshold")->check(CLI::Range(0.0, 1.0));
  valc->add_option("--sigmas", val.sigmas, "Standard-error multiple")->check(CLI::PositiveNumber);
  valc->add_option("--quad-tol", val.quad_tol, "Normalization tolerance")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim, out, err);
    if (fitc->parsed()) return cmd_fit(fit, *fitc, out);
    if (summc->parsed()) return cmd_summarize(summ, out, err);
    if (valc->parsed()) return cmd_validate(val, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const DomainError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("diffdp");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace diffdp::cli
