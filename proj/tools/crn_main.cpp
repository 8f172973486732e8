// Command-line front end: scenario generation, sub-channel allocation,
// harvesting-ratio optimization, oracle validation, experiment sweeps.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "crn/allocation.hpp"
#include "crn/config.hpp"
#include "crn/errors.hpp"
#include "crn/experiments.hpp"
#include "crn/lambert.hpp"
#include "crn/model.hpp"
#include "crn/oracle.hpp"
#include "crn/rng.hpp"
#include "crn/scenario.hpp"
#include "crn/structopt.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNotConverged = 2;

fs::path resolve_output(const std::string& path) {
  fs::path p(path);
  const char* dir = std::getenv("CRN_OUTPUT_DIR");
  if (dir && *dir && p.is_relative()) return fs::path(dir) / p;
  return p;
}

struct CommonInputs {
  std::string config_path;
  std::string scenario_path;
  std::vector<std::string> overrides;
};

void add_input_options(CLI::App* cmd, CommonInputs* in,
                       bool allow_scenario = true) {
  cmd->add_option("--config", in->config_path, "config file (key = value)");
  if (allow_scenario)
    cmd->add_option("--scenario", in->scenario_path,
                    "previously generated scenario JSON");
  cmd->add_option("--set", in->overrides,
                  "config override key=value (repeatable)");
}

crn::ScenarioConfig build_config(const CommonInputs& in) {
  crn::ScenarioConfig config = in.config_path.empty()
                                   ? crn::ScenarioConfig{}
                                   : crn::read_config(in.config_path);
  for (const auto& kv : in.overrides) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw crn::ConfigError("--set expects key=value, got '" + kv + "'");
    config.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return config;
}

int g_verbosity = 0;

crn::Scenario load_scenario(const CommonInputs& in) {
  crn::Scenario sc;
  if (!in.scenario_path.empty()) {
    if (!in.overrides.empty() || !in.config_path.empty())
      throw crn::ConfigError(
          "--scenario cannot be combined with --config/--set");
    sc = crn::read_scenario(in.scenario_path);
  } else {
    sc = crn::generate_scenario(build_config(in));
  }
  if (g_verbosity > 0)
    std::printf("scenario: K=%d, L=%d, N=%d, M=%zu, config %s, seed %llu\n",
                sc.num_sus(), sc.num_pus(), sc.params.num_subchannels,
                sc.sensing.available_set.size(), sc.config_hash.c_str(),
                static_cast<unsigned long long>(sc.seed));
  return sc;
}

crn::Allocation make_allocation(const crn::Scenario& sc,
                                const std::string& algorithm, int fixed_f) {
  if (fixed_f > 0) return crn::allocate_fixed_count(sc, fixed_f);
  const std::vector<double> theta0 = crn::initial_thetas(sc);
  if (algorithm == "baseline") return crn::allocate_baseline(sc, theta0);
  if (algorithm == "efm") return crn::allocate_efm(sc, theta0);
  throw crn::ConfigError("unknown allocation algorithm '" + algorithm + "'");
}

const char* slack_name(crn::ConstraintSlack::Kind kind) {
  using K = crn::ConstraintSlack::Kind;
  switch (kind) {
    case K::kC1: return "C1";
    case K::kC2: return "C2";
    case K::kC3: return "C3";
    case K::kC4: return "C4";
    case K::kC5: return "C5";
    case K::kC8: return "C8";
  }
  return "?";
}

ordered_json report_to_json(const crn::Scenario& sc,
                            const crn::Allocation& alloc,
                            const crn::SolveReport& rep) {
  ordered_json j;
  j["method"] = crn::to_string(rep.method);
  j["objective"] = rep.objective;
  j["iterations"] = rep.iterations;
  j["converged"] = rep.converged;
  j["max_constraint_violation"] = rep.max_constraint_violation;
  j["theta"] = ordered_json::array();
  for (double th : rep.theta)
    j["theta"].push_back(std::isnan(th) ? ordered_json(nullptr)
                                        : ordered_json(th));
  j["flags"] = rep.flags;
  j["slacks"] = ordered_json::array();
  for (const auto& e : crn::evaluate_constraints(sc, alloc, rep.theta).entries)
    j["slacks"].push_back(ordered_json{{"constraint", slack_name(e.kind)},
                                       {"index", e.index},
                                       {"slack", e.slack}});
  return j;
}

void print_report(const crn::Scenario& sc, const crn::Allocation& alloc,
                  const crn::SolveReport& rep) {
  std::printf("method: %s\n", crn::to_string(rep.method));
  for (int i = 0; i < sc.num_sus(); ++i) {
    if (std::isnan(rep.theta[i])) continue;
    std::printf("  SU %-2d theta = %s  rate = %s\n", i,
                crn::fmt12(rep.theta[i]).c_str(),
                crn::fmt12(crn::total_rate(sc.sus[i], alloc.sets[i],
                                           rep.theta[i], sc.params))
                    .c_str());
  }
  std::printf("  objective (sum rate) = %s bps/Hz\n",
              crn::fmt12(rep.objective).c_str());
  std::printf("  converged = %s, iterations = %d, max violation = %s\n",
              rep.converged ? "yes" : "no", rep.iterations,
              crn::fmt12(rep.max_constraint_violation).c_str());
  const crn::ConstraintReport slacks =
      crn::evaluate_constraints(sc, alloc, rep.theta);
  std::printf("  min slack = %s\n", crn::fmt12(slacks.min_slack()).c_str());
  for (const auto& flag : rep.flags) std::printf("  note: %s\n", flag.c_str());
}

int cmd_generate(const CommonInputs& in, const std::string& output) {
  const crn::ScenarioConfig config = build_config(in);
  const crn::Scenario sc = crn::generate_scenario(config);
  const fs::path out = resolve_output(output);
  crn::write_scenario(sc, out);
  std::printf("wrote %s (K=%d, N=%d, M=%zu, config %s)\n",
              out.string().c_str(), sc.num_sus(), sc.params.num_subchannels,
              sc.sensing.available_set.size(), sc.config_hash.c_str());
  return kExitOk;
}

int cmd_allocate(const CommonInputs& in, const std::string& algorithm,
                 int fixed_f, const std::string& output) {
  const crn::Scenario sc = load_scenario(in);
  const crn::Allocation alloc = make_allocation(sc, algorithm, fixed_f);
  const std::vector<double> theta0 = crn::initial_thetas(sc);
  for (int i = 0; i < sc.num_sus(); ++i) {
    std::printf("SU %-2d (%s, alpha=%s): D = {", i,
                sc.sus[i].is_rt() ? "RT" : "NRT",
                crn::fmt12(crn::efm_factor(sc.sus[i])).c_str());
    for (size_t q = 0; q < alloc.sets[i].size(); ++q)
      std::printf("%s%d", q ? ", " : "", alloc.sets[i][q]);
    std::printf("}  rate@theta0 = %s\n",
                crn::fmt12(crn::total_rate(sc.sus[i], alloc.sets[i], theta0[i],
                                           sc.params))
                    .c_str());
  }
  std::printf("satisfied RT SUs: %d of %d\n",
              crn::satisfied_rt_count(sc, alloc, theta0),
              static_cast<int>(std::count_if(
                  sc.sus.begin(), sc.sus.end(),
                  [](const auto& su) { return su.is_rt(); })));
  if (!output.empty()) {
    ordered_json j;
    j["algorithm"] = fixed_f > 0 ? "fixed" : algorithm;
    j["sets"] = alloc.sets;
    j["theta_init"] = theta0;
    std::ofstream f(resolve_output(output));
    f << j.dump(2) << "\n";
  }
  return kExitOk;
}

int cmd_solve(const CommonInputs& in, const std::string& algorithm,
              int fixed_f, const std::string& method,
              const std::string& output, int max_iterations) {
  const crn::Scenario sc = load_scenario(in);
  const crn::Allocation alloc = make_allocation(sc, algorithm, fixed_f);

  std::vector<crn::SolveReport> reports;
  crn::SolveOptions options;
  if (max_iterations > 0) options.dual.max_iterations = max_iterations;
  if (method == "closed" || method == "both") {
    options.method = crn::SolveMethod::kClosedForm;
    reports.push_back(crn::solve_structure(sc, alloc, options));
  }
  if (method == "dual" || method == "both") {
    options.method = crn::SolveMethod::kDualSubgradient;
    reports.push_back(crn::solve_structure(sc, alloc, options));
  }
  if (reports.empty())
    throw crn::ConfigError("--method must be closed, dual or both");

  for (const auto& rep : reports) print_report(sc, alloc, rep);
  if (reports.size() == 2) {
    double dtheta = 0.0;
    for (int i = 0; i < sc.num_sus(); ++i) {
      if (std::isnan(reports[0].theta[i]) || std::isnan(reports[1].theta[i]))
        continue;
      dtheta = std::max(dtheta,
                        std::abs(reports[0].theta[i] - reports[1].theta[i]));
    }
    const double dobj =
        std::abs(reports[0].objective - reports[1].objective) /
        std::max(1e-300, std::abs(reports[1].objective));
    std::printf(
        "method agreement: max |dtheta| = %s, objective rel diff = %s\n",
        crn::fmt12(dtheta).c_str(), crn::fmt12(dobj).c_str());
  }

  if (!output.empty()) {
    ordered_json j = ordered_json::array();
    for (const auto& rep : reports) j.push_back(report_to_json(sc, alloc, rep));
    std::ofstream f(resolve_output(output));
    f << j.dump(2) << "\n";
  }
  for (const auto& rep : reports)
    if (!rep.converged) return kExitNotConverged;
  return kExitOk;
}

int cmd_validate(std::uint64_t seed, int trials) {
  bool all_ok = true;
  const auto verdict = [&](const char* what, double value, double bound) {
    const bool ok = value <= bound;
    all_ok = all_ok && ok;
    std::printf("%-34s %s (bound %s) %s\n", what, crn::fmt12(value).c_str(),
                crn::fmt12(bound).c_str(), ok ? "PASS" : "FAIL");
  };

  // Closed form vs grid oracle on single-sub-channel instances.
  crn::Rng rng(seed);
  crn::SystemParams params;
  params.num_subchannels = 1;
  double worst = 0.0;
  for (int i = 0; i < trials; ++i) {
    const double chi = rng.uniform(0.5, 40.0);
    const double tau = rng.uniform(1e-6, 2e-4);
    const double eps = rng.uniform(0.01, 0.7) * chi * (1e-3 - tau);
    const double hchi = std::pow(10.0, rng.uniform(0.0015, 4.0));
    crn::SecondaryUser su;
    su.id = 0;
    su.harvest_rate_w = chi;
    su.sensing_energy_j = eps;
    su.sensing_time_s = tau;
    su.gains = {std::sqrt(hchi / chi * params.snr_gap *
                          params.subchannel_bandwidth_hz *
                          params.noise_psd_w_per_hz)};
    const double closed = crn::closed_form_theta(su, hchi / chi, params).theta;
    const auto grid = crn::oracle::grid_theta_optimum(su, {0}, params);
    worst = std::max(worst, std::abs(closed - grid.theta) / grid.theta);
  }
  verdict("closed form vs grid (rel)", worst, 1e-4);

  // Lambert residual over a log-spaced sweep.
  double wresid = 0.0;
  const int n = 100000;
  for (int i = 0; i < n / 2; ++i) {
    const double x = std::pow(10.0, -12.0 + 18.0 * i / (n / 2 - 1));
    const double w = crn::lambert_w0(x);
    wresid = std::max(wresid, std::abs(w * std::exp(w) - x) /
                                  std::max(1.0, std::abs(x)));
  }
  for (int i = 0; i < n / 2; ++i) {
    const double u = std::pow(10.0, -12.0 + 12.0 * i / (n / 2 - 1));
    const double x = u / M_E - std::exp(-1.0);
    const double w = crn::lambert_w0(x);
    wresid = std::max(wresid, std::abs(w * std::exp(w) - x) /
                                  std::max(1.0, std::abs(x)));
  }
  verdict("Lambert W residual (scaled)", wresid, 1e-12);

  // PSD normalization over a widening window.
  const double t_sym = 1.6e-5;
  const double integral = crn::psd_window_integral(t_sym, 2.2e5 / t_sym);
  verdict("PSD window integral |I - 1|", std::abs(integral - 1.0), 1e-6);

  // Dual solver vs oracle on a small default instance.
  crn::ScenarioConfig config;
  config.seed = seed;
  config.num_sus = 3;
  config.num_rt = 3;
  config.num_subchannels = 6;
  config.available_count = 6;
  config.cross_gain_scale = 1e-9;
  const crn::Scenario sc = crn::generate_scenario(config);
  const crn::Allocation alloc = crn::allocate_fixed_count(sc, 2);
  const crn::SolveReport dual = crn::dual_subgradient_solve(sc, alloc);
  const crn::SolveReport grid = crn::oracle::constrained_grid_solve(sc, alloc);
  verdict("dual vs grid objective (rel)",
          std::abs(dual.objective - grid.objective) / std::abs(grid.objective),
          5e-3);

  return all_ok ? kExitOk : kExitNotConverged;
}

int cmd_experiment(const std::string& name, const CommonInputs& in,
                   std::string output, int jobs) {
  std::optional<crn::ScenarioConfig> base;
  if (!in.config_path.empty() || !in.overrides.empty()) {
    crn::ScenarioConfig config = in.config_path.empty()
                                     ? crn::experiment_defaults(name)
                                     : crn::read_config(in.config_path);
    for (const auto& kv : in.overrides) {
      const size_t eq = kv.find('=');
      if (eq == std::string::npos)
        throw crn::ConfigError("--set expects key=value, got '" + kv + "'");
      config.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    base = config;
  }
  const crn::ExperimentResult result = crn::run_experiment(name, base, jobs);
  if (output.empty()) output = name + ".csv";
  const fs::path out = resolve_output(output);
  crn::write_results(result, out);
  std::printf("wrote %s (%zu rows)\n", out.string().c_str(),
              result.rows.size());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Green-powered cognitive-radio resource allocation: EFM sub-channel "
      "allocation and harvesting-ratio optimization"};
  app.require_subcommand(1);
  app.add_flag("-v,--verbose", g_verbosity, "print scenario summaries");

  CommonInputs gen_in, alloc_in, solve_in, exp_in;
  std::string gen_out = "scenario.json";
  std::string alloc_algorithm = "efm", solve_algorithm = "efm";
  std::string alloc_out, solve_out, exp_out;
  std::string method = "both";
  std::string experiment_name;
  int alloc_fixed = 0, solve_fixed = 0;
  int jobs = 1;
  int max_iterations = 0;
  std::uint64_t validate_seed = 1;
  int validate_trials = 1000;

  auto* generate = app.add_subcommand("generate", "draw a scenario instance");
  add_input_options(generate, &gen_in, false);
  generate->add_option("-o,--output", gen_out, "scenario JSON path");

  auto* allocate =
      app.add_subcommand("allocate", "EFM / baseline sub-channel allocation");
  add_input_options(allocate, &alloc_in);
  allocate->add_option("--algorithm", alloc_algorithm, "efm | baseline");
  allocate->add_option("--fixed-f", alloc_fixed,
                       "give every SU exactly f sub-channels instead");
  allocate->add_option("-o,--output", alloc_out, "allocation JSON path");

  auto* solve =
      app.add_subcommand("solve", "optimize harvesting ratios for a scenario");
  add_input_options(solve, &solve_in);
  solve->add_option("--algorithm", solve_algorithm, "efm | baseline");
  solve->add_option("--fixed-f", solve_fixed, "fixed per-SU allocation size");
  solve->add_option("--method", method, "closed | dual | both");
  solve->add_option("--max-iterations", max_iterations,
                    "dual solver iteration cap override");
  solve->add_option("-o,--output", solve_out, "report JSON path");

  auto* validate = app.add_subcommand("validate", "run the oracle comparisons");
  validate->add_option("--seed", validate_seed, "RNG seed");
  validate->add_option("--trials", validate_trials,
                       "closed-form comparison instances");

  auto* experiment = app.add_subcommand("experiment", "run a named sweep");
  experiment->add_option("name", experiment_name, "experiment id")->required();
  add_input_options(experiment, &exp_in, false);
  experiment->add_option("-o,--output", exp_out,
                         "CSV path (default <name>.csv)");
  experiment->add_option("--jobs", jobs, "parallel sweep points");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (generate->parsed()) return cmd_generate(gen_in, gen_out);
    if (allocate->parsed())
      return cmd_allocate(alloc_in, alloc_algorithm, alloc_fixed, alloc_out);
    if (solve->parsed())
      return cmd_solve(solve_in, solve_algorithm, solve_fixed, method,
                       solve_out, max_iterations);
    if (validate->parsed()) return cmd_validate(validate_seed, validate_trials);
    if (experiment->parsed())
      return cmd_experiment(experiment_name, exp_in, exp_out, jobs);
  } catch (const crn::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitNotConverged;
  } catch (const crn::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
