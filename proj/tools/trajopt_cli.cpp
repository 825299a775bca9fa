#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "trajopt/csv.hpp"
#include "trajopt/harness.hpp"
#include "trajopt/plugin.hpp"
#include "trajopt/sir.hpp"

namespace {

int cmd_simulate(const trajopt::SirConfig& config, const std::string& emit) {
  const trajopt::Trajectory traj = trajopt::simulate_sir(config);
  if (emit == "json") {
    std::cout << trajopt::encode_plugin_response(traj) << "\n";
    return 0;
  }
  std::cout << "t,S,I,R\n";
  for (std::size_t t = 0; t < traj.times.size(); ++t) {
    std::cout << traj.times[t] << "," << traj.series("S")[t] << ","
              << traj.series("I")[t] << "," << traj.series("R")[t] << "\n";
  }
  return 0;
}

// Serves the plugin wire protocol around the in-process SIR simulator:
// one JSON request per line, one JSON response per line. x = [beta, gamma].
int cmd_plugin_sir() {
  std::string line;
  while (std::getline(std::cin, line)) {
    if (trajopt::csv::trim(line).empty()) continue;
    Eigen::VectorXd x;
    std::int64_t seed = 0;
    if (!trajopt::decode_plugin_request(line, &x, &seed) || x.size() != 2) {
      std::cerr << "plugin-sir: bad request: " << line << "\n";
      return 1;
    }
    trajopt::SirConfig config;
    config.beta = x[0];
    config.gamma = x[1];
    config.seed = seed;
    std::cout << trajopt::encode_plugin_response(trajopt::simulate_sir(config))
              << std::endl;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trajectory-matching Thompson-Sampling optimizer harness"};
  app.require_subcommand(1);

  // simulate: single-trajectory utility.
  auto* simulate = app.add_subcommand("simulate", "Run one SIR trajectory");
  trajopt::SirConfig sir;
  std::string emit = "csv";
  simulate->add_option("--beta", sir.beta, "Infection rate per step");
  simulate->add_option("--gamma", sir.gamma, "Recovery rate per step");
  simulate->add_option("--seed", sir.seed, "Replicate seed");
  simulate->add_option("--population", sir.population, "Total population N");
  simulate->add_option("--s0", sir.s0, "Initial susceptible count");
  simulate->add_option("--i0", sir.i0, "Initial infected count");
  simulate->add_option("--r0", sir.r0, "Initial recovered count");
  simulate->add_option("--horizon", sir.horizon, "Time steps");
  simulate->add_option("--emit", emit, "Output format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));

  // run: execute a sweep of replicated optimization runs.
  auto* run = app.add_subcommand("run", "Run a sweep of optimization runs");
  std::string sweep_path, out_dir, plugin_path;
  int parallelism = 0;
  std::uint64_t master_seed = 20240807;
  run->add_option("--sweep", sweep_path, "Sweep CSV")->required();
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--parallelism", parallelism,
                  "Concurrent runs (default: number of processors)");
  run->add_option("--plugin", plugin_path,
                  "External simulator executable (line protocol)");
  run->add_option("--master-seed", master_seed, "Sweep master seed");

  // report: summarize a results directory.
  auto* report = app.add_subcommand("report", "Summarize run results");
  std::string in_dir, out_csv, evals_csv, thresholds_arg = "15,20,25,30";
  report->add_option("--in", in_dir, "Results directory")->required();
  report->add_option("--out", out_csv, "Summary CSV path")->required();
  report->add_option("--thresholds", thresholds_arg,
                     "Comma-separated discrepancy thresholds");
  report->add_option("--evals-out", evals_csv,
                     "Combined per-evaluation CSV (default: <out>_evaluations.csv)");

  auto* plugin_sir =
      app.add_subcommand("plugin-sir", "Serve the SIR simulator over the plugin protocol");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return cmd_simulate(sir, emit);
    if (plugin_sir->parsed()) return cmd_plugin_sir();

    if (run->parsed()) {
      if (const char* env = std::getenv("TRAJOPT_MASTER_SEED")) {
        master_seed = std::strtoull(env, nullptr, 10);
      }
      const auto sweep = trajopt::parse_sweep(sweep_path);
      if (sweep.empty()) {
        std::cerr << "sweep is empty; nothing to run\n";
        return 0;
      }
      trajopt::HarnessOptions options;
      options.out_dir = out_dir;
      options.parallelism = parallelism;
      options.master_seed = master_seed;
      options.plugin_path = plugin_path;
      return trajopt::run_experiments(sweep, options, std::cerr);
    }

    if (report->parsed()) {
      std::vector<double> thresholds;
      for (const auto& tok : trajopt::csv::split(thresholds_arg, ',')) {
        thresholds.push_back(std::stod(tok));
      }
      if (evals_csv.empty()) {
        std::string stem = out_csv;
        const auto dot = stem.rfind(".csv");
        if (dot != std::string::npos && dot == stem.size() - 4) {
          stem.resize(dot);
        }
        evals_csv = stem + "_evaluations.csv";
      }
      return trajopt::emit_report(in_dir, thresholds, out_csv, evals_csv,
                                  std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
