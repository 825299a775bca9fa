#include "trajopt/harness.hpp"

#include <atomic>
#include <cinttypes>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "trajopt/csv.hpp"
#include "trajopt/metrics.hpp"
#include "trajopt/parallel.hpp"
#include "trajopt/plugin.hpp"

namespace trajopt {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t derive_run_seed(std::uint64_t master, int row_index,
                              Method method, int replicate) {
  return derive_seed(master, "run:" + to_string(method),
                     static_cast<std::uint64_t>(row_index),
                     static_cast<std::uint64_t>(replicate));
}

namespace {

struct RunTask {
  const SweepRow* row;
  int replicate;  // 1-based
  std::string stem;
  std::uint64_t run_seed;
};

void atomic_write(const fs::path& target, const std::string& content) {
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open for writing: " + tmp.string());
    out << content;
    if (!out) throw ConfigError("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string trace_csv_text(const SweepRow& row, const OptimizationTrace& trace) {
  std::string text = "eval_index,iteration";
  for (const auto& p : row.config.domain) text += "," + p.name;
  text += ",seed,discrepancy,failed\n";
  for (const auto& e : trace.evaluations) {
    text += std::to_string(e.index) + "," + std::to_string(e.iteration);
    for (double v : e.x_raw) text += "," + csv::fmt17(v);
    text += "," + std::to_string(e.input.seed);
    text += "," + csv::fmt17(e.discrepancy);
    text += e.failed ? ",1\n" : ",0\n";
  }
  return text;
}

json config_json(const SweepRow& row) {
  json j;
  j["method"] = to_string(row.config.method);
  j["Nmax"] = row.config.nmax;
  j["n_init"] = row.config.n_init;
  j["n_rep"] = row.config.n_rep;
  j["n_TS"] = row.config.batch_size;
  j["M"] = row.config.grid_size;
  j["kernel"] = to_string(row.config.kernel);
  j["objective_series"] = row.config.objective_series;
  json domain = json::array();
  for (const auto& p : row.config.domain) {
    domain.push_back({{"name", p.name}, {"lo", p.lo}, {"hi", p.hi}});
  }
  j["domain"] = domain;
  j["beta_true"] = row.beta_true;
  j["gamma_true"] = row.gamma_true;
  j["seed_true"] = row.seed_true;
  return j;
}

std::string run_json_text(const SweepRow& row, int replicate,
                          std::uint64_t run_seed,
                          const OptimizationTrace& trace) {
  json j;
  j["row"] = row.row_index;
  j["replicate"] = replicate;
  j["run_seed"] = std::to_string(run_seed);
  j["config"] = config_json(row);
  j["seedset"] = trace.seedset;
  j["warnings"] = trace.warnings;
  j["n_evaluations"] = trace.evaluations.size();
  json spec;
  spec["family"] = to_string(trace.final_spec.family);
  spec["lengthscales"] = std::vector<double>(
      trace.final_spec.lengthscales.data(),
      trace.final_spec.lengthscales.data() + trace.final_spec.lengthscales.size());
  spec["signal_variance"] = trace.final_spec.signal_variance;
  spec["nugget"] = trace.final_spec.nugget;
  spec["seed_rho"] = trace.final_spec.seed_rho;
  j["final_kernel"] = spec;
  return j.dump(2) + "\n";
}

}  // namespace

int run_experiments(const std::vector<SweepRow>& sweep,
                    const HarnessOptions& options, std::ostream& progress) {
  if (sweep.empty()) throw ConfigError("run_experiments: empty sweep");
  fs::create_directories(options.out_dir);

  std::vector<RunTask> tasks;
  for (const auto& row : sweep) {
    for (int rep = 1; rep <= row.replicates; ++rep) {
      char stem[128];
      std::snprintf(stem, sizeof(stem), "run_r%03d_%s_rep%03d", row.row_index,
                    to_string(row.config.method).c_str(), rep);
      tasks.push_back({&row, rep, stem,
                       derive_run_seed(options.master_seed, row.row_index,
                                       row.config.method, rep)});
    }
  }

  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  const int workers = options.parallelism > 0
                          ? options.parallelism
                          : std::max(1, hw);

  struct Status {
    bool done = false;
    bool ok = false;
    std::string error;
  };
  std::vector<Status> status(tasks.size());
  std::atomic<std::size_t> next{0};
  std::mutex progress_mutex;

  auto worker = [&]() {
    // Within-run batches only parallelize when runs themselves are serial.
    parallel::set_enabled(workers == 1);
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= tasks.size()) return;
      const RunTask& task = tasks[k];
      Status& st = status[k];
      st.done = true;
      try {
        TsConfig config = task.row->config;
        config.master_seed = task.run_seed;

        SimulatorFn simulator;
        Trajectory observed;
        if (options.plugin_path.empty()) {
          SirConfig base;
          simulator = sir_simulator(base);
          SirConfig truth;
          truth.beta = task.row->beta_true;
          truth.gamma = task.row->gamma_true;
          truth.seed = task.row->seed_true;
          observed = simulate_sir(truth);
        } else {
          PluginHandle plugin{options.plugin_path, 300.0};
          simulator = [plugin](const std::vector<double>& x_raw,
                               std::int64_t seed) {
            Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(
                x_raw.data(), static_cast<Eigen::Index>(x_raw.size()));
            return external_simulate(plugin, x, seed);
          };
          Eigen::VectorXd x_true(2);
          x_true << task.row->beta_true, task.row->gamma_true;
          observed = external_simulate(plugin, x_true, task.row->seed_true);
        }

        const OptimizationTrace trace = run_ts(config, simulator, observed);

        const fs::path dir(options.out_dir);
        atomic_write(dir / (task.stem + ".csv"),
                     trace_csv_text(*task.row, trace));
        atomic_write(dir / (task.stem + ".json"),
                     run_json_text(*task.row, task.replicate, task.run_seed,
                                   trace));
        st.ok = true;
        std::lock_guard<std::mutex> lock(progress_mutex);
        progress << "[ok] " << task.stem << " (" << trace.evaluations.size()
                 << " evaluations)\n";
      } catch (const std::exception& e) {
        st.ok = false;
        st.error = e.what();
        std::lock_guard<std::mutex> lock(progress_mutex);
        progress << "[failed] " << task.stem << ": " << e.what() << "\n";
      }
    }
  };

  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  json manifest;
  manifest["master_seed"] = std::to_string(options.master_seed);
  manifest["simulator"] =
      options.plugin_path.empty() ? std::string("sir") : options.plugin_path;
  json runs = json::array();
  bool all_ok = true;
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    const RunTask& task = tasks[k];
    json entry;
    entry["row"] = task.row->row_index;
    entry["method"] = to_string(task.row->config.method);
    entry["replicate"] = task.replicate;
    entry["run_seed"] = std::to_string(task.run_seed);
    entry["trace_csv"] = task.stem + ".csv";
    entry["run_json"] = task.stem + ".json";
    entry["config"] = config_json(*task.row);
    entry["status"] = status[k].ok ? "ok" : "failed";
    if (!status[k].ok) {
      entry["error"] = status[k].error;
      all_ok = false;
    }
    runs.push_back(std::move(entry));
  }
  manifest["runs"] = runs;
  atomic_write(fs::path(options.out_dir) / "manifest.json",
               manifest.dump(2) + "\n");
  return all_ok ? 0 : 1;
}

namespace {

struct LoadedRun {
  json entry;
  std::vector<std::string> param_names;
  std::vector<std::vector<double>> params;  // one vector per evaluation
  std::vector<std::int64_t> seeds;
  std::vector<int> iterations;
  std::vector<double> discrepancies;
  std::vector<int> failed;
};

LoadedRun load_run_csv(const fs::path& path, const json& entry) {
  std::ifstream in(path);
  if (!in) throw ConfigError("missing run file: " + path.string());
  std::string line;
  if (!std::getline(in, line)) {
    throw ConfigError("empty run file: " + path.string());
  }
  const auto header = csv::split(line, ',');
  if (header.size() < 5 || header[0] != "eval_index" ||
      header[1] != "iteration" || header[header.size() - 3] != "seed" ||
      header[header.size() - 2] != "discrepancy" ||
      header.back() != "failed") {
    throw ConfigError("unexpected run file header: " + path.string());
  }
  LoadedRun run;
  run.entry = entry;
  run.param_names.assign(header.begin() + 2, header.end() - 3);
  int expected_index = 1;
  while (std::getline(in, line)) {
    if (csv::trim(line).empty()) continue;
    const auto fields = csv::split(line, ',');
    if (fields.size() != header.size()) {
      throw ConfigError("ragged row in " + path.string());
    }
    if (std::stoi(fields[0]) != expected_index++) {
      throw ConfigError("non-sequential evaluation index in " + path.string());
    }
    run.iterations.push_back(std::stoi(fields[1]));
    std::vector<double> x;
    for (std::size_t k = 0; k < run.param_names.size(); ++k) {
      x.push_back(std::stod(fields[2 + k]));
    }
    run.params.push_back(std::move(x));
    run.seeds.push_back(std::stoll(fields[fields.size() - 3]));
    run.discrepancies.push_back(std::stod(fields[fields.size() - 2]));
    run.failed.push_back(std::stoi(fields.back()));
  }
  return run;
}

}  // namespace

int emit_report(const std::string& in_dir,
                const std::vector<double>& thresholds,
                const std::string& summary_csv, const std::string& evals_csv,
                std::ostream& diagnostics) {
  const fs::path dir(in_dir);
  std::ifstream mf(dir / "manifest.json");
  if (!mf) throw ConfigError("no manifest.json in " + in_dir);
  json manifest;
  try {
    mf >> manifest;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("corrupt manifest.json: ") + e.what());
  }

  std::vector<LoadedRun> runs;
  int skipped = 0;
  for (const auto& entry : manifest.at("runs")) {
    if (entry.at("status").get<std::string>() != "ok") {
      diagnostics << "[report] skipping failed run "
                  << entry.at("trace_csv").get<std::string>() << "\n";
      ++skipped;
      continue;
    }
    try {
      runs.push_back(
          load_run_csv(dir / entry.at("trace_csv").get<std::string>(), entry));
    } catch (const std::exception& e) {
      diagnostics << "[report] " << e.what() << "\n";
      ++skipped;
    }
  }
  if (runs.empty()) throw ConfigError("report: no readable runs in " + in_dir);

  std::string summary =
      "row,method,replicate,Nmax,n_init,n_rep,n_TS,M,beta_true,gamma_true,"
      "seed_true,threshold,count,proportion,rauc\n";
  for (const auto& run : runs) {
    const json& cfg = run.entry.at("config");
    const int budget = cfg.at("Nmax").get<int>();
    const QualityReport rep =
        quality_report(run.discrepancies, thresholds, budget);
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      summary += run.entry.at("row").dump() + "," +
                 cfg.at("method").get<std::string>() + "," +
                 run.entry.at("replicate").dump() + "," +
                 std::to_string(budget) + "," + cfg.at("n_init").dump() + "," +
                 cfg.at("n_rep").dump() + "," + cfg.at("n_TS").dump() + "," +
                 cfg.at("M").dump() + "," +
                 csv::fmt17(cfg.at("beta_true").get<double>()) + "," +
                 csv::fmt17(cfg.at("gamma_true").get<double>()) + "," +
                 cfg.at("seed_true").dump() + "," +
                 csv::fmt17(thresholds[t]) + "," +
                 std::to_string(rep.counts[t]) + "," +
                 csv::fmt17(rep.proportions[t]) + "," +
                 csv::fmt17(rep.raucs[t]) + "\n";
    }
  }
  atomic_write(summary_csv, summary);

  if (!evals_csv.empty()) {
    std::string evals = "row,method,replicate,eval_index,iteration";
    for (const auto& name : runs.front().param_names) evals += "," + name;
    evals += ",seed,discrepancy,failed\n";
    for (const auto& run : runs) {
      for (std::size_t i = 0; i < run.discrepancies.size(); ++i) {
        evals += run.entry.at("row").dump() + "," +
                 run.entry.at("config").at("method").get<std::string>() + "," +
                 run.entry.at("replicate").dump() + "," +
                 std::to_string(i + 1) + "," +
                 std::to_string(run.iterations[i]);
        for (double v : run.params[i]) evals += "," + csv::fmt17(v);
        evals += "," + std::to_string(run.seeds[i]) + "," +
                 csv::fmt17(run.discrepancies[i]) + "," +
                 std::to_string(run.failed[i]) + "\n";
      }
    }
    atomic_write(evals_csv, evals);
  }
  return skipped == 0 ? 0 : 1;
}

}  // namespace trajopt
