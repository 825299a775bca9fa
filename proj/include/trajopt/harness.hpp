#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "trajopt/sweep.hpp"

namespace trajopt {

struct HarnessOptions {
  std::string out_dir;
  int parallelism = 0;  // 0 means number of available processors
  std::uint64_t master_seed = 20240807;
  std::string plugin_path;  // empty runs the in-process SIR simulator
};

// Replicate master seed as a pure function of the derivation tuple; distinct
// (row, method, replicate) tuples give distinct streams.
std::uint64_t derive_run_seed(std::uint64_t master, int row_index,
                              Method method, int replicate);

// Executes every (row, replicate) run on a bounded worker pool. Each run
// writes a per-evaluation CSV and a run JSON via temp-file-then-rename, so an
// interrupted run leaves no partial output. A manifest file lists every run
// with its status. Returns nonzero iff any run failed.
int run_experiments(const std::vector<SweepRow>& sweep,
                    const HarnessOptions& options, std::ostream& progress);

// Joins run traces with the quality metrics: one summary row per
// (run, threshold), plus a combined per-evaluation long-format file.
// Missing or corrupt run files are reported, skipped, and make the exit
// status nonzero.
int emit_report(const std::string& in_dir,
                const std::vector<double>& thresholds,
                const std::string& summary_csv, const std::string& evals_csv,
                std::ostream& diagnostics);

}  // namespace trajopt
