#pragma once

#include <string>
#include <vector>

#include "trajopt/optimizer.hpp"

namespace trajopt {

// One experiment: a full optimizer configuration plus how often to replicate
// it. Rows come from the sweep CSV; a row listing several methods expands
// into one SweepRow per method.
struct SweepRow {
  int row_index = 0;  // 1-based CSV data row
  TsConfig config;
  int replicates = 10;
  double beta_true = 0.7;
  double gamma_true = 0.2;
  std::int64_t seed_true = 50;
};

// Sweep CSV columns (header required, order free):
//   method, Nmax, n_init, n_rep, n_TS, M, replicates, beta_true, gamma_true,
//   seed_true
// method accepts a single name, a '|'-separated list, or 'all'. Only method
// and Nmax are required; the rest default as in SweepRow/TsConfig. Unknown
// columns are rejected. Errors name the offending row and column.
std::vector<SweepRow> parse_sweep(const std::string& path);

}  // namespace trajopt
