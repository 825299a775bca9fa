#include "trajopt/sweep.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>

#include "trajopt/csv.hpp"

namespace trajopt {

namespace {

using csv::split;
using csv::trim;

const std::vector<std::string> kKnownColumns = {
    "method",     "Nmax",       "n_init",     "n_rep",    "n_TS",
    "M",          "replicates", "beta_true",  "gamma_true", "seed_true"};

long parse_long(const std::string& value, int row, const std::string& column) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("sweep row " + std::to_string(row) + ", column '" +
                      column + "': cannot parse integer from '" + value + "'");
  }
}

double parse_double(const std::string& value, int row,
                    const std::string& column) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("sweep row " + std::to_string(row) + ", column '" +
                      column + "': cannot parse number from '" + value + "'");
  }
}

std::vector<Method> parse_methods(const std::string& value, int row) {
  if (value == "all") {
    return {Method::aCRN, Method::fCRN, Method::fgCRN, Method::aHet,
            Method::fHet};
  }
  std::vector<Method> methods;
  for (const std::string& name : split(value, '|')) {
    try {
      methods.push_back(method_from_string(name));
    } catch (const ConfigError&) {
      throw ConfigError("sweep row " + std::to_string(row) +
                        ", column 'method': unknown method '" + name + "'");
    }
  }
  if (methods.empty()) {
    throw ConfigError("sweep row " + std::to_string(row) +
                      ", column 'method': empty method list");
  }
  return methods;
}

}  // namespace

std::vector<SweepRow> parse_sweep(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("sweep file not found: " + path);

  std::string header_line;
  if (!std::getline(in, header_line)) {
    throw ConfigError("sweep file is empty (no header): " + path);
  }
  const std::vector<std::string> header = split(header_line, ',');
  std::unordered_map<std::string, int> column_of;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string& name = header[i];
    if (std::find(kKnownColumns.begin(), kKnownColumns.end(), name) ==
        kKnownColumns.end()) {
      throw ConfigError("sweep header: unknown column '" + name + "'");
    }
    if (!column_of.emplace(name, static_cast<int>(i)).second) {
      throw ConfigError("sweep header: duplicate column '" + name + "'");
    }
  }
  for (const char* required : {"method", "Nmax"}) {
    if (!column_of.count(required)) {
      throw ConfigError("sweep header: missing required column '" + required +
                        "'");
    }
  }

  std::vector<SweepRow> rows;
  std::string line;
  int row_index = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row_index;
    const std::vector<std::string> fields = split(line, ',');
    if (fields.size() != header.size()) {
      throw ConfigError("sweep row " + std::to_string(row_index) + ": has " +
                        std::to_string(fields.size()) + " fields, header has " +
                        std::to_string(header.size()));
    }
    auto field = [&](const std::string& name) -> const std::string* {
      auto it = column_of.find(name);
      if (it == column_of.end()) return nullptr;
      return &fields[static_cast<std::size_t>(it->second)];
    };

    SweepRow base;
    base.row_index = row_index;
    base.config.nmax =
        static_cast<int>(parse_long(*field("Nmax"), row_index, "Nmax"));
    if (const auto* v = field("n_init"); v && !v->empty()) {
      base.config.n_init = static_cast<int>(parse_long(*v, row_index, "n_init"));
    }
    if (const auto* v = field("n_rep"); v && !v->empty()) {
      base.config.n_rep = static_cast<int>(parse_long(*v, row_index, "n_rep"));
    }
    if (const auto* v = field("n_TS"); v && !v->empty()) {
      base.config.batch_size =
          static_cast<int>(parse_long(*v, row_index, "n_TS"));
    }
    if (const auto* v = field("M"); v && !v->empty()) {
      base.config.grid_size = static_cast<int>(parse_long(*v, row_index, "M"));
    }
    if (const auto* v = field("replicates"); v && !v->empty()) {
      base.replicates =
          static_cast<int>(parse_long(*v, row_index, "replicates"));
    }
    if (const auto* v = field("beta_true"); v && !v->empty()) {
      base.beta_true = parse_double(*v, row_index, "beta_true");
    }
    if (const auto* v = field("gamma_true"); v && !v->empty()) {
      base.gamma_true = parse_double(*v, row_index, "gamma_true");
    }
    if (const auto* v = field("seed_true"); v && !v->empty()) {
      base.seed_true = parse_long(*v, row_index, "seed_true");
    }
    if (base.replicates < 1) {
      throw ConfigError("sweep row " + std::to_string(row_index) +
                        ", column 'replicates': must be >= 1");
    }

    for (Method method : parse_methods(*field("method"), row_index)) {
      SweepRow row = base;
      row.config.method = method;
      try {
        row.config.validate();
      } catch (const ConfigError& e) {
        throw ConfigError("sweep row " + std::to_string(row_index) + ": " +
                          e.what());
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace trajopt
