#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "trajopt/errors.hpp"

namespace trajopt {

// The atomic search point: a parameter vector on the unit cube plus a
// replicate identifier. The seed is a categorical coordinate, never a
// distance-scaled one.
struct AugmentedInput {
  Eigen::VectorXd x;
  std::int64_t seed = 0;

  bool operator==(const AugmentedInput& o) const {
    if (seed != o.seed || x.size() != o.x.size()) return false;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (x[i] != o.x[i]) return false;
    }
    return true;
  }
};

// Bitwise hash over the coordinates; equality above is exact, so this is
// consistent with it.
struct AugmentedInputHash {
  std::size_t operator()(const AugmentedInput& p) const;
};

// One seeded simulator realization: time-indexed named output series plus the
// raw-parameter/seed pair that produced it. Simulators are deterministic in
// (params, seed), so provenance is enough to regenerate the series.
struct Trajectory {
  std::vector<int> times;
  std::map<std::string, std::vector<double>> outputs;
  std::vector<double> params;
  std::int64_t seed = 0;

  const std::vector<double>& series(const std::string& name) const {
    auto it = outputs.find(name);
    if (it == outputs.end()) {
      throw ShapeError("trajectory has no output series named '" + name + "'");
    }
    return it->second;
  }
};

}  // namespace trajopt
