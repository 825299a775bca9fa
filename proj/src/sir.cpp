#include "trajopt/sir.hpp"

#include <cmath>
#include <string>

#include "trajopt/parallel.hpp"
#include "trajopt/rng.hpp"

namespace trajopt {

void SirConfig::validate() const {
  if (population < 0 || s0 < 0 || i0 < 0 || r0 < 0) {
    throw ConfigError("SIR config: compartment counts must be nonnegative");
  }
  if (s0 + i0 + r0 != population) {
    throw ConfigError("SIR config: S0 + I0 + R0 = " +
                      std::to_string(s0 + i0 + r0) + " but N = " +
                      std::to_string(population));
  }
  if (horizon < 1) throw ConfigError("SIR config: horizon must be >= 1");
  if (!(beta >= 0.0)) throw ConfigError("SIR config: beta must be >= 0");
  if (!(gamma >= 0.0)) throw ConfigError("SIR config: gamma must be >= 0");
}

Trajectory simulate_sir(const SirConfig& config) {
  config.validate();

  // Private stream keyed on the seed alone; the seed is hashed so that
  // consecutive seed values give unrelated streams.
  Rng rng(derive_seed(0x5349525F53494DULL, "sir-stream",
                      static_cast<std::uint64_t>(config.seed), 0));

  const long n = config.population;
  long s = config.s0;
  long i = config.i0;
  long r = config.r0;

  Trajectory traj;
  traj.params = {config.beta, config.gamma};
  traj.seed = config.seed;
  traj.times.resize(config.horizon + 1);
  auto& S = traj.outputs["S"];
  auto& I = traj.outputs["I"];
  auto& R = traj.outputs["R"];
  S.reserve(config.horizon + 1);
  I.reserve(config.horizon + 1);
  R.reserve(config.horizon + 1);

  const double p_recover =
      config.gamma > 0.0 ? -std::expm1(-config.gamma) : 0.0;

  for (int t = 0; t <= config.horizon; ++t) {
    traj.times[t] = t;
    S.push_back(static_cast<double>(s));
    I.push_back(static_cast<double>(i));
    R.push_back(static_cast<double>(r));
    if (t == config.horizon) break;

    const double p_infect =
        config.beta > 0.0
            ? -std::expm1(-config.beta * static_cast<double>(i) /
                          static_cast<double>(n))
            : 0.0;
    const int x = binomial(rng, static_cast<int>(s), p_infect);
    const int y = binomial(rng, static_cast<int>(i), p_recover);
    s -= x;
    i += x - y;
    r += y;
  }
  return traj;
}

std::vector<Trajectory> simulate_sir_batch(std::span<const SirConfig> configs) {
  std::vector<Trajectory> out(configs.size());
#pragma omp parallel for schedule(dynamic) if (parallel::enabled())
  for (long k = 0; k < static_cast<long>(configs.size()); ++k) {
    out[k] = simulate_sir(configs[k]);
  }
  return out;
}

namespace serial {
std::vector<Trajectory> simulate_sir_batch(std::span<const SirConfig> configs) {
  std::vector<Trajectory> out(configs.size());
  for (std::size_t k = 0; k < configs.size(); ++k) {
    out[k] = simulate_sir(configs[k]);
  }
  return out;
}
}  // namespace serial

}  // namespace trajopt
