#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "trajopt/types.hpp"

namespace trajopt {

// Discrete-time stochastic SIR chain-binomial configuration. One unit time
// step per transition draw; the seed fully determines the random stream.
struct SirConfig {
  long population = 1010;
  long s0 = 1000;
  long i0 = 10;
  long r0 = 0;
  int horizon = 100;
  double beta = 0.04;
  double gamma = 0.425;
  std::int64_t seed = 0;

  void validate() const;  // throws ConfigError
};

// Runs the chain S_{t+1} = S_t - X_t, I_{t+1} = I_t + X_t - Y_t,
// R_{t+1} = R_t + Y_t with X_t ~ Binom(S_t, 1-exp(-beta I_t/N)) and
// Y_t ~ Binom(I_t, 1-exp(-gamma)), X_t drawn before Y_t each step.
// Pure function of the config: identical configs give identical trajectories.
Trajectory simulate_sir(const SirConfig& config);

// Batch of independent trajectories, parallel over configs.
std::vector<Trajectory> simulate_sir_batch(std::span<const SirConfig> configs);

namespace serial {
// Reference single-threaded batch, kept for testing against the parallel one.
std::vector<Trajectory> simulate_sir_batch(std::span<const SirConfig> configs);
}  // namespace serial

}  // namespace trajopt
