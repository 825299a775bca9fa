#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <unordered_set>
#include <vector>

#include "trajopt/crngp.hpp"
#include "trajopt/grid.hpp"
#include "trajopt/het.hpp"
#include "trajopt/sir.hpp"

namespace trajopt {

// The five search variants: surrogate x grid-adaptivity x seed policy.
enum class Method { aCRN, fCRN, fgCRN, aHet, fHet };

std::string to_string(Method method);
Method method_from_string(const std::string& name);
bool method_uses_crn(Method method);   // aCRN, fCRN, fgCRN
bool method_is_adaptive(Method method);  // aCRN, aHet

struct ParamDomain {
  std::string name;
  double lo = 0.0;
  double hi = 1.0;
};

struct TsConfig {
  int nmax = 300;       // total simulation budget
  int n_init = 5;       // unique parameter points in the initial design
  int n_rep = 10;       // replicates per initial point; seed-set size
  int batch_size = 10;  // trajectories sampled per TS iteration
  int grid_size = 100;  // candidate grid size M
  Method method = Method::aCRN;
  std::vector<ParamDomain> domain = {{"beta", 0.01, 1.0}, {"gamma", 0.01, 1.0}};
  KernelFamily kernel = KernelFamily::Matern52;

  // sigma_obs = max(floor, factor * sd of observed discrepancies), unless
  // fixed > 0 pins it outright.
  double sigma_obs_factor = 0.1;
  double sigma_obs_floor = 1e-6;
  double sigma_obs_fixed = 0.0;

  ProposalSpec proposal;
  std::uint64_t master_seed = 1;

  std::string objective_series = "I";
  bool use_dual_objective = false;
  std::array<std::string, 2> dual_series = {"h", "d"};

  // Hyperparameters refit every iteration up to this many training points,
  // then every refit_every iterations; the posterior always sees new data.
  int refit_full_until = 200;
  int refit_every = 5;
  std::size_t joint_sample_cap = 200000;

  int n0() const { return n_init * n_rep; }
  int dims() const { return static_cast<int>(domain.size()); }
  void validate() const;
  std::vector<double> to_raw(const Eigen::VectorXd& unit) const;
};

struct Evaluation {
  int index = 0;      // 1-based position in the trace
  int iteration = 0;  // 0 for the initial design
  AugmentedInput input;           // unit-cube x
  std::vector<double> x_raw;      // domain-scale parameters
  double discrepancy = 0.0;       // +inf for failed evaluations
  bool failed = false;
  double wall_seconds = 0.0;  // in-memory diagnostics, never serialized
};

struct OptimizationTrace {
  std::vector<Evaluation> evaluations;
  KernelSpec final_spec;
  std::vector<std::int64_t> seedset;
  std::vector<std::string> warnings;

  std::vector<double> discrepancies() const;
};

// Maps domain-scale parameters and a seed to one trajectory.
using SimulatorFn = std::function<Trajectory(const std::vector<double>& x_raw,
                                             std::int64_t seed)>;

// In-process stochastic SIR simulator over (beta, gamma).
SimulatorFn sir_simulator(SirConfig base);

std::vector<std::int64_t> make_seedset(int count, Rng& rng);

// Fixed-seed methods: n_init LHS points crossed with the full seed set.
// Het methods: each LHS point paired with n_rep freshly drawn seeds.
std::vector<AugmentedInput> initial_design(
    const TsConfig& config, const std::vector<std::int64_t>& seedset, Rng& rng);

using EvaluatedSet = std::unordered_set<AugmentedInput, AugmentedInputHash>;

// Per-draw argmin over the grid, skipping evaluated points; a draw whose
// minimizer collides with an earlier pick in the batch takes its next-best
// point; ties break toward the lowest grid index. Returns grid indices, at
// most max_select of them (fewer only when candidates run out).
std::vector<int> select_batch(const std::vector<Eigen::VectorXd>& draws,
                              const CandidateGrid& grid,
                              const EvaluatedSet& evaluated, int max_select);

// The full Thompson-Sampling loop: initial design, surrogate fit, then
// filter/densify (adaptive methods), joint draws, batch selection, concurrent
// evaluation, refit, until the budget is spent. Deterministic given the
// master seed and a deterministic simulator.
OptimizationTrace run_ts(const TsConfig& config, const SimulatorFn& simulator,
                         const Trajectory& observed);

}  // namespace trajopt
