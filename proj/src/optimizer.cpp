#include "trajopt/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <unordered_map>

#include "trajopt/metrics.hpp"
#include "trajopt/parallel.hpp"

namespace trajopt {

std::string to_string(Method method) {
  switch (method) {
    case Method::aCRN:
      return "aCRN";
    case Method::fCRN:
      return "fCRN";
    case Method::fgCRN:
      return "fgCRN";
    case Method::aHet:
      return "aHet";
    case Method::fHet:
      return "fHet";
  }
  return "unknown";
}

Method method_from_string(const std::string& name) {
  if (name == "aCRN") return Method::aCRN;
  if (name == "fCRN") return Method::fCRN;
  if (name == "fgCRN") return Method::fgCRN;
  if (name == "aHet") return Method::aHet;
  if (name == "fHet") return Method::fHet;
  throw ConfigError("unknown method '" + name + "'");
}

bool method_uses_crn(Method method) {
  return method == Method::aCRN || method == Method::fCRN ||
         method == Method::fgCRN;
}

bool method_is_adaptive(Method method) {
  return method == Method::aCRN || method == Method::aHet;
}

void TsConfig::validate() const {
  if (domain.empty()) throw ConfigError("config: empty parameter domain");
  for (const auto& p : domain) {
    if (!(p.lo < p.hi)) {
      throw ConfigError("config: domain for '" + p.name + "' must have lo < hi");
    }
  }
  if (n_init < 1 || n_rep < 1) {
    throw ConfigError("config: n_init and n_rep must be >= 1");
  }
  if (n0() > nmax) {
    throw ConfigError("config: initial budget n_init*n_rep = " +
                      std::to_string(n0()) + " exceeds Nmax = " +
                      std::to_string(nmax));
  }
  if (batch_size < 1) throw ConfigError("config: batch size must be >= 1");
  if (grid_size < 1) throw ConfigError("config: grid size must be >= 1");
  if (!(sigma_obs_factor > 0.0) && !(sigma_obs_fixed > 0.0)) {
    throw ConfigError("config: sigma_obs rule must be positive");
  }
}

std::vector<double> TsConfig::to_raw(const Eigen::VectorXd& unit) const {
  std::vector<double> raw(domain.size());
  for (std::size_t k = 0; k < domain.size(); ++k) {
    raw[k] = domain[k].lo +
             unit[static_cast<Eigen::Index>(k)] * (domain[k].hi - domain[k].lo);
  }
  return raw;
}

std::vector<double> OptimizationTrace::discrepancies() const {
  std::vector<double> out;
  out.reserve(evaluations.size());
  for (const auto& e : evaluations) out.push_back(e.discrepancy);
  return out;
}

SimulatorFn sir_simulator(SirConfig base) {
  return [base](const std::vector<double>& x_raw,
                std::int64_t seed) -> Trajectory {
    if (x_raw.size() != 2) {
      throw ConfigError("sir simulator expects (beta, gamma)");
    }
    SirConfig c = base;
    c.beta = x_raw[0];
    c.gamma = x_raw[1];
    c.seed = seed;
    return simulate_sir(c);
  };
}

std::vector<std::int64_t> make_seedset(int count, Rng& rng) {
  std::unordered_set<std::int64_t> seen;
  std::vector<std::int64_t> seeds;
  seeds.reserve(count);
  while (static_cast<int>(seeds.size()) < count) {
    const auto s = static_cast<std::int64_t>(rng.below(1u << 31));
    if (seen.insert(s).second) seeds.push_back(s);
  }
  return seeds;
}

std::vector<AugmentedInput> initial_design(
    const TsConfig& config, const std::vector<std::int64_t>& seedset,
    Rng& rng) {
  const auto xs = lhs_points(config.n_init, config.dims(), rng);
  std::vector<AugmentedInput> design;
  design.reserve(static_cast<std::size_t>(config.n0()));
  if (method_uses_crn(config.method)) {
    if (static_cast<int>(seedset.size()) != config.n_rep) {
      throw ConfigError("initial_design: seed set size must equal n_rep");
    }
    for (const auto& x : xs) {
      for (std::int64_t s : seedset) design.push_back({x, s});
    }
  } else {
    for (const auto& x : xs) {
      std::unordered_set<std::int64_t> used;
      while (static_cast<int>(used.size()) < config.n_rep) {
        const auto s = static_cast<std::int64_t>(rng.below(1u << 31));
        if (used.insert(s).second) design.push_back({x, s});
      }
    }
  }
  return design;
}

std::vector<int> select_batch(const std::vector<Eigen::VectorXd>& draws,
                              const CandidateGrid& grid,
                              const EvaluatedSet& evaluated, int max_select) {
  const long m = static_cast<long>(grid.size());
  std::vector<bool> taken(grid.size(), false);
  std::vector<int> picked;
  for (const auto& draw : draws) {
    if (static_cast<int>(picked.size()) >= max_select) break;
    if (draw.size() != m) {
      throw ShapeError("select_batch: draw length does not match grid");
    }
    int best = -1;
    double best_value = std::numeric_limits<double>::infinity();
    for (long g = 0; g < m; ++g) {
      if (taken[static_cast<std::size_t>(g)]) continue;
      if (evaluated.count(grid.points()[static_cast<std::size_t>(g)])) continue;
      if (draw[g] < best_value) {
        best_value = draw[g];
        best = static_cast<int>(g);
      }
    }
    if (best < 0) break;  // nothing left to pick
    taken[static_cast<std::size_t>(best)] = true;
    picked.push_back(best);
  }
  return picked;
}

namespace {

// Surrogate state shared by the loop: either a CRN predictor over (x, r) or
// a stochastic-kriging predictor over x.
struct Surrogate {
  bool crn = true;
  KernelSpec spec;
  std::unique_ptr<CrnPredictor> crn_predictor;
  std::unique_ptr<HetPredictor> het_predictor;
};

double finite_sd(const std::vector<double>& values) {
  std::vector<double> finite;
  for (double v : values) {
    if (std::isfinite(v)) finite.push_back(v);
  }
  if (finite.size() < 2) return 0.0;
  double mean = 0.0;
  for (double v : finite) mean += v;
  mean /= static_cast<double>(finite.size());
  double ss = 0.0;
  for (double v : finite) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(finite.size() - 1));
}

struct BatchOutcome {
  AugmentedInput input;
  std::vector<double> x_raw;
  double discrepancy = 0.0;
  bool failed = false;
  double wall_seconds = 0.0;
};

}  // namespace

OptimizationTrace run_ts(const TsConfig& config, const SimulatorFn& simulator,
                         const Trajectory& observed) {
  config.validate();

  // Observed series the discrepancy is computed against.
  std::vector<double> obs_primary;
  std::vector<double> obs_secondary;
  if (config.use_dual_objective) {
    obs_primary = observed.series(config.dual_series[0]);
    obs_secondary = observed.series(config.dual_series[1]);
  } else {
    obs_primary = observed.series(config.objective_series);
  }
  if (obs_primary.empty()) {
    throw ConfigError("run_ts: observed series is empty");
  }

  OptimizationTrace trace;
  bool dual_warned = false;
  auto discrepancy_of = [&](const Trajectory& t) -> double {
    if (config.use_dual_objective) {
      bool dropped = false;
      const double v = dual_objective(t.series(config.dual_series[0]),
                                      t.series(config.dual_series[1]),
                                      obs_primary, obs_secondary, &dropped);
      if (dropped && !dual_warned) {
        dual_warned = true;
        trace.warnings.push_back(
            "dual objective dropped zero-valued observation terms");
      }
      return v;
    }
    return rmse(t.series(config.objective_series), obs_primary);
  };

  Rng root(config.master_seed);
  Rng rng_seedset = root.substream("seedset");
  Rng rng_design = root.substream("initial-design");
  Rng rng_fit = root.substream("fit");
  Rng rng_grid = root.substream("grid");
  Rng rng_ts = root.substream("thompson");
  Rng rng_assign = root.substream("seed-assign");

  const bool crn = method_uses_crn(config.method);
  trace.seedset = make_seedset(config.n_rep, rng_seedset);

  EvaluationDataset dataset;
  EvaluatedSet evaluated;
  bool failed_warned = false;

  // Runs a batch of points through the simulator concurrently. Results are
  // collected by slot, so completion order never shows in the trace.
  auto evaluate_batch =
      [&](const std::vector<AugmentedInput>& points) -> std::vector<BatchOutcome> {
    std::vector<BatchOutcome> out(points.size());
#pragma omp parallel for schedule(dynamic) if (parallel::enabled())
    for (long i = 0; i < static_cast<long>(points.size()); ++i) {
      BatchOutcome& slot = out[static_cast<std::size_t>(i)];
      slot.input = points[static_cast<std::size_t>(i)];
      slot.x_raw = config.to_raw(slot.input.x);
      const auto t0 = std::chrono::steady_clock::now();
      for (int attempt = 0; attempt < 2; ++attempt) {
        try {
          const Trajectory traj = simulator(slot.x_raw, slot.input.seed);
          slot.discrepancy = discrepancy_of(traj);
          slot.failed = false;
          break;
        } catch (const SimulatorError&) {
          slot.failed = true;
          slot.discrepancy = std::numeric_limits<double>::infinity();
        } catch (const ShapeError&) {
          slot.failed = true;
          slot.discrepancy = std::numeric_limits<double>::infinity();
        }
      }
      slot.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();
    }
    return out;
  };

  int iteration = 0;
  auto append_outcomes = [&](const std::vector<BatchOutcome>& outcomes) {
    for (const auto& o : outcomes) {
      Evaluation e;
      e.index = static_cast<int>(trace.evaluations.size()) + 1;
      e.iteration = iteration;
      e.input = o.input;
      e.x_raw = o.x_raw;
      e.discrepancy = o.discrepancy;
      e.failed = o.failed;
      e.wall_seconds = o.wall_seconds;
      trace.evaluations.push_back(std::move(e));
      evaluated.insert(o.input);
      if (o.failed) {
        if (!failed_warned) {
          failed_warned = true;
          trace.warnings.push_back("simulator failures recorded with infinite discrepancy");
        }
      } else {
        dataset.add(o.input, o.discrepancy);
      }
    }
  };

  // Initial design.
  append_outcomes(evaluate_batch(initial_design(config, trace.seedset, rng_design)));

  // Surrogate.
  Surrogate surrogate;
  surrogate.crn = crn;
  surrogate.spec.family = config.kernel;
  surrogate.spec.lengthscales = Eigen::VectorXd::Constant(config.dims(), 0.5);
  bool have_fit = false;
  bool fallback_warned = false;

  auto refit = [&](bool tune_hyperparameters) {
    dataset.refresh_standardization();
    if (tune_hyperparameters && dataset.size() >= 3) {
      FitBounds bounds;
      FitOptions options;
      options.fit_rho = crn;
      if (have_fit) {
        options.starts = 1;
        options.warm_start = &surrogate.spec;
      }
      std::vector<Eigen::VectorXd> xs;
      xs.reserve(dataset.size());
      for (const auto& p : dataset.inputs()) xs.push_back(p.x);
      KernelSpec fitted;
      if (crn) {
        auto objective = [&](const KernelSpec& s) {
          return crn_log_marginal_likelihood(dataset, s);
        };
        fitted = fit_kernel(objective, xs, config.kernel, bounds, rng_fit,
                            options);
      } else {
        const AggregatedDesign design = aggregate_replicates(dataset);
        fitted = fit_het_hyperparameters(design, config.kernel, bounds,
                                         rng_fit, options);
      }
      if (fitted.fit_warning && !fallback_warned) {
        fallback_warned = true;
        trace.warnings.push_back("hyperparameter fit fell back to heuristics");
      }
      surrogate.spec = fitted;
      have_fit = true;
    }
    if (crn) {
      surrogate.crn_predictor =
          std::make_unique<CrnPredictor>(dataset, surrogate.spec);
    } else {
      const AggregatedDesign design = aggregate_replicates(dataset);
      surrogate.het_predictor =
          std::make_unique<HetPredictor>(design, surrogate.spec);
    }
  };
  refit(true);

  auto sigma_obs_now = [&]() {
    if (config.sigma_obs_fixed > 0.0) return config.sigma_obs_fixed;
    return std::max(config.sigma_obs_floor,
                    config.sigma_obs_factor * finite_sd(dataset.responses()));
  };

  // Candidate grid. Het methods run the same machinery over x only, with a
  // single placeholder replicate id.
  const std::vector<std::int64_t> grid_seeds =
      crn ? trace.seedset : std::vector<std::int64_t>{0};
  CandidateGrid grid =
      lhs_grid(config.grid_size, config.dims(), grid_seeds, rng_grid);

  JointSampleOptions sample_options;
  sample_options.size_cap = config.joint_sample_cap;

  auto marginal_sampler = [&](const AugmentedInput& p, Rng& r) -> double {
    if (crn) return surrogate.crn_predictor->marginal_draw(p, r);
    return surrogate.het_predictor->marginal_draw(p.x, r);
  };

  // Assigns an unused random seed for a het evaluation at x, also avoiding
  // collisions within the current batch.
  auto fresh_seed_at = [&](const Eigen::VectorXd& x,
                           const EvaluatedSet& pending) -> std::int64_t {
    for (;;) {
      const auto s = static_cast<std::int64_t>(rng_assign.below(1u << 31));
      const AugmentedInput candidate{x, s};
      if (!evaluated.count(candidate) && !pending.count(candidate)) return s;
    }
  };

  int consecutive_exhausted = 0;
  bool stall_warned = false;

  while (static_cast<int>(trace.evaluations.size()) < config.nmax) {
    ++iteration;
    const int remaining = config.nmax - static_cast<int>(trace.evaluations.size());
    const int take = std::min(config.batch_size, remaining);
    const double sigma_obs = sigma_obs_now();

    // Grid adaptation: one shared surrogate draw scores the current grid for
    // filtering; densification scores off-grid proposals with marginal draws.
    if (method_is_adaptive(config.method)) {
      std::vector<double> d_samples;
      if (crn) {
        const auto draws = surrogate.crn_predictor->joint_sample(
            grid.points(), trace.seedset, 1, rng_grid, sample_options);
        d_samples.assign(draws[0].data(), draws[0].data() + draws[0].size());
      } else {
        d_samples.reserve(grid.size());
        for (const auto& p : grid.points()) {
          d_samples.push_back(
              surrogate.het_predictor->marginal_draw(p.x, rng_grid));
        }
      }
      std::vector<double> weights(grid.size());
      for (std::size_t i = 0; i < grid.size(); ++i) {
        weights[i] = likelihood_weight(d_samples[i], sigma_obs);
      }

      std::unordered_map<AugmentedInput, double, AugmentedInputHash> d_by_point;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        d_by_point.emplace(grid.points()[i], d_samples[i]);
      }
      CandidateGrid filtered = filter_grid(grid, weights, d_samples, rng_grid);
      std::vector<double> filtered_d;
      filtered_d.reserve(filtered.size());
      for (const auto& p : filtered.points()) {
        filtered_d.push_back(d_by_point.at(p));
      }
      DensifyResult densified =
          densify(filtered, filtered_d, marginal_sampler, config.proposal,
                  grid_seeds, sigma_obs, rng_grid);
      if (densified.stalled && !stall_warned) {
        stall_warned = true;
        trace.warnings.push_back(
            "densification stalled; grid completed with fresh LHS points");
      }
      grid = std::move(densified.grid);
    }

    // Thompson draws over the candidate grid.
    std::vector<Eigen::VectorXd> draws;
    if (crn) {
      draws = surrogate.crn_predictor->joint_sample(
          grid.points(), trace.seedset, take, rng_ts, sample_options);
    } else {
      std::vector<Eigen::VectorXd> xs;
      xs.reserve(grid.size());
      for (const auto& p : grid.points()) xs.push_back(p.x);
      draws = surrogate.het_predictor->joint_sample(xs, take, rng_ts);
    }

    // Batch selection.
    std::vector<AugmentedInput> batch;
    std::vector<int> batch_grid_index;
    if (crn) {
      const std::vector<int> picked =
          select_batch(draws, grid, evaluated, take);
      if (picked.empty()) {
        ++consecutive_exhausted;
        if (config.method == Method::fCRN) {
          trace.warnings.push_back(
              "candidate grid exhausted after " +
              std::to_string(trace.evaluations.size()) + " evaluations");
          break;
        }
        // Adaptive and flexible-seed variants refresh the grid and go again.
        trace.warnings.push_back("candidate grid exhausted; grid refreshed");
        grid = lhs_grid(config.grid_size, config.dims(), grid_seeds, rng_grid);
        if (consecutive_exhausted >= 3) break;
        continue;
      }
      consecutive_exhausted = 0;
      batch_grid_index = picked;
      std::sort(batch_grid_index.begin(), batch_grid_index.end());
      for (int g : batch_grid_index) {
        batch.push_back(grid.points()[static_cast<std::size_t>(g)]);
      }
    } else {
      // Het methods: per-draw argmin over x; the same x may be picked several
      // times, each evaluation getting its own randomly assigned seed.
      std::vector<int> picked;
      for (const auto& draw : draws) {
        if (static_cast<int>(picked.size()) >= take) break;
        int best = 0;
        for (long g = 1; g < draw.size(); ++g) {
          if (draw[g] < draw[best]) best = static_cast<int>(g);
        }
        picked.push_back(best);
      }
      std::sort(picked.begin(), picked.end());
      EvaluatedSet pending;
      for (int g : picked) {
        const Eigen::VectorXd& x = grid.points()[static_cast<std::size_t>(g)].x;
        AugmentedInput p{x, fresh_seed_at(x, pending)};
        pending.insert(p);
        batch.push_back(std::move(p));
        batch_grid_index.push_back(g);
      }
    }

    append_outcomes(evaluate_batch(batch));

    // Flexible-seed grid maintenance: an evaluated point is replaced by the
    // same x with another unused seed, staying inside the fixed set until it
    // is spent at that x.
    if (config.method == Method::fgCRN) {
      for (std::size_t b = 0; b < batch.size(); ++b) {
        const int g = batch_grid_index[b];
        const Eigen::VectorXd& x = batch[b].x;
        std::vector<std::int64_t> unused;
        for (std::int64_t s : trace.seedset) {
          if (!evaluated.count({x, s})) unused.push_back(s);
        }
        std::int64_t next_seed;
        if (!unused.empty()) {
          next_seed = unused[rng_assign.below(unused.size())];
        } else {
          EvaluatedSet none;
          next_seed = fresh_seed_at(x, none);
        }
        grid.replace(static_cast<std::size_t>(g), {x, next_seed});
      }
    }

    const bool tune =
        static_cast<int>(dataset.size()) <= config.refit_full_until ||
        (iteration % config.refit_every) == 0;
    refit(tune);
  }

  trace.final_spec = surrogate.spec;
  return trace;
}

}  // namespace trajopt
