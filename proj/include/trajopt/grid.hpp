#pragma once

#include <cstdint>
#include <functional>
#include <unordered_set>
#include <vector>

#include "trajopt/rng.hpp"
#include "trajopt/types.hpp"

namespace trajopt {

// Finite candidate set Thompson Sampling searches over. Uniqueness is by
// exact (x, seed) equality; size never exceeds the capacity M.
class CandidateGrid {
 public:
  CandidateGrid() = default;
  CandidateGrid(std::vector<AugmentedInput> points, int capacity);

  bool contains(const AugmentedInput& p) const { return index_.count(p) > 0; }
  // False when the point is already present. Throws past capacity.
  bool add(AugmentedInput p);
  // Swaps the point at idx for another; used for flexible seed assignment on
  // a fixed x grid.
  void replace(std::size_t idx, AugmentedInput p);

  const std::vector<AugmentedInput>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  int capacity() const { return capacity_; }

 private:
  std::vector<AugmentedInput> points_;
  std::unordered_set<AugmentedInput, AugmentedInputHash> index_;
  int capacity_ = 0;
};

// Gaussian random walk over the unit cube, reflected at the boundary. The
// reflection keeps the walk effectively symmetric at this step scale, so the
// proposal-density ratio is taken as 1.
struct ProposalSpec {
  double step_scale = 0.05;

  Eigen::VectorXd propose(const Eigen::VectorXd& x, Rng& rng) const;
};

// Jittered Latin hypercube on [0,1]^d, best of a few candidates by maximin
// pairwise distance.
std::vector<Eigen::VectorXd> lhs_points(int n, int d, Rng& rng,
                                        int candidates = 10);

// M-point grid: maximin-perturbed LHS in x, seeds drawn uniformly from the
// seed set.
CandidateGrid lhs_grid(int m, int d, const std::vector<std::int64_t>& seedset,
                       Rng& rng);

// Importance weight of a sampled discrepancy: Normal(0, sigma_obs^2) density
// evaluated at the sample.
double likelihood_weight(double d_sample, double sigma_obs);

// Acceptance probability min{1, (l_can * q_forward) / (l_cur * q_reverse)}.
// A zero denominator accepts iff the numerator is positive.
double mh_acceptance(double l_can, double l_cur, double q_forward,
                     double q_reverse);

bool mh_accept(double alpha, Rng& rng);

// Importance resampling: draws |grid| points with replacement proportional to
// the weights and returns the set of unique survivors. When every weight
// underflows to zero, keeps the ceil(M/10) points with the smallest sampled
// discrepancy instead.
CandidateGrid filter_grid(const CandidateGrid& grid,
                          const std::vector<double>& weights,
                          const std::vector<double>& d_samples, Rng& rng);

// Raw-scale draw from the surrogate's marginal predictive at a point.
using MarginalSampler = std::function<double(const AugmentedInput&, Rng&)>;

struct DensifyResult {
  CandidateGrid grid;
  bool stalled = false;  // stall guard hit; remainder filled from fresh LHS
  long proposals = 0;
};

// MH-inspired growth back to M unique points: anchor on a random current
// point, propose x_can in the parameter space only, then try the seeds in
// random order and accept the first pair that passes the uniform test and is
// not already present. current_d carries the sampled discrepancies of the
// incoming points (the same joint draw the filter used).
DensifyResult densify(const CandidateGrid& grid,
                      const std::vector<double>& current_d,
                      const MarginalSampler& sampler,
                      const ProposalSpec& proposal,
                      const std::vector<std::int64_t>& seedset,
                      double sigma_obs, Rng& rng, int stall_multiplier = 50);

}  // namespace trajopt
