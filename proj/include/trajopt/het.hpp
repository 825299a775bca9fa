#pragma once

#include <vector>

#include "trajopt/gp.hpp"

namespace trajopt {

// Replicate-aggregated design: unique x's with per-location replicate count,
// response mean, and response variance. Locations with a single replicate
// carry the fallback variance (mean of the multi-replicate variances, or the
// overall response variance when there are none), so no location ever claims
// zero noise just because it was run once.
struct AggregatedDesign {
  std::vector<Eigen::VectorXd> xs;
  std::vector<int> counts;
  std::vector<double> means;      // raw scale
  std::vector<double> variances;  // raw scale, unbiased per group
  Standardization standardization;

  std::size_t size() const { return xs.size(); }
};

AggregatedDesign aggregate_replicates(const EvaluationDataset& data);

// Stochastic-kriging marginal likelihood: GP over group means with
// per-location noise s_i^2 / n_i on the diagonal (standardized scale).
double het_log_marginal_likelihood(const AggregatedDesign& design,
                                   const KernelSpec& spec);

// Posterior state over x only. Predictions are for the latent mean surface:
// the per-location noise enters the training covariance but not the
// predictive variance at new inputs.
class HetPredictor {
 public:
  HetPredictor(const AggregatedDesign& design, KernelSpec spec);

  std::pair<double, double> predict_one(const Eigen::VectorXd& x) const;
  Posterior predict(const std::vector<Eigen::VectorXd>& queries) const;
  double marginal_draw(const Eigen::VectorXd& x, Rng& rng) const;

  // Dense joint draws of the latent mean over an x grid, raw scale.
  std::vector<Eigen::VectorXd> joint_sample(
      const std::vector<Eigen::VectorXd>& xgrid, int draws, Rng& rng) const;

  const KernelSpec& spec() const { return spec_; }

 private:
  Eigen::VectorXd cross_covariance(const Eigen::VectorXd& x) const;

  KernelSpec spec_;
  std::vector<Eigen::VectorXd> xs_;
  Standardization st_;
  Eigen::MatrixXd L_;
  Eigen::VectorXd alpha_;
};

Posterior het_posterior(const AggregatedDesign& design, const KernelSpec& spec,
                        const std::vector<Eigen::VectorXd>& queries);

std::vector<Eigen::VectorXd> het_joint_sample(
    const AggregatedDesign& design, const KernelSpec& spec,
    const std::vector<Eigen::VectorXd>& xgrid, int draws, Rng& rng);

// Hyperparameter fit for the stochastic-kriging surrogate.
KernelSpec fit_het_hyperparameters(const AggregatedDesign& design,
                                   KernelFamily family, const FitBounds& bounds,
                                   Rng& rng, const FitOptions& options = {});

}  // namespace trajopt
