#pragma once

#include <cstdint>
#include <vector>

#include "trajopt/gp.hpp"

namespace trajopt {

// CRN kernel over augmented inputs: k(x_i, x_j) for matching seeds,
// rho * k(x_i, x_j) otherwise. No nugget.
Eigen::MatrixXd crn_kernel_matrix(const std::vector<AugmentedInput>& points,
                                  const KernelSpec& spec);

namespace serial {
Eigen::MatrixXd crn_kernel_matrix(const std::vector<AugmentedInput>& points,
                                  const KernelSpec& spec);
}  // namespace serial

// CRN covariance with tau^2 on the diagonal and the shared jitter policy
// applied, mirroring build_covariance. Large rho across seeds makes these
// matrices nearly singular, which is exactly what the jitter absorbs.
Eigen::MatrixXd crn_covariance(const std::vector<AugmentedInput>& points,
                               const KernelSpec& spec);

// Marginal likelihood of a dataset under the CRN covariance (standardized
// responses), the fitting objective for this surrogate.
double crn_log_marginal_likelihood(const EvaluationDataset& data,
                                   const KernelSpec& spec);

// Cholesky factors of the separable covariance over a virtual cross-product
// grid: rows ordered x-major, i.e. row(i_x, j_seed) = i_x * seeds.size() +
// j_seed, and kron(Kx, Ks) is the grid's latent CRN covariance.
struct KroneckerFactors {
  std::vector<Eigen::VectorXd> xs;
  std::vector<std::int64_t> seeds;
  Eigen::MatrixXd Kx;  // kernel matrix over xs (includes signal variance)
  Eigen::MatrixXd Ks;  // 1 on the diagonal, rho off it
  Eigen::MatrixXd Lx;
  Eigen::MatrixXd Ls;
  double jitter_x = 0.0;
};

KroneckerFactors kronecker_factors(const std::vector<Eigen::VectorXd>& xs,
                                   const std::vector<std::int64_t>& seeds,
                                   const KernelSpec& spec);

enum class SamplePath { Auto, Kronecker, Dense };

struct JointSampleOptions {
  SamplePath path = SamplePath::Auto;
  // Cap on virtual cross-product points (fast path) or grid points (dense).
  std::size_t size_cap = 200000;
};

// Posterior state for one (dataset, spec) pair: factorization and kriging
// weights are computed once and shared by predictions, joint draws, and the
// marginal draws the grid engine needs. An empty dataset yields the prior.
class CrnPredictor {
 public:
  CrnPredictor(const EvaluationDataset& data, KernelSpec spec);

  // Raw-scale kriging mean and variance (variance includes the nugget).
  std::pair<double, double> predict_one(const AugmentedInput& point) const;
  Posterior predict(const std::vector<AugmentedInput>& queries) const;

  // Raw-scale draw from the marginal predictive at one point.
  double marginal_draw(const AugmentedInput& point, Rng& rng) const;

  // J draws from the joint latent posterior over the grid, raw scale.
  // The fast path extends the grid virtually to the cross product of its
  // unique x's (plus training x's) with seed_universe (plus any seeds
  // appearing in the grid or the data), draws unconditionally through the
  // Kronecker factors, and conditions on the data by residual kriging.
  std::vector<Eigen::VectorXd> joint_sample(
      const std::vector<AugmentedInput>& grid,
      const std::vector<std::int64_t>& seed_universe, int draws, Rng& rng,
      const JointSampleOptions& options = {}) const;

  const KernelSpec& spec() const { return spec_; }
  const Standardization& standardization() const { return st_; }
  std::size_t training_size() const { return train_.size(); }

 private:
  Eigen::VectorXd cross_covariance(const AugmentedInput& point) const;

  KernelSpec spec_;
  std::vector<AugmentedInput> train_;
  Standardization st_;
  Eigen::MatrixXd L_;      // chol of K_crn + tau^2 I (+ jitter)
  Eigen::VectorXd alpha_;  // (K_crn + tau^2 I)^-1 y_std
};

// Spec-surface wrappers over CrnPredictor.
Posterior crn_posterior(const EvaluationDataset& data, const KernelSpec& spec,
                        const std::vector<AugmentedInput>& queries);

std::vector<Eigen::VectorXd> crn_joint_sample(
    const EvaluationDataset& data, const KernelSpec& spec,
    const std::vector<AugmentedInput>& grid,
    const std::vector<std::int64_t>& seed_universe, int draws, Rng& rng,
    const JointSampleOptions& options = {});

}  // namespace trajopt
