#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "trajopt/dataset.hpp"
#include "trajopt/kernel.hpp"
#include "trajopt/rng.hpp"

namespace trajopt {

// Kernel Gram matrix k(x_i, x_j) over a list of unit-cube inputs; no nugget.
Eigen::MatrixXd kernel_matrix(const std::vector<Eigen::VectorXd>& X,
                              const KernelSpec& spec);

namespace serial {
Eigen::MatrixXd kernel_matrix(const std::vector<Eigen::VectorXd>& X,
                              const KernelSpec& spec);
}  // namespace serial

// Cholesky factor of K after adding whatever diagonal jitter is needed to
// factorize, escalating from 1e-8*sigma_f^2 by 10x up to 1e-4*sigma_f^2.
// Throws NumericalError past the last escalation. jitter_used reports the
// amount added (0 when none was needed).
Eigen::MatrixXd cholesky_with_jitter(Eigen::MatrixXd K, double signal_variance,
                                     double* jitter_used = nullptr);

// K + tau^2 I with the jitter policy applied, i.e. the matrix whose Cholesky
// factorization is guaranteed to succeed.
Eigen::MatrixXd build_covariance(const std::vector<Eigen::VectorXd>& X,
                                 const KernelSpec& spec);

struct Posterior {
  Eigen::VectorXd mean;      // raw response scale
  Eigen::VectorXd variance;  // raw response scale, clamped at 0
};

// Kriging mean/variance at the query points, zero prior mean on the
// standardized scale, predictive variance including the nugget.
Posterior posterior(const EvaluationDataset& data, const KernelSpec& spec,
                    const std::vector<Eigen::VectorXd>& queries);

// -1/2 y'K^-1 y - 1/2 log|K| - N/2 log 2pi on standardized responses.
double log_marginal_likelihood(const EvaluationDataset& data,
                               const KernelSpec& spec);

struct FitBounds {
  double lengthscale_lo = 0.01;
  double lengthscale_hi = 2.0;
  double signal_variance_lo = 0.01;
  double signal_variance_hi = 100.0;
  double nugget_lo = 1e-8;
  double nugget_hi = 1.0;
  double rho_lo = 0.05;
  double rho_hi = 0.95;
};

struct FitOptions {
  int starts = 5;            // multi-starts from a space-filling set
  int sweeps = 4;            // coordinate-descent passes per start
  int golden_iterations = 16;
  bool fit_rho = false;      // include the CRN seed similarity
  const KernelSpec* warm_start = nullptr;  // extra start, e.g. previous fit
};

// Maximizes an arbitrary spec -> log-likelihood objective by bounded
// coordinate-wise golden-section search in log space (rho on its raw scale),
// multi-started from a small Latin hypercube. Falls back to median-heuristic
// lengthscales (fit_warning set) when every start fails.
KernelSpec fit_kernel(const std::function<double(const KernelSpec&)>& objective,
                      const std::vector<Eigen::VectorXd>& X,
                      KernelFamily family, const FitBounds& bounds, Rng& rng,
                      const FitOptions& options);

// Standard GP hyperparameter fit by marginal likelihood. Refreshes the
// dataset standardization first. Datasets with fewer than three points take
// the heuristic fallback directly.
KernelSpec fit_hyperparameters(EvaluationDataset& data, KernelFamily family,
                               const FitBounds& bounds, Rng& rng,
                               const FitOptions& options = {});

}  // namespace trajopt
