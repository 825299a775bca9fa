#pragma once

#include <Eigen/Dense>
#include <string>

#include "trajopt/errors.hpp"

namespace trajopt {

enum class KernelFamily { SquaredExponential, Matern52 };

std::string to_string(KernelFamily family);
KernelFamily kernel_family_from_string(const std::string& name);

// Kernel family plus hyperparameters. Lengthscales are on the unit-cube
// input scale, signal variance and nugget on the standardized response
// scale. seed_rho is the constant inter-replicate similarity and is only
// consulted by the CRN covariance.
struct KernelSpec {
  KernelFamily family = KernelFamily::Matern52;
  Eigen::VectorXd lengthscales;     // one per input dimension, > 0
  double signal_variance = 1.0;     // sigma_f^2 > 0
  double nugget = 1e-6;             // tau^2 >= 0
  double seed_rho = 0.5;            // 0 < rho < 1
  bool fit_warning = false;         // set when fitting fell back to heuristics

  void validate(Eigen::Index dims) const;
};

// k(a, b) for the configured family, including the signal variance factor.
double kernel_value(const KernelSpec& spec, const Eigen::VectorXd& a,
                    const Eigen::VectorXd& b);

}  // namespace trajopt
