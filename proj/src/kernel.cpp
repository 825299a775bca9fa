#include "trajopt/kernel.hpp"

#include <cmath>

namespace trajopt {

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::SquaredExponential:
      return "squared-exponential";
    case KernelFamily::Matern52:
      return "matern52";
  }
  return "unknown";
}

KernelFamily kernel_family_from_string(const std::string& name) {
  if (name == "squared-exponential" || name == "sqexp") {
    return KernelFamily::SquaredExponential;
  }
  if (name == "matern52" || name == "matern-5/2") return KernelFamily::Matern52;
  throw ConfigError("unknown kernel family '" + name + "'");
}

void KernelSpec::validate(Eigen::Index dims) const {
  if (lengthscales.size() != dims) {
    throw ConfigError("kernel spec: expected " + std::to_string(dims) +
                      " lengthscales, got " +
                      std::to_string(lengthscales.size()));
  }
  for (Eigen::Index i = 0; i < lengthscales.size(); ++i) {
    if (!(lengthscales[i] > 0.0)) {
      throw ConfigError("kernel spec: lengthscales must be positive");
    }
  }
  if (!(signal_variance > 0.0)) {
    throw ConfigError("kernel spec: signal variance must be positive");
  }
  if (!(nugget >= 0.0)) throw ConfigError("kernel spec: nugget must be >= 0");
  if (!(seed_rho > 0.0 && seed_rho < 1.0)) {
    throw ConfigError("kernel spec: seed rho must lie in (0, 1)");
  }
}

double kernel_value(const KernelSpec& spec, const Eigen::VectorXd& a,
                    const Eigen::VectorXd& b) {
  double r2 = 0.0;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    const double d = (a[k] - b[k]) / spec.lengthscales[k];
    r2 += d * d;
  }
  switch (spec.family) {
    case KernelFamily::SquaredExponential:
      return spec.signal_variance * std::exp(-0.5 * r2);
    case KernelFamily::Matern52: {
      const double s = std::sqrt(5.0 * r2);
      return spec.signal_variance * (1.0 + s + 5.0 * r2 / 3.0) * std::exp(-s);
    }
  }
  return 0.0;
}

}  // namespace trajopt
