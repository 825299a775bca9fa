#include "trajopt/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "trajopt/parallel.hpp"

namespace trajopt {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}

Eigen::MatrixXd kernel_matrix(const std::vector<Eigen::VectorXd>& X,
                              const KernelSpec& spec) {
  const long n = static_cast<long>(X.size());
  Eigen::MatrixXd K(n, n);
#pragma omp parallel for schedule(dynamic, 8) if (parallel::enabled())
  for (long i = 0; i < n; ++i) {
    for (long j = i; j < n; ++j) {
      const double v = kernel_value(spec, X[i], X[j]);
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  return K;
}

namespace serial {
Eigen::MatrixXd kernel_matrix(const std::vector<Eigen::VectorXd>& X,
                              const KernelSpec& spec) {
  const long n = static_cast<long>(X.size());
  Eigen::MatrixXd K(n, n);
  for (long i = 0; i < n; ++i) {
    for (long j = i; j < n; ++j) {
      const double v = kernel_value(spec, X[i], X[j]);
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  return K;
}
}  // namespace serial

Eigen::MatrixXd cholesky_with_jitter(Eigen::MatrixXd K, double signal_variance,
                                     double* jitter_used) {
  const long n = K.rows();
  double jitter = 0.0;
  for (int attempt = 0; attempt < 6; ++attempt) {
    Eigen::MatrixXd trial = K;
    if (jitter > 0.0) {
      trial.diagonal().array() += jitter;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(trial);
    if (llt.info() == Eigen::Success) {
      if (jitter_used) *jitter_used = jitter;
      return llt.matrixL();
    }
    jitter = (jitter == 0.0) ? 1e-8 * signal_variance : jitter * 10.0;
    if (jitter > 1e-4 * signal_variance * 1.0000001) break;
  }
  throw NumericalError("covariance factorization failed after jitter escalation (n=" +
                       std::to_string(n) + ")");
}

Eigen::MatrixXd build_covariance(const std::vector<Eigen::VectorXd>& X,
                                 const KernelSpec& spec) {
  spec.validate(X.empty() ? spec.lengthscales.size() : X[0].size());
  Eigen::MatrixXd K = kernel_matrix(X, spec);
  K.diagonal().array() += spec.nugget;
  double jitter = 0.0;
  cholesky_with_jitter(K, spec.signal_variance, &jitter);
  if (jitter > 0.0) K.diagonal().array() += jitter;
  return K;
}

namespace {

std::vector<Eigen::VectorXd> x_parts(const EvaluationDataset& data) {
  std::vector<Eigen::VectorXd> X;
  X.reserve(data.size());
  for (const auto& p : data.inputs()) X.push_back(p.x);
  return X;
}

}  // namespace

Posterior posterior(const EvaluationDataset& data, const KernelSpec& spec,
                    const std::vector<Eigen::VectorXd>& queries) {
  if (data.empty()) throw ConfigError("posterior: dataset is empty");
  const std::vector<Eigen::VectorXd> X = x_parts(data);
  spec.validate(X[0].size());

  Eigen::MatrixXd A = kernel_matrix(X, spec);
  A.diagonal().array() += spec.nugget;
  const Eigen::MatrixXd L = cholesky_with_jitter(std::move(A), spec.signal_variance);

  const std::vector<double> ystd = data.standardized_responses();
  const Eigen::VectorXd y =
      Eigen::Map<const Eigen::VectorXd>(ystd.data(), ystd.size());
  const Eigen::VectorXd alpha = L.transpose().triangularView<Eigen::Upper>().solve(
      L.triangularView<Eigen::Lower>().solve(y));

  const long n = static_cast<long>(X.size());
  const long m = static_cast<long>(queries.size());
  const Standardization& st = data.standardization();
  Posterior post;
  post.mean.resize(m);
  post.variance.resize(m);
#pragma omp parallel for schedule(dynamic, 16) if (parallel::enabled())
  for (long q = 0; q < m; ++q) {
    Eigen::VectorXd k(n);
    for (long i = 0; i < n; ++i) k[i] = kernel_value(spec, queries[q], X[i]);
    const double mean_std = k.dot(alpha);
    const Eigen::VectorXd v = L.triangularView<Eigen::Lower>().solve(k);
    double var_std = kernel_value(spec, queries[q], queries[q]) + spec.nugget -
                     v.squaredNorm();
    if (var_std < 0.0) var_std = 0.0;
    post.mean[q] = st.invert(mean_std);
    post.variance[q] = var_std * st.scale * st.scale;
  }
  return post;
}

double log_marginal_likelihood(const EvaluationDataset& data,
                               const KernelSpec& spec) {
  if (data.empty()) throw ConfigError("log_marginal_likelihood: empty dataset");
  const std::vector<Eigen::VectorXd> X = x_parts(data);
  Eigen::MatrixXd A = kernel_matrix(X, spec);
  A.diagonal().array() += spec.nugget;
  const Eigen::MatrixXd L = cholesky_with_jitter(std::move(A), spec.signal_variance);

  const std::vector<double> ystd = data.standardized_responses();
  const Eigen::VectorXd y =
      Eigen::Map<const Eigen::VectorXd>(ystd.data(), ystd.size());
  const Eigen::VectorXd w = L.triangularView<Eigen::Lower>().solve(y);
  double logdet = 0.0;
  for (long i = 0; i < L.rows(); ++i) logdet += std::log(L(i, i));
  return -0.5 * w.squaredNorm() - logdet -
         0.5 * static_cast<double>(y.size()) * kLog2Pi;
}

namespace {

struct Coordinate {
  enum class Kind { Lengthscale, SignalVariance, Nugget, Rho } kind;
  int dim = 0;  // lengthscale dimension
  double lo = 0.0, hi = 0.0;
  bool log_scale = true;
};

double get_coord(const KernelSpec& s, const Coordinate& c) {
  switch (c.kind) {
    case Coordinate::Kind::Lengthscale:
      return s.lengthscales[c.dim];
    case Coordinate::Kind::SignalVariance:
      return s.signal_variance;
    case Coordinate::Kind::Nugget:
      return s.nugget;
    case Coordinate::Kind::Rho:
      return s.seed_rho;
  }
  return 0.0;
}

void set_coord(KernelSpec& s, const Coordinate& c, double v) {
  switch (c.kind) {
    case Coordinate::Kind::Lengthscale:
      s.lengthscales[c.dim] = v;
      break;
    case Coordinate::Kind::SignalVariance:
      s.signal_variance = v;
      break;
    case Coordinate::Kind::Nugget:
      s.nugget = v;
      break;
    case Coordinate::Kind::Rho:
      s.seed_rho = v;
      break;
  }
}

double safe_eval(const std::function<double(const KernelSpec&)>& objective,
                 const KernelSpec& spec) {
  try {
    const double v = objective(spec);
    return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
  } catch (const NumericalError&) {
    return -std::numeric_limits<double>::infinity();
  }
}

// Golden-section maximization of the objective along one coordinate.
double golden_max(const std::function<double(double)>& f, double lo, double hi,
                  int iterations, double* best_value) {
  constexpr double invphi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < iterations; ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  if (fc >= fd) {
    if (best_value) *best_value = fc;
    return c;
  }
  if (best_value) *best_value = fd;
  return d;
}

KernelSpec median_heuristic_spec(const std::vector<Eigen::VectorXd>& X,
                                 KernelFamily family, const FitBounds& bounds) {
  const Eigen::Index d = X.empty() ? 1 : X[0].size();
  KernelSpec spec;
  spec.family = family;
  spec.lengthscales = Eigen::VectorXd::Constant(d, 0.5);
  for (Eigen::Index k = 0; k < d; ++k) {
    std::vector<double> diffs;
    for (std::size_t i = 0; i < X.size(); ++i) {
      for (std::size_t j = i + 1; j < X.size(); ++j) {
        const double dd = std::abs(X[i][k] - X[j][k]);
        if (dd > 0.0) diffs.push_back(dd);
      }
    }
    if (!diffs.empty()) {
      std::nth_element(diffs.begin(), diffs.begin() + diffs.size() / 2,
                       diffs.end());
      spec.lengthscales[k] = diffs[diffs.size() / 2];
    }
    spec.lengthscales[k] = std::clamp(spec.lengthscales[k],
                                      bounds.lengthscale_lo,
                                      bounds.lengthscale_hi);
  }
  spec.signal_variance =
      std::clamp(1.0, bounds.signal_variance_lo, bounds.signal_variance_hi);
  spec.nugget = std::clamp(1e-4, bounds.nugget_lo, bounds.nugget_hi);
  spec.seed_rho = std::clamp(0.5, bounds.rho_lo, bounds.rho_hi);
  spec.fit_warning = true;
  return spec;
}

}  // namespace

KernelSpec fit_kernel(const std::function<double(const KernelSpec&)>& objective,
                      const std::vector<Eigen::VectorXd>& X,
                      KernelFamily family, const FitBounds& bounds, Rng& rng,
                      const FitOptions& options) {
  const Eigen::Index d = X.empty() ? 1 : X[0].size();

  std::vector<Coordinate> coords;
  for (int k = 0; k < d; ++k) {
    coords.push_back({Coordinate::Kind::Lengthscale, k, bounds.lengthscale_lo,
                      bounds.lengthscale_hi, true});
  }
  coords.push_back({Coordinate::Kind::SignalVariance, 0,
                    bounds.signal_variance_lo, bounds.signal_variance_hi, true});
  coords.push_back({Coordinate::Kind::Nugget, 0, bounds.nugget_lo,
                    bounds.nugget_hi, true});
  if (options.fit_rho) {
    coords.push_back(
        {Coordinate::Kind::Rho, 0, bounds.rho_lo, bounds.rho_hi, false});
  }

  // Space-filling starts: stratified uniform per coordinate in transformed
  // space, one stratum per start.
  std::vector<KernelSpec> starts;
  const int nstarts = std::max(1, options.starts);
  for (int s = 0; s < nstarts; ++s) {
    KernelSpec spec;
    spec.family = family;
    spec.lengthscales = Eigen::VectorXd::Constant(d, 0.5);
    starts.push_back(spec);
  }
  for (const Coordinate& c : coords) {
    std::vector<int> order(nstarts);
    for (int s = 0; s < nstarts; ++s) order[s] = s;
    for (int s = nstarts - 1; s > 0; --s) {
      std::swap(order[s], order[rng.below(static_cast<std::uint64_t>(s + 1))]);
    }
    for (int s = 0; s < nstarts; ++s) {
      const double u =
          (static_cast<double>(order[s]) + rng.uniform01()) / nstarts;
      double v;
      if (c.lo == c.hi) {
        v = c.lo;
      } else if (c.log_scale) {
        v = std::exp(std::log(c.lo) + u * (std::log(c.hi) - std::log(c.lo)));
      } else {
        v = c.lo + u * (c.hi - c.lo);
      }
      set_coord(starts[s], c, v);
    }
  }
  if (options.warm_start) {
    KernelSpec warm = *options.warm_start;
    warm.family = family;
    warm.fit_warning = false;
    for (const Coordinate& c : coords) {
      set_coord(warm, c, std::clamp(get_coord(warm, c), c.lo, c.hi));
    }
    starts.push_back(warm);
  }

  KernelSpec best;
  double best_value = -std::numeric_limits<double>::infinity();
  bool any_finite = false;

  for (KernelSpec spec : starts) {
    double current = safe_eval(objective, spec);
    for (int sweep = 0; sweep < options.sweeps; ++sweep) {
      for (const Coordinate& c : coords) {
        if (c.lo == c.hi) {
          set_coord(spec, c, c.lo);
          continue;
        }
        const double tlo = c.log_scale ? std::log(c.lo) : c.lo;
        const double thi = c.log_scale ? std::log(c.hi) : c.hi;
        auto line = [&](double t) {
          KernelSpec trial = spec;
          set_coord(trial, c, c.log_scale ? std::exp(t) : t);
          return safe_eval(objective, trial);
        };
        double fbest;
        const double tbest =
            golden_max(line, tlo, thi, options.golden_iterations, &fbest);
        if (fbest > current) {
          set_coord(spec, c, c.log_scale ? std::exp(tbest) : tbest);
          current = fbest;
        }
      }
    }
    if (std::isfinite(current) && current > best_value) {
      best_value = current;
      best = spec;
      any_finite = true;
    }
  }

  if (!any_finite) {
    KernelSpec fallback = median_heuristic_spec(X, family, bounds);
    if (!options.fit_rho) fallback.seed_rho = 0.5;
    return fallback;
  }
  best.fit_warning = false;
  return best;
}

KernelSpec fit_hyperparameters(EvaluationDataset& data, KernelFamily family,
                               const FitBounds& bounds, Rng& rng,
                               const FitOptions& options) {
  if (data.size() < 2) {
    throw ConfigError("fit_hyperparameters: need at least two points");
  }
  data.refresh_standardization();
  std::vector<Eigen::VectorXd> X;
  X.reserve(data.size());
  for (const auto& p : data.inputs()) X.push_back(p.x);

  if (data.size() < 3) {
    return median_heuristic_spec(X, family, bounds);
  }
  auto objective = [&data](const KernelSpec& spec) {
    return log_marginal_likelihood(data, spec);
  };
  return fit_kernel(objective, X, family, bounds, rng, options);
}

}  // namespace trajopt
