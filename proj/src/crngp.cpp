#include "trajopt/crngp.hpp"

#include <cmath>
#include <unordered_map>

#include "trajopt/parallel.hpp"

namespace trajopt {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

inline double crn_entry(const KernelSpec& spec, const AugmentedInput& a,
                        const AugmentedInput& b) {
  const double k = kernel_value(spec, a.x, b.x);
  return a.seed == b.seed ? k : spec.seed_rho * k;
}

}  // namespace

Eigen::MatrixXd crn_kernel_matrix(const std::vector<AugmentedInput>& points,
                                  const KernelSpec& spec) {
  const long n = static_cast<long>(points.size());
  Eigen::MatrixXd K(n, n);
#pragma omp parallel for schedule(dynamic, 8) if (parallel::enabled())
  for (long i = 0; i < n; ++i) {
    for (long j = i; j < n; ++j) {
      const double v = crn_entry(spec, points[i], points[j]);
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  return K;
}

namespace serial {
Eigen::MatrixXd crn_kernel_matrix(const std::vector<AugmentedInput>& points,
                                  const KernelSpec& spec) {
  const long n = static_cast<long>(points.size());
  Eigen::MatrixXd K(n, n);
  for (long i = 0; i < n; ++i) {
    for (long j = i; j < n; ++j) {
      const double v = crn_entry(spec, points[i], points[j]);
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  return K;
}
}  // namespace serial

Eigen::MatrixXd crn_covariance(const std::vector<AugmentedInput>& points,
                               const KernelSpec& spec) {
  if (points.empty()) throw ConfigError("crn_covariance: no points");
  spec.validate(points[0].x.size());
  Eigen::MatrixXd K = crn_kernel_matrix(points, spec);
  K.diagonal().array() += spec.nugget;
  double jitter = 0.0;
  cholesky_with_jitter(K, spec.signal_variance, &jitter);
  if (jitter > 0.0) K.diagonal().array() += jitter;
  return K;
}

double crn_log_marginal_likelihood(const EvaluationDataset& data,
                                   const KernelSpec& spec) {
  if (data.empty()) {
    throw ConfigError("crn_log_marginal_likelihood: empty dataset");
  }
  Eigen::MatrixXd A = crn_kernel_matrix(data.inputs(), spec);
  A.diagonal().array() += spec.nugget;
  const Eigen::MatrixXd L =
      cholesky_with_jitter(std::move(A), spec.signal_variance);
  const std::vector<double> ystd = data.standardized_responses();
  const Eigen::VectorXd y =
      Eigen::Map<const Eigen::VectorXd>(ystd.data(), ystd.size());
  const Eigen::VectorXd w = L.triangularView<Eigen::Lower>().solve(y);
  double logdet = 0.0;
  for (long i = 0; i < L.rows(); ++i) logdet += std::log(L(i, i));
  return -0.5 * w.squaredNorm() - logdet -
         0.5 * static_cast<double>(y.size()) * kLog2Pi;
}

KroneckerFactors kronecker_factors(const std::vector<Eigen::VectorXd>& xs,
                                   const std::vector<std::int64_t>& seeds,
                                   const KernelSpec& spec) {
  KroneckerFactors f;
  f.xs = xs;
  f.seeds = seeds;
  f.Kx = kernel_matrix(xs, spec);
  const long l = static_cast<long>(seeds.size());
  f.Ks = Eigen::MatrixXd::Constant(l, l, spec.seed_rho);
  f.Ks.diagonal().setOnes();
  f.Lx = cholesky_with_jitter(f.Kx, spec.signal_variance, &f.jitter_x);
  f.Ls = cholesky_with_jitter(f.Ks, 1.0);
  return f;
}

CrnPredictor::CrnPredictor(const EvaluationDataset& data, KernelSpec spec)
    : spec_(std::move(spec)), train_(data.inputs()), st_(data.standardization()) {
  if (!train_.empty()) {
    spec_.validate(train_[0].x.size());
    Eigen::MatrixXd A = crn_kernel_matrix(train_, spec_);
    A.diagonal().array() += spec_.nugget;
    L_ = cholesky_with_jitter(std::move(A), spec_.signal_variance);
    const std::vector<double> ystd = data.standardized_responses();
    const Eigen::VectorXd y =
        Eigen::Map<const Eigen::VectorXd>(ystd.data(), ystd.size());
    alpha_ = L_.transpose().triangularView<Eigen::Upper>().solve(
        L_.triangularView<Eigen::Lower>().solve(y));
  }
}

Eigen::VectorXd CrnPredictor::cross_covariance(const AugmentedInput& p) const {
  const long n = static_cast<long>(train_.size());
  Eigen::VectorXd k(n);
  for (long i = 0; i < n; ++i) k[i] = crn_entry(spec_, p, train_[i]);
  return k;
}

std::pair<double, double> CrnPredictor::predict_one(
    const AugmentedInput& point) const {
  double mean_std = 0.0;
  double var_std = spec_.signal_variance + spec_.nugget;
  if (!train_.empty()) {
    const Eigen::VectorXd k = cross_covariance(point);
    mean_std = k.dot(alpha_);
    const Eigen::VectorXd v = L_.triangularView<Eigen::Lower>().solve(k);
    var_std -= v.squaredNorm();
    if (var_std < 0.0) var_std = 0.0;
  }
  return {st_.invert(mean_std), var_std * st_.scale * st_.scale};
}

Posterior CrnPredictor::predict(
    const std::vector<AugmentedInput>& queries) const {
  const long m = static_cast<long>(queries.size());
  Posterior post;
  post.mean.resize(m);
  post.variance.resize(m);
#pragma omp parallel for schedule(dynamic, 16) if (parallel::enabled())
  for (long q = 0; q < m; ++q) {
    const auto [mu, var] = predict_one(queries[q]);
    post.mean[q] = mu;
    post.variance[q] = var;
  }
  return post;
}

double CrnPredictor::marginal_draw(const AugmentedInput& point,
                                   Rng& rng) const {
  const auto [mu, var] = predict_one(point);
  return mu + std::sqrt(var) * rng.normal();
}

namespace {

// Deduplicates x vectors by exact equality, preserving first-encounter order.
struct XIndex {
  std::vector<Eigen::VectorXd> xs;
  std::unordered_map<std::size_t, std::vector<int>> buckets;

  int insert(const Eigen::VectorXd& x) {
    const std::size_t h = siphash24(0x58494E4445580001ULL, 0x2E2E2E2E2E2E2E2EULL,
                                    x.data(), sizeof(double) * x.size());
    auto& bucket = buckets[h];
    for (int idx : bucket) {
      if (xs[idx].size() == x.size() && xs[idx] == x) return idx;
    }
    xs.push_back(x);
    bucket.push_back(static_cast<int>(xs.size()) - 1);
    return static_cast<int>(xs.size()) - 1;
  }
};

}  // namespace

std::vector<Eigen::VectorXd> CrnPredictor::joint_sample(
    const std::vector<AugmentedInput>& grid,
    const std::vector<std::int64_t>& seed_universe, int draws, Rng& rng,
    const JointSampleOptions& options) const {
  if (grid.empty()) throw ConfigError("joint_sample: empty grid");
  const long m = static_cast<long>(grid.size());
  const long n = static_cast<long>(train_.size());

  // Standardized posterior mean over the grid and cross covariance to data.
  Eigen::MatrixXd Kstar;  // n x m
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(m);
  if (n > 0) {
    Kstar.resize(n, m);
#pragma omp parallel for schedule(static) if (parallel::enabled())
    for (long g = 0; g < m; ++g) {
      for (long i = 0; i < n; ++i) {
        Kstar(i, g) = crn_entry(spec_, train_[i], grid[g]);
      }
    }
    mu = Kstar.transpose() * alpha_;
  }

  SamplePath path = options.path;
  if (path == SamplePath::Auto) path = SamplePath::Kronecker;

  std::vector<Eigen::VectorXd> out;
  out.reserve(draws);

  if (path == SamplePath::Kronecker) {
    // Virtual cross product of every distinct x (grid and data) with every
    // seed in play. All draws live on this product grid and are then read
    // off at the actual grid and data rows.
    XIndex xindex;
    std::vector<int> grid_x(m), train_x(n);
    for (long g = 0; g < m; ++g) grid_x[g] = xindex.insert(grid[g].x);
    for (long i = 0; i < n; ++i) train_x[i] = xindex.insert(train_[i].x);

    std::vector<std::int64_t> seeds;
    std::unordered_map<std::int64_t, int> seed_index;
    auto add_seed = [&](std::int64_t s) {
      if (seed_index.emplace(s, static_cast<int>(seeds.size())).second) {
        seeds.push_back(s);
      }
    };
    for (std::int64_t s : seed_universe) add_seed(s);
    for (const auto& p : grid) add_seed(p.seed);
    for (const auto& p : train_) add_seed(p.seed);

    const std::size_t virtual_points = xindex.xs.size() * seeds.size();
    if (virtual_points > options.size_cap) {
      throw SizeError("joint_sample: virtual grid of " +
                      std::to_string(virtual_points) +
                      " points exceeds cap of " +
                      std::to_string(options.size_cap));
    }

    const KroneckerFactors fac = kronecker_factors(xindex.xs, seeds, spec_);
    const long mx = static_cast<long>(fac.xs.size());
    const long ls = static_cast<long>(fac.seeds.size());
    const double tau = std::sqrt(spec_.nugget);

    Eigen::MatrixXd Z(mx, ls);
    for (int j = 0; j < draws; ++j) {
      for (long a = 0; a < mx; ++a) {
        for (long b = 0; b < ls; ++b) Z(a, b) = rng.normal();
      }
      const Eigen::MatrixXd D = fac.Lx * Z * fac.Ls.transpose();

      Eigen::VectorXd cond(m);
      if (n > 0) {
        Eigen::VectorXd z_train(n);
        for (long i = 0; i < n; ++i) {
          const int si = seed_index.at(train_[i].seed);
          z_train[i] = D(train_x[i], si);
          if (tau > 0.0) z_train[i] += tau * rng.normal();
        }
        const Eigen::VectorXd w =
            L_.transpose().triangularView<Eigen::Upper>().solve(
                L_.triangularView<Eigen::Lower>().solve(z_train));
        const Eigen::VectorXd fit = Kstar.transpose() * w;
        for (long g = 0; g < m; ++g) {
          const int si = seed_index.at(grid[g].seed);
          cond[g] = mu[g] + D(grid_x[g], si) - fit[g];
        }
      } else {
        for (long g = 0; g < m; ++g) {
          const int si = seed_index.at(grid[g].seed);
          cond[g] = D(grid_x[g], si);
        }
      }
      for (long g = 0; g < m; ++g) cond[g] = st_.invert(cond[g]);
      out.push_back(std::move(cond));
    }
    return out;
  }

  // Dense path: explicit latent posterior covariance over the grid.
  if (static_cast<std::size_t>(m) > options.size_cap) {
    throw SizeError("joint_sample: grid of " + std::to_string(m) +
                    " points exceeds cap of " +
                    std::to_string(options.size_cap));
  }
  Eigen::MatrixXd cov = crn_kernel_matrix(grid, spec_);
  if (n > 0) {
    const Eigen::MatrixXd V =
        L_.triangularView<Eigen::Lower>().solve(Kstar);  // n x m
    cov -= V.transpose() * V;
    cov = 0.5 * (cov + cov.transpose()).eval();
  }
  const Eigen::MatrixXd Lc =
      cholesky_with_jitter(std::move(cov), spec_.signal_variance);
  Eigen::VectorXd eta(m);
  for (int j = 0; j < draws; ++j) {
    for (long g = 0; g < m; ++g) eta[g] = rng.normal();
    Eigen::VectorXd draw = mu + Lc * eta;
    for (long g = 0; g < m; ++g) draw[g] = st_.invert(draw[g]);
    out.push_back(std::move(draw));
  }
  return out;
}

Posterior crn_posterior(const EvaluationDataset& data, const KernelSpec& spec,
                        const std::vector<AugmentedInput>& queries) {
  if (data.empty()) throw ConfigError("crn_posterior: dataset is empty");
  return CrnPredictor(data, spec).predict(queries);
}

std::vector<Eigen::VectorXd> crn_joint_sample(
    const EvaluationDataset& data, const KernelSpec& spec,
    const std::vector<AugmentedInput>& grid,
    const std::vector<std::int64_t>& seed_universe, int draws, Rng& rng,
    const JointSampleOptions& options) {
  return CrnPredictor(data, spec).joint_sample(grid, seed_universe, draws, rng,
                                               options);
}

}  // namespace trajopt
