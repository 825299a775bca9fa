#include "trajopt/het.hpp"

#include <cmath>
#include <unordered_map>

#include "trajopt/parallel.hpp"
#include "trajopt/rng.hpp"

namespace trajopt {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}

AggregatedDesign aggregate_replicates(const EvaluationDataset& data) {
  if (data.empty()) throw ConfigError("aggregate_replicates: empty dataset");

  AggregatedDesign design;
  design.standardization = data.standardization();

  std::unordered_map<std::size_t, std::vector<int>> buckets;
  std::vector<std::vector<double>> groups;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Eigen::VectorXd& x = data.inputs()[i].x;
    const std::size_t h =
        siphash24(0x6167677265676174ULL, 0x652D62792D780000ULL, x.data(),
                  sizeof(double) * x.size());
    int found = -1;
    for (int idx : buckets[h]) {
      if (design.xs[idx].size() == x.size() && design.xs[idx] == x) {
        found = idx;
        break;
      }
    }
    if (found < 0) {
      found = static_cast<int>(design.xs.size());
      design.xs.push_back(x);
      groups.emplace_back();
      buckets[h].push_back(found);
    }
    groups[found].push_back(data.responses()[i]);
  }

  double grand_mean = 0.0;
  for (double r : data.responses()) grand_mean += r;
  grand_mean /= static_cast<double>(data.size());
  double global_var = 0.0;
  if (data.size() > 1) {
    for (double r : data.responses()) {
      global_var += (r - grand_mean) * (r - grand_mean);
    }
    global_var /= static_cast<double>(data.size() - 1);
  }

  double multi_var_sum = 0.0;
  int multi_groups = 0;
  design.counts.resize(groups.size());
  design.means.resize(groups.size());
  design.variances.assign(groups.size(), -1.0);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& ys = groups[g];
    design.counts[g] = static_cast<int>(ys.size());
    double m = 0.0;
    for (double y : ys) m += y;
    m /= static_cast<double>(ys.size());
    design.means[g] = m;
    if (ys.size() > 1) {
      double ss = 0.0;
      for (double y : ys) ss += (y - m) * (y - m);
      design.variances[g] = ss / static_cast<double>(ys.size() - 1);
      multi_var_sum += design.variances[g];
      ++multi_groups;
    }
  }
  const double fallback =
      multi_groups > 0 ? multi_var_sum / multi_groups : global_var;
  for (double& v : design.variances) {
    if (v < 0.0) v = fallback;
  }
  return design;
}

namespace {

// Training covariance on the standardized scale: K + diag(s_i^2 / n_i) with
// variances rescaled by the response standardization.
Eigen::MatrixXd het_train_covariance(const AggregatedDesign& design,
                                     const KernelSpec& spec) {
  Eigen::MatrixXd A = kernel_matrix(design.xs, spec);
  const double s2 = design.standardization.scale * design.standardization.scale;
  for (std::size_t i = 0; i < design.size(); ++i) {
    A(i, i) += design.variances[i] / (design.counts[i] * s2);
  }
  return A;
}

Eigen::VectorXd standardized_means(const AggregatedDesign& design) {
  Eigen::VectorXd y(design.size());
  for (std::size_t i = 0; i < design.size(); ++i) {
    y[i] = design.standardization.apply(design.means[i]);
  }
  return y;
}

}  // namespace

double het_log_marginal_likelihood(const AggregatedDesign& design,
                                   const KernelSpec& spec) {
  const Eigen::MatrixXd L = cholesky_with_jitter(
      het_train_covariance(design, spec), spec.signal_variance);
  const Eigen::VectorXd y = standardized_means(design);
  const Eigen::VectorXd w = L.triangularView<Eigen::Lower>().solve(y);
  double logdet = 0.0;
  for (long i = 0; i < L.rows(); ++i) logdet += std::log(L(i, i));
  return -0.5 * w.squaredNorm() - logdet -
         0.5 * static_cast<double>(y.size()) * kLog2Pi;
}

HetPredictor::HetPredictor(const AggregatedDesign& design, KernelSpec spec)
    : spec_(std::move(spec)), xs_(design.xs), st_(design.standardization) {
  if (!xs_.empty()) {
    spec_.validate(xs_[0].size());
    L_ = cholesky_with_jitter(het_train_covariance(design, spec_),
                              spec_.signal_variance);
    const Eigen::VectorXd y = standardized_means(design);
    alpha_ = L_.transpose().triangularView<Eigen::Upper>().solve(
        L_.triangularView<Eigen::Lower>().solve(y));
  }
}

Eigen::VectorXd HetPredictor::cross_covariance(const Eigen::VectorXd& x) const {
  Eigen::VectorXd k(static_cast<long>(xs_.size()));
  for (std::size_t i = 0; i < xs_.size(); ++i) {
    k[static_cast<long>(i)] = kernel_value(spec_, x, xs_[i]);
  }
  return k;
}

std::pair<double, double> HetPredictor::predict_one(
    const Eigen::VectorXd& x) const {
  double mean_std = 0.0;
  double var_std = spec_.signal_variance;  // latent mean: no future noise
  if (!xs_.empty()) {
    const Eigen::VectorXd k = cross_covariance(x);
    mean_std = k.dot(alpha_);
    const Eigen::VectorXd v = L_.triangularView<Eigen::Lower>().solve(k);
    var_std -= v.squaredNorm();
    if (var_std < 0.0) var_std = 0.0;
  }
  return {st_.invert(mean_std), var_std * st_.scale * st_.scale};
}

Posterior HetPredictor::predict(
    const std::vector<Eigen::VectorXd>& queries) const {
  Posterior post;
  const long m = static_cast<long>(queries.size());
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

double HetPredictor::marginal_draw(const Eigen::VectorXd& x, Rng& rng) const {
  const auto [mu, var] = predict_one(x);
  return mu + std::sqrt(var) * rng.normal();
}

std::vector<Eigen::VectorXd> HetPredictor::joint_sample(
    const std::vector<Eigen::VectorXd>& xgrid, int draws, Rng& rng) const {
  if (xgrid.empty()) throw ConfigError("het joint_sample: empty grid");
  const long m = static_cast<long>(xgrid.size());

  Eigen::VectorXd mu = Eigen::VectorXd::Zero(m);
  Eigen::MatrixXd cov = kernel_matrix(xgrid, spec_);
  if (!xs_.empty()) {
    const long n = static_cast<long>(xs_.size());
    Eigen::MatrixXd Kstar(n, m);
    for (long g = 0; g < m; ++g) {
      Kstar.col(g) = cross_covariance(xgrid[g]);
    }
    mu = Kstar.transpose() * alpha_;
    const Eigen::MatrixXd V = L_.triangularView<Eigen::Lower>().solve(Kstar);
    cov -= V.transpose() * V;
    cov = 0.5 * (cov + cov.transpose()).eval();
  }
  const Eigen::MatrixXd Lc =
      cholesky_with_jitter(std::move(cov), spec_.signal_variance);

  std::vector<Eigen::VectorXd> out;
  out.reserve(draws);
  Eigen::VectorXd eta(m);
  for (int j = 0; j < draws; ++j) {
    for (long g = 0; g < m; ++g) eta[g] = rng.normal();
    Eigen::VectorXd draw = mu + Lc * eta;
    for (long g = 0; g < m; ++g) draw[g] = st_.invert(draw[g]);
    out.push_back(std::move(draw));
  }
  return out;
}

Posterior het_posterior(const AggregatedDesign& design, const KernelSpec& spec,
                        const std::vector<Eigen::VectorXd>& queries) {
  return HetPredictor(design, spec).predict(queries);
}

std::vector<Eigen::VectorXd> het_joint_sample(
    const AggregatedDesign& design, const KernelSpec& spec,
    const std::vector<Eigen::VectorXd>& xgrid, int draws, Rng& rng) {
  return HetPredictor(design, spec).joint_sample(xgrid, draws, rng);
}

KernelSpec fit_het_hyperparameters(const AggregatedDesign& design,
                                   KernelFamily family, const FitBounds& bounds,
                                   Rng& rng, const FitOptions& options) {
  auto objective = [&design](const KernelSpec& spec) {
    return het_log_marginal_likelihood(design, spec);
  };
  return fit_kernel(objective, design.xs, family, bounds, rng, options);
}

}  // namespace trajopt
