#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "trajopt/gp.hpp"

using trajopt::EvaluationDataset;
using trajopt::KernelFamily;
using trajopt::KernelSpec;
using trajopt::Rng;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

KernelSpec sqexp_spec(int d, double ell, double sf2, double tau2) {
  KernelSpec spec;
  spec.family = KernelFamily::SquaredExponential;
  spec.lengthscales = Eigen::VectorXd::Constant(d, ell);
  spec.signal_variance = sf2;
  spec.nugget = tau2;
  return spec;
}

EvaluationDataset make_dataset(const std::vector<Eigen::VectorXd>& xs,
                               const std::vector<double>& ys) {
  EvaluationDataset data;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    data.add({xs[i], 0}, ys[i]);
  }
  data.refresh_standardization();
  return data;
}

oracle::Vec to_vec(const Eigen::VectorXd& x) {
  return oracle::Vec(x.data(), x.data() + x.size());
}

}  // namespace

TEST_CASE("covariance entries at zero and unit distance") {
  const auto spec = sqexp_spec(1, 1.0, 1.0, 0.25);
  std::vector<Eigen::VectorXd> X = {vec({0.0}), vec({0.0})};
  auto K = trajopt::build_covariance(X, spec);
  // Identical rows: off-diagonal sigma_f^2; the diagonal adds tau^2 plus
  // whatever jitter the duplicated rows forced.
  CHECK(K(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(K(0, 0) >= 1.25);
  CHECK(K(0, 0) <= 1.25 + 1e-4 + 1e-12);

  X = {vec({0.0}), vec({1.0})};
  K = trajopt::build_covariance(X, spec);
  CHECK(K(0, 1) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
  CHECK(std::exp(-0.5) == doctest::Approx(0.60653065971263342).epsilon(1e-14));
}

TEST_CASE("kernel matrix is exactly symmetric and matches the serial kernel") {
  Rng rng(5);
  std::vector<Eigen::VectorXd> X;
  for (int i = 0; i < 40; ++i) {
    X.push_back(vec({rng.uniform01(), rng.uniform01(), rng.uniform01()}));
  }
  KernelSpec spec;
  spec.lengthscales = vec({0.3, 0.5, 0.7});
  const auto K = trajopt::kernel_matrix(X, spec);
  const auto Ks = trajopt::serial::kernel_matrix(X, spec);
  CHECK((K - K.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((K - Ks).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("posterior interpolates noise-free training points") {
  const auto spec = sqexp_spec(1, 0.4, 1.0, 0.0);
  const std::vector<Eigen::VectorXd> xs = {vec({0.1}), vec({0.5}), vec({0.9})};
  const std::vector<double> ys = {3.0, -1.0, 2.0};
  const auto data = make_dataset(xs, ys);
  const auto post = trajopt::posterior(data, spec, xs);
  for (int i = 0; i < 3; ++i) {
    CHECK(post.mean[i] == doctest::Approx(ys[i]).epsilon(1e-8));
    CHECK(post.variance[i] < 1e-8);
  }
}

TEST_CASE("posterior reverts to the prior far from the data") {
  const auto spec = sqexp_spec(1, 0.05, 2.0, 0.1);
  const std::vector<Eigen::VectorXd> xs = {vec({0.1}), vec({0.15})};
  const std::vector<double> ys = {5.0, 7.0};
  const auto data = make_dataset(xs, ys);
  const auto post = trajopt::posterior(data, spec, {vec({0.95})});
  const auto& st = data.standardization();
  CHECK(std::abs((post.mean[0] - st.mean) / st.scale) < 1e-6);
  CHECK(post.variance[0] / (st.scale * st.scale) ==
        doctest::Approx(2.1).epsilon(1e-6));
}

TEST_CASE("two-point posterior matches the hand-solved system") {
  const auto spec = sqexp_spec(1, 1.0, 1.0, 0.5);
  const std::vector<Eigen::VectorXd> xs = {vec({0.0}), vec({1.0})};
  const std::vector<double> ys = {1.0, 2.0};
  auto data = make_dataset(xs, ys);
  const Eigen::VectorXd q = vec({0.25});

  // Oracle on the standardized scale.
  const auto& st = data.standardization();
  const double k01 = std::exp(-0.5);
  oracle::Kriging kr;
  kr.A = {{1.5, k01}, {k01, 1.5}};
  kr.y = {st.apply(1.0), st.apply(2.0)};
  const oracle::Vec kq = {std::exp(-0.5 * 0.25 * 0.25),
                          std::exp(-0.5 * 0.75 * 0.75)};
  const double mean_std = kr.mean(kq);
  const double var_std = kr.variance(kq, 1.5);

  const auto post = trajopt::posterior(data, spec, {q});
  CHECK(post.mean[0] == doctest::Approx(st.invert(mean_std)).epsilon(1e-10));
  CHECK(post.variance[0] ==
        doctest::Approx(var_std * st.scale * st.scale).epsilon(1e-10));
}

TEST_CASE("posterior agrees with the dense oracle on random small datasets") {
  Rng rng(11);
  for (int rep = 0; rep < 60; ++rep) {
    const int n = 2 + static_cast<int>(rng.below(5));  // up to 6 points
    const int d = 1 + static_cast<int>(rng.below(3));
    KernelSpec spec;
    spec.family =
        rep % 2 ? KernelFamily::Matern52 : KernelFamily::SquaredExponential;
    spec.lengthscales = Eigen::VectorXd::Constant(d, 0.2 + 0.5 * rng.uniform01());
    spec.signal_variance = 0.5 + rng.uniform01();
    spec.nugget = 1e-4 + 0.1 * rng.uniform01();

    std::vector<Eigen::VectorXd> xs;
    std::vector<double> ys;
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd x(d);
      for (int k = 0; k < d; ++k) x[k] = rng.uniform01();
      xs.push_back(x);
      ys.push_back(rng.normal() * 3.0 + 1.0);
    }
    const auto data = make_dataset(xs, ys);
    const auto& st = data.standardization();

    auto kfun = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
      const oracle::Vec ell = to_vec(spec.lengthscales);
      return spec.family == KernelFamily::SquaredExponential
                 ? oracle::sqexp(to_vec(a), to_vec(b), ell, spec.signal_variance)
                 : oracle::matern52(to_vec(a), to_vec(b), ell,
                                    spec.signal_variance);
    };

    oracle::Kriging kr;
    kr.A = oracle::make_mat(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) kr.A[i][j] = kfun(xs[i], xs[j]);
      kr.A[i][i] += spec.nugget;
      kr.y.push_back(st.apply(ys[i]));
    }

    Eigen::VectorXd q(d);
    for (int k = 0; k < d; ++k) q[k] = rng.uniform01();
    oracle::Vec kq(n);
    for (int i = 0; i < n; ++i) kq[i] = kfun(q, xs[i]);

    const auto post = trajopt::posterior(data, spec, {q});
    const double mean_oracle = st.invert(kr.mean(kq));
    const double var_oracle =
        kr.variance(kq, spec.signal_variance + spec.nugget) * st.scale *
        st.scale;
    CHECK(post.mean[0] == doctest::Approx(mean_oracle).epsilon(1e-8));
    CHECK(std::abs(post.variance[0] - var_oracle) < 1e-8 * st.scale * st.scale);
  }
}

TEST_CASE("posterior variance never exceeds the prior variance") {
  Rng rng(13);
  const auto spec = sqexp_spec(2, 0.3, 1.7, 0.05);
  std::vector<Eigen::VectorXd> xs;
  std::vector<double> ys;
  for (int i = 0; i < 25; ++i) {
    xs.push_back(vec({rng.uniform01(), rng.uniform01()}));
    ys.push_back(rng.normal());
  }
  const auto data = make_dataset(xs, ys);
  std::vector<Eigen::VectorXd> queries;
  for (int i = 0; i < 50; ++i) {
    queries.push_back(vec({rng.uniform01(), rng.uniform01()}));
  }
  const auto post = trajopt::posterior(data, spec, queries);
  const auto& st = data.standardization();
  const double prior = (spec.signal_variance + spec.nugget) * st.scale * st.scale;
  for (int i = 0; i < post.variance.size(); ++i) {
    CHECK(post.variance[i] <= prior + 1e-8);
  }
}

TEST_CASE("adding a training point never increases posterior variance") {
  Rng rng(19);
  const auto spec = sqexp_spec(1, 0.3, 1.0, 0.0);
  for (int rep = 0; rep < 20; ++rep) {
    // Well-separated points keep the noise-free system comfortably PD.
    std::vector<Eigen::VectorXd> xs;
    std::vector<double> ys;
    for (int i = 0; i < 5; ++i) {
      xs.push_back(vec({(i + rng.uniform01()) / 5.0}));
      ys.push_back(rng.normal());
    }
    std::vector<Eigen::VectorXd> queries;
    for (int i = 0; i < 10; ++i) queries.push_back(vec({rng.uniform01()}));

    const auto small = make_dataset({xs.begin(), xs.end() - 1},
                                    {ys.begin(), ys.end() - 1});
    const auto full = make_dataset(xs, ys);
    // Same standardization for comparability.
    auto post_small = trajopt::posterior(small, spec, queries);
    auto post_full = trajopt::posterior(full, spec, queries);
    const auto& sts = small.standardization();
    const auto& stf = full.standardization();
    for (int i = 0; i < 10; ++i) {
      const double vs = post_small.variance[i] / (sts.scale * sts.scale);
      const double vf = post_full.variance[i] / (stf.scale * stf.scale);
      CHECK(vf <= vs + 1e-8);
    }
  }
}

TEST_CASE("log marginal likelihood closed form for one point") {
  EvaluationDataset data;
  data.add({vec({0.3}), 0}, 0.0);
  data.refresh_standardization();
  const auto spec = sqexp_spec(1, 1.0, 1.0, 0.5);
  const double expected = -0.5 * std::log(1.5) - 0.5 * std::log(2.0 * M_PI);
  CHECK(trajopt::log_marginal_likelihood(data, spec) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("log marginal likelihood matches the determinant oracle") {
  Rng rng(29);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 2 + static_cast<int>(rng.below(4));  // up to 5
    const auto spec = sqexp_spec(1, 0.5, 1.0 + rng.uniform01(), 0.1);
    std::vector<Eigen::VectorXd> xs;
    std::vector<double> ys;
    for (int i = 0; i < n; ++i) {
      xs.push_back(vec({rng.uniform01()}));
      ys.push_back(rng.normal());
    }
    const auto data = make_dataset(xs, ys);
    const auto& st = data.standardization();

    oracle::Mat A = oracle::make_mat(n, n);
    oracle::Vec y(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        A[i][j] = oracle::sqexp(to_vec(xs[i]), to_vec(xs[j]),
                                to_vec(spec.lengthscales), spec.signal_variance);
      }
      A[i][i] += spec.nugget;
      y[i] = st.apply(ys[i]);
    }
    const oracle::Vec w = oracle::solve(A, y);
    double quad = 0.0;
    for (int i = 0; i < n; ++i) quad += y[i] * w[i];
    const double expected = -0.5 * quad - 0.5 * std::log(oracle::determinant(A)) -
                            0.5 * n * std::log(2.0 * M_PI);
    CHECK(trajopt::log_marginal_likelihood(data, spec) ==
          doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("standardization makes the likelihood scale-free") {
  Rng rng(31);
  std::vector<Eigen::VectorXd> xs;
  std::vector<double> ys;
  for (int i = 0; i < 8; ++i) {
    xs.push_back(vec({rng.uniform01()}));
    ys.push_back(rng.normal() * 2.0 + 5.0);
  }
  std::vector<double> scaled = ys;
  for (double& v : scaled) v *= 1000.0;
  const auto d1 = make_dataset(xs, ys);
  const auto d2 = make_dataset(xs, scaled);
  const auto spec = sqexp_spec(1, 0.4, 1.3, 0.05);
  CHECK(trajopt::log_marginal_likelihood(d1, spec) ==
        doctest::Approx(trajopt::log_marginal_likelihood(d2, spec))
            .epsilon(1e-12));
}

TEST_CASE("likelihood drops when responses are corrupted with heavy noise") {
  Rng rng(37);
  const auto spec = sqexp_spec(1, 0.25, 1.0, 0.01);
  std::vector<Eigen::VectorXd> xs;
  for (int i = 0; i < 30; ++i) xs.push_back(vec({(i + 0.5) / 30.0}));

  // Smooth function sampled at the design.
  std::vector<double> smooth;
  for (const auto& x : xs) smooth.push_back(std::sin(6.0 * x[0]));
  std::vector<double> corrupted = smooth;
  for (double& v : corrupted) v += 5.0 * rng.normal();

  // Compare on a fixed standardization scale: same spec, raw responses.
  EvaluationDataset clean, noisy;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    clean.add({xs[i], 0}, smooth[i]);
    noisy.add({xs[i], 0}, corrupted[i]);
  }
  clean.refresh_standardization();
  noisy.refresh_standardization();
  CHECK(trajopt::log_marginal_likelihood(clean, spec) >
        trajopt::log_marginal_likelihood(noisy, spec));
}

TEST_CASE("hyperparameter fit recovers a known lengthscale within 2x") {
  Rng rng(41);
  const int n = 40;
  const double true_ell = 0.2;
  std::vector<Eigen::VectorXd> xs;
  for (int i = 0; i < n; ++i) xs.push_back(vec({(i + rng.uniform01()) / n}));

  // Draw the responses from the generating GP via the oracle Cholesky.
  oracle::Mat K = oracle::make_mat(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      K[i][j] = oracle::sqexp(to_vec(xs[i]), to_vec(xs[j]), {true_ell}, 1.0);
    }
    K[i][i] += 1e-6;
  }
  const oracle::Mat L = oracle::cholesky(K);
  oracle::Vec z(n);
  for (double& v : z) v = rng.normal();
  std::vector<double> ys(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) ys[i] += L[i][j] * z[j];
  }

  EvaluationDataset data;
  for (int i = 0; i < n; ++i) data.add({xs[i], 0}, ys[i]);
  Rng fit_rng(7);
  const auto fitted = trajopt::fit_hyperparameters(
      data, KernelFamily::SquaredExponential, {}, fit_rng);
  CHECK_FALSE(fitted.fit_warning);
  CHECK(fitted.lengthscales[0] > true_ell / 2.0);
  CHECK(fitted.lengthscales[0] < true_ell * 2.0);
}

TEST_CASE("degenerate two-point data falls back with a warning") {
  EvaluationDataset data;
  data.add({vec({0.2}), 0}, 1.0);
  data.add({vec({0.8}), 0}, 2.0);
  Rng rng(3);
  const auto spec = trajopt::fit_hyperparameters(
      data, KernelFamily::Matern52, {}, rng);
  CHECK(spec.fit_warning);
  CHECK(spec.lengthscales[0] == doctest::Approx(0.6));  // the single distance
}

TEST_CASE("pinned bounds return exactly the pinned values") {
  Rng rng(43);
  EvaluationDataset data;
  for (int i = 0; i < 10; ++i) {
    data.add({vec({i / 10.0}), 0}, rng.normal());
  }
  trajopt::FitBounds bounds;
  bounds.lengthscale_lo = bounds.lengthscale_hi = 0.33;
  bounds.signal_variance_lo = bounds.signal_variance_hi = 2.5;
  bounds.nugget_lo = bounds.nugget_hi = 0.01;
  const auto spec = trajopt::fit_hyperparameters(
      data, KernelFamily::Matern52, bounds, rng);
  CHECK(spec.lengthscales[0] == 0.33);
  CHECK(spec.signal_variance == 2.5);
  CHECK(spec.nugget == 0.01);
}
