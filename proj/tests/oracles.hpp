// Independent reference implementations used as test oracles. Everything here
// is hand-rolled on std::vector so it shares no code path with the library's
// Eigen/Cholesky implementations.
#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace oracle {

using Mat = std::vector<std::vector<double>>;
using Vec = std::vector<double>;

inline Mat make_mat(std::size_t n, std::size_t m) {
  return Mat(n, Vec(m, 0.0));
}

// Gaussian elimination with partial pivoting.
inline Vec solve(Mat a, Vec b) {
  const std::size_t n = a.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (a[pivot][col] == 0.0) throw std::runtime_error("oracle: singular");
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  Vec x(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double acc = b[i];
    for (std::size_t c = i + 1; c < n; ++c) acc -= a[i][c] * x[c];
    x[i] = acc / a[i][i];
  }
  return x;
}

// Determinant by elimination with partial pivoting.
inline double determinant(Mat a) {
  const std::size_t n = a.size();
  double det = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (a[pivot][col] == 0.0) return 0.0;
    if (pivot != col) {
      std::swap(a[col], a[pivot]);
      det = -det;
    }
    det *= a[col][col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
    }
  }
  return det;
}

// Lower Cholesky factor (for generating synthetic GP draws in tests).
inline Mat cholesky(const Mat& a) {
  const std::size_t n = a.size();
  Mat l = make_mat(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double acc = a[i][j];
      for (std::size_t k = 0; k < j; ++k) acc -= l[i][k] * l[j][k];
      if (i == j) {
        if (acc <= 0.0) throw std::runtime_error("oracle: not PD");
        l[i][j] = std::sqrt(acc);
      } else {
        l[i][j] = acc / l[j][j];
      }
    }
  }
  return l;
}

inline Mat kron(const Mat& a, const Mat& b) {
  const std::size_t ar = a.size(), ac = a[0].size();
  const std::size_t br = b.size(), bc = b[0].size();
  Mat out = make_mat(ar * br, ac * bc);
  for (std::size_t i = 0; i < ar; ++i) {
    for (std::size_t j = 0; j < ac; ++j) {
      for (std::size_t p = 0; p < br; ++p) {
        for (std::size_t q = 0; q < bc; ++q) {
          out[i * br + p][j * bc + q] = a[i][j] * b[p][q];
        }
      }
    }
  }
  return out;
}

inline double normal_pdf(double z, double sigma) {
  return std::exp(-0.5 * (z / sigma) * (z / sigma)) /
         (sigma * std::sqrt(2.0 * 3.14159265358979323846));
}

// Squared-exponential / Matern-5/2 kernels, restated independently.
inline double sqexp(const Vec& a, const Vec& b, const Vec& ell, double sf2) {
  double r2 = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = (a[k] - b[k]) / ell[k];
    r2 += d * d;
  }
  return sf2 * std::exp(-0.5 * r2);
}

inline double matern52(const Vec& a, const Vec& b, const Vec& ell, double sf2) {
  double r2 = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = (a[k] - b[k]) / ell[k];
    r2 += d * d;
  }
  const double s = std::sqrt(5.0 * r2);
  return sf2 * (1.0 + s + 5.0 * r2 / 3.0) * std::exp(-s);
}

// Kriging oracle: mean = k' A^-1 y, var = kss - k' A^-1 k, both through the
// elimination solver above.
struct Kriging {
  Mat A;   // training covariance including noise diagonal
  Vec y;   // training responses (standardized scale)

  double mean(const Vec& k) const {
    const Vec w = solve(A, y);
    double m = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) m += k[i] * w[i];
    return m;
  }
  double variance(const Vec& k, double kss) const {
    const Vec w = solve(A, k);
    double v = kss;
    for (std::size_t i = 0; i < k.size(); ++i) v -= k[i] * w[i];
    return v;
  }
};

// Sample mean/covariance of draws, for Monte Carlo comparisons.
inline Vec sample_mean(const std::vector<Vec>& draws) {
  const std::size_t n = draws.size(), m = draws[0].size();
  Vec mean(m, 0.0);
  for (const auto& d : draws) {
    for (std::size_t j = 0; j < m; ++j) mean[j] += d[j];
  }
  for (double& v : mean) v /= static_cast<double>(n);
  return mean;
}

inline Mat sample_covariance(const std::vector<Vec>& draws) {
  const std::size_t n = draws.size(), m = draws[0].size();
  const Vec mean = sample_mean(draws);
  Mat cov = make_mat(m, m);
  for (const auto& d : draws) {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        cov[i][j] += (d[i] - mean[i]) * (d[j] - mean[j]);
      }
    }
  }
  for (auto& row : cov) {
    for (double& v : row) v /= static_cast<double>(n - 1);
  }
  return cov;
}

}  // namespace oracle
