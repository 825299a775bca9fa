#include "trajopt/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace trajopt {

CandidateGrid::CandidateGrid(std::vector<AugmentedInput> points, int capacity)
    : capacity_(capacity) {
  if (capacity < 1) throw ConfigError("candidate grid: capacity must be >= 1");
  for (auto& p : points) add(std::move(p));
}

bool CandidateGrid::add(AugmentedInput p) {
  if (contains(p)) return false;
  if (static_cast<int>(points_.size()) >= capacity_) {
    throw ConfigError("candidate grid: capacity exceeded");
  }
  index_.insert(p);
  points_.push_back(std::move(p));
  return true;
}

void CandidateGrid::replace(std::size_t idx, AugmentedInput p) {
  if (idx >= points_.size()) throw ConfigError("candidate grid: bad index");
  if (contains(p)) {
    if (points_[idx] == p) return;
    throw ConfigError("candidate grid: replacement already present");
  }
  index_.erase(points_[idx]);
  index_.insert(p);
  points_[idx] = std::move(p);
}

namespace {

double reflect_unit(double v) {
  // Fold into [0,1] by repeated reflection.
  while (v < 0.0 || v > 1.0) {
    if (v < 0.0) v = -v;
    if (v > 1.0) v = 2.0 - v;
  }
  return v;
}

}  // namespace

Eigen::VectorXd ProposalSpec::propose(const Eigen::VectorXd& x,
                                      Rng& rng) const {
  Eigen::VectorXd out(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    out[k] = reflect_unit(x[k] + step_scale * rng.normal());
  }
  return out;
}

std::vector<Eigen::VectorXd> lhs_points(int n, int d, Rng& rng,
                                        int candidates) {
  if (n < 1 || d < 1) throw ConfigError("lhs: need n >= 1 and d >= 1");

  auto one_design = [&]() {
    std::vector<Eigen::VectorXd> pts(n, Eigen::VectorXd(d));
    std::vector<int> perm(n);
    for (int k = 0; k < d; ++k) {
      std::iota(perm.begin(), perm.end(), 0);
      for (int i = n - 1; i > 0; --i) {
        std::swap(perm[i], perm[rng.below(static_cast<std::uint64_t>(i + 1))]);
      }
      for (int i = 0; i < n; ++i) {
        pts[i][k] = (perm[i] + rng.uniform01()) / n;
      }
    }
    return pts;
  };

  auto min_sq_dist = [](const std::vector<Eigen::VectorXd>& pts) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        best = std::min(best, (pts[i] - pts[j]).squaredNorm());
      }
    }
    return best;
  };

  std::vector<Eigen::VectorXd> best = one_design();
  if (n > 1) {
    double best_score = min_sq_dist(best);
    for (int c = 1; c < candidates; ++c) {
      auto trial = one_design();
      const double score = min_sq_dist(trial);
      if (score > best_score) {
        best_score = score;
        best = std::move(trial);
      }
    }
  }
  return best;
}

CandidateGrid lhs_grid(int m, int d, const std::vector<std::int64_t>& seedset,
                       Rng& rng) {
  if (seedset.empty()) throw ConfigError("lhs_grid: empty seed set");
  auto xs = lhs_points(m, d, rng);
  std::vector<AugmentedInput> pts;
  pts.reserve(m);
  for (int i = 0; i < m; ++i) {
    pts.push_back({std::move(xs[i]),
                   seedset[rng.below(static_cast<std::uint64_t>(seedset.size()))]});
  }
  return CandidateGrid(std::move(pts), m);
}

double likelihood_weight(double d_sample, double sigma_obs) {
  if (!(sigma_obs > 0.0)) throw ConfigError("likelihood: sigma_obs must be > 0");
  const double z = d_sample / sigma_obs;
  return std::exp(-0.5 * z * z) / (sigma_obs * std::sqrt(2.0 * 3.14159265358979323846));
}

double mh_acceptance(double l_can, double l_cur, double q_forward,
                     double q_reverse) {
  const double num = l_can * q_forward;
  const double den = l_cur * q_reverse;
  if (!(den > 0.0)) return num > 0.0 ? 1.0 : 0.0;
  return std::min(1.0, num / den);
}

bool mh_accept(double alpha, Rng& rng) { return rng.uniform01() < alpha; }

CandidateGrid filter_grid(const CandidateGrid& grid,
                          const std::vector<double>& weights,
                          const std::vector<double>& d_samples, Rng& rng) {
  const std::size_t n = grid.size();
  if (weights.size() != n || d_samples.size() != n) {
    throw ShapeError("filter_grid: weights do not match grid size");
  }

  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw ConfigError("filter_grid: negative weight");
    total += w;
  }

  std::vector<AugmentedInput> survivors;
  if (total > 0.0) {
    std::vector<double> cumulative(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += weights[i] / total;
      cumulative[i] = acc;
    }
    cumulative[n - 1] = 1.0;
    for (std::size_t draw = 0; draw < n; ++draw) {
      const double u = rng.uniform01();
      const auto it =
          std::lower_bound(cumulative.begin(), cumulative.end(), u);
      survivors.push_back(
          grid.points()[static_cast<std::size_t>(it - cumulative.begin())]);
    }
  } else {
    // Underflow fallback: keep the best tenth by sampled discrepancy.
    const std::size_t keep =
        (static_cast<std::size_t>(grid.capacity()) + 9) / 10;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return d_samples[a] < d_samples[b];
    });
    for (std::size_t i = 0; i < std::min(keep, n); ++i) {
      survivors.push_back(grid.points()[order[i]]);
    }
  }

  CandidateGrid out({}, grid.capacity());
  for (auto& p : survivors) out.add(std::move(p));
  return out;
}

DensifyResult densify(const CandidateGrid& grid,
                      const std::vector<double>& current_d,
                      const MarginalSampler& sampler,
                      const ProposalSpec& proposal,
                      const std::vector<std::int64_t>& seedset,
                      double sigma_obs, Rng& rng, int stall_multiplier) {
  if (grid.size() == 0) throw ConfigError("densify: empty grid");
  if (current_d.size() != grid.size()) {
    throw ShapeError("densify: sampled discrepancies do not match grid");
  }
  const int m_target = grid.capacity();

  DensifyResult result;
  result.grid = grid;
  std::vector<double> dts = current_d;

  const long stall_limit =
      static_cast<long>(stall_multiplier) * static_cast<long>(m_target);
  std::vector<std::int64_t> order(seedset);

  while (static_cast<int>(result.grid.size()) < m_target &&
         result.proposals < stall_limit) {
    ++result.proposals;
    const std::size_t a = rng.below(result.grid.size());
    const AugmentedInput& anchor = result.grid.points()[a];
    const double l_cur = likelihood_weight(dts[a], sigma_obs);
    const Eigen::VectorXd x_can = proposal.propose(anchor.x, rng);

    // Seed order randomized per proposal so no seed label is favored.
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.below(i)]);
    }
    for (std::int64_t seed : order) {
      AugmentedInput candidate{x_can, seed};
      const double d_can = sampler(candidate, rng);
      const double alpha =
          mh_acceptance(likelihood_weight(d_can, sigma_obs), l_cur, 1.0, 1.0);
      const bool pass = mh_accept(alpha, rng);
      if (pass && !result.grid.contains(candidate)) {
        result.grid.add(std::move(candidate));
        dts.push_back(d_can);
        break;
      }
    }
  }

  if (static_cast<int>(result.grid.size()) < m_target) {
    result.stalled = true;
    const int d = static_cast<int>(grid.points()[0].x.size());
    for (int attempt = 0;
         attempt < 100 && static_cast<int>(result.grid.size()) < m_target;
         ++attempt) {
      const int need = m_target - static_cast<int>(result.grid.size());
      auto xs = lhs_points(need, d, rng);
      for (auto& x : xs) {
        if (static_cast<int>(result.grid.size()) >= m_target) break;
        AugmentedInput p{std::move(x),
                         seedset[rng.below(static_cast<std::uint64_t>(
                             seedset.size()))]};
        if (result.grid.add(std::move(p))) {
          dts.push_back(std::numeric_limits<double>::quiet_NaN());
        }
      }
    }
  }
  return result;
}

}  // namespace trajopt
