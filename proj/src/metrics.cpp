#include "trajopt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "trajopt/errors.hpp"

namespace trajopt {

double rmse(std::span<const double> sim, std::span<const double> obs) {
  if (sim.size() != obs.size()) {
    throw ShapeError("rmse: series lengths differ (" +
                     std::to_string(sim.size()) + " vs " +
                     std::to_string(obs.size()) + ")");
  }
  if (sim.empty()) throw ShapeError("rmse: empty series");
  double acc = 0.0;
  for (std::size_t t = 0; t < sim.size(); ++t) {
    const double d = sim[t] - obs[t];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(sim.size()));
}

double dual_objective(std::span<const double> sim_first,
                      std::span<const double> sim_second,
                      std::span<const double> obs_first,
                      std::span<const double> obs_second,
                      bool* dropped_terms) {
  if (sim_first.size() != obs_first.size() ||
      sim_second.size() != obs_second.size()) {
    throw ShapeError("dual_objective: series lengths differ");
  }
  bool dropped = false;
  double acc = 0.0;
  for (std::size_t t = 0; t < obs_first.size(); ++t) {
    if (obs_first[t] > 0.0) {
      acc += std::abs(obs_first[t] - sim_first[t]) / obs_first[t];
    } else {
      dropped = true;
    }
  }
  for (std::size_t t = 0; t < obs_second.size(); ++t) {
    if (obs_second[t] > 0.0) {
      acc += std::abs(obs_second[t] - sim_second[t]) / obs_second[t];
    } else {
      dropped = true;
    }
  }
  if (dropped_terms) *dropped_terms = dropped;
  return acc;
}

int threshold_count(std::span<const double> discrepancies, double threshold) {
  int c = 0;
  for (double d : discrepancies) {
    if (d < threshold) ++c;
  }
  return c;
}

std::vector<int> quality_curve(std::span<const double> discrepancies,
                               double threshold, int budget) {
  std::vector<int> qt(static_cast<std::size_t>(budget), 0);
  int running = 0;
  for (int t = 1; t <= budget; ++t) {
    const std::size_t idx = static_cast<std::size_t>(t - 1);
    if (idx < discrepancies.size() && discrepancies[idx] < threshold) {
      ++running;
    }
    qt[idx] = running;
  }
  return qt;
}

double rauc(std::span<const double> discrepancies, double threshold,
            int budget) {
  if (budget < 1) return 0.0;
  const std::vector<int> qt = quality_curve(discrepancies, threshold, budget);
  double acc = 0.0;
  for (int t = 2; t <= budget; ++t) {
    acc += 0.5 * (qt[static_cast<std::size_t>(t - 1)] +
                  qt[static_cast<std::size_t>(t - 2)]);
  }
  return acc / (static_cast<double>(budget) * static_cast<double>(budget));
}

QualityReport quality_report(std::span<const double> discrepancies,
                             std::span<const double> thresholds, int budget) {
  QualityReport rep;
  rep.thresholds.assign(thresholds.begin(), thresholds.end());
  for (double th : thresholds) {
    const int c = threshold_count(
        discrepancies.first(
            std::min<std::size_t>(discrepancies.size(),
                                  static_cast<std::size_t>(budget))),
        th);
    rep.counts.push_back(c);
    rep.proportions.push_back(static_cast<double>(c) /
                              static_cast<double>(budget));
    rep.raucs.push_back(rauc(discrepancies, th, budget));
  }
  return rep;
}

}  // namespace trajopt
