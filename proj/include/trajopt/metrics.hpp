#pragma once

#include <span>
#include <vector>

namespace trajopt {

// Root mean squared pointwise error. Throws ShapeError on length mismatch.
double rmse(std::span<const double> sim, std::span<const double> obs);

// Normalized absolute error summed across two output series,
// sum_t |h_t - h^_t| / h_t + sum_t |d_t - d^_t| / d_t. Terms with a zero
// observed value are dropped; *dropped_terms reports whether any were.
double dual_objective(std::span<const double> sim_first,
                      std::span<const double> sim_second,
                      std::span<const double> obs_first,
                      std::span<const double> obs_second,
                      bool* dropped_terms = nullptr);

// Count of discrepancies strictly below the threshold.
int threshold_count(std::span<const double> discrepancies, double threshold);

// Cumulative below-threshold curve QT_t for t = 1..budget. Entries past the
// end of a truncated trace hold the final count.
std::vector<int> quality_curve(std::span<const double> discrepancies,
                               double threshold, int budget);

// Normalized trapezoidal area under the quality curve:
// (1/budget^2) * sum_{t=2..budget} (QT_t + QT_{t-1}) / 2.
double rauc(std::span<const double> discrepancies, double threshold,
            int budget);

struct QualityReport {
  std::vector<double> thresholds;
  std::vector<int> counts;
  std::vector<double> proportions;  // count / budget
  std::vector<double> raucs;
};

QualityReport quality_report(std::span<const double> discrepancies,
                             std::span<const double> thresholds, int budget);

}  // namespace trajopt
