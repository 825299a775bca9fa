#pragma once

#include <unordered_set>
#include <vector>

#include "trajopt/types.hpp"

namespace trajopt {

// Affine response transform applied before any GP fitting; the zero-mean
// prior lives on the standardized scale.
struct Standardization {
  double mean = 0.0;
  double scale = 1.0;

  double apply(double raw) const { return (raw - mean) / scale; }
  double invert(double standardized) const {
    return mean + scale * standardized;
  }
};

// All evaluated augmented inputs with their scalar discrepancies. Exact
// duplicates are rejected; the standardization is refreshed from the current
// responses whenever a surrogate is (re)fit.
class EvaluationDataset {
 public:
  void add(AugmentedInput input, double response);
  std::size_t size() const { return inputs_.size(); }
  bool empty() const { return inputs_.empty(); }
  bool contains(const AugmentedInput& input) const {
    return seen_.count(input) > 0;
  }

  const std::vector<AugmentedInput>& inputs() const { return inputs_; }
  const std::vector<double>& responses() const { return responses_; }
  const Standardization& standardization() const { return standardization_; }

  // Recomputes (mean, scale) from the current responses. Scale falls back to
  // 1 when fewer than two points or zero spread.
  void refresh_standardization();

  std::vector<double> standardized_responses() const;

 private:
  std::vector<AugmentedInput> inputs_;
  std::vector<double> responses_;
  std::unordered_set<AugmentedInput, AugmentedInputHash> seen_;
  Standardization standardization_;
};

}  // namespace trajopt
