#include "trajopt/dataset.hpp"

#include <cmath>

namespace trajopt {

void EvaluationDataset::add(AugmentedInput input, double response) {
  if (!seen_.insert(input).second) {
    throw ConfigError("dataset: duplicate augmented input rejected");
  }
  inputs_.push_back(std::move(input));
  responses_.push_back(response);
}

void EvaluationDataset::refresh_standardization() {
  const std::size_t n = responses_.size();
  if (n == 0) {
    standardization_ = {};
    return;
  }
  double mean = 0.0;
  for (double r : responses_) mean += r;
  mean /= static_cast<double>(n);
  double scale = 1.0;
  if (n > 1) {
    double ss = 0.0;
    for (double r : responses_) ss += (r - mean) * (r - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (sd > 0.0 && std::isfinite(sd)) scale = sd;
  }
  standardization_ = {mean, scale};
}

std::vector<double> EvaluationDataset::standardized_responses() const {
  std::vector<double> out(responses_.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = standardization_.apply(responses_[i]);
  }
  return out;
}

}  // namespace trajopt
