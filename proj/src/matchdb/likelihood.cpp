#include <cmath>
#include <stdexcept>

#include "mvdesc/matchdb.hpp"

namespace mvdesc {

double likelihood_eval(const GradientField& test_grad, const OrientationDensity& model,
                       const DescriptorParams& params) {
  if (!model.normalized) throw std::invalid_argument("likelihood_eval: model must be normalized");
  if (model.cells != params.cells || model.bins != params.bins) {
    throw std::invalid_argument("likelihood_eval: model layout does not match params");
  }
  const OrientationDensity q = normalize_dog(compute_hog_density(test_grad, params));
  const double eps = kDivergenceSmoothing;
  double total = 0.0;
  for (int c = 0; c < static_cast<int>(model.num_cells()); ++c) {
    double mass = 0.0;
    for (int b = 0; b < model.bins; ++b) mass += model.at(c, b) + eps;
    for (int b = 0; b < model.bins; ++b) total += q.at(c, b) * std::log((model.at(c, b) + eps) / mass);
  }
  return total;
}

}  // namespace mvdesc
