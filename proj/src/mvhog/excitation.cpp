#include <algorithm>
#include <stdexcept>

#include "mvdesc/mvhog.hpp"

namespace mvdesc {

double raw_excitation(std::span<const GrayImage> patches) {
  if (patches.empty()) throw std::invalid_argument("excitation: empty patch list");
  const int w = patches.front().width();
  const int h = patches.front().height();
  std::vector<double> mean(patches.front().size(), 0.0);
  for (const auto& p : patches) {
    if (p.width() != w || p.height() != h) {
      throw std::invalid_argument("excitation: patches differ in size");
    }
    const auto d = p.data();
    for (std::size_t i = 0; i < d.size(); ++i) mean[i] += d[i];
  }
  for (double& m : mean) m /= static_cast<double>(patches.size());
  double total = 0.0;
  for (const auto& p : patches) {
    const auto d = p.data();
    for (std::size_t i = 0; i < d.size(); ++i) total += (d[i] - mean[i]) * (d[i] - mean[i]);
  }
  return total / static_cast<double>(patches.size());
}

double excitation_score(std::span<const GrayImage> patches, double full_track_value) {
  const double raw = raw_excitation(patches);
  if (!(full_track_value > 0.0)) return 0.0;
  return std::clamp(raw / full_track_value, 0.0, 1.0);
}

}  // namespace mvdesc
