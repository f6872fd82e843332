#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mvdesc/rhog.hpp"

namespace mvdesc {

namespace {

std::vector<double> inplane_angles(double range, int n) {
  if (range == 0.0 || n == 1) return {0.0};
  // Even counts take an odd grid and drop its last point so 0 stays in.
  const int grid = n % 2 == 1 ? n : n + 1;
  std::vector<double> out;
  const int half = (grid - 1) / 2;
  const double step = range / half;
  for (int k = 0; k < n; ++k) out.push_back((k - half) * step);
  return out;
}

}  // namespace

ViewpointSet sample_hemisphere(int n_azimuth, int n_tilt, double inplane_range, int n_inplane,
                               double max_tilt) {
  if (n_azimuth < 1 || n_tilt < 1 || n_inplane < 1) {
    throw std::invalid_argument("sample_hemisphere: counts must be >= 1");
  }
  if (!(inplane_range >= 0.0) || !(max_tilt >= 0.0 && max_tilt < std::numbers::pi / 2)) {
    throw std::invalid_argument("sample_hemisphere: bad angular range");
  }
  const int directions = n_azimuth * n_tilt;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  const double cos_min = std::cos(max_tilt);
  const auto angles = inplane_angles(inplane_range, n_inplane);

  ViewpointSet set;
  set.rotations.reserve(static_cast<std::size_t>(directions) * angles.size());
  for (int i = 0; i < directions; ++i) {
    // Equal-area spacing on the cap; index 0 is the optical axis itself.
    const double c = directions == 1 ? 1.0 : 1.0 - (1.0 - cos_min) * i / (directions - 1);
    const double tilt = std::acos(std::clamp(c, -1.0, 1.0));
    const double phi = golden * i;
    const Mat3 dir = rotation_from_axis_angle(tilt * Vec3(-std::sin(phi), std::cos(phi), 0.0));
    for (double psi : angles) {
      set.rotations.push_back(dir * rotation_from_axis_angle(Vec3(0.0, 0.0, psi)));
    }
  }
  return set;
}

ViewpointSet sample_hemisphere(const HemisphereParams& p) {
  return sample_hemisphere(p.n_azimuth, p.n_tilt, p.inplane_range, p.n_inplane, p.max_tilt);
}

}  // namespace mvdesc
