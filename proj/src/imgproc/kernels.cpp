#include <cmath>
#include <numbers>

#include "mvdesc/imgproc.hpp"

namespace mvdesc {

void KernelParams::validate(double patch_area) const {
  if (!(eps > 0.0 && eps < std::numbers::pi)) {
    throw std::invalid_argument("KernelParams: eps must lie in (0, pi)");
  }
  if (!(sigma > 0.0 && sigma < std::sqrt(patch_area))) {
    throw std::invalid_argument("KernelParams: sigma must lie in (0, sqrt(patch area))");
  }
}

double circular_distance(double a, double b) {
  double d = std::fmod(std::abs(a - b), kTwoPi);
  return d > std::numbers::pi ? kTwoPi - d : d;
}

double angular_kernel(double theta, double mu, double eps, AngularKernel kind) {
  const double d = circular_distance(theta, mu);
  switch (kind) {
    case AngularKernel::triangular:
      return d >= eps ? 0.0 : 1.0 - d / eps;
    case AngularKernel::wrapped_gaussian: {
      // Terms beyond |k| = 3 are below 1e-30 for eps < pi.
      double sum = 0.0;
      for (int k = -3; k <= 3; ++k) {
        const double t = d + k * kTwoPi;
        sum += std::exp(-0.5 * t * t / (eps * eps));
      }
      return sum / (std::sqrt(kTwoPi) * eps);
    }
  }
  return 0.0;
}

double spatial_kernel(double dx, double dy, double sigma) {
  const double s2 = sigma * sigma;
  return std::exp(-0.5 * (dx * dx + dy * dy) / s2) / (kTwoPi * s2);
}

}  // namespace mvdesc
