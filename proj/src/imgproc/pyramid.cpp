#include <cmath>
#include <string>

#include "mvdesc/imgproc.hpp"

namespace mvdesc {

namespace {

GrayImage downsample(const GrayImage& src) {
  const int w = (src.width() + 1) / 2;
  const int h = (src.height() + 1) / 2;
  GrayImage out(w, h);
  for (int y = 0; y < h; ++y) {
    const int y0 = 2 * y;
    const int y1 = std::min(2 * y + 1, src.height() - 1);
    for (int x = 0; x < w; ++x) {
      const int x0 = 2 * x;
      const int x1 = std::min(2 * x + 1, src.width() - 1);
      out(x, y) = 0.25 * (src(x0, y0) + src(x1, y0) + src(x0, y1) + src(x1, y1));
    }
  }
  return out;
}

}  // namespace

ImagePyramid build_pyramid(const GrayImage& img, int levels) {
  if (levels < 1 || levels > kMaxPyramidLevels) {
    throw std::invalid_argument("build_pyramid: levels must be in [1, 5], got " +
                                std::to_string(levels));
  }
  const int min_side = (1 << (levels - 1)) * kMinImageSide;
  if (img.width() < min_side || img.height() < min_side) {
    throw std::invalid_argument("build_pyramid: image too small for " + std::to_string(levels) +
                                " levels");
  }
  ImagePyramid pyr;
  pyr.levels.reserve(static_cast<std::size_t>(levels));
  pyr.levels.push_back(img);
  for (int k = 1; k < levels; ++k) {
    pyr.levels.push_back(downsample(pyr.levels.back()));
  }
  return pyr;
}

double base_to_level(double coord, int level) {
  return (coord + 0.5) / std::ldexp(1.0, level) - 0.5;
}

double level_to_base(double coord, int level) {
  return (coord + 0.5) * std::ldexp(1.0, level) - 0.5;
}

}  // namespace mvdesc
