#include <cmath>

#include "mvdesc/imgproc.hpp"

namespace mvdesc {

GradientField compute_gradient(const GrayImage& img) {
  const int w = img.width();
  const int h = img.height();
  GradientField g;
  g.width = w;
  g.height = h;
  const std::size_t n = img.size();
  g.dx.resize(n);
  g.dy.resize(n);
  g.magnitude.resize(n);
  g.angle.assign(n, 0.0);
  g.valid.assign(n, 0);

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double gx;
      if (x == 0) {
        gx = img(1, y) - img(0, y);
      } else if (x == w - 1) {
        gx = img(w - 1, y) - img(w - 2, y);
      } else {
        gx = 0.5 * (img(x + 1, y) - img(x - 1, y));
      }
      double gy;
      if (y == 0) {
        gy = img(x, 1) - img(x, 0);
      } else if (y == h - 1) {
        gy = img(x, h - 1) - img(x, h - 2);
      } else {
        gy = 0.5 * (img(x, y + 1) - img(x, y - 1));
      }
      const std::size_t i = g.index(x, y);
      g.dx[i] = gx;
      g.dy[i] = gy;
      const double m = std::hypot(gx, gy);
      g.magnitude[i] = m;
      if (m > 0.0) {
        double a = std::atan2(gy, gx);
        if (a < 0.0) a += kTwoPi;
        // atan2 can return exactly -0 or a value that rounds to 2pi.
        if (a >= kTwoPi) a = 0.0;
        g.angle[i] = a;
        g.valid[i] = 1;
      }
    }
  }
  return g;
}

}  // namespace mvdesc
