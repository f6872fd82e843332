#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "mvdesc/tracker.hpp"

namespace mvdesc {

namespace {

bool window_inside(const GrayImage& img, const Vec2& p, double half) {
  return p.x() - half >= 0.0 && p.y() - half >= 0.0 && p.x() + half <= img.width() - 1.0 &&
         p.y() + half <= img.height() - 1.0;
}

}  // namespace

KltResult klt_step(const GrayImage& prev, const GrayImage& next, const Vec2& pos, const Vec2& guess,
                   const KltParams& params) {
  KltResult res;
  res.position = guess;
  const int h = params.window / 2;
  const std::size_t n = static_cast<std::size_t>(params.window) * params.window;
  if (params.window < 3 || !window_inside(prev, pos, h + 1.0)) return res;

  std::vector<double> tmpl(n), gx(n), gy(n);
  double mgx = 0.0, mgy = 0.0;
  for (int i = 0; i < params.window; ++i) {
    for (int j = 0; j < params.window; ++j) {
      const double x = pos.x() + (j - h), y = pos.y() + (i - h);
      const std::size_t k = static_cast<std::size_t>(i) * params.window + j;
      tmpl[k] = prev.sample_bilinear(x, y);
      gx[k] = 0.5 * (prev.sample_bilinear(x + 1.0, y) - prev.sample_bilinear(x - 1.0, y));
      gy[k] = 0.5 * (prev.sample_bilinear(x, y + 1.0) - prev.sample_bilinear(x, y - 1.0));
      mgx += gx[k];
      mgy += gy[k];
    }
  }
  // Centering the gradients eliminates a per-window intensity offset from the
  // least-squares problem.
  mgx /= static_cast<double>(n);
  mgy /= static_cast<double>(n);
  double a = 0.0, b = 0.0, c = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    gx[k] -= mgx;
    gy[k] -= mgy;
    a += gx[k] * gx[k];
    b += gx[k] * gy[k];
    c += gy[k] * gy[k];
  }
  const double tr = a + c, det = a * c - b * b;
  const double disc = std::sqrt(std::max(0.25 * tr * tr - det, 0.0));
  const double lmax = 0.5 * tr + disc, lmin = 0.5 * tr - disc;
  res.condition = lmin > 1e-12 * std::max(lmax, 1e-300) ? lmax / lmin : std::numeric_limits<double>::infinity();
  if (!(res.condition <= params.max_condition)) return res;

  std::vector<double> err(n);
  auto residuals = [&](const Vec2& p) {
    double mean = 0.0;
    for (int i = 0; i < params.window; ++i) {
      for (int j = 0; j < params.window; ++j) {
        const std::size_t k = static_cast<std::size_t>(i) * params.window + j;
        err[k] = next.sample_bilinear(p.x() + (j - h), p.y() + (i - h)) - tmpl[k];
        mean += err[k];
      }
    }
    return mean / static_cast<double>(n);
  };

  Vec2 p = guess;
  for (int it = 0; it < params.max_iters; ++it) {
    if (!window_inside(next, p, h)) return res;
    residuals(p);
    double bx = 0.0, by = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      bx += gx[k] * err[k];
      by += gy[k] * err[k];
    }
    const Vec2 delta((c * bx - b * by) / det, (a * by - b * bx) / det);
    p -= delta;
    res.iterations = it + 1;
    if (delta.norm() < params.converge_eps) break;
  }
  if (!window_inside(next, p, h)) return res;
  const double mean = residuals(p);
  double r = 0.0;
  for (double e : err) r += std::abs(e - mean);
  res.residual = r / static_cast<double>(n);
  res.position = p;
  res.accepted = res.residual <= params.reject_thresh;
  return res;
}

KltResult klt_step(const GrayImage& prev, const GrayImage& next, const Vec2& pos, const KltParams& params) {
  return klt_step(prev, next, pos, pos, params);
}

KltResult klt_pyramidal(const ImagePyramid& prev, const ImagePyramid& next, int level, const Vec2& pos,
                        const Vec2& guess, int extra_levels, const KltParams& params) {
  const int top = std::min(level + std::max(extra_levels, 0), std::min(prev.num_levels(), next.num_levels()) - 1);
  auto to_level = [&](const Vec2& v, int l) {
    return Vec2(base_to_level(level_to_base(v.x(), level), l), base_to_level(level_to_base(v.y(), level), l));
  };
  auto from_level = [&](const Vec2& v, int l) {
    return Vec2(base_to_level(level_to_base(v.x(), l), level), base_to_level(level_to_base(v.y(), l), level));
  };
  Vec2 g = guess;
  KltParams coarse = params;
  coarse.reject_thresh = std::numeric_limits<double>::infinity();
  for (int l = top; l > level; --l) {
    const auto r = klt_step(prev.level(l), next.level(l), to_level(pos, l), to_level(g, l), coarse);
    if (r.accepted) g = from_level(r.position, l);
  }
  return klt_step(prev.level(level), next.level(level), pos, g, params);
}

}  // namespace mvdesc
