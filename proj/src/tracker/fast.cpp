#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <tuple>

#include "mvdesc/tracker.hpp"

namespace mvdesc {

namespace {

// Bresenham circle of radius 3, clockwise from the top.
constexpr std::array<std::array<int, 2>, 16> kCircle{{{0, -3}, {1, -3}, {2, -2}, {3, -1},
                                                      {3, 0},  {3, 1},  {2, 2},  {1, 3},
                                                      {0, 3},  {-1, 3}, {-2, 2}, {-3, 1},
                                                      {-3, 0}, {-3, -1}, {-2, -2}, {-1, -3}}};

bool has_arc(const std::array<bool, 16>& flags, int arc) {
  int run = 0;
  for (int k = 0; k < 32; ++k) {
    run = flags[static_cast<std::size_t>(k % 16)] ? run + 1 : 0;
    if (run >= arc) return true;
  }
  return false;
}

}  // namespace

double fast_score(const GrayImage& img, int x, int y, double t, int arc) {
  const double c = img(x, y);
  std::array<bool, 16> bright{}, dark{};
  double bright_sum = 0.0, dark_sum = 0.0;
  for (std::size_t k = 0; k < 16; ++k) {
    const double d = img(x + kCircle[k][0], y + kCircle[k][1]) - c;
    if (d > t) {
      bright[k] = true;
      bright_sum += d - t;
    } else if (d < -t) {
      dark[k] = true;
      dark_sum += -d - t;
    }
  }
  if (has_arc(bright, arc)) return bright_sum;
  if (has_arc(dark, arc)) return dark_sum;
  return 0.0;
}

std::vector<Keypoint> fast_candidates(const GrayImage& img, double t, int arc, int border) {
  if (arc < 1 || arc > 16) throw std::invalid_argument("fast_candidates: arc must be in [1, 16]");
  const int b = std::max(border, 3);
  std::vector<Keypoint> out;
  for (int y = b; y < img.height() - b; ++y) {
    for (int x = b; x < img.width() - b; ++x) {
      const double s = fast_score(img, x, y, t, arc);
      if (s > 0.0) out.push_back({Vec2(x, y), 0, s});
    }
  }
  return out;
}

std::vector<Keypoint> suppress_nonmax(std::vector<Keypoint> points, double min_dist) {
  std::sort(points.begin(), points.end(), [](const Keypoint& a, const Keypoint& b) {
    if (a.score != b.score) return a.score > b.score;
    return std::tie(a.level, a.position.y(), a.position.x()) < std::tie(b.level, b.position.y(), b.position.x());
  });
  if (min_dist <= 0.0 || points.empty()) return points;

  // Bucket grid with cell side min_dist: only the 3 x 3 neighbourhood can
  // hold a conflicting point.
  double max_x = 0.0, max_y = 0.0;
  for (const auto& p : points) {
    max_x = std::max(max_x, p.position.x());
    max_y = std::max(max_y, p.position.y());
  }
  const int gw = static_cast<int>(max_x / min_dist) + 1;
  const int gh = static_cast<int>(max_y / min_dist) + 1;
  std::vector<std::vector<Vec2>> grid(static_cast<std::size_t>(gw) * gh);
  const double d2 = min_dist * min_dist;
  std::vector<Keypoint> kept;
  for (const auto& p : points) {
    const int gx = static_cast<int>(std::max(p.position.x(), 0.0) / min_dist);
    const int gy = static_cast<int>(std::max(p.position.y(), 0.0) / min_dist);
    bool ok = true;
    for (int yy = std::max(gy - 1, 0); ok && yy <= std::min(gy + 1, gh - 1); ++yy) {
      for (int xx = std::max(gx - 1, 0); ok && xx <= std::min(gx + 1, gw - 1); ++xx) {
        for (const Vec2& q : grid[static_cast<std::size_t>(yy) * gw + xx]) {
          if ((q - p.position).squaredNorm() < d2) {
            ok = false;
            break;
          }
        }
      }
    }
    if (!ok) continue;
    grid[static_cast<std::size_t>(gy) * gw + gx].push_back(p.position);
    kept.push_back(p);
  }
  return kept;
}

std::vector<Keypoint> detect_corners(const ImagePyramid& pyr, const DetectorParams& params) {
  double total_area = 0.0;
  for (const auto& l : pyr.levels) total_area += static_cast<double>(l.width()) * l.height();

  std::vector<Keypoint> all;
  for (int k = 0; k < pyr.num_levels(); ++k) {
    const GrayImage& img = pyr.level(k);
    const double target =
        std::round(params.target_count * static_cast<double>(img.width()) * img.height() / total_area);
    if (target < 1.0) continue;
    auto run = [&](double t) {
      return suppress_nonmax(fast_candidates(img, t, params.arc, params.border), params.min_dist);
    };
    // Counts fall as the threshold rises; bisect in log space.
    double lo = std::log(2e-3), hi = std::log(0.6);
    auto best = run(std::exp(lo));
    if (best.size() > 1.2 * target) {
      for (int it = 0; it < 24; ++it) {
        const double mid = 0.5 * (lo + hi);
        auto pts = run(std::exp(mid));
        if (std::abs(static_cast<double>(pts.size()) - target) < std::abs(static_cast<double>(best.size()) - target)) {
          best = pts;
        }
        if (pts.size() > 1.2 * target) {
          lo = mid;
        } else if (pts.size() < 0.8 * target) {
          hi = mid;
        } else {
          best = std::move(pts);
          break;
        }
      }
    }
    for (auto& p : best) {
      p.level = k;
      p.position = Vec2(level_to_base(p.position.x(), k), level_to_base(p.position.y(), k));
      all.push_back(p);
    }
  }
  std::stable_sort(all.begin(), all.end(), [](const Keypoint& a, const Keypoint& b) { return a.score > b.score; });
  return all;
}

std::vector<Keypoint> detect_corners(const ImagePyramid& pyr, int target_count, double min_dist) {
  DetectorParams p;
  p.target_count = target_count;
  p.min_dist = min_dist;
  return detect_corners(pyr, p);
}

}  // namespace mvdesc
