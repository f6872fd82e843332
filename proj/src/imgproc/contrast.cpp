#include <algorithm>
#include <cmath>

#include "mvdesc/imgproc.hpp"

namespace mvdesc {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

double table_lookup(const std::vector<double>& table, double v) {
  const double pos = std::clamp(v, 0.0, 1.0) * static_cast<double>(table.size() - 1);
  const auto i = std::min(static_cast<std::size_t>(pos), table.size() - 2);
  const double f = pos - static_cast<double>(i);
  return table[i] + f * (table[i + 1] - table[i]);
}

void require_in_range(double v) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw std::invalid_argument("apply_contrast: output leaves [0, 1]; use a table transform");
  }
}

}  // namespace

GrayImage apply_contrast(const GrayImage& img, const ContrastTransform& kind) {
  GrayImage out = img;
  std::visit(
      Overloaded{
          [&](const AffineContrast& c) {
            if (!(c.gain > 0.0)) {
              throw std::invalid_argument("apply_contrast: affine gain must be positive");
            }
            for (double& v : out.data()) {
              v = c.gain * v + c.bias;
              require_in_range(v);
            }
          },
          [&](const GammaContrast& c) {
            if (!(c.gamma > 0.0)) {
              throw std::invalid_argument("apply_contrast: gamma must be positive");
            }
            for (double& v : out.data()) {
              v = std::pow(v, c.gamma);
              require_in_range(v);
            }
          },
          [&](const TableContrast& c) {
            if (c.table.size() < 2) {
              throw std::invalid_argument("apply_contrast: table needs at least two entries");
            }
            for (std::size_t i = 1; i < c.table.size(); ++i) {
              if (!(c.table[i] > c.table[i - 1])) {
                throw std::invalid_argument("apply_contrast: table is not strictly increasing");
              }
            }
            for (double& v : out.data()) {
              v = std::clamp(table_lookup(c.table, v), 0.0, 1.0);
            }
          },
      },
      kind);
  return out;
}

GrayImage normalize_patch_contrast(const GrayImage& patch) {
  const auto v = patch.data();
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / static_cast<double>(v.size()));
  GrayImage out(patch.width(), patch.height(), 0.5);
  if (sd < 1e-9) return out;
  auto o = out.data();
  for (std::size_t i = 0; i < v.size(); ++i) {
    o[i] = std::clamp(((v[i] - mean) / sd + 3.0) / 6.0, 0.0, 1.0);
  }
  return out;
}

GrayImage extract_patch(const GrayImage& img, double cx, double cy, int size) {
  GrayImage out(size, size);
  const int h = size / 2;
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      out(x, y) = img.sample_bilinear(cx + (x - h), cy + (y - h));
    }
  }
  return out;
}

}  // namespace mvdesc
