#include <algorithm>
#include <cmath>
#include <random>

#include "../common/seeds.hpp"
#include "mvdesc/synthscene.hpp"

namespace mvdesc {

namespace {

void bspline_weights(double t, double w[4]) {
  const double t2 = t * t;
  const double t3 = t2 * t;
  w[0] = (1.0 - t) * (1.0 - t) * (1.0 - t) / 6.0;
  w[1] = (3.0 * t3 - 6.0 * t2 + 4.0) / 6.0;
  w[2] = (-3.0 * t3 + 3.0 * t2 + 3.0 * t + 1.0) / 6.0;
  w[3] = t3 / 6.0;
}

}  // namespace

HeightField HeightField::random(int grid, double extent, double amplitude, std::uint64_t seed) {
  if (grid < 2) throw std::invalid_argument("HeightField: grid must be at least 2");
  HeightField f;
  f.grid = grid;
  f.extent = extent;
  f.control.resize(static_cast<std::size_t>(grid) * grid);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-amplitude, amplitude);
  for (double& c : f.control) c = u(rng);
  return f;
}

double HeightField::height(double x, double y) const {
  const double scale = (grid - 1) / extent;
  // Control indices clamp, the parameter does not: beyond the grid the
  // surface flattens out smoothly instead of creasing at the edge.
  const double ux = std::clamp((x + 0.5 * extent) * scale, -4.0, grid + 3.0);
  const double uy = std::clamp((y + 0.5 * extent) * scale, -4.0, grid + 3.0);
  const int ix = static_cast<int>(std::floor(ux));
  const int iy = static_cast<int>(std::floor(uy));
  double wx[4];
  double wy[4];
  bspline_weights(ux - ix, wx);
  bspline_weights(uy - iy, wy);
  double z = 0.0;
  for (int j = 0; j < 4; ++j) {
    const int cy = std::clamp(iy - 1 + j, 0, grid - 1);
    double row = 0.0;
    for (int k = 0; k < 4; ++k) {
      const int cx = std::clamp(ix - 1 + k, 0, grid - 1);
      row += wx[k] * control[static_cast<std::size_t>(cy) * grid + cx];
    }
    z += wy[j] * row;
  }
  return z;
}

double HeightField::bound() const {
  double b = 0.0;
  for (double c : control) b = std::max(b, std::abs(c));
  return b;
}

double SceneModel::radiance(double x, double y) const {
  const double s = texture.width() / texture_extent;
  return texture.sample_bilinear_wrap(x * s, -y * s);
}

Vec3 SceneModel::normal(double x, double y) const {
  if (kind == SurfaceKind::plane) return Vec3::UnitZ();
  const double h = 1e-6;
  const double fx = (height.height(x + h, y) - height.height(x - h, y)) / (2.0 * h);
  const double fy = (height.height(x, y + h) - height.height(x, y - h)) / (2.0 * h);
  return Vec3(-fx, -fy, 1.0).normalized();
}

GrayImage random_texture(int size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> tex(static_cast<std::size_t>(size) * size, 0.5);
  auto texel = [&](int x, int y) -> double& {
    x = ((x % size) + size) % size;
    y = ((y % size) + size) % size;
    return tex[static_cast<std::size_t>(y) * size + x];
  };

  struct Layer {
    int count;
    double min_side;
    double max_side;
  };
  const Layer layers[] = {
      {30, size / 6.0, size / 3.0},
      {250, size / 24.0, size / 8.0},
      {900, std::max(2.0, size / 96.0), size / 32.0},
  };
  for (const Layer& layer : layers) {
    for (int i = 0; i < layer.count; ++i) {
      const double cx = unit(rng) * size;
      const double cy = unit(rng) * size;
      const double w = layer.min_side + unit(rng) * (layer.max_side - layer.min_side);
      const double h = layer.min_side + unit(rng) * (layer.max_side - layer.min_side);
      const double value = 0.15 + 0.7 * unit(rng);
      const double angle = unit(rng) < 0.5 ? 0.0 : unit(rng) * std::numbers::pi;
      const double ca = std::cos(angle);
      const double sa = std::sin(angle);
      const int r = static_cast<int>(std::ceil(0.5 * std::hypot(w, h)));
      for (int y = static_cast<int>(cy) - r; y <= static_cast<int>(cy) + r; ++y) {
        for (int x = static_cast<int>(cx) - r; x <= static_cast<int>(cx) + r; ++x) {
          const double dx = x + 0.5 - cx;
          const double dy = y + 0.5 - cy;
          const double u = ca * dx + sa * dy;
          const double v = -sa * dx + ca * dy;
          if (std::abs(u) <= 0.5 * w && std::abs(v) <= 0.5 * h) texel(x, y) = value;
        }
      }
    }
  }

  // One periodic 3x3 box blur softens the rectangle edges.
  GrayImage out(size, size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      double s = 0.0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) s += texel(x + dx, y + dy);
      }
      out(x, y) = s / 9.0;
    }
  }
  return quantize_8bit(out);
}

double Photometric::apply(double v) const {
  return gain * std::pow(std::max(v, 0.0), gamma) + bias;
}

SceneModel build_scene_model(const SceneSpec& spec, std::uint64_t seed) {
  SceneModel m;
  m.kind = spec.kind;
  m.texture = random_texture(spec.texture_size, detail::derive_seed(seed, {1}));
  m.texture_extent = spec.texture_extent;
  if (spec.kind == SurfaceKind::height_field) {
    m.height = HeightField::random(spec.grid, spec.extent, spec.amplitude, detail::derive_seed(seed, {2}));
  }
  return m;
}

}  // namespace mvdesc
