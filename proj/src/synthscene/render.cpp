#include <algorithm>
#include <cmath>
#include <random>

#include "mvdesc/synthscene.hpp"

namespace mvdesc {

namespace {

constexpr int kMarchSteps = 64;
constexpr int kBisectionSteps = 48;

std::optional<double> intersect_height_field(const SceneModel& scene, const Vec3& o, const Vec3& d) {
  const double b = scene.height.bound() + 1e-9;
  auto gap = [&](double t) {
    const Vec3 p = o + t * d;
    return p.z() - scene.height.height(p.x(), p.y());
  };
  if (d.z() >= 0.0 || gap(0.0) <= 0.0) return std::nullopt;
  const double t_enter = o.z() > b ? (b - o.z()) / d.z() : 0.0;
  const double t_exit = (-b - o.z()) / d.z();
  double t_prev = t_enter;
  for (int i = 1; i <= kMarchSteps; ++i) {
    const double t = t_enter + (t_exit - t_enter) * i / kMarchSteps;
    if (gap(t) <= 0.0) {
      double lo = t_prev;
      double hi = t;
      for (int k = 0; k < kBisectionSteps; ++k) {
        const double mid = 0.5 * (lo + hi);
        (gap(mid) > 0.0 ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    }
    t_prev = t;
  }
  return std::nullopt;
}

}  // namespace

std::optional<double> intersect_surface(const SceneModel& scene, const Vec3& origin, const Vec3& dir) {
  const Mat3 Rt = scene.placement.rotation.transpose();
  const Vec3 o = Rt * (origin - scene.placement.position);
  const Vec3 d = Rt * dir;
  if (scene.kind == SurfaceKind::plane) {
    if (d.z() == 0.0) return std::nullopt;
    const double t = -o.z() / d.z();
    return t > 0.0 ? std::optional<double>(t) : std::nullopt;
  }
  return intersect_height_field(scene, o, d);
}

std::optional<double> DepthMap::interpolate(const Vec2& x) const {
  // Within the half-pixel rim the outermost cell extrapolates linearly.
  const double px = std::clamp(x.x(), -0.5, width - 0.5);
  const double py = std::clamp(x.y(), -0.5, height - 0.5);
  const int x0 = std::clamp(static_cast<int>(std::floor(px)), 0, width - 2);
  const int y0 = std::clamp(static_cast<int>(std::floor(py)), 0, height - 2);
  const double z00 = at(x0, y0);
  const double z10 = at(x0 + 1, y0);
  const double z01 = at(x0, y0 + 1);
  const double z11 = at(x0 + 1, y0 + 1);
  if (std::isfinite(z00) && std::isfinite(z10) && std::isfinite(z01) && std::isfinite(z11)) {
    const double fx = px - x0;
    const double fy = py - y0;
    const double top = (1.0 - fx) / z00 + fx / z10;
    const double bottom = (1.0 - fx) / z01 + fx / z11;
    const double inv = (1.0 - fy) * top + fy * bottom;
    if (inv > 0.0) return 1.0 / inv;
  }
  const int nx = std::clamp(static_cast<int>(std::lround(px)), 0, width - 1);
  const int ny = std::clamp(static_cast<int>(std::lround(py)), 0, height - 1);
  const double zn = at(nx, ny);
  return std::isfinite(zn) ? std::optional<double>(zn) : std::nullopt;
}

RenderedFrame render_view(const SceneModel& scene, const PinholeCamera& cam, const Pose& pose,
                          const Photometric& contrast, double noise_sigma, std::uint64_t seed) {
  cam.validate();
  pose.validate();
  RenderedFrame f;
  f.image = GrayImage(cam.width, cam.height);
  f.depth.width = cam.width;
  f.depth.height = cam.height;
  f.depth.z.assign(static_cast<std::size_t>(cam.width) * cam.height,
                   std::numeric_limits<double>::infinity());
  f.pose = pose;
  f.camera = cam;
  f.contrast = contrast;
  f.noise_sigma = noise_sigma;

  const Mat3 Rp_t = scene.placement.rotation.transpose();
  std::size_t hits = 0;
  for (int y = 0; y < cam.height; ++y) {
    for (int x = 0; x < cam.width; ++x) {
      const Vec3 dir = pose.rotation * cam.ray(Vec2(x, y));
      const auto t = intersect_surface(scene, pose.position, dir);
      if (!t) continue;
      // The camera-frame ray has unit z, so t is the z-depth.
      f.depth.z[static_cast<std::size_t>(y) * cam.width + x] = *t;
      const Vec3 hit = Rp_t * (pose.position + *t * dir - scene.placement.position);
      f.image(x, y) = contrast.apply(scene.radiance(hit.x(), hit.y()));
      ++hits;
    }
  }
  if (2 * hits < f.depth.z.size()) {
    throw std::runtime_error("render_view: scene is behind the camera or out of view");
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, noise_sigma > 0.0 ? noise_sigma : 1.0);
  for (double& v : f.image.data()) {
    if (noise_sigma > 0.0) v += noise(rng);
    v = std::clamp(v, 0.0, 1.0);
  }
  return f;
}

}  // namespace mvdesc
