#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mvdesc/rhog.hpp"

namespace mvdesc {

Vec3 LocalSurface::point(int i, int j) const {
  return camera.back_project(lattice_point(i, j), depth[static_cast<std::size_t>(i) * size + j]);
}

Vec3 LocalSurface::mean_normal() const {
  Vec3 s = Vec3::Zero();
  for (const Vec3& n : normals) s += n;
  const double len = s.norm();
  return len > 0.0 ? Vec3(s / len) : Vec3(0.0, 0.0, -1.0);
}

void LocalSurface::validate() const {
  if (size < 3 || size % 2 == 0) throw std::invalid_argument("LocalSurface: size must be odd and >= 3");
  const auto n = static_cast<std::size_t>(size) * size;
  if (depth.size() != n || normals.size() != n) {
    throw std::invalid_argument("LocalSurface: lattice arrays have the wrong size");
  }
  for (double d : depth) {
    if (!(d > 0.0) || !std::isfinite(d)) throw std::invalid_argument("LocalSurface: depth must be positive");
  }
  for (const Vec3& v : normals) {
    if (std::abs(v.norm() - 1.0) > 1e-6) throw std::invalid_argument("LocalSurface: normals must be unit");
  }
}

namespace {

// Normals from central differences of the back-projected lattice (one-sided
// at the lattice border), oriented towards the camera.
void fill_normals(LocalSurface& s) {
  const int n = s.size;
  s.normals.assign(static_cast<std::size_t>(n) * n, Vec3::Zero());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int j0 = std::max(j - 1, 0), j1 = std::min(j + 1, n - 1);
      const int i0 = std::max(i - 1, 0), i1 = std::min(i + 1, n - 1);
      const Vec3 du = s.point(i, j1) - s.point(i, j0);
      const Vec3 dv = s.point(i1, j) - s.point(i0, j);
      Vec3 nrm = du.cross(dv);
      if (nrm.norm() == 0.0) throw std::invalid_argument("local surface: degenerate lattice");
      nrm.normalize();
      if (nrm.dot(s.point(i, j)) > 0.0) nrm = -nrm;
      s.normals[static_cast<std::size_t>(i) * n + j] = nrm;
    }
  }
}

}  // namespace

LocalSurface local_surface_from_depth(const DepthMap& depth, const PinholeCamera& base_camera, int level,
                                      const Vec2& center, int size) {
  LocalSurface s;
  s.camera = base_camera.at_level(level);
  s.center = center;
  s.size = size;
  s.depth.resize(static_cast<std::size_t>(size) * size);
  for (int i = 0; i < size; ++i) {
    for (int j = 0; j < size; ++j) {
      const Vec2 p = s.lattice_point(i, j);
      const auto z = depth.interpolate(Vec2(level_to_base(p.x(), level), level_to_base(p.y(), level)));
      if (!z || !std::isfinite(*z)) {
        throw std::invalid_argument("local_surface_from_depth: lattice point without depth");
      }
      s.depth[static_cast<std::size_t>(i) * size + j] = *z;
    }
  }
  fill_normals(s);
  s.anchor = s.point(size / 2, size / 2);
  s.validate();
  return s;
}

LocalSurface planar_surface(const PinholeCamera& camera, const Vec2& center, int size, const Vec3& normal,
                            double anchor_depth) {
  LocalSurface s;
  s.camera = camera;
  s.center = center;
  s.size = size;
  const Vec3 anchor = camera.back_project(center, anchor_depth);
  Vec3 n = normal.normalized();
  if (n.dot(anchor) > 0.0) n = -n;
  const double offset = n.dot(anchor);
  s.depth.resize(static_cast<std::size_t>(size) * size);
  for (int i = 0; i < size; ++i) {
    for (int j = 0; j < size; ++j) {
      const Vec3 ray = camera.ray(s.lattice_point(i, j));
      const double denom = n.dot(ray);
      if (denom == 0.0) throw std::invalid_argument("planar_surface: plane contains a lattice ray");
      s.depth[static_cast<std::size_t>(i) * size + j] = offset / denom;
    }
  }
  s.normals.assign(s.depth.size(), n);
  s.anchor = anchor;
  s.validate();
  return s;
}

SynthesizedPatch synthesize_patch(const GrayImage& source, const LocalSurface& surface, const Mat3& R,
                                  double visibility_threshold) {
  const int n = surface.size;
  SynthesizedPatch out;
  out.image = GrayImage(n, n);
  out.rotation = R;
  // The identity samples the lattice itself, avoiding a project/back-project
  // round off.
  const bool identity = R == Mat3::Identity();
  int outside = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Vec2 q = surface.lattice_point(i, j);
      if (!identity) {
        const Vec3 X = R * (surface.point(i, j) - surface.anchor) + surface.anchor;
        if (X.z() > 0.0) {
          q = surface.camera.project(X);
        } else {
          ++outside;
        }
      }
      if (q.x() < -0.5 || q.y() < -0.5 || q.x() > source.width() - 0.5 || q.y() > source.height() - 0.5) {
        ++outside;
      }
      out.image(j, i) = source.sample_bilinear(q.x(), q.y());
    }
  }
  if (outside > kMaxOutsideFraction * n * n) {
    throw std::runtime_error("synthesize_patch: " + std::to_string(outside) +
                             " lattice points re-project outside the source image");
  }
  const Vec3 nr = R * surface.mean_normal();
  out.accepted = -nr.z() > visibility_threshold;
  return out;
}

}  // namespace mvdesc
