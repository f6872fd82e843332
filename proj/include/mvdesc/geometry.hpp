#pragma once

// Rigid poses, pinhole projection, and rotation helpers.

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace mvdesc {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Camera placement in the world: `rotation` holds the camera axes expressed
/// in world coordinates (camera-to-world), `position` is the optical center.
/// Camera coordinates: x right, y down, z along the optical axis.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 position = Vec3::Zero();

  Vec3 world_to_camera(const Vec3& Xw) const { return rotation.transpose() * (Xw - position); }
  Vec3 camera_to_world(const Vec3& Xc) const { return rotation * Xc + position; }

  /// Throws std::invalid_argument unless R^T R = I to 1e-9 and det R = 1.
  void validate() const;
};

struct PinholeCamera {
  double focal = 300.0;
  Vec2 principal{159.5, 119.5};
  int width = 320;
  int height = 240;

  Vec2 project(const Vec3& Xc) const {
    return {focal * Xc.x() / Xc.z() + principal.x(), focal * Xc.y() / Xc.z() + principal.y()};
  }
  /// Back-projects pixel `x` to the camera-frame point with z-depth `depth`.
  Vec3 back_project(const Vec2& x, double depth) const {
    return {(x.x() - principal.x()) / focal * depth, (x.y() - principal.y()) / focal * depth, depth};
  }
  /// Viewing ray through `x`, scaled so its z component is 1.
  Vec3 ray(const Vec2& x) const { return back_project(x, 1.0); }

  bool contains(const Vec2& x) const {
    return x.x() >= -0.5 && x.y() >= -0.5 && x.x() < width - 0.5 && x.y() < height - 0.5;
  }

  /// Intrinsics of pyramid level `level` under the box-filter pyramid.
  PinholeCamera at_level(int level) const;

  void validate() const;
};

/// Rotation by |axis_angle| radians about axis_angle / |axis_angle|.
Mat3 rotation_from_axis_angle(const Vec3& axis_angle);
Vec3 axis_angle_from_rotation(const Mat3& R);
/// Geodesic angle between two rotations, in radians.
double rotation_angle_between(const Mat3& a, const Mat3& b);

/// Camera at `eye` looking at `target`; image "down" is aligned with the
/// projection of `down_hint`, then the camera rolls by `roll` radians about
/// its optical axis.
Pose look_at(const Vec3& eye, const Vec3& target, const Vec3& down_hint, double roll = 0.0);

}  // namespace mvdesc
