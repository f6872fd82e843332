#include "mvdesc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mvdesc/imgproc.hpp"

namespace mvdesc {

void Pose::validate() const {
  if (!rotation.allFinite() || !position.allFinite()) {
    throw std::invalid_argument("Pose: non-finite entries");
  }
  if ((rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9 ||
      std::abs(rotation.determinant() - 1.0) > 1e-9) {
    throw std::invalid_argument("Pose: rotation is not in SO(3)");
  }
}

PinholeCamera PinholeCamera::at_level(int level) const {
  PinholeCamera c;
  const double s = std::ldexp(1.0, -level);
  c.focal = focal * s;
  c.principal = {base_to_level(principal.x(), level), base_to_level(principal.y(), level)};
  c.width = (width + (1 << level) - 1) >> level;
  c.height = (height + (1 << level) - 1) >> level;
  return c;
}

void PinholeCamera::validate() const {
  if (!(focal > 0.0)) throw std::invalid_argument("PinholeCamera: focal must be positive");
  if (width < 1 || height < 1) throw std::invalid_argument("PinholeCamera: empty resolution");
  if (!contains(principal)) {
    throw std::invalid_argument("PinholeCamera: principal point outside the image");
  }
}

Mat3 rotation_from_axis_angle(const Vec3& axis_angle) {
  const double angle = axis_angle.norm();
  if (angle == 0.0) return Mat3::Identity();
  return Eigen::AngleAxisd(angle, axis_angle / angle).toRotationMatrix();
}

Vec3 axis_angle_from_rotation(const Mat3& R) {
  const Eigen::AngleAxisd aa(R);
  return aa.axis() * aa.angle();
}

double rotation_angle_between(const Mat3& a, const Mat3& b) {
  const double c = 0.5 * ((a.transpose() * b).trace() - 1.0);
  return std::acos(std::clamp(c, -1.0, 1.0));
}

Pose look_at(const Vec3& eye, const Vec3& target, const Vec3& down_hint, double roll) {
  const Vec3 z = (target - eye).normalized();
  Vec3 y = down_hint - down_hint.dot(z) * z;
  if (y.norm() < 1e-12) throw std::invalid_argument("look_at: down hint parallel to view axis");
  y.normalize();
  const Vec3 x = y.cross(z);
  Mat3 R;
  R.col(0) = x;
  R.col(1) = y;
  R.col(2) = z;
  Pose p;
  p.rotation = R * rotation_from_axis_angle(Vec3(0.0, 0.0, roll));
  p.position = eye;
  return p;
}

}  // namespace mvdesc
