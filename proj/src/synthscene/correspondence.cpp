#include <cmath>
#include <stdexcept>

#include "mvdesc/synthscene.hpp"

namespace mvdesc {

Correspondence ground_truth_correspondence(const RenderedFrame& a, const RenderedFrame& b, const Vec2& x) {
  const auto za = a.depth.interpolate(x);
  if (!za) throw std::invalid_argument("ground_truth_correspondence: pixel has no depth in frame a");
  const Vec3 Xw = a.pose.camera_to_world(a.camera.back_project(x, *za));
  const Vec3 Xb = b.pose.world_to_camera(Xw);

  Correspondence c;
  if (Xb.z() <= 0.0) return c;
  c.point = b.camera.project(Xb);
  c.depth = Xb.z();
  if (!b.camera.contains(c.point)) return c;
  const auto zb = b.depth.interpolate(c.point);
  if (!zb || Xb.z() > *zb * (1.0 + kOcclusionTolerance)) {
    c.status = Covisibility::occluded;
  } else {
    c.status = Covisibility::visible;
  }
  return c;
}

}  // namespace mvdesc
