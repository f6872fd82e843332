#pragma once

// View synthesis from a local surface model, the rotation-marginalized
// descriptor (R-HOG), and max-out matching over stored synthesized views.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "mvdesc/geometry.hpp"
#include "mvdesc/hogcore.hpp"
#include "mvdesc/synthscene.hpp"

namespace mvdesc {

/// Depth lattice around a tracked point, in the camera frame of the image the
/// lattice lives in (typically one pyramid level of a keyframe).
struct LocalSurface {
  PinholeCamera camera;  // intrinsics of the image the lattice indexes
  Vec2 center = Vec2::Zero();
  int size = 0;                 // lattice side, odd
  std::vector<double> depth;    // z-depth per lattice point, row-major
  std::vector<Vec3> normals;    // unit, camera frame, facing the camera
  Vec3 anchor = Vec3::Zero();   // 3-D point seen at `center`

  Vec2 lattice_point(int i, int j) const {
    const int h = size / 2;
    return center + Vec2(j - h, i - h);
  }
  Vec3 point(int i, int j) const;
  Vec3 mean_normal() const;
  void validate() const;
};

/// Samples `depth` (base resolution) on the size x size lattice centered at
/// `center` of pyramid level `level`. Normals come from cross products of
/// neighbouring back-projected lattice points. Throws std::invalid_argument
/// when a lattice point has no finite depth.
LocalSurface local_surface_from_depth(const DepthMap& depth, const PinholeCamera& base_camera, int level,
                                      const Vec2& center, int size);

/// Exact plane n . X = n . anchor through the ray at `center`, at z-depth
/// `anchor_depth`.
LocalSurface planar_surface(const PinholeCamera& camera, const Vec2& center, int size, const Vec3& normal,
                            double anchor_depth);

struct ViewpointSet {
  std::vector<Mat3> rotations;
  std::size_t size() const { return rotations.size(); }
};

struct HemisphereParams {
  int n_azimuth = 8;
  int n_tilt = 1;
  double inplane_range = 1.0471975511965976;  // pi / 3
  int n_inplane = 10;
  double max_tilt = 0.6981317007977318;       // 40 degrees
};

/// n_azimuth * n_tilt viewing directions spread over a spherical cap of
/// half-angle max_tilt (the first is the optical axis), each combined with
/// n_inplane rotations about the optical axis spanning
/// [-inplane_range, inplane_range]. Angle zero is always included, so the set
/// contains the identity. A zero range collapses the in-plane factor to 1.
ViewpointSet sample_hemisphere(int n_azimuth, int n_tilt, double inplane_range, int n_inplane = 10,
                               double max_tilt = HemisphereParams{}.max_tilt);
ViewpointSet sample_hemisphere(const HemisphereParams& p);

inline constexpr double kDefaultVisibilityThreshold = 0.2;
/// Maximum fraction of lattice points allowed to re-project outside the
/// source image; those points are clamped to the border.
inline constexpr double kMaxOutsideFraction = 0.2;

struct SynthesizedPatch {
  GrayImage image;
  Mat3 rotation = Mat3::Identity();
  bool accepted = false;
};

/// Back-projects the lattice through the surface, rotates it about the anchor
/// by R, re-projects, and samples `source` bilinearly. The view is accepted
/// when (R * mean normal) . (0, 0, -1) > visibility_threshold. Throws
/// std::runtime_error when more than 20 % of the lattice re-projects outside
/// `source`.
SynthesizedPatch synthesize_patch(const GrayImage& source, const LocalSurface& surface, const Mat3& R,
                                  double visibility_threshold = kDefaultVisibilityThreshold);

/// Normalized mean of the per-view unnormalized densities over accepted
/// patches, tagged R. Throws std::invalid_argument if none is accepted.
DescriptorVector compute_rhog(std::span<const SynthesizedPatch> patches, const DescriptorParams& params);

/// Minimum squared l2 residual over `stored_views` and its index (lowest
/// index on ties). Throws std::invalid_argument for an empty store or a
/// length mismatch.
std::pair<double, std::size_t> maxout_match(const DescriptorVector& test,
                                            std::span<const DescriptorVector> stored_views);

// ---------------------------------------------------------------------------
// Synthesized-view store: "MVSV" | u16 version | u32 count, then per view
// u32 track id | u32 view index | f64 axis-angle[3] | descriptor record.

inline constexpr std::uint16_t kViewStoreVersion = 1;

struct StoredView {
  std::uint32_t track_id = 0;
  std::uint32_t view_index = 0;
  Vec3 axis_angle = Vec3::Zero();
  DescriptorVector descriptor;
};

std::vector<std::uint8_t> encode_view_store(std::span<const StoredView> views, const DescriptorParams& params);
std::vector<StoredView> decode_view_store(std::span<const std::uint8_t> bytes,
                                          DescriptorParams* params_out = nullptr);

}  // namespace mvdesc
