#pragma once

// Synthetic multi-view data with exact ground truth: textured parametric
// surfaces, closed-orbit camera trajectories, rendering with contrast and
// noise nuisances, depth maps, and dense correspondence.

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mvdesc/geometry.hpp"
#include "mvdesc/imgproc.hpp"

namespace mvdesc {

/// z = f(x, y): uniform bicubic B-spline over a square control grid centered
/// on the origin. Control indices beyond the grid repeat its edge, so the
/// surface stays smooth and levels off outside.
struct HeightField {
  int grid = 0;
  double extent = 2.0;
  std::vector<double> control;  // grid * grid, row-major in (y, x)

  static HeightField random(int grid, double extent, double amplitude, std::uint64_t seed);

  double height(double x, double y) const;
  /// Upper bound on |f| (B-spline values are convex combinations of controls).
  double bound() const;
};

enum class SurfaceKind : std::uint8_t { plane = 0, height_field = 1 };

struct SceneModel {
  SurfaceKind kind = SurfaceKind::plane;
  HeightField height;
  GrayImage texture;
  double texture_extent = 2.0;  // meters covered by one texture period
  Pose placement;               // model-to-world

  double surface_height(double x, double y) const {
    return kind == SurfaceKind::plane ? 0.0 : height.height(x, y);
  }
  /// Albedo at model-frame coordinates (x, y); the texture wraps.
  double radiance(double x, double y) const;
  /// Unit normal in model coordinates at (x, y), pointing to +z.
  Vec3 normal(double x, double y) const;
};

/// Procedural "city block" texture: layered random rectangles, periodic.
GrayImage random_texture(int size, std::uint64_t seed);

/// Monotone range transformation kappa(v) = gain * v^gamma + bias, applied
/// before noise; the final intensity is clipped to [0, 1].
struct Photometric {
  double gain = 1.0;
  double bias = 0.0;
  double gamma = 1.0;

  double apply(double v) const;
  bool operator==(const Photometric&) const = default;
};

/// z-depth per pixel (distance along the optical axis); +inf where the pixel
/// ray misses the surface.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> z;

  double at(int x, int y) const {
    return z[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
  }
  /// Bilinear interpolation of inverse depth (exact for planes, extrapolated
  /// over the half-pixel rim) when the four neighbours are finite,
  /// nearest-pixel depth otherwise.
  std::optional<double> interpolate(const Vec2& x) const;
};

struct RenderedFrame {
  GrayImage image;
  DepthMap depth;
  Pose pose;
  PinholeCamera camera;
  Photometric contrast;
  double noise_sigma = 0.0;
};

/// Ray-casts every pixel center, samples the albedo bilinearly, applies the
/// contrast, adds IID Gaussian noise and clips. Throws std::runtime_error when
/// fewer than half of the pixels see the surface.
RenderedFrame render_view(const SceneModel& scene, const PinholeCamera& cam, const Pose& pose,
                          const Photometric& contrast, double noise_sigma, std::uint64_t seed);

/// First intersection of a world-frame ray with the surface, as the ray
/// parameter t (hit = origin + t * dir); nullopt when the ray misses.
std::optional<double> intersect_surface(const SceneModel& scene, const Vec3& origin, const Vec3& dir);

enum class Covisibility : std::uint8_t { visible, occluded, out_of_view };

struct Correspondence {
  Covisibility status = Covisibility::out_of_view;
  Vec2 point = Vec2::Zero();  // pixel in frame b (valid unless out_of_view)
  double depth = 0.0;         // z-depth of the point in frame b
};

inline constexpr double kOcclusionTolerance = 0.01;

/// Maps pixel `x` of frame a into frame b by back-projecting through a's depth
/// map. Occluded when the transferred depth exceeds b's depth map by more than
/// 1 %. Throws std::invalid_argument when x has no finite depth in a.
Correspondence ground_truth_correspondence(const RenderedFrame& a, const RenderedFrame& b, const Vec2& x);

// ---------------------------------------------------------------------------
// Datasets

struct SceneSpec {
  SurfaceKind kind = SurfaceKind::height_field;
  int grid = 6;
  double extent = 2.0;
  double amplitude = 0.12;
  int texture_size = 512;
  double texture_extent = 2.0;
};

struct OrbitSpec {
  int frames = 30;
  double distance = 1.5;
  double distance_variation = 0.08;  // relative
  double tilt_deg = 25.0;
  double roll_amplitude_deg = 8.0;
};

struct TestViewSpec {
  int count = 6;
  double min_offset_deg = 15.0;
  double inner_tilt_max_deg = 8.0;
  double outer_tilt_min_deg = 40.0;
  double outer_tilt_max_deg = 48.0;
  double roll_amplitude_deg = 8.0;
};

struct NuisanceSpec {
  double train_noise = 0.01;
  double test_noise = 0.01;
  double train_gain_jitter = 0.08;
  double train_bias_jitter = 0.03;
  double test_gain_jitter = 0.2;
  double test_bias_jitter = 0.05;
  double test_gamma_jitter = 0.15;
};

struct DatasetSpec {
  PinholeCamera camera;
  SceneSpec scene;
  OrbitSpec orbit;
  TestViewSpec test;
  NuisanceSpec nuisance;
  std::uint64_t seed = 1;
};

/// Closed orbit around the origin at the configured tilt; the last pose is one
/// orbit step from the first.
std::vector<Pose> orbit_poses(const OrbitSpec& orbit);
/// Test poses whose vantage direction is at least min_offset_deg from every
/// training vantage direction.
std::vector<Pose> test_poses(const DatasetSpec& spec, std::span<const Pose> train);
/// Angle between the directions from the origin to two camera centers.
double vantage_offset(const Pose& a, const Pose& b);

SceneModel build_scene_model(const SceneSpec& spec, std::uint64_t seed);

struct SceneData {
  DatasetSpec spec;
  SceneModel model;
  std::vector<RenderedFrame> train;
  std::vector<RenderedFrame> test;
};

/// Renders the whole dataset in memory; images are quantized to 8 bits so that
/// reloading from PGM reproduces them exactly.
SceneData synthesize_scene(const DatasetSpec& spec);

inline constexpr int kManifestSchemaVersion = 1;

struct FrameRecord {
  std::string image;
  std::string depth;
  Pose pose;
  Photometric contrast;
  double noise_sigma = 0.0;
};

struct DatasetManifest {
  int schema_version = kManifestSchemaVersion;
  DatasetSpec spec;
  std::string texture;
  std::vector<FrameRecord> train;
  std::vector<FrameRecord> test;
};

/// Writes manifest.json, texture.pgm, PGM frames and depth rasters.
DatasetManifest generate_dataset(const DatasetSpec& spec, const std::filesystem::path& out_dir);
void write_dataset(const SceneData& data, const std::filesystem::path& out_dir,
                   DatasetManifest* manifest_out = nullptr);
SceneData load_dataset(const std::filesystem::path& dir);

std::string manifest_to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const std::string& text);

/// Depth raster: "MVDEPTH1" | u32 width | u32 height | f32 z[width * height],
/// little-endian; +inf marks pixels without a surface hit.
std::vector<std::uint8_t> encode_depth(const DepthMap& d);
DepthMap decode_depth(std::span<const std::uint8_t> bytes);

}  // namespace mvdesc
