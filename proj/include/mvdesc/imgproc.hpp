#pragma once

// Image containers, pyramids, gradients, and the kernels shared by every
// descriptor in the library.

#include <cstdint>
#include <filesystem>
#include <numbers>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

namespace mvdesc {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Grayscale intensity lattice with values in [0, 1], row-major.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, double fill = 0.0);
  GrayImage(int width, int height, std::vector<double> data);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }
  std::size_t size() const { return data_.size(); }

  double operator()(int x, int y) const { return data_[index(x, y)]; }
  double& operator()(int x, int y) { return data_[index(x, y)]; }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  /// Bilinear sample at continuous pixel coordinates; pixel (i, j) has its
  /// center at (i, j). Coordinates outside the lattice clamp to the border.
  double sample_bilinear(double x, double y) const;
  /// Bilinear sample treating the lattice as periodic in both directions.
  double sample_bilinear_wrap(double x, double y) const;

  /// Throws std::invalid_argument when an intensity is non-finite or outside
  /// [0, 1].
  void validate() const;

  bool operator==(const GrayImage&) const = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

inline constexpr int kMinImageSide = 3;

/// Rounds every intensity to the nearest multiple of 1/255.
GrayImage quantize_8bit(const GrayImage& img);

// ---------------------------------------------------------------------------
// Gradients

/// Per-pixel image gradient. Orientation is in [0, 2pi) and only meaningful
/// where `valid` is set, which is exactly where the magnitude is nonzero.
struct GradientField {
  int width = 0;
  int height = 0;
  std::vector<double> dx;
  std::vector<double> dy;
  std::vector<double> magnitude;
  std::vector<double> angle;
  std::vector<std::uint8_t> valid;

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
           static_cast<std::size_t>(x);
  }
};

/// Central differences in the interior, one-sided differences on the border.
GradientField compute_gradient(const GrayImage& img);

// ---------------------------------------------------------------------------
// Pyramid

struct ImagePyramid {
  std::vector<GrayImage> levels;

  int num_levels() const { return static_cast<int>(levels.size()); }
  const GrayImage& level(int k) const { return levels.at(static_cast<std::size_t>(k)); }
};

inline constexpr int kMaxPyramidLevels = 5;

/// Each level is a 2x2 box-filtered, 2-subsampled copy of the previous one,
/// with dimensions ceil(previous / 2). Odd trailing rows/columns replicate the
/// border. Throws std::invalid_argument when the image is too small.
ImagePyramid build_pyramid(const GrayImage& img, int levels);

/// Coordinate maps between base resolution and pyramid level `level`. Pixel i
/// at level k covers base pixels [2^k i, 2^k (i + 1)).
double base_to_level(double coord, int level);
double level_to_base(double coord, int level);

// ---------------------------------------------------------------------------
// Kernels

enum class AngularKernel : std::uint8_t {
  /// Linear interpolation between bins: 1 - d / eps, zero beyond eps.
  triangular = 0,
  /// Wrapped normal density with standard deviation eps.
  wrapped_gaussian = 1,
};

struct KernelParams {
  double eps = kTwoPi / 16.0;
  double sigma = 1.0;

  /// Requires 0 < eps < pi and 0 < sigma < sqrt(patch_area).
  void validate(double patch_area) const;
};

/// Distance on the circle, in [0, pi].
double circular_distance(double a, double b);

double angular_kernel(double theta, double mu, double eps,
                      AngularKernel kind = AngularKernel::triangular);

/// Isotropic normalized 2-D Gaussian evaluated at offset (dx, dy).
double spatial_kernel(double dx, double dy, double sigma);

// ---------------------------------------------------------------------------
// Contrast

struct AffineContrast {
  double gain = 1.0;
  double bias = 0.0;
};

struct GammaContrast {
  double gamma = 1.0;
};

/// Piecewise-linear monotone map sampled uniformly on [0, 1].
struct TableContrast {
  std::vector<double> table;
};

using ContrastTransform = std::variant<AffineContrast, GammaContrast, TableContrast>;

/// Applies a strictly increasing range transformation. Affine and gamma
/// outputs must stay in [0, 1]; table outputs are clipped. Throws
/// std::invalid_argument for non-monotone transforms.
GrayImage apply_contrast(const GrayImage& img, const ContrastTransform& kind);

/// Per-patch standardization: subtract the mean, divide by the standard
/// deviation, then map z to (z + 3) / 6 clipped to [0, 1]. Patches with
/// (near) zero deviation become all 0.5.
GrayImage normalize_patch_contrast(const GrayImage& patch);

/// size x size window sampled bilinearly (border clamped) on the integer
/// lattice centered at (cx, cy).
GrayImage extract_patch(const GrayImage& img, double cx, double cy, int size);

// ---------------------------------------------------------------------------
// PGM (binary P5, 8-bit)

GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& img);
std::vector<std::uint8_t> encode_pgm(const GrayImage& img);
GrayImage decode_pgm(std::span<const std::uint8_t> bytes);

}  // namespace mvdesc
