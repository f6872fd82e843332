#pragma once

// Gradient-orientation density h(x, theta): a kernel-weighted, magnitude-
// weighted vote of gradient orientations around each cell center, its per-cell
// normalization (DOG), and the flat descriptor vector built from it.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mvdesc/imgproc.hpp"

namespace mvdesc {

struct DescriptorParams {
  int patch_size = 11;  // square, odd
  int bins = 16;
  int cells = 4;        // per side
  double eps = kTwoPi / 16.0;
  double sigma = 11.0 / 8.0;
  AngularKernel kernel = AngularKernel::triangular;

  /// 2 sigma equals a quarter of the patch, eps equals one bin width.
  static DescriptorParams defaults(int patch_size, int bins = 16, int cells = 4);

  void validate() const;
  std::size_t vector_length() const {
    return static_cast<std::size_t>(cells) * static_cast<std::size_t>(cells) *
           static_cast<std::size_t>(bins);
  }
  double bin_center(int b) const { return (b + 0.5) * kTwoPi / bins; }
  /// Cell centers in patch pixel coordinates, row-major: index cy * cells + cx.
  std::vector<std::array<double, 2>> cell_centers() const;

  bool operator==(const DescriptorParams&) const = default;
};

/// cells x cells lattice of `bins`-bin histograms, stored cell-major then bin.
struct OrientationDensity {
  int cells = 0;
  int bins = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> zero_mass;  // per cell; set by normalize_dog only
  bool normalized = false;

  OrientationDensity() = default;
  OrientationDensity(int cells, int bins);

  std::size_t num_cells() const { return static_cast<std::size_t>(cells) * cells; }
  double& at(int cell, int bin) { return values[static_cast<std::size_t>(cell) * bins + bin]; }
  double at(int cell, int bin) const {
    return values[static_cast<std::size_t>(cell) * bins + bin];
  }
  double cell_sum(int cell) const;

  OrientationDensity& operator+=(const OrientationDensity& other);
  OrientationDensity& operator*=(double s);
};

/// Top-left corner of a patch window inside a larger gradient field.
struct PixelWindow {
  int x0 = 0;
  int y0 = 0;
};

/// Unnormalized density over the patch-sized window at `window`. Sums over
/// every pixel of the window; the spatial Gaussian is truncated at 3 sigma.
/// Throws std::out_of_range if the window leaves the gradient field.
OrientationDensity compute_hog_density(const GradientField& grad, const DescriptorParams& params,
                                       PixelWindow window);
/// Same, for a gradient field that is exactly one patch.
OrientationDensity compute_hog_density(const GradientField& grad, const DescriptorParams& params);
/// Convenience: gradient then density of a patch image.
OrientationDensity patch_density(const GrayImage& patch, const DescriptorParams& params);

inline constexpr double kZeroMassThreshold = 1e-12;

/// Per-cell normalization. Cells with mass below 1e-12 become uniform 1/B and
/// are flagged.
OrientationDensity normalize_dog(const OrientationDensity& h);

enum class MethodTag : std::uint8_t { single_view = 0, multi_view = 1, reconstruction = 2 };

std::string to_string(MethodTag tag);

struct DescriptorVector {
  std::vector<float> values;
  MethodTag method = MethodTag::single_view;
  int cells = 0;
  int bins = 0;

  std::size_t size() const { return values.size(); }
  bool operator==(const DescriptorVector&) const = default;
};

/// Row-major flattening, cell-major then bin.
DescriptorVector sample_descriptor(const OrientationDensity& h, MethodTag tag);
/// Inverse of sample_descriptor (zero-mass flags are not recoverable).
OrientationDensity unflatten(const DescriptorVector& v, bool normalized);

/// Single-view DOG of a patch: normalize_dog(patch_density(patch)).
DescriptorVector single_view_dog(const GrayImage& patch, const DescriptorParams& params);

// ---------------------------------------------------------------------------
// Serialization. Binary record layout (little-endian):
//   magic "MVDR" | u16 version | u8 method | u8 kernel | u16 patch_size |
//   u16 bins | u16 cells | f64 eps | f64 sigma | u32 length | f32 values[length]

inline constexpr std::uint16_t kDescriptorRecordVersion = 1;

std::vector<std::uint8_t> encode_descriptor(const DescriptorVector& v, const DescriptorParams& params);
/// Decodes one record starting at `offset`, advancing it past the record.
DescriptorVector decode_descriptor(std::span<const std::uint8_t> bytes, std::size_t& offset,
                                   DescriptorParams* params_out = nullptr);

/// Human-readable JSON form used for debugging.
std::string descriptor_to_json(const DescriptorVector& v, const DescriptorParams& params);

}  // namespace mvdesc
