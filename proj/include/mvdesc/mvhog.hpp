#pragma once

// Temporal aggregation of per-frame orientation densities (MV-HOG) and the
// intensity-variance proxy for sufficient excitation.

#include <span>
#include <vector>

#include "mvdesc/hogcore.hpp"

namespace mvdesc {

/// Running state of a multi-view descriptor. Storage does not depend on the
/// number of frames absorbed.
class MvAccumulator {
 public:
  explicit MvAccumulator(const DescriptorParams& params);

  /// Adds one frame. Frames with zero gradient still count towards T.
  void update(const GrayImage& patch);
  /// Adds a frame whose unnormalized density was computed elsewhere.
  void update(const GrayImage& patch, const OrientationDensity& density);
  /// Absorbs another accumulator built with the same parameters.
  void merge(const MvAccumulator& other);

  /// (1 / T) * sum, normalized per cell, tagged MV. Throws std::logic_error
  /// when no frame has been added.
  DescriptorVector finalize() const;

  int frame_count() const { return count_; }
  const DescriptorParams& params() const { return params_; }
  const OrientationDensity& sum() const { return sum_; }
  const std::vector<double>& mean_patch() const { return mean_patch_; }
  /// Mean squared l2 distance of the absorbed patches to their mean patch.
  double raw_excitation() const;

  /// Bytes held by the accumulator (descriptor and excitation state).
  std::size_t memory_bytes() const;

 private:
  DescriptorParams params_;
  OrientationDensity sum_;
  int count_ = 0;
  std::vector<double> mean_patch_;
  double sq_accum_ = 0.0;  // Welford M2 summed over pixels
};

/// Mean squared l2 distance of `patches` to their mean patch. Throws
/// std::invalid_argument for an empty list or mismatched sizes.
double raw_excitation(std::span<const GrayImage> patches);

/// raw_excitation(patches) / full_track_value, clipped to [0, 1]. Zero when the
/// normalizer is zero.
double excitation_score(std::span<const GrayImage> patches, double full_track_value);

}  // namespace mvdesc
