#pragma once

// FAST corner detection on an image pyramid and translational Lucas-Kanade
// tracking that turns a frame sequence into per-track patch sequences.

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "mvdesc/geometry.hpp"
#include "mvdesc/imgproc.hpp"

namespace mvdesc {

struct Keypoint {
  Vec2 position = Vec2::Zero();  // base resolution
  int level = 0;
  double score = 0.0;

  Vec2 level_position() const {
    return {base_to_level(position.x(), level), base_to_level(position.y(), level)};
  }
};

struct DetectorParams {
  int target_count = 300;
  double min_dist = 5.0;  // level pixels
  int arc = 9;            // contiguous circle pixels required
  int border = 3;         // level pixels kept clear of the image edge
};

/// Segment-test corner response of pixel (x, y) at threshold t: the sum of
/// (|I_p - I_c| - t) over the circle pixels on the winning side, or 0 when no
/// arc of `arc` contiguous pixels is uniformly brighter than I_c + t or darker
/// than I_c - t. (x, y) must be at least 3 pixels from the border.
double fast_score(const GrayImage& img, int x, int y, double t, int arc = 9);

/// Corners of one image at a fixed threshold, before suppression.
std::vector<Keypoint> fast_candidates(const GrayImage& img, double t, int arc, int border);

/// Sorts by score (descending, ties by position) and greedily drops points
/// closer than min_dist to an already kept point.
std::vector<Keypoint> suppress_nonmax(std::vector<Keypoint> points, double min_dist);

/// Per level, bisects the threshold so that the suppressed count lands within
/// 20 % of a share of target_count proportional to the level area (or gets as
/// close as the image allows). Output sorted by score descending.
std::vector<Keypoint> detect_corners(const ImagePyramid& pyr, const DetectorParams& params);
std::vector<Keypoint> detect_corners(const ImagePyramid& pyr, int target_count, double min_dist);

struct KltParams {
  int window = 15;
  int max_iters = 30;
  double reject_thresh = 0.04;   // mean absolute residual, intensity units
  double max_condition = 1e4;    // structure tensor
  double converge_eps = 1e-4;    // pixels
};

struct KltResult {
  bool accepted = false;
  Vec2 position = Vec2::Zero();
  double residual = 0.0;
  double condition = 0.0;
  int iterations = 0;
};

/// Inverse-compositional translational LK: the template is `prev` around
/// `pos`, the search starts at `guess` in `next`. The residual is measured
/// after removing the mean intensity difference. Rejected when the tensor is
/// ill-conditioned, the residual is too large or the window leaves `next`.
KltResult klt_step(const GrayImage& prev, const GrayImage& next, const Vec2& pos, const Vec2& guess,
                   const KltParams& params);
KltResult klt_step(const GrayImage& prev, const GrayImage& next, const Vec2& pos, const KltParams& params);

/// Coarse-to-fine over `extra_levels` pyramid levels above `level`; the
/// rejection tests apply at `level`. Positions are in level-`level` pixels.
KltResult klt_pyramidal(const ImagePyramid& prev, const ImagePyramid& next, int level, const Vec2& pos,
                        const Vec2& guess, int extra_levels, const KltParams& params);

struct Track {
  int id = 0;
  int level = 0;
  std::vector<Vec2> positions;      // base resolution, one per frame from 0
  std::vector<GrayImage> patches;   // contrast-normalized, patch_size^2
  bool alive = true;

  std::size_t length() const { return positions.size(); }
  Vec2 level_position(std::size_t t) const {
    return {base_to_level(positions[t].x(), level), base_to_level(positions[t].y(), level)};
  }
};

struct TrackerParams {
  int levels = 3;
  int patch_size = 11;
  int pyramid_extra_levels = 2;
  DetectorParams detector;
  KltParams klt;
};

/// Detects in frame 0 and tracks each keypoint at its own level through the
/// following frames with a constant-velocity prediction. A rejected track
/// stops growing. Patches are extracted at every tracked position.
std::vector<Track> run_tracker(std::span<const GrayImage> frames, const TrackerParams& params);

/// Extracts the contrast-normalized patch of side `size` at `pos` (level
/// pixels) of `level_image`.
GrayImage track_patch(const GrayImage& level_image, const Vec2& pos, int size);

/// Re-extracts every patch of `track` at a different size.
std::vector<GrayImage> extract_track_patches(const Track& track, std::span<const ImagePyramid> pyramids,
                                             int size);

/// Track dump: tracks.json (id, level, positions, patch files) plus one PGM
/// per patch. Loaded patches carry 8-bit quantization.
void write_tracks(const std::vector<Track>& tracks, int patch_size, const std::filesystem::path& dir);
std::vector<Track> read_tracks(const std::filesystem::path& dir, int* patch_size_out = nullptr);

}  // namespace mvdesc
