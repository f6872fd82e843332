#include <algorithm>
#include <stdexcept>

#include "mvdesc/tracker.hpp"

namespace mvdesc {

GrayImage track_patch(const GrayImage& level_image, const Vec2& pos, int size) {
  return normalize_patch_contrast(extract_patch(level_image, pos.x(), pos.y(), size));
}

std::vector<GrayImage> extract_track_patches(const Track& track, std::span<const ImagePyramid> pyramids,
                                             int size) {
  if (pyramids.size() < track.length()) throw std::invalid_argument("extract_track_patches: too few frames");
  std::vector<GrayImage> out;
  out.reserve(track.length());
  for (std::size_t t = 0; t < track.length(); ++t) {
    out.push_back(track_patch(pyramids[t].level(track.level), track.level_position(t), size));
  }
  return out;
}

namespace {

int max_levels_for(const GrayImage& img, int wanted) {
  int levels = 1;
  while (levels < std::min(wanted, kMaxPyramidLevels) &&
         std::min(img.width(), img.height()) >= (1 << levels) * kMinImageSide) {
    ++levels;
  }
  return levels;
}

bool patch_inside(const GrayImage& img, const Vec2& p, int half) {
  return p.x() - half >= 0.0 && p.y() - half >= 0.0 && p.x() + half <= img.width() - 1.0 &&
         p.y() + half <= img.height() - 1.0;
}

}  // namespace

std::vector<Track> run_tracker(std::span<const GrayImage> frames, const TrackerParams& params) {
  if (frames.empty()) throw std::invalid_argument("run_tracker: no frames");
  if (params.levels < 1) throw std::invalid_argument("run_tracker: levels must be >= 1");
  const int wanted = params.levels + std::max(params.pyramid_extra_levels, 0);
  const int levels = max_levels_for(frames[0], wanted);
  const int patch_half = params.patch_size / 2;

  ImagePyramid prev = build_pyramid(frames[0], levels);
  ImagePyramid detect_pyr;
  detect_pyr.levels.assign(prev.levels.begin(), prev.levels.begin() + std::min(params.levels, levels));
  DetectorParams det = params.detector;
  det.border = std::max(det.border, std::max(patch_half, params.klt.window / 2) + 2);

  std::vector<Track> tracks;
  for (const auto& kp : detect_corners(detect_pyr, det)) {
    Track t;
    t.id = static_cast<int>(tracks.size());
    t.level = kp.level;
    t.positions.push_back(kp.position);
    // Patches come from the stored position so re-extraction is exact.
    t.patches.push_back(track_patch(prev.level(kp.level), t.level_position(0), params.patch_size));
    tracks.push_back(std::move(t));
  }

  for (std::size_t f = 1; f < frames.size(); ++f) {
    ImagePyramid next = build_pyramid(frames[f], levels);
    for (auto& t : tracks) {
      if (!t.alive) continue;
      const Vec2 pos = t.level_position(f - 1);
      const Vec2 guess = f >= 2 ? Vec2(2.0 * pos - t.level_position(f - 2)) : pos;
      const auto r = klt_pyramidal(prev, next, t.level, pos, guess, params.pyramid_extra_levels, params.klt);
      const GrayImage& img = next.level(t.level);
      if (!r.accepted || !patch_inside(img, r.position, patch_half)) {
        t.alive = false;
        continue;
      }
      t.positions.emplace_back(level_to_base(r.position.x(), t.level), level_to_base(r.position.y(), t.level));
      t.patches.push_back(track_patch(img, t.level_position(f), params.patch_size));
    }
    prev = std::move(next);
  }
  return tracks;
}

}  // namespace mvdesc
