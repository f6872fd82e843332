#include <doctest.h>

#include <array>
#include <cmath>
#include <filesystem>
#include <random>

#include "mvdesc/synthscene.hpp"
#include "mvdesc/tracker.hpp"
#include "test_support.hpp"

using namespace mvdesc;

namespace {

// Independent segment test: Bresenham circle of radius 3, counted with an
// explicit wrap-around run over a doubled ring.
double oracle_score(const GrayImage& img, int x, int y, double t, int arc) {
  static const int ring[16][2] = {{0, -3}, {1, -3}, {2, -2}, {3, -1}, {3, 0},  {3, 1},  {2, 2},  {1, 3},
                                  {0, 3},  {-1, 3}, {-2, 2}, {-3, 1}, {-3, 0}, {-3, -1}, {-2, -2}, {-1, -3}};
  const double c = img(x, y);
  for (int side : {1, -1}) {
    int best = 0, run = 0;
    double sum = 0.0;
    for (int k = 0; k < 32; ++k) {
      const double d = side * (img(x + ring[k % 16][0], y + ring[k % 16][1]) - c);
      run = d > t ? run + 1 : 0;
      best = std::max(best, run);
      if (k < 16 && d > t) sum += d - t;
    }
    if (best >= arc) return sum;
  }
  return 0.0;
}

// Continuous bilinear texture translated by `shift`.
GrayImage shifted_view(const GrayImage& tex, int w, int h, const Vec2& shift) {
  GrayImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img(x, y) = tex.sample_bilinear_wrap(x + 20.0 + shift.x(), y + 20.0 + shift.y());
  return img;
}

}  // namespace

TEST_CASE("segment-test score matches the oracle") {
  std::mt19937_64 rng(1);
  const auto img = quantize_8bit(testsupport::random_image(30, 30, rng));
  int corners = 0;
  for (double t : {0.05, 0.15, 0.3})
    for (int arc : {9, 12})
      for (int y = 3; y < 27; ++y)
        for (int x = 3; x < 27; ++x) {
          const double s = fast_score(img, x, y, t, arc);
          REQUIRE(s == doctest::Approx(oracle_score(img, x, y, t, arc)).epsilon(1e-12));
          corners += s > 0.0;
        }
  CHECK(corners > 0);
}

TEST_CASE("constant image has no corners") {
  const auto pyr = build_pyramid(GrayImage(64, 64, 0.5), 3);
  CHECK(detect_corners(pyr, 100, 5.0).empty());
}

TEST_CASE("a bright square yields one keypoint at its center") {
  GrayImage img(40, 40, 0.0);
  for (int y = 16; y <= 18; ++y)
    for (int x = 19; x <= 21; ++x) img(x, y) = 1.0;
  const auto kps = detect_corners(build_pyramid(img, 1), 10, 5.0);
  REQUIRE(kps.size() == 1);
  CHECK(kps[0].level == 0);
  // Every pixel of the square scores the same; the survivor lies inside it.
  CHECK(std::abs(kps[0].position.x() - 20.0) <= 1.0);
  CHECK(std::abs(kps[0].position.y() - 17.0) <= 1.0);
}

TEST_CASE("suppression keeps the stronger of two close corners") {
  std::vector<Keypoint> pts{{Vec2(10, 10), 0, 3.0}, {Vec2(13, 10), 0, 5.0}, {Vec2(30, 30), 0, 1.0}};
  const auto kept = suppress_nonmax(pts, 5.0);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].position == Vec2(13, 10));
  CHECK(kept[1].position == Vec2(30, 30));
  CHECK(suppress_nonmax(pts, 2.0).size() == 3);
}

TEST_CASE("detection on texture") {
  const auto tex = random_texture(256, 5);
  const auto img = shifted_view(tex, 200, 160, Vec2::Zero());
  const auto pyr = build_pyramid(img, 1);
  DetectorParams p;
  p.target_count = 120;
  const auto kps = detect_corners(pyr, p);
  CHECK(kps.size() >= 96);
  CHECK(kps.size() <= 144);
  for (std::size_t i = 1; i < kps.size(); ++i) CHECK(kps[i - 1].score >= kps[i].score);
  for (std::size_t i = 0; i < kps.size(); ++i)
    for (std::size_t j = i + 1; j < kps.size(); ++j) CHECK((kps[i].position - kps[j].position).norm() >= p.min_dist);
  // Repeatable.
  const auto again = detect_corners(pyr, p);
  REQUIRE(again.size() == kps.size());
  for (std::size_t i = 0; i < kps.size(); ++i) CHECK(again[i].position == kps[i].position);

  const auto multi = detect_corners(build_pyramid(img, 3), p);
  bool upper = false;
  for (const auto& k : multi) {
    upper = upper || k.level > 0;
    const Vec2 lp = k.level_position();
    CHECK(lp.x() >= 0.0);
    CHECK(lp.x() < pyr.level(0).width() >> k.level);
  }
  CHECK(upper);
}

TEST_CASE("KLT on identical frames stays put") {
  std::mt19937_64 rng(2);
  const auto img = testsupport::smooth_texture(60, 60, rng);
  const auto r = klt_step(img, img, Vec2(30.3, 28.7), KltParams{});
  REQUIRE(r.accepted);
  CHECK((r.position - Vec2(30.3, 28.7)).norm() < 1e-3);
}

TEST_CASE("KLT recovers an integer shift") {
  std::mt19937_64 rng(3);
  const auto prev = testsupport::smooth_texture(60, 60, rng);
  GrayImage next(60, 60);
  for (int y = 0; y < 60; ++y)
    for (int x = 0; x < 60; ++x) next(x, y) = prev(std::max(x - 2, 0), std::max(y - 1, 0));
  const Vec2 p(29, 31);
  const auto r = klt_step(prev, next, p, KltParams{});
  REQUIRE(r.accepted);
  CHECK((r.position - (p + Vec2(2, 1))).norm() < 0.1);
  // Tracking back returns to the start.
  const auto back = klt_step(next, prev, r.position, KltParams{});
  REQUIRE(back.accepted);
  CHECK((back.position - p).norm() < 0.2);
}

TEST_CASE("KLT is self-inverse on subpixel motion") {
  const auto tex = random_texture(256, 7);
  const auto a = shifted_view(tex, 80, 80, Vec2::Zero());
  const auto b = shifted_view(tex, 80, 80, Vec2(-0.6, 0.35));
  int n = 0;
  for (const Vec2 p : {Vec2(30, 30), Vec2(45, 38), Vec2(50, 52), Vec2(25, 48)}) {
    const auto f = klt_step(a, b, p, KltParams{});
    if (!f.accepted) continue;
    ++n;
    CHECK((f.position - (p + Vec2(0.6, -0.35))).norm() < 0.1);
    const auto r = klt_step(b, a, f.position, KltParams{});
    REQUIRE(r.accepted);
    CHECK((r.position - p).norm() < 0.2);
  }
  CHECK(n >= 3);
}

TEST_CASE("KLT rejects a flat window") {
  const GrayImage flat(40, 40, 0.4);
  const auto r = klt_step(flat, flat, Vec2(20, 20), KltParams{});
  CHECK_FALSE(r.accepted);
  // A window leaving the image is rejected too.
  std::mt19937_64 rng(4);
  const auto img = testsupport::smooth_texture(40, 40, rng);
  CHECK_FALSE(klt_step(img, img, Vec2(2, 2), KltParams{}).accepted);
}

TEST_CASE("pyramidal KLT follows a large motion") {
  const auto tex = random_texture(256, 8);
  const auto a = shifted_view(tex, 120, 100, Vec2::Zero());
  const auto b = shifted_view(tex, 120, 100, Vec2(-5.5, 3.25));
  const auto pa = build_pyramid(a, 3), pb = build_pyramid(b, 3);
  const Vec2 p(60, 50);
  const auto r = klt_pyramidal(pa, pb, 0, p, p, 2, KltParams{});
  REQUIRE(r.accepted);
  CHECK((r.position - (p + Vec2(5.5, -3.25))).norm() < 0.1);
}

TEST_CASE("static sequence gives constant full-length tracks") {
  const auto tex = random_texture(256, 9);
  const auto img = shifted_view(tex, 160, 120, Vec2::Zero());
  const std::vector<GrayImage> frames(5, img);
  TrackerParams p;
  p.detector.target_count = 60;
  const auto tracks = run_tracker(frames, p);
  REQUIRE(tracks.size() > 20);
  for (const auto& t : tracks) {
    CHECK(t.length() == 5);
    CHECK(t.alive);
    for (std::size_t k = 1; k < t.length(); ++k) CHECK((t.positions[k] - t.positions[0]).norm() < 1e-3);
  }
}

TEST_CASE("translating texture is tracked at the known rate") {
  const auto tex = random_texture(256, 10);
  const Vec2 v(0.8, -0.45);
  std::vector<GrayImage> frames;
  for (int f = 0; f < 8; ++f) frames.push_back(shifted_view(tex, 160, 120, -f * v));
  TrackerParams p;
  p.detector.target_count = 60;
  const auto tracks = run_tracker(frames, p);
  std::vector<ImagePyramid> pyrs;
  for (const auto& f : frames) pyrs.push_back(build_pyramid(f, 3));
  int full = 0;
  double worst_base = 0.0;
  for (const auto& t : tracks) {
    // Tracks live at their detection level; the tolerance is in those pixels.
    for (std::size_t k = 1; k < t.length(); ++k) {
      const double e = (t.positions[k] - t.positions[k - 1] - v).norm();
      worst_base = std::max(worst_base, e);
      CHECK(e / std::ldexp(1.0, t.level) < 0.2);
    }
    full += t.length() == frames.size();
    REQUIRE(t.patches.size() == t.length());
    for (std::size_t k = 0; k < t.length(); ++k) {
      CHECK(t.patches[k].width() == 11);
      CHECK(track_patch(pyrs[k].level(t.level), t.level_position(k), 11) == t.patches[k]);
    }
    const auto wide = extract_track_patches(t, pyrs, 21);
    CHECK(wide.size() == t.length());
  }
  MESSAGE("worst per-frame displacement error in base pixels: " << worst_base);
  CHECK(full > 20);
}

TEST_CASE("black frames give no tracks") {
  const std::vector<GrayImage> frames(3, GrayImage(100, 80, 0.0));
  CHECK(run_tracker(frames, TrackerParams{}).empty());
}

TEST_CASE("track dump round trip") {
  const auto tex = random_texture(256, 11);
  std::vector<GrayImage> frames;
  for (int f = 0; f < 3; ++f) frames.push_back(shifted_view(tex, 120, 100, Vec2(0.5 * f, 0.0)));
  TrackerParams p;
  p.detector.target_count = 20;
  const auto tracks = run_tracker(frames, p);
  REQUIRE_FALSE(tracks.empty());
  const auto dir = std::filesystem::temp_directory_path() / "mvdesc_test_tracks";
  std::filesystem::remove_all(dir);
  write_tracks(tracks, 11, dir);
  int size = 0;
  const auto back = read_tracks(dir, &size);
  CHECK(size == 11);
  REQUIRE(back.size() == tracks.size());
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    CHECK(back[i].id == tracks[i].id);
    CHECK(back[i].level == tracks[i].level);
    REQUIRE(back[i].length() == tracks[i].length());
    for (std::size_t k = 0; k < tracks[i].length(); ++k) {
      CHECK(back[i].positions[k] == tracks[i].positions[k]);
      CHECK(testsupport::max_abs_diff(back[i].patches[k], tracks[i].patches[k]) <= 0.5 / 255 + 1e-12);
    }
  }
  std::filesystem::remove_all(dir);
}
