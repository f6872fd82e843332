#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

#include "mvdesc/harness.hpp"

using namespace mvdesc;

namespace {

DatasetSpec small_dataset(SurfaceKind kind, std::uint64_t seed) {
  DatasetSpec s;
  s.scene.kind = kind;
  s.scene.texture_size = 256;
  s.orbit.frames = 12;
  s.test.count = 2;
  s.seed = seed;
  return s;
}

std::vector<Track> long_tracks(const SceneData& data, int min_length) {
  std::vector<GrayImage> frames;
  for (const auto& f : data.train) frames.push_back(f.image);
  TrackerParams p;
  p.detector.target_count = 60;
  std::vector<Track> out;
  for (auto& t : run_tracker(frames, p))
    if (static_cast<int>(t.length()) >= min_length) out.push_back(std::move(t));
  return out;
}

// One-hot in bin `b` of all four cells.
DescriptorVector hot(int b, double w = 1.0, int other = -1) {
  DescriptorVector v;
  v.cells = 2;
  v.bins = 8;
  v.values.assign(32, 0.0f);
  for (int c = 0; c < 4; ++c) {
    v.values[c * 8 + b] += static_cast<float>(w);
    if (other >= 0) v.values[c * 8 + other] += static_cast<float>(1.0 - w);
  }
  return v;
}

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.dataset = small_dataset(SurfaceKind::height_field, 1);
  cfg.scenes = 2;
  cfg.plane_scenes = 1;
  cfg.patch_sizes = {11};
  cfg.methods = {Strategy::svhog};
  cfg.extra_metrics = {};
  cfg.min_track_length = 8;
  cfg.tracker.detector.target_count = 60;
  cfg.run_excitation = false;
  cfg.run_complexity = false;
  return cfg;
}

}  // namespace

TEST_CASE("recognition rate on exact copies and foreign tracks") {
  DescriptorDatabase db(Strategy::mvhog, DescriptorParams::defaults(11, 8, 2));
  for (int t = 0; t < 4; ++t) db.add(static_cast<std::uint32_t>(t), hot(t));
  std::vector<Query> exact;
  for (int t = 0; t < 4; ++t) exact.push_back({static_cast<std::uint32_t>(t), 0, Vec2::Zero(), hot(t)});
  CHECK(recognition_rate(exact, db, Metric::l2) == 1.0);
  std::vector<Query> wrong{{1, 0, Vec2::Zero(), hot(0)}, {2, 0, Vec2::Zero(), hot(3)}};
  CHECK(recognition_rate(wrong, db, Metric::l2) == 0.0);
  CHECK_THROWS_AS(recognition_rate({}, db, Metric::l2), std::invalid_argument);
  std::vector<Query> missing{{9, 0, Vec2::Zero(), hot(0)}};
  CHECK_THROWS_AS(recognition_rate(missing, db, Metric::l2), std::invalid_argument);
}

TEST_CASE("recognition rate on a hand-enumerated case") {
  DescriptorDatabase db(Strategy::mvhog, DescriptorParams::defaults(11, 8, 2));
  for (int t = 0; t < 4; ++t) db.add(static_cast<std::uint32_t>(10 + t), hot(t));
  // Mixtures resolve to the heavier bin; the last one is labelled with the
  // lighter track on purpose.
  std::vector<Query> q{
      {10, 0, Vec2::Zero(), hot(0, 0.7, 1)},  // nearest 10: hit
      {11, 0, Vec2::Zero(), hot(1, 0.6, 2)},  // nearest 11: hit
      {12, 0, Vec2::Zero(), hot(3, 0.8, 2)},  // nearest 13: miss
      {13, 0, Vec2::Zero(), hot(3, 0.9, 0)},  // nearest 13: hit
      {10, 0, Vec2::Zero(), hot(1, 0.55, 0)},  // nearest 11: miss
      {12, 0, Vec2::Zero(), hot(2)},           // exact: hit
      {11, 0, Vec2::Zero(), hot(0, 0.51, 1)},  // nearest 10: miss
      {13, 0, Vec2::Zero(), hot(3, 0.65, 1)},  // nearest 13: hit
  };
  CHECK(recognition_rate(q, db, Metric::l2) == doctest::Approx(5.0 / 8.0));
  CHECK(recognition_rate(q, db, Metric::l1) == doctest::Approx(5.0 / 8.0));
}

TEST_CASE("keyframe indices") {
  CHECK(keyframe_indices(30, 10) == std::vector<std::size_t>{0, 3, 6, 10, 13, 16, 19, 23, 26, 29});
  CHECK(keyframe_indices(5, 10) == std::vector<std::size_t>{0, 1, 2, 3, 4});
  CHECK(keyframe_indices(10, 1) == std::vector<std::size_t>{0});
  CHECK(keyframe_indices(0, 4).empty());
  CHECK(keyframe_indices(2, 2) == std::vector<std::size_t>{0, 1});
}

TEST_CASE("spearman") {
  const std::vector<double> x{1, 2, 2, 3}, y{1, 3, 2, 4};
  // Average ranks 1, 2.5, 2.5, 4 against 1, 3, 2, 4.
  CHECK(spearman(x, y) == doctest::Approx(4.5 / std::sqrt(4.5 * 5.0)));
  const std::vector<double> a{0.1, 0.5, 0.2, 0.9}, b{1, 30, 7, 1000}, c{5, 4, 3, 2};
  CHECK(spearman(a, b) == doctest::Approx(1.0));
  CHECK(spearman(c, std::vector<double>{1, 2, 3, 4}) == doctest::Approx(-1.0));
  CHECK(spearman(a, std::vector<double>{2, 2, 2, 2}) == 0.0);
  CHECK_THROWS_AS(spearman(a, std::vector<double>{1, 2}), std::invalid_argument);
}

TEST_CASE("config JSON") {
  ExperimentConfig cfg = small_config();
  cfg.metric = Metric::chi2;
  cfg.kernel = AngularKernel::wrapped_gaussian;
  cfg.seed = 77;
  const auto text = config_to_json(cfg);
  const auto back = config_from_json(text);
  CHECK(config_to_json(back) == text);
  CHECK(back.metric == Metric::chi2);
  CHECK(back.methods == cfg.methods);
  CHECK(back.seed == 77);

  auto j = nlohmann::json::parse(text);
  j["bogus"] = 1;
  CHECK_THROWS_AS(config_from_json(j.dump()), std::invalid_argument);
  j = nlohmann::json::parse(text);
  j["tracker"]["speed"] = 2;
  CHECK_THROWS_AS(config_from_json(j.dump()), std::invalid_argument);
  j = nlohmann::json::parse(text);
  j["min_track_length"] = 500;
  CHECK_THROWS_AS(config_from_json(j.dump()), std::invalid_argument);
  // Missing keys keep their defaults.
  const auto defaults = config_from_json("{}");
  CHECK(config_to_json(defaults) == config_to_json(ExperimentConfig{}));
}

TEST_CASE("scene specs") {
  ExperimentConfig cfg;
  const auto a = scene_spec(cfg, 0), b = scene_spec(cfg, 1);
  CHECK(a.scene.kind == SurfaceKind::plane);
  CHECK(b.scene.kind == SurfaceKind::height_field);
  CHECK(a.seed != b.seed);
  CHECK(scene_spec(cfg, 3).seed == scene_spec(cfg, 3).seed);
}

TEST_CASE("test queries") {
  const SceneData data = synthesize_scene(small_dataset(SurfaceKind::plane, 3));
  const auto tracks = long_tracks(data, 8);
  REQUIRE(tracks.size() > 10);
  const auto params = DescriptorParams::defaults(11);

  SUBCASE("a test view equal to frame 0 reproduces the training patches") {
    SceneData same = data;
    same.test = {data.train[0]};
    const auto queries = build_test_queries(same, tracks, params);
    REQUIRE(queries.size() > 5);
    std::vector<ImagePyramid> pyrs{build_pyramid(data.train[0].image, 3)};
    for (const auto& q : queries) {
      const Track* t = nullptr;
      for (const auto& c : tracks)
        if (static_cast<std::uint32_t>(c.id) == q.track_id) t = &c;
      REQUIRE(t != nullptr);
      CHECK((q.position - t->positions[0]).norm() < 1e-6);
      const auto expect = single_view_dog(track_patch(pyrs[0].level(t->level), t->level_position(0), 11), params);
      double worst = 0.0;
      for (std::size_t i = 0; i < expect.values.size(); ++i)
        worst = std::max(worst, std::abs(double(expect.values[i]) - q.descriptor.values[i]));
      CHECK(worst < 1e-4);
    }
  }

  SUBCASE("hidden or out-of-view anchors give no query") {
    SceneData hidden = data;
    hidden.test = {data.train[0]};
    for (double& z : hidden.test[0].depth.z) z = 0.05;
    CHECK(build_test_queries(hidden, tracks, params).empty());
    SceneData away = data;
    away.test = {data.train[0]};
    away.test[0].pose.position += away.test[0].pose.rotation.col(0) * 50.0;
    CHECK(build_test_queries(away, tracks, params).empty());
  }

  SUBCASE("positions follow the plane-induced mapping") {
    const auto queries = build_test_queries(data, tracks, params);
    REQUIRE(queries.size() > 5);
    const Vec3 n = data.model.placement.rotation.col(2), p0 = data.model.placement.position;
    const auto& a = data.train[0];
    for (const auto& q : queries) {
      const Track* t = nullptr;
      for (const auto& c : tracks)
        if (static_cast<std::uint32_t>(c.id) == q.track_id) t = &c;
      const Vec3 dir = a.pose.rotation * a.camera.ray(t->positions[0]);
      const double s = n.dot(p0 - a.pose.position) / n.dot(dir);
      const auto& b = data.test[static_cast<std::size_t>(q.test_frame)];
      const Vec2 expect = b.camera.project(b.pose.world_to_camera(a.pose.position + s * dir));
      CHECK((q.position - expect).norm() < 1e-3);
      const int half = 5 << t->level;
      CHECK(q.position.x() >= half - 1);
      CHECK(q.position.x() <= b.camera.width - half);
    }
  }
}

TEST_CASE("databases built from tracks") {
  const SceneData data = synthesize_scene(small_dataset(SurfaceKind::height_field, 4));
  const auto tracks = long_tracks(data, 8);
  REQUIRE_FALSE(tracks.empty());
  const auto params = DescriptorParams::defaults(11);
  ExperimentConfig cfg;
  std::size_t frames = 0;
  for (const auto& t : tracks) frames += t.length();

  const auto sv = build_database(Strategy::svhog, data, tracks, params, cfg, 5);
  const auto mv = build_database(Strategy::mvhog, data, tracks, params, cfg, 5);
  const auto keep = build_database(Strategy::keepall, data, tracks, params, cfg, 5);
  CHECK(sv.size() == tracks.size());
  CHECK(mv.size() == tracks.size());
  CHECK(keep.size() == frames);
  CHECK(keep.num_tracks() == tracks.size());
  CHECK(keep.has_index());
  CHECK(mv.all_normalized());
  CHECK(keep.memory_bytes() == mv.memory_bytes() * frames / tracks.size());
  // The same seed picks the same frames.
  CHECK(encode_database(sv) == encode_database(build_database(Strategy::svhog, data, tracks, params, cfg, 5)));

  const auto rh = build_database(Strategy::rhog, data, tracks, params, cfg, 5);
  CHECK(rh.size() <= tracks.size());
  CHECK(rh.size() > tracks.size() / 2);
  for (const auto& e : rh.entries()) CHECK(mv.contains_track(e.track_id));
}

TEST_CASE("small benchmark runs") {
  const auto cfg = small_config();
  const auto report = run_benchmark(cfg);
  REQUIRE(report.rates.size() == 2);
  for (int s = 0; s < 2; ++s) {
    CHECK(report.rates[s].scene == s);
    CHECK(report.rates[s].method == "SVHOG");
    CHECK(report.rates[s].rate >= 0.0);
    CHECK(report.rates[s].rate <= 1.0);
    CHECK(report.rates[s].queries == report.scenes[s].queries.at(11));
    CHECK(report.scenes[s].svhog_frames.at(11).size() == static_cast<std::size_t>(cfg.svhog_trials));
  }
  CHECK(report.scenes[0].surface == "plane");
  CHECK(report.scenes[1].surface == "height_field");
  CHECK(report.mean_rate("SVHOG", 11, "l2") ==
        doctest::Approx((report.rates[0].rate + report.rates[1].rate) / 2));
  CHECK_THROWS_AS(report.mean_rate("MVHOG", 11, "l2"), std::invalid_argument);
  CHECK(report.memory.empty());
  CHECK(report.excitation.empty());

  // Everything except wall-clock fields repeats.
  const auto again = run_benchmark(cfg);
  CHECK(report_csv(again) == report_csv(report));

  const auto dir = std::filesystem::temp_directory_path() / "mvdesc_test_report";
  std::filesystem::remove_all(dir);
  write_report(report, cfg, dir);
  for (const char* f : {"report.csv", "report.json", "excitation.csv", "timing.csv"})
    CHECK(std::filesystem::exists(dir / f));
  std::ifstream in(dir / "report.json");
  const auto j = nlohmann::json::parse(in);
  CHECK(j.contains("config"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("complexity and excitation studies") {
  auto cfg = small_config();
  cfg.scenes = 1;
  cfg.methods = {Strategy::mvhog, Strategy::keepall};
  cfg.run_complexity = true;
  cfg.timing_reps = 3;
  cfg.run_excitation = true;
  cfg.excitation_windows = {2, 4, 8};
  cfg.excitation_trials = 1;
  const auto report = run_benchmark(cfg);
  CHECK(report.rates.size() == 2);
  REQUIRE(report.memory.size() == 12);
  for (const auto& m : report.memory) {
    CHECK(m.mvhog_bytes == report.memory.front().mvhog_bytes);
    CHECK(m.keepall_bytes == static_cast<std::size_t>(m.frames) * m.mvhog_bytes);
  }
  CHECK(report.update_timing.size() == 5);
  REQUIRE(report.excitation.size() == 3);
  const auto curve = report.excitation_curve();
  REQUIRE(curve.size() == 3);
  CHECK(curve[0][0] == 2.0);
  for (const auto& p : curve) {
    CHECK(p[1] >= 0.0);
    CHECK(p[2] >= 0.0);
    CHECK(p[2] <= 1.0);
  }
  CHECK(curve[2][1] >= curve[0][1]);
}

TEST_CASE("benchmark errors name the scene and stage") {
  auto cfg = small_config();
  cfg.scenes = 1;
  cfg.dataset.camera.width = 40;
  cfg.dataset.camera.height = 30;
  cfg.dataset.camera.principal = {20, 15};
  cfg.dataset.camera.focal = 40;
  try {
    run_benchmark(cfg);
    FAIL("expected an error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("scene 0") != std::string::npos);
  }
}
