#include <cmath>
#include <fstream>
#include <json.hpp>
#include <random>
#include <sstream>

#include "../common/binary_io.hpp"
#include "../common/json_util.hpp"
#include "../common/seeds.hpp"
#include "mvdesc/synthscene.hpp"

namespace mvdesc {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
const Vec3 kDownHint(0.0, -1.0, 0.0);

Pose vantage_pose(double azimuth, double tilt, double distance, double roll) {
  const Vec3 eye = distance * Vec3(std::sin(tilt) * std::cos(azimuth),
                                   std::sin(tilt) * std::sin(azimuth), std::cos(tilt));
  return look_at(eye, Vec3::Zero(), kDownHint, roll);
}

std::string frame_name(const char* prefix, std::size_t i, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%03zu.%s", prefix, i, ext);
  return buf;
}

}  // namespace

std::vector<Pose> orbit_poses(const OrbitSpec& orbit) {
  if (orbit.frames < 2) throw std::invalid_argument("orbit_poses: need at least two frames");
  std::vector<Pose> poses;
  poses.reserve(static_cast<std::size_t>(orbit.frames));
  for (int i = 0; i < orbit.frames; ++i) {
    const double phi = kTwoPi * i / orbit.frames;
    const double distance = orbit.distance * (1.0 + orbit.distance_variation * std::sin(2.0 * phi));
    const double roll = orbit.roll_amplitude_deg * kDeg * std::sin(2.0 * phi + 0.5);
    poses.push_back(vantage_pose(phi, orbit.tilt_deg * kDeg, distance, roll));
  }
  return poses;
}

double vantage_offset(const Pose& a, const Pose& b) {
  const double c = a.position.normalized().dot(b.position.normalized());
  return std::acos(std::clamp(c, -1.0, 1.0));
}

std::vector<Pose> test_poses(const DatasetSpec& spec, std::span<const Pose> train) {
  std::mt19937_64 rng(detail::derive_seed(spec.seed, {2}));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto& t = spec.test;
  const auto& o = spec.orbit;
  std::vector<Pose> poses;
  int attempts = 0;
  while (static_cast<int>(poses.size()) < t.count) {
    if (++attempts > 10000) {
      throw std::runtime_error("test_poses: cannot satisfy the minimum vantage offset");
    }
    // Alternate between views inside and outside the training orbit.
    const bool inner = poses.size() % 2 == 0;
    const double tilt = inner ? unit(rng) * t.inner_tilt_max_deg
                              : t.outer_tilt_min_deg + unit(rng) * (t.outer_tilt_max_deg - t.outer_tilt_min_deg);
    const double azimuth = unit(rng) * kTwoPi;
    const double distance = o.distance * (1.0 + o.distance_variation * (2.0 * unit(rng) - 1.0));
    const double roll = t.roll_amplitude_deg * (2.0 * unit(rng) - 1.0);
    Pose p = vantage_pose(azimuth, tilt * kDeg, distance, roll * kDeg);
    bool far_enough = true;
    for (const Pose& q : train) {
      if (vantage_offset(p, q) < t.min_offset_deg * kDeg) {
        far_enough = false;
        break;
      }
    }
    if (far_enough) poses.push_back(p);
  }
  return poses;
}

SceneData synthesize_scene(const DatasetSpec& spec) {
  SceneData data;
  data.spec = spec;
  data.model = build_scene_model(spec.scene, detail::derive_seed(spec.seed, {1}));
  const auto train = orbit_poses(spec.orbit);
  const auto test = test_poses(spec, train);

  std::mt19937_64 rng(detail::derive_seed(spec.seed, {3}));
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  const auto& n = spec.nuisance;
  for (std::size_t i = 0; i < train.size(); ++i) {
    Photometric k{1.0 + n.train_gain_jitter * sym(rng), n.train_bias_jitter * sym(rng), 1.0};
    auto f = render_view(data.model, spec.camera, train[i], k, n.train_noise,
                         detail::derive_seed(spec.seed, {100, i}));
    f.image = quantize_8bit(f.image);
    data.train.push_back(std::move(f));
  }
  for (std::size_t i = 0; i < test.size(); ++i) {
    Photometric k{1.0 + n.test_gain_jitter * sym(rng), n.test_bias_jitter * sym(rng),
                  1.0 + n.test_gamma_jitter * sym(rng)};
    auto f = render_view(data.model, spec.camera, test[i], k, n.test_noise,
                         detail::derive_seed(spec.seed, {200, i}));
    f.image = quantize_8bit(f.image);
    data.test.push_back(std::move(f));
  }
  return data;
}

// ---------------------------------------------------------------------------
// Depth raster

std::vector<std::uint8_t> encode_depth(const DepthMap& d) {
  detail::ByteWriter w;
  w.put_magic("MVDEPTH1");
  w.put<std::uint32_t>(static_cast<std::uint32_t>(d.width));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(d.height));
  for (double z : d.z) w.put<float>(static_cast<float>(z));
  return std::move(w.bytes());
}

DepthMap decode_depth(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  r.expect_magic("MVDEPTH1");
  DepthMap d;
  d.width = static_cast<int>(r.get<std::uint32_t>());
  d.height = static_cast<int>(r.get<std::uint32_t>());
  d.z.resize(static_cast<std::size_t>(d.width) * d.height);
  for (double& z : d.z) z = r.get<float>();
  return d;
}

// ---------------------------------------------------------------------------
// Manifest JSON

namespace {

using nlohmann::json;

json pose_to_json(const Pose& p) {
  json r = json::array();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r.push_back(p.rotation(i, j));
  return {{"R", r}, {"T", {p.position.x(), p.position.y(), p.position.z()}}};
}

Pose pose_from_json(const json& j) {
  Pose p;
  const auto& r = j.at("R");
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) p.rotation(i, k) = r.at(static_cast<std::size_t>(3 * i + k)).get<double>();
  const auto& t = j.at("T");
  p.position = Vec3(t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>());
  p.validate();
  return p;
}

}  // namespace

namespace detail {

json dataset_spec_to_json(const DatasetSpec& s) {
  return {
      {"seed", s.seed},
      {"camera",
       {{"focal", s.camera.focal},
        {"principal", {s.camera.principal.x(), s.camera.principal.y()}},
        {"width", s.camera.width},
        {"height", s.camera.height}}},
      {"scene",
       {{"kind", s.scene.kind == SurfaceKind::plane ? "plane" : "height_field"},
        {"grid", s.scene.grid},
        {"extent", s.scene.extent},
        {"amplitude", s.scene.amplitude},
        {"texture_size", s.scene.texture_size},
        {"texture_extent", s.scene.texture_extent}}},
      {"orbit",
       {{"frames", s.orbit.frames},
        {"distance", s.orbit.distance},
        {"distance_variation", s.orbit.distance_variation},
        {"tilt_deg", s.orbit.tilt_deg},
        {"roll_amplitude_deg", s.orbit.roll_amplitude_deg}}},
      {"test",
       {{"count", s.test.count},
        {"min_offset_deg", s.test.min_offset_deg},
        {"inner_tilt_max_deg", s.test.inner_tilt_max_deg},
        {"outer_tilt_min_deg", s.test.outer_tilt_min_deg},
        {"outer_tilt_max_deg", s.test.outer_tilt_max_deg},
        {"roll_amplitude_deg", s.test.roll_amplitude_deg}}},
      {"nuisance",
       {{"train_noise", s.nuisance.train_noise},
        {"test_noise", s.nuisance.test_noise},
        {"train_gain_jitter", s.nuisance.train_gain_jitter},
        {"train_bias_jitter", s.nuisance.train_bias_jitter},
        {"test_gain_jitter", s.nuisance.test_gain_jitter},
        {"test_bias_jitter", s.nuisance.test_bias_jitter},
        {"test_gamma_jitter", s.nuisance.test_gamma_jitter}}},
  };
}

DatasetSpec dataset_spec_from_json(const json& j) {
  DatasetSpec s;
  reject_unknown(j, {"seed", "camera", "scene", "orbit", "test", "nuisance"}, "dataset");
  read_opt(j, "seed", s.seed);
  if (auto it = j.find("camera"); it != j.end()) {
    const auto& c = *it;
    reject_unknown(c, {"focal", "principal", "width", "height"}, "dataset.camera");
    read_opt(c, "focal", s.camera.focal);
    if (auto p = c.find("principal"); p != c.end()) {
      s.camera.principal = Vec2(p->at(0).get<double>(), p->at(1).get<double>());
    }
    read_opt(c, "width", s.camera.width);
    read_opt(c, "height", s.camera.height);
  }
  if (auto it = j.find("scene"); it != j.end()) {
    const auto& sc = *it;
    reject_unknown(sc, {"kind", "grid", "extent", "amplitude", "texture_size", "texture_extent"}, "dataset.scene");
    if (auto k = sc.find("kind"); k != sc.end()) {
      const auto kind = k->get<std::string>();
      if (kind != "plane" && kind != "height_field") {
        throw std::invalid_argument("dataset.scene.kind: expected plane or height_field");
      }
      s.scene.kind = kind == "plane" ? SurfaceKind::plane : SurfaceKind::height_field;
    }
    read_opt(sc, "grid", s.scene.grid);
    read_opt(sc, "extent", s.scene.extent);
    read_opt(sc, "amplitude", s.scene.amplitude);
    read_opt(sc, "texture_size", s.scene.texture_size);
    read_opt(sc, "texture_extent", s.scene.texture_extent);
  }
  if (auto it = j.find("orbit"); it != j.end()) {
    const auto& o = *it;
    reject_unknown(o, {"frames", "distance", "distance_variation", "tilt_deg", "roll_amplitude_deg"},
                   "dataset.orbit");
    read_opt(o, "frames", s.orbit.frames);
    read_opt(o, "distance", s.orbit.distance);
    read_opt(o, "distance_variation", s.orbit.distance_variation);
    read_opt(o, "tilt_deg", s.orbit.tilt_deg);
    read_opt(o, "roll_amplitude_deg", s.orbit.roll_amplitude_deg);
  }
  if (auto it = j.find("test"); it != j.end()) {
    const auto& t = *it;
    reject_unknown(t, {"count", "min_offset_deg", "inner_tilt_max_deg", "outer_tilt_min_deg", "outer_tilt_max_deg",
                       "roll_amplitude_deg"},
                   "dataset.test");
    read_opt(t, "count", s.test.count);
    read_opt(t, "min_offset_deg", s.test.min_offset_deg);
    read_opt(t, "inner_tilt_max_deg", s.test.inner_tilt_max_deg);
    read_opt(t, "outer_tilt_min_deg", s.test.outer_tilt_min_deg);
    read_opt(t, "outer_tilt_max_deg", s.test.outer_tilt_max_deg);
    read_opt(t, "roll_amplitude_deg", s.test.roll_amplitude_deg);
  }
  if (auto it = j.find("nuisance"); it != j.end()) {
    const auto& n = *it;
    reject_unknown(n, {"train_noise", "test_noise", "train_gain_jitter", "train_bias_jitter", "test_gain_jitter",
                       "test_bias_jitter", "test_gamma_jitter"},
                   "dataset.nuisance");
    read_opt(n, "train_noise", s.nuisance.train_noise);
    read_opt(n, "test_noise", s.nuisance.test_noise);
    read_opt(n, "train_gain_jitter", s.nuisance.train_gain_jitter);
    read_opt(n, "train_bias_jitter", s.nuisance.train_bias_jitter);
    read_opt(n, "test_gain_jitter", s.nuisance.test_gain_jitter);
    read_opt(n, "test_bias_jitter", s.nuisance.test_bias_jitter);
    read_opt(n, "test_gamma_jitter", s.nuisance.test_gamma_jitter);
  }
  return s;
}

}  // namespace detail

namespace {

json frames_to_json(const std::vector<FrameRecord>& frames) {
  json arr = json::array();
  for (const auto& f : frames) {
    arr.push_back({{"image", f.image},
                   {"depth", f.depth},
                   {"pose", pose_to_json(f.pose)},
                   {"contrast", {{"gain", f.contrast.gain}, {"bias", f.contrast.bias}, {"gamma", f.contrast.gamma}}},
                   {"noise_sigma", f.noise_sigma}});
  }
  return arr;
}

std::vector<FrameRecord> frames_from_json(const json& arr) {
  std::vector<FrameRecord> out;
  for (const auto& j : arr) {
    FrameRecord f;
    f.image = j.at("image").get<std::string>();
    f.depth = j.at("depth").get<std::string>();
    f.pose = pose_from_json(j.at("pose"));
    const auto& c = j.at("contrast");
    f.contrast = {c.at("gain").get<double>(), c.at("bias").get<double>(), c.at("gamma").get<double>()};
    f.noise_sigma = j.at("noise_sigma").get<double>();
    out.push_back(std::move(f));
  }
  return out;
}

FrameRecord record_of(const RenderedFrame& f, std::string image, std::string depth) {
  return {std::move(image), std::move(depth), f.pose, f.contrast, f.noise_sigma};
}

}  // namespace

std::string manifest_to_json(const DatasetManifest& m) {
  json j;
  j["schema"] = "mvdesc.dataset";
  j["schema_version"] = m.schema_version;
  j["spec"] = detail::dataset_spec_to_json(m.spec);
  j["texture"] = m.texture;
  j["train"] = frames_to_json(m.train);
  j["test"] = frames_to_json(m.test);
  return j.dump(2) + "\n";
}

DatasetManifest manifest_from_json(const std::string& text) {
  const json j = json::parse(text);
  if (j.at("schema").get<std::string>() != "mvdesc.dataset") {
    throw std::runtime_error("manifest: not a dataset manifest");
  }
  DatasetManifest m;
  m.schema_version = j.at("schema_version").get<int>();
  if (m.schema_version != kManifestSchemaVersion) {
    throw std::runtime_error("manifest: unsupported schema version " + std::to_string(m.schema_version));
  }
  m.spec = detail::dataset_spec_from_json(j.at("spec"));
  m.texture = j.at("texture").get<std::string>();
  m.train = frames_from_json(j.at("train"));
  m.test = frames_from_json(j.at("test"));
  return m;
}

void write_dataset(const SceneData& data, const std::filesystem::path& out_dir,
                   DatasetManifest* manifest_out) {
  std::filesystem::create_directories(out_dir);
  DatasetManifest m;
  m.spec = data.spec;
  m.texture = "texture.pgm";
  write_pgm(out_dir / m.texture, data.model.texture);
  auto dump = [&](const std::vector<RenderedFrame>& frames, const char* prefix,
                  std::vector<FrameRecord>& records) {
    for (std::size_t i = 0; i < frames.size(); ++i) {
      const auto image = frame_name(prefix, i, "pgm");
      const auto depth = frame_name(prefix, i, "depth");
      write_pgm(out_dir / image, frames[i].image);
      detail::write_file_bytes(out_dir / depth, encode_depth(frames[i].depth));
      records.push_back(record_of(frames[i], image, depth));
    }
  };
  dump(data.train, "train", m.train);
  dump(data.test, "test", m.test);
  std::ofstream(out_dir / "manifest.json", std::ios::binary) << manifest_to_json(m);
  if (manifest_out) *manifest_out = std::move(m);
}

DatasetManifest generate_dataset(const DatasetSpec& spec, const std::filesystem::path& out_dir) {
  DatasetManifest m;
  write_dataset(synthesize_scene(spec), out_dir, &m);
  return m;
}

SceneData load_dataset(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json", std::ios::binary);
  if (!in) throw std::runtime_error("load_dataset: missing manifest.json in " + dir.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const auto m = manifest_from_json(ss.str());

  SceneData data;
  data.spec = m.spec;
  data.model = build_scene_model(m.spec.scene, detail::derive_seed(m.spec.seed, {1}));
  data.model.texture = read_pgm(dir / m.texture);
  auto load = [&](const std::vector<FrameRecord>& records, std::vector<RenderedFrame>& frames) {
    for (const auto& r : records) {
      RenderedFrame f;
      f.image = read_pgm(dir / r.image);
      f.depth = decode_depth(detail::read_file_bytes(dir / r.depth));
      f.pose = r.pose;
      f.camera = m.spec.camera;
      f.contrast = r.contrast;
      f.noise_sigma = r.noise_sigma;
      frames.push_back(std::move(f));
    }
  };
  load(m.train, data.train);
  load(m.test, data.test);
  return data;
}

}  // namespace mvdesc
