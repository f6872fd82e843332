#include <fstream>
#include <sstream>
#include <stdexcept>

#include "../common/json_util.hpp"
#include "../common/seeds.hpp"
#include "mvdesc/harness.hpp"

namespace mvdesc {

using nlohmann::json;

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("config: " + what); };
  if (scenes < 1) fail("scenes must be >= 1");
  if (plane_scenes < 0) fail("plane_scenes must be >= 0");
  if (patch_sizes.empty()) fail("patch_sizes is empty");
  for (int p : patch_sizes) DescriptorParams::defaults(p, bins, cells).validate();
  if (methods.empty()) fail("methods is empty");
  if (keyframes < 1) fail("keyframes must be >= 1");
  if (svhog_trials < 1) fail("svhog_trials must be >= 1");
  if (min_track_length < 1 || min_track_length > dataset.orbit.frames) {
    fail("min_track_length must be in [1, orbit frames]");
  }
  if (tracker.levels < 1 || tracker.levels > kMaxPyramidLevels) fail("tracker.levels out of range");
  if (tracker.klt.window < 3 || tracker.klt.window % 2 == 0) fail("tracker.klt.window must be odd and >= 3");
  if (tracker.detector.target_count < 1) fail("tracker.detector.target_count must be >= 1");
  if (excitation_trials < 1) fail("excitation_trials must be >= 1");
  for (int k : excitation_windows) {
    if (k < 1) fail("excitation_windows entries must be >= 1");
  }
  if (timing_reps < 1) fail("timing_reps must be >= 1");
  if (hemisphere.n_azimuth < 1 || hemisphere.n_tilt < 1 || hemisphere.n_inplane < 1) {
    fail("hemisphere counts must be >= 1");
  }
  dataset.camera.validate();
}

namespace {

json strategies_to_json(const std::vector<Strategy>& v) {
  json a = json::array();
  for (auto s : v) a.push_back(to_string(s));
  return a;
}

json metrics_to_json(const std::vector<Metric>& v) {
  json a = json::array();
  for (auto m : v) a.push_back(to_string(m));
  return a;
}

}  // namespace

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["schema"] = "mvdesc.experiment";
  j["schema_version"] = kConfigSchemaVersion;
  j["seed"] = c.seed;
  j["scenes"] = c.scenes;
  j["plane_scenes"] = c.plane_scenes;
  j["dataset"] = detail::dataset_spec_to_json(c.dataset);
  j["patch_sizes"] = c.patch_sizes;
  j["descriptor"] = {{"bins", c.bins},
                     {"cells", c.cells},
                     {"kernel", c.kernel == AngularKernel::triangular ? "triangular" : "wrapped_gaussian"}};
  j["methods"] = strategies_to_json(c.methods);
  j["metric"] = to_string(c.metric);
  j["extra_metrics"] = metrics_to_json(c.extra_metrics);
  j["extra_metrics_maxout"] = c.extra_metrics_maxout;
  j["keyframes"] = c.keyframes;
  j["svhog_trials"] = c.svhog_trials;
  j["min_track_length"] = c.min_track_length;
  j["tracker"] = {{"levels", c.tracker.levels},
                  {"pyramid_extra_levels", c.tracker.pyramid_extra_levels},
                  {"target_count", c.tracker.detector.target_count},
                  {"min_dist", c.tracker.detector.min_dist},
                  {"arc", c.tracker.detector.arc},
                  {"window", c.tracker.klt.window},
                  {"max_iters", c.tracker.klt.max_iters},
                  {"reject_thresh", c.tracker.klt.reject_thresh},
                  {"max_condition", c.tracker.klt.max_condition}};
  j["hemisphere"] = {{"n_azimuth", c.hemisphere.n_azimuth},
                     {"n_tilt", c.hemisphere.n_tilt},
                     {"inplane_range", c.hemisphere.inplane_range},
                     {"n_inplane", c.hemisphere.n_inplane},
                     {"max_tilt", c.hemisphere.max_tilt}};
  j["visibility_threshold"] = c.visibility_threshold;
  j["excitation"] = {{"enabled", c.run_excitation},
                     {"windows", c.excitation_windows},
                     {"trials", c.excitation_trials}};
  j["complexity"] = {{"enabled", c.run_complexity}, {"timing_reps", c.timing_reps}};
  return j.dump(2) + "\n";
}

ExperimentConfig config_from_json(const std::string& text) {
  const json j = json::parse(text);
  using detail::read_opt;
  using detail::reject_unknown;
  reject_unknown(j,
                 {"schema", "schema_version", "seed", "scenes", "plane_scenes", "dataset", "patch_sizes",
                  "descriptor", "methods", "metric", "extra_metrics", "extra_metrics_maxout", "keyframes", "svhog_trials",
                  "min_track_length", "tracker", "hemisphere", "visibility_threshold", "excitation", "complexity"},
                 "config");
  if (j.value("schema", std::string("mvdesc.experiment")) != "mvdesc.experiment") {
    throw std::invalid_argument("config: not an experiment config");
  }
  if (j.value("schema_version", kConfigSchemaVersion) != kConfigSchemaVersion) {
    throw std::invalid_argument("config: unsupported schema_version");
  }
  ExperimentConfig c;
  read_opt(j, "seed", c.seed);
  read_opt(j, "scenes", c.scenes);
  read_opt(j, "plane_scenes", c.plane_scenes);
  if (j.contains("dataset")) c.dataset = detail::dataset_spec_from_json(j["dataset"]);
  read_opt(j, "patch_sizes", c.patch_sizes);
  if (auto it = j.find("descriptor"); it != j.end()) {
    reject_unknown(*it, {"bins", "cells", "kernel"}, "config.descriptor");
    read_opt(*it, "bins", c.bins);
    read_opt(*it, "cells", c.cells);
    if (it->contains("kernel")) {
      const auto k = (*it)["kernel"].get<std::string>();
      if (k != "triangular" && k != "wrapped_gaussian") {
        throw std::invalid_argument("config.descriptor.kernel: expected triangular or wrapped_gaussian");
      }
      c.kernel = k == "triangular" ? AngularKernel::triangular : AngularKernel::wrapped_gaussian;
    }
  }
  if (j.contains("methods")) {
    c.methods.clear();
    for (const auto& m : j["methods"]) c.methods.push_back(parse_strategy(m.get<std::string>()));
  }
  if (j.contains("metric")) c.metric = parse_metric(j["metric"].get<std::string>());
  if (j.contains("extra_metrics")) {
    c.extra_metrics.clear();
    for (const auto& m : j["extra_metrics"]) c.extra_metrics.push_back(parse_metric(m.get<std::string>()));
  }
  read_opt(j, "extra_metrics_maxout", c.extra_metrics_maxout);
  read_opt(j, "keyframes", c.keyframes);
  read_opt(j, "svhog_trials", c.svhog_trials);
  read_opt(j, "min_track_length", c.min_track_length);
  if (auto it = j.find("tracker"); it != j.end()) {
    const auto& t = *it;
    reject_unknown(t, {"levels", "pyramid_extra_levels", "target_count", "min_dist", "arc", "window", "max_iters",
                       "reject_thresh", "max_condition"},
                   "config.tracker");
    read_opt(t, "levels", c.tracker.levels);
    read_opt(t, "pyramid_extra_levels", c.tracker.pyramid_extra_levels);
    read_opt(t, "target_count", c.tracker.detector.target_count);
    read_opt(t, "min_dist", c.tracker.detector.min_dist);
    read_opt(t, "arc", c.tracker.detector.arc);
    read_opt(t, "window", c.tracker.klt.window);
    read_opt(t, "max_iters", c.tracker.klt.max_iters);
    read_opt(t, "reject_thresh", c.tracker.klt.reject_thresh);
    read_opt(t, "max_condition", c.tracker.klt.max_condition);
  }
  if (auto it = j.find("hemisphere"); it != j.end()) {
    const auto& h = *it;
    reject_unknown(h, {"n_azimuth", "n_tilt", "inplane_range", "n_inplane", "max_tilt"}, "config.hemisphere");
    read_opt(h, "n_azimuth", c.hemisphere.n_azimuth);
    read_opt(h, "n_tilt", c.hemisphere.n_tilt);
    read_opt(h, "inplane_range", c.hemisphere.inplane_range);
    read_opt(h, "n_inplane", c.hemisphere.n_inplane);
    read_opt(h, "max_tilt", c.hemisphere.max_tilt);
  }
  read_opt(j, "visibility_threshold", c.visibility_threshold);
  if (auto it = j.find("excitation"); it != j.end()) {
    reject_unknown(*it, {"enabled", "windows", "trials"}, "config.excitation");
    read_opt(*it, "enabled", c.run_excitation);
    read_opt(*it, "windows", c.excitation_windows);
    read_opt(*it, "trials", c.excitation_trials);
  }
  if (auto it = j.find("complexity"); it != j.end()) {
    reject_unknown(*it, {"enabled", "timing_reps"}, "config.complexity");
    read_opt(*it, "enabled", c.run_complexity);
    read_opt(*it, "timing_reps", c.timing_reps);
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

DatasetSpec scene_spec(const ExperimentConfig& cfg, int index) {
  DatasetSpec s = cfg.dataset;
  s.seed = detail::derive_seed(cfg.seed, {0x5CE4Eull, static_cast<std::uint64_t>(index)});
  s.scene.kind = index < cfg.plane_scenes ? SurfaceKind::plane : SurfaceKind::height_field;
  return s;
}

}  // namespace mvdesc
