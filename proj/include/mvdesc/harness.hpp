#pragma once

// End-to-end experiment: dataset synthesis, tracking, descriptor databases for
// every method, test queries from ground-truth correspondence, recognition
// rates, the excitation study and the complexity study.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mvdesc/matchdb.hpp"
#include "mvdesc/mvhog.hpp"
#include "mvdesc/rhog.hpp"
#include "mvdesc/synthscene.hpp"
#include "mvdesc/tracker.hpp"

namespace mvdesc {

inline constexpr int kConfigSchemaVersion = 1;

struct ExperimentConfig {
  DatasetSpec dataset;            // per-scene seeds are derived from `seed`
  int scenes = 5;
  int plane_scenes = 1;           // the first scenes use a plane surface
  std::vector<int> patch_sizes{11, 21};
  int bins = 16;
  int cells = 4;
  AngularKernel kernel = AngularKernel::triangular;
  std::vector<Strategy> methods{Strategy::svhog, Strategy::mvhog, Strategy::keepall, Strategy::rhog,
                                Strategy::rhog_maxout};
  Metric metric = Metric::l2;
  std::vector<Metric> extra_metrics{Metric::l1, Metric::likelihood};
  bool extra_metrics_maxout = false;  // max-out stores are large; primary metric only by default
  int keyframes = 10;
  int svhog_trials = 5;
  int min_track_length = 30;
  TrackerParams tracker;
  // Viewpoint range matched to the dataset's nuisances: rolls of up to 8 deg
  // in both train and test frames (16 deg in-plane) and a 25 deg tilt gap.
  HemisphereParams hemisphere{8, 1, 0.2792526803190927, 10, 0.4363323129985824};
  double visibility_threshold = kDefaultVisibilityThreshold;
  bool run_excitation = true;
  std::vector<int> excitation_windows{2, 5, 10, 20, 30};
  int excitation_trials = 3;
  bool run_complexity = true;
  int timing_reps = 21;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

std::string config_to_json(const ExperimentConfig& cfg);
/// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Dataset spec of scene `index`: derived seed and surface kind.
DatasetSpec scene_spec(const ExperimentConfig& cfg, int index);

struct Query {
  std::uint32_t track_id = 0;
  int test_frame = 0;
  Vec2 position = Vec2::Zero();  // base resolution, in the test frame
  DescriptorVector descriptor;
};

/// Fraction of queries whose nearest track is the true one. Throws
/// std::invalid_argument for no queries or a true id missing from `db`.
double recognition_rate(std::span<const Query> queries, const DescriptorDatabase& db, Metric metric);

/// For every test frame and track: maps the track's frame-0 position into the
/// test frame by ground-truth correspondence, skips occluded and out-of-view
/// anchors and anchors whose patch would leave the level image, and emits the
/// single-view DOG of the contrast-normalized patch at the track's level.
std::vector<Query> build_test_queries(const SceneData& data, std::span<const Track> tracks,
                                      const DescriptorParams& params);

/// Database of one method over the training frames of `data`, with patches
/// re-extracted at the tracked positions. SVHOG draws each track's frame from
/// `seed`. Reconstruction stores leave out tracks without an accepted view.
DescriptorDatabase build_database(Strategy method, const SceneData& data, std::span<const Track> tracks,
                                  const DescriptorParams& params, const ExperimentConfig& cfg, std::uint64_t seed);

/// `count` frame indices spread uniformly over [0, length), or all of them.
std::vector<std::size_t> keyframe_indices(std::size_t length, int count);

/// Spearman rank correlation with average ranks for ties; 0 when either
/// input is constant.
double spearman(std::span<const double> x, std::span<const double> y);

struct RateRow {
  int scene = 0;
  std::string method;
  int patch_size = 0;
  std::string metric;
  double rate = 0.0;
  int queries = 0;
};

struct ExcitationPoint {
  int scene = 0;
  int patch_size = 0;
  int window = 0;
  double excitation = 0.0;
  double accuracy = 0.0;
};

struct MemoryPoint {
  int frames = 0;
  std::size_t mvhog_bytes = 0;
  std::size_t keepall_bytes = 0;
};

struct UpdateTiming {
  int frames = 0;          // accumulator size before the timed update
  double seconds = 0.0;    // median per update
};

struct StageTiming {
  int scene = 0;
  std::string stage;
  double seconds = 0.0;
};

struct SceneSummary {
  int scene = 0;
  std::string surface;
  int detected = 0;
  int tracks = 0;                 // tracks used after length and synthesis filters
  std::map<int, int> queries;     // patch size -> query count
  std::map<int, int> rhog_views;  // patch size -> accepted synthesized views
  std::map<int, std::vector<std::vector<int>>> svhog_frames;  // patch -> trial -> per track
};

struct BenchmarkReport {
  std::vector<RateRow> rates;
  std::vector<SceneSummary> scenes;
  std::vector<ExcitationPoint> excitation;
  std::vector<MemoryPoint> memory;
  std::vector<UpdateTiming> update_timing;  // wall clock, not deterministic
  std::vector<StageTiming> stages;          // wall clock, not deterministic
  double total_seconds = 0.0;

  /// Mean over scenes of the rate of `method` (see to_string(Strategy)).
  double mean_rate(const std::string& method, int patch_size, const std::string& metric) const;
  /// Per window size: mean excitation and mean accuracy over scenes and
  /// patch sizes.
  std::vector<std::array<double, 3>> excitation_curve() const;
  double excitation_spearman() const;
};

/// Runs the whole experiment. Deterministic for a fixed config apart from the
/// wall-clock fields. Errors are rethrown with the failing scene and stage.
BenchmarkReport run_benchmark(const ExperimentConfig& cfg);

std::string report_csv(const BenchmarkReport& r);
std::string report_json(const BenchmarkReport& r, const ExperimentConfig& cfg);
std::string excitation_csv(const BenchmarkReport& r);
std::string timing_csv(const BenchmarkReport& r);
/// report.csv, report.json, excitation.csv and timing.csv in `dir`.
void write_report(const BenchmarkReport& r, const ExperimentConfig& cfg, const std::filesystem::path& dir);

}  // namespace mvdesc
