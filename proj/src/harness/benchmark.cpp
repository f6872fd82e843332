#include <algorithm>
#include <chrono>
#include <random>
#include <stdexcept>

#include "../common/seeds.hpp"
#include "mvdesc/harness.hpp"

namespace mvdesc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Per-track data for one patch size.
struct TrackFrames {
  const Track* track = nullptr;
  std::vector<GrayImage> patches;
  std::vector<OrientationDensity> densities;  // unnormalized
};

struct RhogBuild {
  std::vector<DescriptorVector> marginal;              // per track
  std::vector<std::vector<DescriptorVector>> views;    // per track, when max-out runs
  std::vector<bool> ok;
  int accepted_views = 0;
};

bool wants(const ExperimentConfig& cfg, Strategy s) {
  return std::find(cfg.methods.begin(), cfg.methods.end(), s) != cfg.methods.end();
}

DescriptorVector dog(const OrientationDensity& h) { return sample_descriptor(normalize_dog(h), MethodTag::single_view); }

RhogBuild build_rhog(const ExperimentConfig& cfg, const SceneData& data, std::span<const ImagePyramid> pyramids,
                     std::span<const TrackFrames> tracks, const DescriptorParams& params, const ViewpointSet& views,
                     bool keep_views) {
  RhogBuild out;
  out.marginal.resize(tracks.size());
  out.views.resize(tracks.size());
  out.ok.assign(tracks.size(), false);
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    const Track& t = *tracks[i].track;
    OrientationDensity sum(params.cells, params.bins);
    int accepted = 0;
    for (std::size_t f : keyframe_indices(t.length(), cfg.keyframes)) {
      LocalSurface surface;
      try {
        surface = local_surface_from_depth(data.train[f].depth, data.train[f].camera, t.level,
                                           t.level_position(f), params.patch_size);
      } catch (const std::invalid_argument&) {
        continue;
      }
      const GrayImage& source = pyramids[f].level(t.level);
      for (const Mat3& R : views.rotations) {
        SynthesizedPatch sp;
        try {
          sp = synthesize_patch(source, surface, R, cfg.visibility_threshold);
        } catch (const std::runtime_error&) {
          continue;  // lattice left the image
        }
        if (!sp.accepted) continue;
        const OrientationDensity h = patch_density(normalize_patch_contrast(sp.image), params);
        sum += h;
        ++accepted;
        if (keep_views) out.views[i].push_back(dog(h));
      }
    }
    if (accepted == 0) continue;
    sum *= 1.0 / accepted;
    out.marginal[i] = sample_descriptor(normalize_dog(sum), MethodTag::reconstruction);
    out.ok[i] = true;
    out.accepted_views += accepted;
  }
  return out;
}

DescriptorVector mv_descriptor(const TrackFrames& tf, const DescriptorParams& params, std::size_t begin,
                               std::size_t end) {
  MvAccumulator acc(params);
  for (std::size_t f = begin; f < end; ++f) acc.update(tf.patches[f], tf.densities[f]);
  return acc.finalize();
}

std::uint64_t svhog_seed(std::uint64_t master, int scene, int patch, int trial) {
  return detail::derive_seed(master, {7, static_cast<std::uint64_t>(scene), static_cast<std::uint64_t>(patch),
                                      static_cast<std::uint64_t>(trial)});
}

DescriptorDatabase assemble(Strategy st, std::span<const TrackFrames> frames, const RhogBuild& rh,
                            const DescriptorParams& params, Metric metric, std::mt19937_64* rng,
                            std::vector<int>* picks) {
  DescriptorDatabase db(st, params, metric);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto id = static_cast<std::uint32_t>(frames[i].track->id);
    const auto& dens = frames[i].densities;
    switch (st) {
      case Strategy::svhog: {
        std::uniform_int_distribution<std::size_t> pick(0, dens.size() - 1);
        const std::size_t f = pick(*rng);
        if (picks) picks->push_back(static_cast<int>(f));
        db.add(id, dog(dens[f]));
        break;
      }
      case Strategy::mvhog:
        db.add(id, mv_descriptor(frames[i], params, 0, dens.size()));
        break;
      case Strategy::keepall:
        for (std::size_t f = 0; f < dens.size(); ++f) db.add(id, dog(dens[f]), static_cast<std::uint32_t>(f));
        break;
      case Strategy::rhog:
        db.add(id, rh.marginal[i]);
        break;
      case Strategy::rhog_maxout:
        for (std::size_t v = 0; v < rh.views[i].size(); ++v) {
          db.add(id, rh.views[i][v], static_cast<std::uint32_t>(v));
        }
        break;
    }
  }
  if (is_grouped(st)) db.build_index();
  return db;
}

std::vector<TrackFrames> track_frames(std::span<const Track> tracks, std::span<const ImagePyramid> pyramids,
                                      const DescriptorParams& params) {
  std::vector<TrackFrames> all;
  for (const auto& t : tracks) {
    TrackFrames tf;
    tf.track = &t;
    tf.patches = extract_track_patches(t, pyramids, params.patch_size);
    for (const auto& p : tf.patches) tf.densities.push_back(patch_density(p, params));
    all.push_back(std::move(tf));
  }
  return all;
}

// Keeps the tracks with at least one accepted synthesized view.
void keep_reconstructed(std::vector<TrackFrames>& all, RhogBuild& full, std::vector<TrackFrames>& frames,
                        RhogBuild& rh) {
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (!full.ok[i]) continue;
    frames.push_back(std::move(all[i]));
    rh.marginal.push_back(std::move(full.marginal[i]));
    rh.views.push_back(std::move(full.views[i]));
    rh.ok.push_back(true);
  }
  rh.accepted_views = full.accepted_views;
}

void complexity_study(const ExperimentConfig& cfg, std::span<const TrackFrames> tracks,
                      const DescriptorParams& params, BenchmarkReport& report) {
  const std::size_t max_t = tracks.empty() ? 0 : tracks.front().patches.size();
  for (std::size_t T = 1; T <= max_t; ++T) {
    DescriptorDatabase mv(Strategy::mvhog, params), keep(Strategy::keepall, params);
    for (const auto& tf : tracks) {
      const auto id = static_cast<std::uint32_t>(tf.track->id);
      mv.add(id, mv_descriptor(tf, params, 0, T));
      for (std::size_t f = 0; f < T; ++f) keep.add(id, dog(tf.densities[f]), static_cast<std::uint32_t>(f));
    }
    report.memory.push_back({static_cast<int>(T), mv.memory_bytes(), keep.memory_bytes()});
  }
  if (tracks.empty()) return;

  // Per-update cost of the accumulator at increasing sizes. Sizes beyond the
  // track length cycle through its patches.
  const auto& patches = tracks.front().patches;
  const std::vector<int> sizes{1, 10, 30, 100, 300};
  constexpr int kBatch = 20;
  std::vector<MvAccumulator> filled;
  for (int T : sizes) {
    MvAccumulator acc(params);
    for (int k = 0; k < T; ++k) acc.update(patches[static_cast<std::size_t>(k) % patches.size()]);
    filled.push_back(std::move(acc));
  }
  std::vector<std::vector<double>> samples(sizes.size());
  for (int rep = 0; rep < cfg.timing_reps; ++rep) {
    for (std::size_t s = 0; s < sizes.size(); ++s) {
      MvAccumulator acc = filled[s];
      const auto t0 = Clock::now();
      for (int k = 0; k < kBatch; ++k) acc.update(patches[static_cast<std::size_t>(k) % patches.size()]);
      samples[s].push_back(seconds_since(t0) / kBatch);
    }
  }
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    auto& v = samples[s];
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
    report.update_timing.push_back({sizes[s], v[v.size() / 2]});
  }
}

struct StageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class F>
auto stage(int scene, const char* name, BenchmarkReport& report, F&& fn) {
  const auto t0 = Clock::now();
  try {
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      report.stages.push_back({scene, name, seconds_since(t0)});
    } else {
      auto r = fn();
      report.stages.push_back({scene, name, seconds_since(t0)});
      return r;
    }
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("scene " + std::to_string(scene) + ", stage " + name + ": " + e.what());
  }
}

}  // namespace

BenchmarkReport run_benchmark(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto t_start = Clock::now();
  BenchmarkReport report;
  std::vector<Metric> metrics{cfg.metric};
  for (Metric m : cfg.extra_metrics) {
    if (std::find(metrics.begin(), metrics.end(), m) == metrics.end()) metrics.push_back(m);
  }
  const bool need_rhog = wants(cfg, Strategy::rhog) || wants(cfg, Strategy::rhog_maxout);
  const ViewpointSet views = sample_hemisphere(cfg.hemisphere);

  for (int s = 0; s < cfg.scenes; ++s) {
    const DatasetSpec spec = scene_spec(cfg, s);
    SceneSummary summary;
    summary.scene = s;
    summary.surface = spec.scene.kind == SurfaceKind::plane ? "plane" : "height_field";

    const SceneData data = stage(s, "generate", report, [&] { return synthesize_scene(spec); });

    std::vector<ImagePyramid> pyramids;
    std::vector<Track> tracks = stage(s, "track", report, [&] {
      std::vector<GrayImage> frames;
      for (const auto& f : data.train) frames.push_back(f.image);
      auto all = run_tracker(frames, cfg.tracker);
      summary.detected = static_cast<int>(all.size());
      int levels = 1;
      for (const auto& t : all) levels = std::max(levels, t.level + 1);
      for (const auto& f : frames) pyramids.push_back(build_pyramid(f, levels));
      std::vector<Track> kept;
      for (auto& t : all) {
        if (static_cast<int>(t.length()) >= cfg.min_track_length) kept.push_back(std::move(t));
      }
      return kept;
    });

    for (int P : cfg.patch_sizes) {
      DescriptorParams params = DescriptorParams::defaults(P, cfg.bins, cfg.cells);
      params.kernel = cfg.kernel;
      const std::string tag = "P" + std::to_string(P);

      std::vector<TrackFrames> frames;
      RhogBuild rh;
      stage(s, ("describe " + tag).c_str(), report, [&] {
        std::vector<TrackFrames> all = track_frames(tracks, pyramids, params);
        if (need_rhog) {
          RhogBuild full = build_rhog(cfg, data, pyramids, all, params, views, wants(cfg, Strategy::rhog_maxout));
          // Tracks without any accepted synthesized view are dropped for every
          // method so all methods answer the same queries.
          keep_reconstructed(all, full, frames, rh);
        } else {
          frames = std::move(all);
        }
      });
      summary.tracks = static_cast<int>(frames.size());
      summary.rhog_views[P] = rh.accepted_views;

      std::vector<Track> used;
      for (const auto& tf : frames) used.push_back(*tf.track);
      const std::vector<Query> queries =
          stage(s, ("queries " + tag).c_str(), report, [&] { return build_test_queries(data, used, params); });
      summary.queries[P] = static_cast<int>(queries.size());
      if (queries.empty() || frames.empty()) {
        throw StageError("scene " + std::to_string(s) + ", stage queries " + tag + ": no test queries");
      }

      stage(s, ("match " + tag).c_str(), report, [&] {
        auto emit = [&](Strategy st, const DescriptorDatabase& db) {
          for (Metric m : metrics) {
            if (st == Strategy::rhog_maxout && m != cfg.metric && !cfg.extra_metrics_maxout) continue;
            report.rates.push_back({s, to_string(st), P, to_string(m), recognition_rate(queries, db, m),
                                    static_cast<int>(queries.size())});
          }
        };
        for (Strategy st : cfg.methods) {
          if (st == Strategy::svhog) {
            std::vector<double> sums(metrics.size(), 0.0);
            auto& chosen = summary.svhog_frames[P];
            for (int r = 0; r < cfg.svhog_trials; ++r) {
              std::mt19937_64 rng(svhog_seed(cfg.seed, s, P, r));
              std::vector<int> picks;
              const auto db = assemble(st, frames, rh, params, cfg.metric, &rng, &picks);
              chosen.push_back(std::move(picks));
              for (std::size_t m = 0; m < metrics.size(); ++m) sums[m] += recognition_rate(queries, db, metrics[m]);
            }
            for (std::size_t m = 0; m < metrics.size(); ++m) {
              report.rates.push_back({s, to_string(st), P, to_string(metrics[m]), sums[m] / cfg.svhog_trials,
                                      static_cast<int>(queries.size())});
            }
            continue;
          }
          emit(st, assemble(st, frames, rh, params, cfg.metric, nullptr, nullptr));
        }
      });

      if (cfg.run_excitation) {
        stage(s, ("excitation " + tag).c_str(), report, [&] {
          std::vector<double> full(frames.size());
          for (std::size_t i = 0; i < frames.size(); ++i) full[i] = raw_excitation(frames[i].patches);
          for (int k : cfg.excitation_windows) {
            double exc = 0.0, acc = 0.0;
            int samples = 0;
            for (int r = 0; r < cfg.excitation_trials; ++r) {
              std::mt19937_64 rng(detail::derive_seed(
                  cfg.seed, {11, static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(P),
                             static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(r)}));
              DescriptorDatabase db(Strategy::mvhog, params, cfg.metric);
              for (std::size_t i = 0; i < frames.size(); ++i) {
                const std::size_t len = frames[i].patches.size();
                const std::size_t w = std::min(static_cast<std::size_t>(k), len);
                std::uniform_int_distribution<std::size_t> start(0, len - w);
                const std::size_t b = start(rng);
                db.add(static_cast<std::uint32_t>(frames[i].track->id), mv_descriptor(frames[i], params, b, b + w));
                exc += excitation_score(std::span(frames[i].patches).subspan(b, w), full[i]);
                ++samples;
              }
              acc += recognition_rate(queries, db, cfg.metric);
            }
            report.excitation.push_back({s, P, k, exc / samples, acc / cfg.excitation_trials});
          }
        });
      }

      if (cfg.run_complexity && s == 0 && P == cfg.patch_sizes.front()) {
        stage(s, ("complexity " + tag).c_str(), report, [&] { complexity_study(cfg, frames, params, report); });
      }
    }
    report.scenes.push_back(std::move(summary));
  }
  report.total_seconds = seconds_since(t_start);
  return report;
}

DescriptorDatabase build_database(Strategy method, const SceneData& data, std::span<const Track> tracks,
                                  const DescriptorParams& params, const ExperimentConfig& cfg, std::uint64_t seed) {
  int levels = 1;
  for (const auto& t : tracks) levels = std::max(levels, t.level + 1);
  std::vector<ImagePyramid> pyramids;
  for (const auto& f : data.train) pyramids.push_back(build_pyramid(f.image, levels));
  std::vector<TrackFrames> all = track_frames(tracks, pyramids, params);
  std::vector<TrackFrames> frames;
  RhogBuild rh;
  if (method == Strategy::rhog || method == Strategy::rhog_maxout) {
    RhogBuild full = build_rhog(cfg, data, pyramids, all, params, sample_hemisphere(cfg.hemisphere),
                                method == Strategy::rhog_maxout);
    keep_reconstructed(all, full, frames, rh);
  } else {
    frames = std::move(all);
  }
  std::mt19937_64 rng(seed);
  return assemble(method, frames, rh, params, cfg.metric, &rng, nullptr);
}

double BenchmarkReport::mean_rate(const std::string& method, int patch_size, const std::string& metric) const {
  double sum = 0.0;
  int n = 0;
  for (const auto& r : rates) {
    if (r.method == method && r.patch_size == patch_size && r.metric == metric) {
      sum += r.rate;
      ++n;
    }
  }
  if (n == 0) throw std::invalid_argument("mean_rate: no rows for " + method);
  return sum / n;
}

std::vector<std::array<double, 3>> BenchmarkReport::excitation_curve() const {
  std::map<int, std::array<double, 3>> acc;  // window -> (sum exc, sum accuracy, count)
  for (const auto& p : excitation) {
    auto& a = acc[p.window];
    a[0] += p.excitation;
    a[1] += p.accuracy;
    a[2] += 1.0;
  }
  std::vector<std::array<double, 3>> out;
  for (const auto& [k, a] : acc) out.push_back({static_cast<double>(k), a[0] / a[2], a[1] / a[2]});
  return out;
}

double BenchmarkReport::excitation_spearman() const {
  std::vector<double> x, y;
  for (const auto& p : excitation_curve()) {
    x.push_back(p[1]);
    y.push_back(p[2]);
  }
  return spearman(x, y);
}

}  // namespace mvdesc
