// mvdesc: dataset generation, tracking, descriptor databases, matching and
// the full benchmark from the command line.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "mvdesc/harness.hpp"

using namespace mvdesc;

namespace {

ExperimentConfig config_or_default(const std::string& path) {
  return path.empty() ? ExperimentConfig{} : load_config(path);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void print_means(const BenchmarkReport& r, const ExperimentConfig& cfg) {
  std::vector<std::string> metrics{to_string(cfg.metric)};
  for (auto m : cfg.extra_metrics) metrics.push_back(to_string(m));
  for (int P : cfg.patch_sizes) {
    for (const auto& m : metrics) {
      std::printf("patch %2d  %-16s", P, m.c_str());
      for (auto st : cfg.methods) {
        if (st == Strategy::rhog_maxout && m != to_string(cfg.metric) && !cfg.extra_metrics_maxout) continue;
        std::printf("  %s=%.3f", to_string(st).c_str(), r.mean_rate(to_string(st), P, m));
      }
      std::printf("\n");
    }
  }
  if (!r.excitation.empty()) std::printf("excitation spearman = %.3f\n", r.excitation_spearman());
  std::printf("total %.1f s\n", r.total_seconds);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-view gradient-orientation descriptors: synthetic benchmark tools"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out;

  auto* gen = app.add_subcommand("generate", "Render one synthetic scene to a dataset directory");
  int scene = 0;
  std::uint64_t seed_override = 0;
  gen->add_option("--config", config_path, "Experiment config (JSON)");
  gen->add_option("--scene", scene, "Scene index within the config")->check(CLI::NonNegativeNumber);
  gen->add_option("--seed", seed_override, "Override the master seed");
  gen->add_option("--out", out, "Output directory")->required();

  auto* trk = app.add_subcommand("track", "Detect and track keypoints over a dataset's training frames");
  std::string dataset_dir;
  int patch_size = 0;
  trk->add_option("--dataset", dataset_dir, "Dataset directory")->required();
  trk->add_option("--config", config_path, "Experiment config (JSON)");
  trk->add_option("--patch-size", patch_size, "Patch size stored in the dump (default: tracker setting)");
  trk->add_option("--out", out, "Track dump directory")->required();

  auto* desc = app.add_subcommand("describe", "Build a descriptor database from a track dump");
  std::string tracks_dir, method = "MVHOG";
  std::uint64_t desc_seed = 1;
  desc->add_option("--dataset", dataset_dir, "Dataset directory")->required();
  desc->add_option("--tracks", tracks_dir, "Track dump directory")->required();
  desc->add_option("--method", method, "SVHOG | MVHOG | KeepAll | RHOG | RHOG-MAX");
  desc->add_option("--patch-size", patch_size, "Patch size (default: the dump's)");
  desc->add_option("--config", config_path, "Experiment config (JSON)");
  desc->add_option("--seed", desc_seed, "Seed for the SVHOG frame draw");
  desc->add_option("--out", out, "Database file")->required();

  auto* match = app.add_subcommand("match", "Score test-view queries against a database");
  std::string db_path, metric_name;
  match->add_option("--db", db_path, "Database file")->required();
  match->add_option("--dataset", dataset_dir, "Dataset directory")->required();
  match->add_option("--tracks", tracks_dir, "Track dump directory")->required();
  match->add_option("--metric", metric_name, "Metric (default: the database's)");
  match->add_option("--out", out, "Optional per-query CSV");

  auto* bench = app.add_subcommand("bench", "Run the full benchmark and write the reports");
  bool print_config = false;
  int scenes = 0;
  bench->add_option("--config", config_path, "Experiment config (JSON)");
  bench->add_option("--scenes", scenes, "Override the number of scenes");
  bench->add_option("--out", out, "Report directory");
  bench->add_flag("--print-config", print_config, "Print the effective config and exit");

  auto* rep = app.add_subcommand("report", "Summarize a report.json");
  std::string in_dir;
  rep->add_option("--in", in_dir, "Report directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      ExperimentConfig cfg = config_or_default(config_path);
      if (seed_override != 0) cfg.seed = seed_override;
      const auto m = generate_dataset(scene_spec(cfg, scene), out);
      std::printf("wrote %zu training and %zu test frames to %s\n", m.train.size(), m.test.size(), out.c_str());
    } else if (trk->parsed()) {
      ExperimentConfig cfg = config_or_default(config_path);
      TrackerParams tp = cfg.tracker;
      if (patch_size > 0) tp.patch_size = patch_size;
      const SceneData data = load_dataset(dataset_dir);
      std::vector<GrayImage> frames;
      for (const auto& f : data.train) frames.push_back(f.image);
      const auto tracks = run_tracker(frames, tp);
      write_tracks(tracks, tp.patch_size, out);
      std::size_t full = 0;
      for (const auto& t : tracks) full += t.length() == frames.size();
      std::printf("%zu tracks, %zu span all %zu frames\n", tracks.size(), full, frames.size());
    } else if (desc->parsed()) {
      ExperimentConfig cfg = config_or_default(config_path);
      int dump_patch = 0;
      const auto tracks = read_tracks(tracks_dir, &dump_patch);
      const int P = patch_size > 0 ? patch_size : dump_patch;
      DescriptorParams params = DescriptorParams::defaults(P, cfg.bins, cfg.cells);
      params.kernel = cfg.kernel;
      std::vector<Track> kept;
      for (const auto& t : tracks) {
        if (static_cast<int>(t.length()) >= cfg.min_track_length) kept.push_back(t);
      }
      const SceneData data = load_dataset(dataset_dir);
      const auto db = build_database(parse_strategy(method), data, kept, params, cfg, desc_seed);
      save_database(db, out);
      std::printf("%s database: %zu entries over %zu tracks, %zu bytes of descriptors\n", method.c_str(), db.size(),
                  db.num_tracks(), db.memory_bytes());
    } else if (match->parsed()) {
      const auto db = load_database(db_path);
      const Metric metric = metric_name.empty() ? db.default_metric() : parse_metric(metric_name);
      const auto tracks = read_tracks(tracks_dir);
      std::vector<Track> present;
      for (const auto& t : tracks) {
        if (db.contains_track(static_cast<std::uint32_t>(t.id))) present.push_back(t);
      }
      const SceneData data = load_dataset(dataset_dir);
      const auto queries = build_test_queries(data, present, db.params());
      const double rate = recognition_rate(queries, db, metric);
      std::printf("%s / %s: recognition rate %.4f over %zu queries\n", to_string(db.strategy()).c_str(),
                  to_string(metric).c_str(), rate, queries.size());
      if (!out.empty()) {
        std::ofstream os(out);
        os << "test_frame,true_track,matched_track,distance\n";
        for (const auto& q : queries) {
          const auto r = nn_query(db, q.descriptor, metric);
          os << q.test_frame << ',' << q.track_id << ',' << r.track_id << ',' << r.distance << '\n';
        }
      }
    } else if (bench->parsed()) {
      ExperimentConfig cfg = config_or_default(config_path);
      if (scenes > 0) cfg.scenes = scenes;
      cfg.validate();
      if (print_config) {
        std::cout << config_to_json(cfg);
        return 0;
      }
      if (out.empty()) throw std::invalid_argument("bench: --out is required");
      const auto report = run_benchmark(cfg);
      write_report(report, cfg, out);
      print_means(report, cfg);
    } else if (rep->parsed()) {
      const auto j = nlohmann::json::parse(slurp(std::filesystem::path(in_dir) / "report.json"));
      std::printf("%-10s %-6s %-16s %s\n", "method", "patch", "metric", "mean rate");
      for (const auto& m : j.at("mean_rates")) {
        std::printf("%-10s %-6d %-16s %.4f\n", m.at("method").get<std::string>().c_str(), m.at("patch_size").get<int>(),
                    m.at("metric").get<std::string>().c_str(), m.at("rate").get<double>());
      }
      for (const auto& c : j.at("excitation_curve")) {
        std::printf("window %2d: excitation %.3f accuracy %.3f\n", c.at("window").get<int>(),
                    c.at("excitation").get<double>(), c.at("accuracy").get<double>());
      }
      std::printf("excitation spearman %.3f\n", j.at("excitation_spearman").get<double>());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
