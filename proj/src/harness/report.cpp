#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>
#include <tuple>

#include "mvdesc/harness.hpp"

namespace mvdesc {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// (method, patch, metric) combinations in first-appearance order.
std::vector<std::tuple<std::string, int, std::string>> combos(const BenchmarkReport& r) {
  std::vector<std::tuple<std::string, int, std::string>> out;
  std::set<std::tuple<std::string, int, std::string>> seen;
  for (const auto& row : r.rates) {
    auto key = std::make_tuple(row.method, row.patch_size, row.metric);
    if (seen.insert(key).second) out.push_back(key);
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

std::string report_csv(const BenchmarkReport& r) {
  std::ostringstream os;
  os << "scene,method,patch_size,metric,rate\n";
  for (const auto& row : r.rates) {
    os << row.scene << ',' << row.method << ',' << row.patch_size << ',' << row.metric << ',' << fmt(row.rate)
       << '\n';
  }
  for (const auto& [method, patch, metric] : combos(r)) {
    os << "mean," << method << ',' << patch << ',' << metric << ',' << fmt(r.mean_rate(method, patch, metric))
       << '\n';
  }
  return os.str();
}

std::string report_json(const BenchmarkReport& r, const ExperimentConfig& cfg) {
  using nlohmann::json;
  json j;
  j["schema"] = "mvdesc.report";
  j["schema_version"] = 1;
  j["config"] = json::parse(config_to_json(cfg));
  j["rates"] = json::array();
  for (const auto& row : r.rates) {
    j["rates"].push_back({{"scene", row.scene},
                          {"method", row.method},
                          {"patch_size", row.patch_size},
                          {"metric", row.metric},
                          {"rate", row.rate},
                          {"queries", row.queries}});
  }
  j["mean_rates"] = json::array();
  for (const auto& [method, patch, metric] : combos(r)) {
    j["mean_rates"].push_back(
        {{"method", method}, {"patch_size", patch}, {"metric", metric}, {"rate", r.mean_rate(method, patch, metric)}});
  }
  j["scenes"] = json::array();
  for (const auto& s : r.scenes) {
    json js{{"scene", s.scene}, {"surface", s.surface}, {"detected", s.detected}, {"tracks", s.tracks}};
    for (const auto& [p, n] : s.queries) js["queries"][std::to_string(p)] = n;
    for (const auto& [p, n] : s.rhog_views) js["rhog_views"][std::to_string(p)] = n;
    for (const auto& [p, trials] : s.svhog_frames) js["svhog_frames"][std::to_string(p)] = trials;
    j["scenes"].push_back(std::move(js));
  }
  j["excitation"] = json::array();
  for (const auto& p : r.excitation) {
    j["excitation"].push_back({{"scene", p.scene},
                               {"patch_size", p.patch_size},
                               {"window", p.window},
                               {"excitation", p.excitation},
                               {"accuracy", p.accuracy}});
  }
  j["excitation_curve"] = json::array();
  for (const auto& c : r.excitation_curve()) {
    j["excitation_curve"].push_back({{"window", static_cast<int>(c[0])}, {"excitation", c[1]}, {"accuracy", c[2]}});
  }
  j["excitation_spearman"] = r.excitation.empty() ? 0.0 : r.excitation_spearman();
  j["memory"] = json::array();
  for (const auto& m : r.memory) {
    j["memory"].push_back({{"frames", m.frames}, {"mvhog_bytes", m.mvhog_bytes}, {"keepall_bytes", m.keepall_bytes}});
  }
  return j.dump(2) + "\n";
}

std::string excitation_csv(const BenchmarkReport& r) {
  std::ostringstream os;
  os << "scene,patch_size,window,excitation,accuracy\n";
  for (const auto& p : r.excitation) {
    os << p.scene << ',' << p.patch_size << ',' << p.window << ',' << fmt(p.excitation) << ',' << fmt(p.accuracy)
       << '\n';
  }
  for (const auto& c : r.excitation_curve()) {
    os << "mean,all," << static_cast<int>(c[0]) << ',' << fmt(c[1]) << ',' << fmt(c[2]) << '\n';
  }
  return os.str();
}

std::string timing_csv(const BenchmarkReport& r) {
  std::ostringstream os;
  char buf[64];
  os << "kind,scene,item,seconds\n";
  for (const auto& s : r.stages) {
    std::snprintf(buf, sizeof(buf), "%.6f", s.seconds);
    os << "stage," << s.scene << ',' << s.stage << ',' << buf << '\n';
  }
  for (const auto& u : r.update_timing) {
    std::snprintf(buf, sizeof(buf), "%.9f", u.seconds);
    os << "mv_update,0,T=" << u.frames << ',' << buf << '\n';
  }
  std::snprintf(buf, sizeof(buf), "%.6f", r.total_seconds);
  os << "total,,all," << buf << '\n';
  return os.str();
}

void write_report(const BenchmarkReport& r, const ExperimentConfig& cfg, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "report.csv", report_csv(r));
  write_text(dir / "report.json", report_json(r, cfg));
  write_text(dir / "excitation.csv", excitation_csv(r));
  write_text(dir / "timing.csv", timing_csv(r));
}

}  // namespace mvdesc
