#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "mvdesc/tracker.hpp"

namespace mvdesc {

namespace {

constexpr int kTrackSchemaVersion = 1;

std::string patch_name(int id, std::size_t t) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "patches/track_%05d_%03zu.pgm", id, t);
  return buf;
}

}  // namespace

void write_tracks(const std::vector<Track>& tracks, int patch_size, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "patches");
  nlohmann::json j;
  j["schema"] = "mvdesc.tracks";
  j["schema_version"] = kTrackSchemaVersion;
  j["patch_size"] = patch_size;
  j["tracks"] = nlohmann::json::array();
  for (const auto& t : tracks) {
    nlohmann::json jt{{"id", t.id}, {"level", t.level}, {"alive", t.alive}};
    jt["positions"] = nlohmann::json::array();
    jt["patches"] = nlohmann::json::array();
    for (std::size_t k = 0; k < t.length(); ++k) {
      jt["positions"].push_back({t.positions[k].x(), t.positions[k].y()});
      if (k < t.patches.size()) {
        const auto name = patch_name(t.id, k);
        write_pgm(dir / name, t.patches[k]);
        jt["patches"].push_back(name);
      }
    }
    j["tracks"].push_back(std::move(jt));
  }
  std::ofstream(dir / "tracks.json", std::ios::binary) << j.dump(2) << "\n";
}

std::vector<Track> read_tracks(const std::filesystem::path& dir, int* patch_size_out) {
  std::ifstream in(dir / "tracks.json", std::ios::binary);
  if (!in) throw std::runtime_error("read_tracks: missing tracks.json in " + dir.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const auto j = nlohmann::json::parse(ss.str());
  if (j.at("schema").get<std::string>() != "mvdesc.tracks" ||
      j.at("schema_version").get<int>() != kTrackSchemaVersion) {
    throw std::runtime_error("read_tracks: unsupported track dump");
  }
  if (patch_size_out) *patch_size_out = j.at("patch_size").get<int>();
  std::vector<Track> tracks;
  for (const auto& jt : j.at("tracks")) {
    Track t;
    t.id = jt.at("id").get<int>();
    t.level = jt.at("level").get<int>();
    t.alive = jt.at("alive").get<bool>();
    for (const auto& p : jt.at("positions")) t.positions.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    for (const auto& name : jt.at("patches")) t.patches.push_back(read_pgm(dir / name.get<std::string>()));
    tracks.push_back(std::move(t));
  }
  return tracks;
}

}  // namespace mvdesc
