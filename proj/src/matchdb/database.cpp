#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_set>

#include "../common/binary_io.hpp"
#include "kernels.hpp"

namespace mvdesc {

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::svhog: return "SVHOG";
    case Strategy::mvhog: return "MVHOG";
    case Strategy::keepall: return "KeepAll";
    case Strategy::rhog: return "RHOG";
    case Strategy::rhog_maxout: return "RHOG-MAX";
  }
  return "unknown";
}

Strategy parse_strategy(const std::string& name) {
  for (auto s : {Strategy::svhog, Strategy::mvhog, Strategy::keepall, Strategy::rhog, Strategy::rhog_maxout}) {
    if (to_string(s) == name) return s;
  }
  throw std::invalid_argument("unknown method '" + name + "'");
}

bool is_grouped(Strategy s) { return s == Strategy::keepall || s == Strategy::rhog_maxout; }

DescriptorDatabase::DescriptorDatabase(Strategy strategy, const DescriptorParams& params, Metric default_metric)
    : strategy_(strategy), params_(params), default_metric_(default_metric) {
  params_.validate();
}

void DescriptorDatabase::add(std::uint32_t track_id, DescriptorVector descriptor, std::uint32_t index) {
  if (descriptor.size() != params_.vector_length() || descriptor.cells != params_.cells ||
      descriptor.bins != params_.bins) {
    throw std::invalid_argument("DescriptorDatabase::add: descriptor does not match the database layout");
  }
  if (!is_grouped(strategy_) && contains_track(track_id)) {
    throw std::invalid_argument("DescriptorDatabase::add: track " + std::to_string(track_id) +
                                " already stored");
  }
  blocks_.clear();
  all_normalized_ = all_normalized_ && detail::cells_normalized(descriptor.values, descriptor.bins);
  entries_.push_back({track_id, index, std::move(descriptor)});
}

std::size_t DescriptorDatabase::num_tracks() const {
  std::unordered_set<std::uint32_t> ids;
  for (const auto& e : entries_) ids.insert(e.track_id);
  return ids.size();
}

bool DescriptorDatabase::contains_track(std::uint32_t id) const {
  return std::any_of(entries_.begin(), entries_.end(), [id](const DbEntry& e) { return e.track_id == id; });
}

std::size_t DescriptorDatabase::memory_bytes() const {
  std::size_t bytes = 0;
  for (const auto& e : entries_) bytes += e.descriptor.values.size() * sizeof(float);
  return bytes;
}

namespace {

double centroid_distance(std::span<const float> v, const std::vector<double>& c, Metric m) {
  double acc = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double d = static_cast<double>(v[i]) - c[i];
    acc += m == Metric::l1 ? std::abs(d) : d * d;
  }
  return m == Metric::l1 ? acc : std::sqrt(acc);
}

// Relative slack on the pruning bound so rounding never drops a true
// minimum or a tie.
constexpr double kPruneSlack = 1e-9;

}  // namespace

void DescriptorDatabase::build_index(std::size_t block_size) {
  blocks_.clear();
  if (block_size == 0) throw std::invalid_argument("build_index: block_size must be positive");
  const std::size_t n = params_.vector_length();
  for (std::size_t b = 0; b < entries_.size();) {
    Block blk;
    blk.track_id = entries_[b].track_id;
    blk.begin = b;
    blk.end = b;
    while (blk.end < entries_.size() && entries_[blk.end].track_id == blk.track_id &&
           blk.end - blk.begin < block_size) {
      ++blk.end;
    }
    blk.centroid.assign(n, 0.0);
    for (std::size_t e = blk.begin; e < blk.end; ++e) {
      for (std::size_t i = 0; i < n; ++i) blk.centroid[i] += entries_[e].descriptor.values[i];
    }
    for (double& c : blk.centroid) c /= static_cast<double>(blk.end - blk.begin);
    for (std::size_t e = blk.begin; e < blk.end; ++e) {
      blk.radius_l1 = std::max(blk.radius_l1, centroid_distance(entries_[e].descriptor.values, blk.centroid, Metric::l1));
      blk.radius_l2 = std::max(blk.radius_l2, centroid_distance(entries_[e].descriptor.values, blk.centroid, Metric::l2));
    }
    b = blk.end;
    blocks_.push_back(std::move(blk));
  }
}

NnResult nn_query(const DescriptorDatabase& db, const DescriptorVector& q, Metric metric) {
  if (db.empty()) throw std::invalid_argument("nn_query: empty database");
  const auto& p = db.params();
  if (q.size() != p.vector_length() || q.cells != p.cells || q.bins != p.bins) {
    throw std::invalid_argument("nn_query: query does not match the database layout");
  }
  if (requires_normalized(metric) && (!detail::cells_normalized(q.values, q.bins) || !db.all_normalized())) {
    throw std::invalid_argument("nn_query: " + to_string(metric) + " requires normalized descriptors");
  }
  const int cells = p.cells * p.cells;
  NnResult best;
  bool have = false;
  const auto& entries = db.entries();
  auto visit = [&](std::size_t k) {
    const auto& e = entries[k];
    const double d = detail::bounded_distance(q.values, e.descriptor.values, cells, p.bins, metric,
                                              have ? best.distance : std::numeric_limits<double>::infinity());
    if (!have || d < best.distance ||
        (d == best.distance && (e.track_id < best.track_id || (e.track_id == best.track_id && k < best.entry)))) {
      best = {e.track_id, d, k};
      have = true;
    }
  };
  if (db.has_index() && (metric == Metric::l1 || metric == Metric::l2)) {
    const auto& blocks = db.blocks();
    std::vector<std::pair<double, std::size_t>> order;
    order.reserve(blocks.size());
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const double r = metric == Metric::l1 ? blocks[b].radius_l1 : blocks[b].radius_l2;
      order.emplace_back(centroid_distance(q.values, blocks[b].centroid, metric) - r, b);
    }
    std::sort(order.begin(), order.end());
    for (const auto& [lower, b] : order) {
      if (have && lower > best.distance + kPruneSlack * (1.0 + best.distance)) break;
      for (std::size_t k = blocks[b].begin; k < blocks[b].end; ++k) visit(k);
    }
    return best;
  }
  for (std::size_t k = 0; k < entries.size(); ++k) visit(k);
  return best;
}

std::vector<std::uint8_t> encode_database(const DescriptorDatabase& db) {
  detail::ByteWriter w;
  w.put_magic("MVDB");
  w.put<std::uint16_t>(kDatabaseVersion);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(db.strategy()));
  w.put<std::uint8_t>(static_cast<std::uint8_t>(db.default_metric()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(db.size()));
  for (const auto& e : db.entries()) {
    w.put<std::uint32_t>(e.track_id);
    w.put<std::uint32_t>(e.index);
    w.append(encode_descriptor(e.descriptor, db.params()));
  }
  return std::move(w.bytes());
}

DescriptorDatabase decode_database(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  r.expect_magic("MVDB");
  if (r.get<std::uint16_t>() != kDatabaseVersion) throw std::runtime_error("database: unsupported version");
  const auto strategy = r.get<std::uint8_t>();
  const auto metric = r.get<std::uint8_t>();
  if (strategy > static_cast<std::uint8_t>(Strategy::rhog_maxout) ||
      metric > static_cast<std::uint8_t>(Metric::likelihood)) {
    throw std::runtime_error("database: bad header");
  }
  const auto count = r.get<std::uint32_t>();
  std::vector<DbEntry> entries;
  DescriptorParams params;
  for (std::uint32_t k = 0; k < count; ++k) {
    DbEntry e;
    e.track_id = r.get<std::uint32_t>();
    e.index = r.get<std::uint32_t>();
    std::size_t offset = r.offset();
    e.descriptor = decode_descriptor(bytes, offset, &params);
    r = detail::ByteReader(bytes, offset);
    entries.push_back(std::move(e));
  }
  if (!r.at_end()) throw std::runtime_error("database: trailing bytes");
  DescriptorDatabase db(static_cast<Strategy>(strategy), params, static_cast<Metric>(metric));
  for (auto& e : entries) db.add(e.track_id, std::move(e.descriptor), e.index);
  if (is_grouped(db.strategy())) db.build_index();
  return db;
}

void save_database(const DescriptorDatabase& db, const std::filesystem::path& path) {
  detail::write_file_bytes(path, encode_database(db));
}

DescriptorDatabase load_database(const std::filesystem::path& path) {
  return decode_database(detail::read_file_bytes(path));
}

}  // namespace mvdesc
