#pragma once

// Descriptor comparison (vector distances, per-cell divergences, likelihood),
// labeled descriptor databases and exact nearest-neighbor search.

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "mvdesc/hogcore.hpp"

namespace mvdesc {

/// Every metric is minimized. `likelihood` is the negated cross-entropy score
/// of the first argument (query histogram) under the second (model); it is not
/// symmetric.
enum class Metric : std::uint8_t { l1, l2, neg_correlation, chi2, bhattacharyya, kl, likelihood };

std::string to_string(Metric m);
/// Accepts the names printed by to_string. Throws std::invalid_argument.
Metric parse_metric(const std::string& name);
bool requires_normalized(Metric m);

/// Additive smoothing applied before renormalizing each cell for kl and
/// likelihood.
inline constexpr double kDivergenceSmoothing = 1e-8;

/// l1: sum |a - b|. l2: Euclidean norm of a - b. neg_correlation: 1 - r, with
/// r = 1 for equal constant vectors and 0 for any other constant input.
/// chi2: 0.5 * sum (a - b)^2 / (a + b). bhattacharyya: sum over cells of
/// -ln BC on mass-normalized cells, BC floored at 1e-300 so disjoint cells
/// stay finite. kl: sum over cells of KL(a || b) on
/// smoothed cells. likelihood: -sum over cells and bins of a * ln(smoothed b).
/// Throws std::invalid_argument on a length or layout mismatch, or when a
/// divergence receives a vector whose cells do not sum to 1 (within 1e-4).
double distance(const DescriptorVector& a, const DescriptorVector& b, Metric m);

enum class Strategy : std::uint8_t { svhog = 0, mvhog = 1, keepall = 2, rhog = 3, rhog_maxout = 4 };

std::string to_string(Strategy s);
Strategy parse_strategy(const std::string& name);
/// KeepAll and max-out stores hold several entries per track.
bool is_grouped(Strategy s);

struct DbEntry {
  std::uint32_t track_id = 0;
  std::uint32_t index = 0;  // frame or synthesized-view index within the group
  DescriptorVector descriptor;
};

class DescriptorDatabase {
 public:
  DescriptorDatabase() = default;
  DescriptorDatabase(Strategy strategy, const DescriptorParams& params, Metric default_metric = Metric::l2);

  /// Throws std::invalid_argument on a length mismatch, or for a repeated
  /// track id in a non-grouped store.
  void add(std::uint32_t track_id, DescriptorVector descriptor, std::uint32_t index = 0);

  Strategy strategy() const { return strategy_; }
  Metric default_metric() const { return default_metric_; }
  const DescriptorParams& params() const { return params_; }
  const std::vector<DbEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t num_tracks() const;
  /// True when every stored descriptor has unit-mass cells.
  bool all_normalized() const { return all_normalized_; }
  bool contains_track(std::uint32_t id) const;
  /// Bytes of descriptor payload held (the storage-complexity proxy).
  std::size_t memory_bytes() const;

  /// Splits runs of consecutive same-track entries into blocks of at most
  /// `block_size` with a centroid and l1/l2 radius, letting nn_query skip
  /// whole blocks by the triangle inequality. Results are unchanged. Adding
  /// entries invalidates the index.
  void build_index(std::size_t block_size = 32);
  bool has_index() const { return !blocks_.empty(); }

  struct Block {
    std::uint32_t track_id = 0;
    std::size_t begin = 0, end = 0;  // entry range
    std::vector<double> centroid;
    double radius_l1 = 0.0;
    double radius_l2 = 0.0;
  };
  const std::vector<Block>& blocks() const { return blocks_; }

 private:
  Strategy strategy_ = Strategy::svhog;
  DescriptorParams params_;
  Metric default_metric_ = Metric::l2;
  std::vector<DbEntry> entries_;
  bool all_normalized_ = true;
  std::vector<Block> blocks_;
};

struct NnResult {
  std::uint32_t track_id = 0;
  double distance = std::numeric_limits<double>::infinity();
  std::size_t entry = 0;  // index of the entry achieving the minimum
};

/// Exact linear scan with early abandoning for metrics whose partial sums
/// never decrease. Grouped stores are represented by their group minimum.
/// Ties go to the lowest track id, then the lowest entry. Throws
/// std::invalid_argument for an empty database.
NnResult nn_query(const DescriptorDatabase& db, const DescriptorVector& q, Metric metric);

/// Database file: "MVDB" | u16 version | u8 strategy | u8 default metric |
/// u32 count, then per entry u32 track id | u32 index | descriptor record.
inline constexpr std::uint16_t kDatabaseVersion = 1;
std::vector<std::uint8_t> encode_database(const DescriptorDatabase& db);
DescriptorDatabase decode_database(std::span<const std::uint8_t> bytes);
void save_database(const DescriptorDatabase& db, const std::filesystem::path& path);
DescriptorDatabase load_database(const std::filesystem::path& path);

/// Cross-entropy log-likelihood of the test patch under `model`:
/// sum over cells and bins of q(b) * ln h(b), where q is the test patch's
/// normalized density and h the smoothed model cell. Throws
/// std::invalid_argument when the model is not normalized.
double likelihood_eval(const GradientField& test_grad, const OrientationDensity& model,
                       const DescriptorParams& params);

}  // namespace mvdesc
