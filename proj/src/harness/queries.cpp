#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "mvdesc/harness.hpp"

namespace mvdesc {

double recognition_rate(std::span<const Query> queries, const DescriptorDatabase& db, Metric metric) {
  if (queries.empty()) throw std::invalid_argument("recognition_rate: no queries");
  std::unordered_set<std::uint32_t> ids;
  for (const auto& e : db.entries()) ids.insert(e.track_id);
  std::size_t hits = 0;
  for (const auto& q : queries) {
    if (!ids.contains(q.track_id)) {
      throw std::invalid_argument("recognition_rate: track " + std::to_string(q.track_id) + " not in database");
    }
    if (nn_query(db, q.descriptor, metric).track_id == q.track_id) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(queries.size());
}

std::vector<Query> build_test_queries(const SceneData& data, std::span<const Track> tracks,
                                      const DescriptorParams& params) {
  if (data.train.empty()) throw std::invalid_argument("build_test_queries: dataset has no training frames");
  int levels = 1;
  for (const auto& t : tracks) levels = std::max(levels, t.level + 1);
  const int half = params.patch_size / 2;

  std::vector<Query> out;
  for (std::size_t j = 0; j < data.test.size(); ++j) {
    const ImagePyramid pyr = build_pyramid(data.test[j].image, levels);
    for (const auto& t : tracks) {
      Correspondence c;
      try {
        c = ground_truth_correspondence(data.train[0], data.test[j], t.positions.front());
      } catch (const std::invalid_argument&) {
        continue;  // anchor on a pixel without surface
      }
      if (c.status != Covisibility::visible) continue;
      const Vec2 p(base_to_level(c.point.x(), t.level), base_to_level(c.point.y(), t.level));
      const GrayImage& img = pyr.level(t.level);
      if (p.x() - half < 0.0 || p.y() - half < 0.0 || p.x() + half > img.width() - 1.0 ||
          p.y() + half > img.height() - 1.0) {
        continue;
      }
      Query q;
      q.track_id = static_cast<std::uint32_t>(t.id);
      q.test_frame = static_cast<int>(j);
      q.position = c.point;
      q.descriptor = single_view_dog(track_patch(img, p, params.patch_size), params);
      out.push_back(std::move(q));
    }
  }
  return out;
}

std::vector<std::size_t> keyframe_indices(std::size_t length, int count) {
  std::vector<std::size_t> out;
  if (length == 0 || count < 1) return out;
  if (static_cast<std::size_t>(count) >= length || count == 1) {
    if (count == 1) return {0};
    out.resize(length);
    std::iota(out.begin(), out.end(), std::size_t{0});
    return out;
  }
  for (int i = 0; i < count; ++i) {
    out.push_back(static_cast<std::size_t>(std::lround(static_cast<double>(i) * (length - 1) / (count - 1))));
  }
  return out;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> rank(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[idx[k]] = r;
    i = j + 1;
  }
  return rank;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("spearman: length mismatch");
  if (x.size() < 2) return 0.0;
  const auto rx = average_ranks(x), ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace mvdesc
