#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "kernels.hpp"

namespace mvdesc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double neg_correlation(std::span<const float> a, std::span<const float> b) {
  const auto n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double va = 0.0, vb = 0.0, cov = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    va += da * da;
    vb += db * db;
    cov += da * db;
  }
  if (va == 0.0 || vb == 0.0) return std::equal(a.begin(), a.end(), b.begin()) ? 0.0 : 1.0;
  const double r = cov / std::sqrt(va * vb);
  return std::clamp(1.0 - r, 0.0, 2.0);
}

}  // namespace

namespace detail {

bool cells_normalized(std::span<const float> v, int bins) {
  for (std::size_t c = 0; c + static_cast<std::size_t>(bins) <= v.size(); c += static_cast<std::size_t>(bins)) {
    double s = 0.0;
    for (int k = 0; k < bins; ++k) s += v[c + static_cast<std::size_t>(k)];
    if (std::abs(s - 1.0) > 1e-4) return false;
  }
  return true;
}

double bounded_distance(std::span<const float> a, std::span<const float> b, int cells, int bins, Metric m,
                        double bound) {
  if (m == Metric::neg_correlation) return neg_correlation(a, b);
  const double eps = kDivergenceSmoothing;
  double acc = 0.0;
  for (int c = 0; c < cells; ++c) {
    const std::size_t o = static_cast<std::size_t>(c) * static_cast<std::size_t>(bins);
    const float* pa = a.data() + o;
    const float* pb = b.data() + o;
    double cell = 0.0;
    switch (m) {
      case Metric::l1:
        for (int k = 0; k < bins; ++k) cell += std::abs(static_cast<double>(pa[k]) - pb[k]);
        break;
      case Metric::l2:
        for (int k = 0; k < bins; ++k) {
          const double d = static_cast<double>(pa[k]) - pb[k];
          cell += d * d;
        }
        break;
      case Metric::chi2:
        for (int k = 0; k < bins; ++k) {
          const double s = static_cast<double>(pa[k]) + pb[k];
          if (s > 0.0) {
            const double d = static_cast<double>(pa[k]) - pb[k];
            cell += 0.5 * d * d / s;
          }
        }
        break;
      case Metric::bhattacharyya: {
        double sa = 0.0, sb = 0.0, bc = 0.0;
        for (int k = 0; k < bins; ++k) {
          sa += pa[k];
          sb += pb[k];
          bc += std::sqrt(static_cast<double>(pa[k]) * pb[k]);
        }
        const double mass = std::sqrt(sa * sb);
        cell = mass > 0.0 ? std::max(0.0, -std::log(std::max(bc / mass, 1e-300))) : 0.0;
        break;
      }
      case Metric::kl: {
        double sa = 0.0, sb = 0.0;
        for (int k = 0; k < bins; ++k) {
          sa += pa[k] + eps;
          sb += pb[k] + eps;
        }
        for (int k = 0; k < bins; ++k) {
          const double p = (pa[k] + eps) / sa, q = (pb[k] + eps) / sb;
          cell += p * std::log(p / q);
        }
        cell = std::max(cell, 0.0);
        break;
      }
      case Metric::likelihood: {
        double sb = 0.0;
        for (int k = 0; k < bins; ++k) sb += pb[k] + eps;
        for (int k = 0; k < bins; ++k) cell -= static_cast<double>(pa[k]) * std::log((pb[k] + eps) / sb);
        cell = std::max(cell, 0.0);
        break;
      }
      case Metric::neg_correlation:
        break;
    }
    acc += cell;
    const double value = m == Metric::l2 ? std::sqrt(acc) : acc;
    if (value > bound) return kInf;
  }
  return m == Metric::l2 ? std::sqrt(acc) : acc;
}

}  // namespace detail

std::string to_string(Metric m) {
  switch (m) {
    case Metric::l1: return "l1";
    case Metric::l2: return "l2";
    case Metric::neg_correlation: return "neg_correlation";
    case Metric::chi2: return "chi2";
    case Metric::bhattacharyya: return "bhattacharyya";
    case Metric::kl: return "kl";
    case Metric::likelihood: return "likelihood";
  }
  return "unknown";
}

Metric parse_metric(const std::string& name) {
  for (auto m : {Metric::l1, Metric::l2, Metric::neg_correlation, Metric::chi2, Metric::bhattacharyya, Metric::kl,
                 Metric::likelihood}) {
    if (to_string(m) == name) return m;
  }
  throw std::invalid_argument("unknown metric '" + name + "'");
}

bool requires_normalized(Metric m) {
  return m == Metric::bhattacharyya || m == Metric::kl || m == Metric::likelihood;
}

double distance(const DescriptorVector& a, const DescriptorVector& b, Metric m) {
  if (a.size() != b.size() || a.cells != b.cells || a.bins != b.bins || a.bins <= 0 ||
      a.size() != static_cast<std::size_t>(a.cells) * a.cells * a.bins) {
    throw std::invalid_argument("distance: descriptor layouts differ");
  }
  if (requires_normalized(m) &&
      (!detail::cells_normalized(a.values, a.bins) || !detail::cells_normalized(b.values, b.bins))) {
    throw std::invalid_argument("distance: " + to_string(m) + " requires normalized descriptors");
  }
  return detail::bounded_distance(a.values, b.values, a.cells * a.cells, a.bins, m, kInf);
}

}  // namespace mvdesc
