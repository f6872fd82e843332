#pragma once

// Per-metric accumulation shared by distance() and nn_query().

#include <span>

#include "mvdesc/matchdb.hpp"

namespace mvdesc::detail {

/// Distance between two flattened descriptors of `cells` x `bins`. For
/// metrics whose partial sums never decrease, returns +inf as soon as the
/// partial value exceeds `bound`.
double bounded_distance(std::span<const float> a, std::span<const float> b, int cells, int bins, Metric m,
                        double bound);

bool cells_normalized(std::span<const float> v, int bins);

}  // namespace mvdesc::detail
