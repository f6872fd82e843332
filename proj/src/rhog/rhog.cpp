#include <limits>
#include <stdexcept>

#include "../common/binary_io.hpp"
#include "mvdesc/rhog.hpp"

namespace mvdesc {

DescriptorVector compute_rhog(std::span<const SynthesizedPatch> patches, const DescriptorParams& params) {
  OrientationDensity sum(params.cells, params.bins);
  int accepted = 0;
  for (const auto& p : patches) {
    if (!p.accepted) continue;
    sum += patch_density(p.image, params);
    ++accepted;
  }
  if (accepted == 0) throw std::invalid_argument("compute_rhog: no accepted view");
  sum *= 1.0 / accepted;
  return sample_descriptor(normalize_dog(sum), MethodTag::reconstruction);
}

std::pair<double, std::size_t> maxout_match(const DescriptorVector& test,
                                            std::span<const DescriptorVector> stored_views) {
  if (stored_views.empty()) throw std::invalid_argument("maxout_match: empty store");
  double best = std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t k = 0; k < stored_views.size(); ++k) {
    const auto& v = stored_views[k].values;
    if (v.size() != test.values.size()) throw std::invalid_argument("maxout_match: length mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < v.size() && d < best; ++i) {
      const double e = static_cast<double>(test.values[i]) - static_cast<double>(v[i]);
      d += e * e;
    }
    if (d < best) {
      best = d;
      arg = k;
    }
  }
  return {best, arg};
}

std::vector<std::uint8_t> encode_view_store(std::span<const StoredView> views, const DescriptorParams& params) {
  detail::ByteWriter w;
  w.put_magic("MVSV");
  w.put<std::uint16_t>(kViewStoreVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(views.size()));
  for (const auto& v : views) {
    w.put<std::uint32_t>(v.track_id);
    w.put<std::uint32_t>(v.view_index);
    for (int k = 0; k < 3; ++k) w.put<double>(v.axis_angle[k]);
    w.append(encode_descriptor(v.descriptor, params));
  }
  return std::move(w.bytes());
}

std::vector<StoredView> decode_view_store(std::span<const std::uint8_t> bytes, DescriptorParams* params_out) {
  detail::ByteReader r(bytes);
  r.expect_magic("MVSV");
  const auto version = r.get<std::uint16_t>();
  if (version != kViewStoreVersion) throw std::runtime_error("view store: unsupported version");
  const auto count = r.get<std::uint32_t>();
  std::vector<StoredView> out;
  out.reserve(count);
  for (std::uint32_t k = 0; k < count; ++k) {
    StoredView v;
    v.track_id = r.get<std::uint32_t>();
    v.view_index = r.get<std::uint32_t>();
    for (int a = 0; a < 3; ++a) v.axis_angle[a] = r.get<double>();
    std::size_t offset = r.offset();
    v.descriptor = decode_descriptor(bytes, offset, params_out);
    r = detail::ByteReader(bytes, offset);
    out.push_back(std::move(v));
  }
  if (!r.at_end()) throw std::runtime_error("view store: trailing bytes");
  return out;
}

}  // namespace mvdesc
