#include <json.hpp>

#include "../common/binary_io.hpp"
#include "mvdesc/hogcore.hpp"

namespace mvdesc {

std::vector<std::uint8_t> encode_descriptor(const DescriptorVector& v, const DescriptorParams& params) {
  detail::ByteWriter w;
  w.put_magic("MVDR");
  w.put<std::uint16_t>(kDescriptorRecordVersion);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(v.method));
  w.put<std::uint8_t>(static_cast<std::uint8_t>(params.kernel));
  w.put<std::uint16_t>(static_cast<std::uint16_t>(params.patch_size));
  w.put<std::uint16_t>(static_cast<std::uint16_t>(params.bins));
  w.put<std::uint16_t>(static_cast<std::uint16_t>(params.cells));
  w.put<double>(params.eps);
  w.put<double>(params.sigma);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(v.values.size()));
  for (float x : v.values) w.put<float>(x);
  return std::move(w.bytes());
}

DescriptorVector decode_descriptor(std::span<const std::uint8_t> bytes, std::size_t& offset,
                                   DescriptorParams* params_out) {
  detail::ByteReader r(bytes, offset);
  r.expect_magic("MVDR");
  const auto version = r.get<std::uint16_t>();
  if (version != kDescriptorRecordVersion) {
    throw std::runtime_error("decode_descriptor: unsupported version " + std::to_string(version));
  }
  DescriptorVector v;
  const auto method = r.get<std::uint8_t>();
  if (method > 2) throw std::runtime_error("decode_descriptor: unknown method tag");
  v.method = static_cast<MethodTag>(method);
  DescriptorParams p;
  const auto kernel = r.get<std::uint8_t>();
  if (kernel > 1) throw std::runtime_error("decode_descriptor: unknown kernel");
  p.kernel = static_cast<AngularKernel>(kernel);
  p.patch_size = r.get<std::uint16_t>();
  p.bins = r.get<std::uint16_t>();
  p.cells = r.get<std::uint16_t>();
  p.eps = r.get<double>();
  p.sigma = r.get<double>();
  const auto n = r.get<std::uint32_t>();
  if (n != p.vector_length()) {
    throw std::runtime_error("decode_descriptor: length does not match cells * cells * bins");
  }
  v.cells = p.cells;
  v.bins = p.bins;
  v.values.resize(n);
  for (auto& x : v.values) x = r.get<float>();
  offset = r.offset();
  if (params_out) *params_out = p;
  return v;
}

std::string descriptor_to_json(const DescriptorVector& v, const DescriptorParams& params) {
  nlohmann::json j;
  j["version"] = kDescriptorRecordVersion;
  j["method"] = to_string(v.method);
  j["params"] = {{"patch_size", params.patch_size}, {"bins", params.bins},
                 {"cells", params.cells},           {"eps", params.eps},
                 {"sigma", params.sigma},
                 {"kernel", params.kernel == AngularKernel::triangular ? "triangular"
                                                                       : "wrapped_gaussian"}};
  j["values"] = v.values;
  return j.dump(2);
}

}  // namespace mvdesc
