#include <stdexcept>

#include "mvdesc/mvhog.hpp"

namespace mvdesc {

MvAccumulator::MvAccumulator(const DescriptorParams& params)
    : params_(params),
      sum_(params.cells, params.bins),
      mean_patch_(static_cast<std::size_t>(params.patch_size) * params.patch_size, 0.0) {
  params_.validate();
}

void MvAccumulator::update(const GrayImage& patch) {
  if (patch.width() != params_.patch_size || patch.height() != params_.patch_size) {
    throw std::invalid_argument("mv_update: patch dimensions do not match patch_size");
  }
  update(patch, patch_density(patch, params_));
}

void MvAccumulator::update(const GrayImage& patch, const OrientationDensity& density) {
  if (patch.width() != params_.patch_size || patch.height() != params_.patch_size) {
    throw std::invalid_argument("mv_update: patch dimensions do not match patch_size");
  }
  sum_ += density;
  ++count_;
  // Welford update, per pixel, accumulated into a scalar M2.
  const auto data = patch.data();
  const double inv_t = 1.0 / count_;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double delta = data[i] - mean_patch_[i];
    mean_patch_[i] += delta * inv_t;
    sq_accum_ += delta * (data[i] - mean_patch_[i]);
  }
}

void MvAccumulator::merge(const MvAccumulator& other) {
  if (!(other.params_ == params_)) {
    throw std::invalid_argument("MvAccumulator::merge: parameter mismatch");
  }
  if (other.count_ == 0) return;
  sum_ += other.sum_;
  const double na = count_;
  const double nb = other.count_;
  const double n = na + nb;
  for (std::size_t i = 0; i < mean_patch_.size(); ++i) {
    const double delta = other.mean_patch_[i] - mean_patch_[i];
    sq_accum_ += delta * delta * na * nb / n;
    mean_patch_[i] += delta * nb / n;
  }
  sq_accum_ += other.sq_accum_;
  count_ += other.count_;
}

DescriptorVector MvAccumulator::finalize() const {
  if (count_ == 0) throw std::logic_error("mv_finalize: no frames accumulated");
  OrientationDensity mean = sum_;
  mean *= 1.0 / count_;
  return sample_descriptor(normalize_dog(mean), MethodTag::multi_view);
}

double MvAccumulator::raw_excitation() const {
  return count_ == 0 ? 0.0 : sq_accum_ / count_;
}

std::size_t MvAccumulator::memory_bytes() const {
  return sizeof(*this) + sum_.values.capacity() * sizeof(double) +
         sum_.zero_mass.capacity() + mean_patch_.capacity() * sizeof(double);
}

}  // namespace mvdesc
