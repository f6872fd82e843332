#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "mvdesc/hogcore.hpp"

namespace mvdesc {

DescriptorParams DescriptorParams::defaults(int patch_size, int bins, int cells) {
  DescriptorParams p;
  p.patch_size = patch_size;
  p.bins = bins;
  p.cells = cells;
  p.sigma = patch_size / 8.0;
  p.eps = kTwoPi / bins;
  return p;
}

void DescriptorParams::validate() const {
  if (patch_size < kMinImageSide || patch_size % 2 == 0) {
    throw std::invalid_argument("DescriptorParams: patch_size must be odd and >= 3");
  }
  if (bins < 4 || bins % 4 != 0) {
    throw std::invalid_argument("DescriptorParams: bins must be >= 4 and divisible by 4");
  }
  if (cells < 1 || patch_size < 2 * cells) {
    throw std::invalid_argument("DescriptorParams: cells must be >= 1 and at most patch_size / 2");
  }
  KernelParams{eps, sigma}.validate(static_cast<double>(patch_size) * patch_size);
}

std::vector<std::array<double, 2>> DescriptorParams::cell_centers() const {
  std::vector<std::array<double, 2>> centers;
  centers.reserve(static_cast<std::size_t>(cells) * cells);
  const double width = static_cast<double>(patch_size) / cells;
  for (int cy = 0; cy < cells; ++cy) {
    for (int cx = 0; cx < cells; ++cx) {
      centers.push_back({(cx + 0.5) * width - 0.5, (cy + 0.5) * width - 0.5});
    }
  }
  return centers;
}

OrientationDensity::OrientationDensity(int cells_, int bins_)
    : cells(cells_),
      bins(bins_),
      values(static_cast<std::size_t>(cells_) * cells_ * bins_, 0.0),
      zero_mass(static_cast<std::size_t>(cells_) * cells_, 0) {}

double OrientationDensity::cell_sum(int cell) const {
  double s = 0.0;
  for (int b = 0; b < bins; ++b) s += at(cell, b);
  return s;
}

OrientationDensity& OrientationDensity::operator+=(const OrientationDensity& other) {
  if (other.cells != cells || other.bins != bins) {
    throw std::invalid_argument("OrientationDensity: shape mismatch in +=");
  }
  for (std::size_t i = 0; i < values.size(); ++i) values[i] += other.values[i];
  return *this;
}

OrientationDensity& OrientationDensity::operator*=(double s) {
  for (double& v : values) v *= s;
  return *this;
}

namespace {

struct Vote {
  int bin;
  double weight;
};

int max_votes_per_pixel(const DescriptorParams& p) {
  if (p.kernel != AngularKernel::triangular) return p.bins;
  const double width = kTwoPi / p.bins;
  return std::min(p.bins, static_cast<int>(std::floor(2.0 * p.eps / width)) + 2);
}

// Angular votes of one pixel, already multiplied by its gradient magnitude.
int pixel_votes(double angle, double magnitude, const DescriptorParams& p, Vote* out) {
  int n = 0;
  const double width = kTwoPi / p.bins;
  if (p.kernel == AngularKernel::triangular) {
    const int lo = static_cast<int>(std::ceil((angle - p.eps) / width - 0.5));
    const int hi = static_cast<int>(std::floor((angle + p.eps) / width - 0.5));
    for (int k = lo; k <= hi; ++k) {
      const double d = std::abs(angle - (k + 0.5) * width);
      if (d >= p.eps) continue;
      const int b = ((k % p.bins) + p.bins) % p.bins;
      out[n++] = {b, magnitude * (1.0 - d / p.eps)};
    }
  } else {
    for (int b = 0; b < p.bins; ++b) {
      out[n++] = {b, magnitude * angular_kernel(p.bin_center(b), angle, p.eps, p.kernel)};
    }
  }
  return n;
}

}  // namespace

OrientationDensity compute_hog_density(const GradientField& grad, const DescriptorParams& params,
                                       PixelWindow window) {
  params.validate();
  const int size = params.patch_size;
  if (window.x0 < 0 || window.y0 < 0 || window.x0 + size > grad.width ||
      window.y0 + size > grad.height) {
    throw std::out_of_range("compute_hog_density: patch window leaves the gradient field");
  }

  OrientationDensity h(params.cells, params.bins);
  const auto centers = params.cell_centers();
  const double radius = 3.0 * params.sigma;
  const double radius2 = radius * radius;

  // Votes are computed once per pixel and reused by every cell in range.
  const int stride = max_votes_per_pixel(params);
  const std::size_t npix = static_cast<std::size_t>(size) * size;
  std::vector<Vote> votes(npix * static_cast<std::size_t>(stride));
  std::vector<int> vote_count(npix, 0);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const std::size_t gi = grad.index(window.x0 + x, window.y0 + y);
      if (!grad.valid[gi]) continue;
      const std::size_t pi = static_cast<std::size_t>(y) * size + x;
      vote_count[pi] = pixel_votes(grad.angle[gi], grad.magnitude[gi], params, &votes[pi * stride]);
    }
  }

  for (std::size_t c = 0; c < centers.size(); ++c) {
    const auto [cx, cy] = centers[c];
    const int y_lo = std::max(0, static_cast<int>(std::ceil(cy - radius)));
    const int y_hi = std::min(size - 1, static_cast<int>(std::floor(cy + radius)));
    const int x_lo = std::max(0, static_cast<int>(std::ceil(cx - radius)));
    const int x_hi = std::min(size - 1, static_cast<int>(std::floor(cx + radius)));
    double* cell = h.values.data() + c * static_cast<std::size_t>(params.bins);
    for (int y = y_lo; y <= y_hi; ++y) {
      for (int x = x_lo; x <= x_hi; ++x) {
        const double ddx = x - cx;
        const double ddy = y - cy;
        if (ddx * ddx + ddy * ddy > radius2) continue;
        const std::size_t pi = static_cast<std::size_t>(y) * size + x;
        const int n = vote_count[pi];
        if (n == 0) continue;
        const double ws = spatial_kernel(ddx, ddy, params.sigma);
        const Vote* pv = &votes[pi * stride];
        for (int k = 0; k < n; ++k) cell[pv[k].bin] += ws * pv[k].weight;
      }
    }
  }
  return h;
}

OrientationDensity compute_hog_density(const GradientField& grad, const DescriptorParams& params) {
  if (grad.width != params.patch_size || grad.height != params.patch_size) {
    throw std::invalid_argument("compute_hog_density: gradient field is not patch-sized");
  }
  return compute_hog_density(grad, params, PixelWindow{});
}

OrientationDensity patch_density(const GrayImage& patch, const DescriptorParams& params) {
  return compute_hog_density(compute_gradient(patch), params);
}

OrientationDensity normalize_dog(const OrientationDensity& h) {
  OrientationDensity out = h;
  out.normalized = true;
  out.zero_mass.assign(h.num_cells(), 0);
  for (int c = 0; c < static_cast<int>(h.num_cells()); ++c) {
    const double s = h.cell_sum(c);
    if (s < kZeroMassThreshold) {
      for (int b = 0; b < h.bins; ++b) out.at(c, b) = 1.0 / h.bins;
      out.zero_mass[static_cast<std::size_t>(c)] = 1;
    } else {
      for (int b = 0; b < h.bins; ++b) out.at(c, b) = h.at(c, b) / s;
    }
  }
  return out;
}

std::string to_string(MethodTag tag) {
  switch (tag) {
    case MethodTag::single_view: return "SV";
    case MethodTag::multi_view: return "MV";
    case MethodTag::reconstruction: return "R";
  }
  return "?";
}

DescriptorVector sample_descriptor(const OrientationDensity& h, MethodTag tag) {
  DescriptorVector v;
  v.method = tag;
  v.cells = h.cells;
  v.bins = h.bins;
  v.values.reserve(h.values.size());
  for (double x : h.values) v.values.push_back(static_cast<float>(x));
  return v;
}

OrientationDensity unflatten(const DescriptorVector& v, bool normalized) {
  OrientationDensity h(v.cells, v.bins);
  if (v.values.size() != h.values.size()) {
    throw std::invalid_argument("unflatten: vector length does not match cells and bins");
  }
  std::copy(v.values.begin(), v.values.end(), h.values.begin());
  h.normalized = normalized;
  return h;
}

DescriptorVector single_view_dog(const GrayImage& patch, const DescriptorParams& params) {
  return sample_descriptor(normalize_dog(patch_density(patch, params)), MethodTag::single_view);
}

}  // namespace mvdesc
