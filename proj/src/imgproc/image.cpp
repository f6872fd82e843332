#include "mvdesc/imgproc.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mvdesc {

namespace {

void check_dims(int width, int height) {
  if (width < kMinImageSide || height < kMinImageSide) {
    throw std::invalid_argument("GrayImage: dimensions must be at least 3x3, got " +
                                std::to_string(width) + "x" + std::to_string(height));
  }
}

double positive_mod(double v, double m) {
  double r = std::fmod(v, m);
  return r < 0.0 ? r + m : r;
}

}  // namespace

GrayImage::GrayImage(int width, int height, double fill)
    : width_(width), height_(height) {
  check_dims(width, height);
  data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

GrayImage::GrayImage(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  check_dims(width, height);
  if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw std::invalid_argument("GrayImage: data size does not match dimensions");
  }
  validate();
}

void GrayImage::validate() const {
  for (double v : data_) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw std::invalid_argument("GrayImage: intensity outside [0, 1]: " + std::to_string(v));
    }
  }
}

double GrayImage::sample_bilinear(double x, double y) const {
  x = std::clamp(x, 0.0, static_cast<double>(width_ - 1));
  y = std::clamp(y, 0.0, static_cast<double>(height_ - 1));
  const int x0 = std::min(static_cast<int>(x), width_ - 2);
  const int y0 = std::min(static_cast<int>(y), height_ - 2);
  const double fx = x - x0;
  const double fy = y - y0;
  const double* row0 = data_.data() + index(x0, y0);
  const double* row1 = row0 + width_;
  const double top = row0[0] + fx * (row0[1] - row0[0]);
  const double bottom = row1[0] + fx * (row1[1] - row1[0]);
  return top + fy * (bottom - top);
}

double GrayImage::sample_bilinear_wrap(double x, double y) const {
  x = positive_mod(x, width_);
  y = positive_mod(y, height_);
  const int x0 = std::min(static_cast<int>(x), width_ - 1);
  const int y0 = std::min(static_cast<int>(y), height_ - 1);
  const int x1 = (x0 + 1) % width_;
  const int y1 = (y0 + 1) % height_;
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = (*this)(x0, y0) + fx * ((*this)(x1, y0) - (*this)(x0, y0));
  const double bottom = (*this)(x0, y1) + fx * ((*this)(x1, y1) - (*this)(x0, y1));
  return top + fy * (bottom - top);
}

GrayImage quantize_8bit(const GrayImage& img) {
  GrayImage out = img;
  for (double& v : out.data()) {
    v = std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0;
  }
  return out;
}

}  // namespace mvdesc
