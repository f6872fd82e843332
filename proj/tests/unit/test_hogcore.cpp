#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mvdesc/hogcore.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace mvdesc;

namespace {

double max_abs(const OrientationDensity& a, const OrientationDensity& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

GrayImage rotate_quarter(const GrayImage& img) {
  const int n = img.width();
  GrayImage out(n, n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) out(x, y) = img(y, n - 1 - x);
  return out;
}

}  // namespace

TEST_CASE("default parameters") {
  const auto p = DescriptorParams::defaults(21);
  CHECK(p.bins == 16);
  CHECK(p.cells == 4);
  CHECK(2.0 * p.sigma == doctest::Approx(21.0 / 4.0));
  CHECK(p.eps == doctest::Approx(kTwoPi / 16));
  CHECK(p.vector_length() == 256);
  CHECK_THROWS_AS(DescriptorParams::defaults(12).validate(), std::invalid_argument);
  CHECK_THROWS_AS(DescriptorParams::defaults(11, 10).validate(), std::invalid_argument);
  CHECK_THROWS_AS(DescriptorParams::defaults(11, 16, 6).validate(), std::invalid_argument);
}

TEST_CASE("density matches the brute-force sum on random patches") {
  std::vector<DescriptorParams> settings{DescriptorParams::defaults(11), DescriptorParams::defaults(21),
                                         DescriptorParams::defaults(15, 8, 3)};
  auto wg = DescriptorParams::defaults(11);
  wg.kernel = AngularKernel::wrapped_gaussian;
  wg.eps = 0.3;
  settings.push_back(wg);
  auto wide = DescriptorParams::defaults(11);
  wide.eps = 1.1;
  settings.push_back(wide);
  std::mt19937_64 rng(21);
  for (const auto& p : settings) {
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      const auto patch = testsupport::random_image(p.patch_size, p.patch_size, rng);
      worst = std::max(worst, max_abs(patch_density(patch, p), oracles::brute_force_density(patch, p)));
    }
    CHECK(worst <= 1e-9);
  }
}

TEST_CASE("density over a window of a larger field") {
  std::mt19937_64 rng(8);
  const auto img = testsupport::random_image(30, 30, rng);
  const auto p = DescriptorParams::defaults(11);
  const auto whole = compute_gradient(img);
  const auto h = compute_hog_density(whole, p, PixelWindow{5, 7});
  // The window sees the full image's gradient, so only interior-pixel votes
  // coincide with the cropped patch; compare against the cropped gradient.
  GradientField crop;
  crop.width = crop.height = 11;
  for (int y = 0; y < 11; ++y)
    for (int x = 0; x < 11; ++x) {
      const auto i = whole.index(x + 5, y + 7);
      crop.dx.push_back(whole.dx[i]);
      crop.dy.push_back(whole.dy[i]);
      crop.magnitude.push_back(whole.magnitude[i]);
      crop.angle.push_back(whole.angle[i]);
      crop.valid.push_back(whole.valid[i]);
    }
  CHECK(max_abs(h, compute_hog_density(crop, p)) == 0.0);
  CHECK_THROWS_AS(compute_hog_density(whole, p, PixelWindow{25, 0}), std::out_of_range);
  CHECK_THROWS_AS(compute_hog_density(whole, p), std::invalid_argument);
}

TEST_CASE("ramp puts all mass on the bins adjacent to zero") {
  const auto p = DescriptorParams::defaults(11);
  GrayImage ramp(11, 11);
  for (int y = 0; y < 11; ++y)
    for (int x = 0; x < 11; ++x) ramp(x, y) = 0.1 + 0.05 * x;
  const auto h = patch_density(ramp, p);
  // Bin centers sit at (b + 1/2) * 2pi / B, so theta = 0 lies on the border
  // between the first and last bin and splits evenly.
  for (int c = 0; c < 16; ++c) {
    CHECK(h.cell_sum(c) > 0.0);
    CHECK(h.at(c, 0) == doctest::Approx(0.5 * h.cell_sum(c)));
    CHECK(h.at(c, 15) == doctest::Approx(0.5 * h.cell_sum(c)));
  }
  // A gradient exactly at a bin center lands in that bin alone.
  GrayImage diag(11, 11);
  const double a = std::numbers::pi / 16;
  for (int y = 0; y < 11; ++y)
    for (int x = 0; x < 11; ++x) diag(x, y) = 0.5 + 0.02 * (std::cos(a) * (x - 5) + std::sin(a) * (y - 5));
  const auto hd = patch_density(diag, p);
  for (int c = 0; c < 16; ++c) CHECK(hd.at(c, 0) == doctest::Approx(hd.cell_sum(c)).epsilon(1e-9));
}

TEST_CASE("constant patch has no mass") {
  const auto h = patch_density(GrayImage(11, 11, 0.4), DescriptorParams::defaults(11));
  for (double v : h.values) CHECK(v == 0.0);
}

TEST_CASE("homogeneity and contrast invariance") {
  std::mt19937_64 rng(31);
  const auto p = DescriptorParams::defaults(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto patch = testsupport::random_image(11, 11, rng, 0.2, 0.6);
    for (double a : {0.5, 1.3}) {
      const auto out = apply_contrast(patch, AffineContrast{a, 0.1});
      const auto h0 = patch_density(patch, p), h1 = patch_density(out, p);
      auto scaled = h0;
      scaled *= a;
      CHECK(max_abs(h1, scaled) <= 1e-9);
      CHECK(max_abs(normalize_dog(h0), normalize_dog(h1)) <= 1e-9);
    }
  }
}

TEST_CASE("gamma contrast changes DOG only slightly") {
  std::mt19937_64 rng(32);
  const auto p = DescriptorParams::defaults(21);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const auto patch = testsupport::smooth_texture(21, 21, rng);
    const auto d0 = normalize_dog(patch_density(patch, p));
    const auto d1 = normalize_dog(patch_density(apply_contrast(patch, GammaContrast{1.3}), p));
    worst = std::max(worst, max_abs(d0, d1));
  }
  MESSAGE("max per-bin DOG change under gamma 1.3: " << worst);
  CHECK(worst < 0.15);
}

TEST_CASE("translation equivariance of interior cells") {
  std::mt19937_64 rng(41);
  auto p = DescriptorParams::defaults(21, 16, 3);
  p.sigma = 1.0;
  const auto img = testsupport::random_image(60, 60, rng);
  const auto g = compute_gradient(img);
  const auto h0 = compute_hog_density(g, p, PixelWindow{10, 12});
  const auto hx = compute_hog_density(g, p, PixelWindow{17, 12});
  const auto hy = compute_hog_density(g, p, PixelWindow{10, 19});
  for (int b = 0; b < 16; ++b) {
    // Cell (1, 1) of the first window is cell (0, 1) / (1, 0) of the shifted ones.
    CHECK(std::abs(h0.at(1 * 3 + 1, b) - hx.at(1 * 3 + 0, b)) <= 1e-9);
    CHECK(std::abs(h0.at(1 * 3 + 1, b) - hy.at(0 * 3 + 1, b)) <= 1e-9);
    CHECK(std::abs(h0.at(1 * 3 + 2, b) - hx.at(1 * 3 + 1, b)) <= 1e-9);
  }
}

TEST_CASE("quarter turn permutes cells and shifts bins by B/4") {
  std::mt19937_64 rng(51);
  for (const auto& p : {DescriptorParams::defaults(11), DescriptorParams::defaults(21, 8, 4)}) {
    const auto patch = testsupport::random_image(p.patch_size, p.patch_size, rng);
    const auto h = patch_density(patch, p);
    const auto hr = patch_density(rotate_quarter(patch), p);
    const int n = p.cells, q = p.bins / 4;
    double worst = 0.0;
    for (int cy = 0; cy < n; ++cy)
      for (int cx = 0; cx < n; ++cx)
        for (int b = 0; b < p.bins; ++b) {
          const int rc = cx * n + (n - 1 - cy);
          worst = std::max(worst, std::abs(h.at(cy * n + cx, b) - hr.at(rc, (b + q) % p.bins)));
        }
    CHECK(worst <= 1e-6);
  }
}

TEST_CASE("normalization") {
  std::mt19937_64 rng(61);
  const auto p = DescriptorParams::defaults(11);
  const auto h = patch_density(testsupport::random_image(11, 11, rng), p);
  const auto n = normalize_dog(h);
  CHECK(n.normalized);
  for (int c = 0; c < 16; ++c) CHECK(n.cell_sum(c) == doctest::Approx(1.0).epsilon(1e-12));
  auto h3 = h;
  h3 *= 3.0;
  CHECK(max_abs(normalize_dog(h3), n) <= 1e-15);
  const auto z = normalize_dog(OrientationDensity(4, 16));
  for (int c = 0; c < 16; ++c) {
    CHECK(z.zero_mass[c] == 1);
    for (int b = 0; b < 16; ++b) CHECK(z.at(c, b) == 1.0 / 16);
  }
}

TEST_CASE("normalized cells sum to one on random patches") {
  std::mt19937_64 rng(62);
  const auto p = DescriptorParams::defaults(11);
  for (int trial = 0; trial < 200; ++trial) {
    // Some patches are partly flat so zero-mass cells appear.
    auto patch = testsupport::random_image(11, 11, rng);
    if (trial % 3 == 0)
      for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 11; ++x) patch(x, y) = 0.5;
    const auto n = normalize_dog(patch_density(patch, p));
    for (int c = 0; c < 16; ++c) REQUIRE(std::abs(n.cell_sum(c) - 1.0) <= 1e-6);
  }
}

TEST_CASE("flattening") {
  std::mt19937_64 rng(71);
  const auto p = DescriptorParams::defaults(11);
  const auto h = normalize_dog(patch_density(testsupport::random_image(11, 11, rng), p));
  const auto v = sample_descriptor(h, MethodTag::single_view);
  CHECK(v.size() == 256);
  CHECK(v.values[5 * 16 + 3] == static_cast<float>(h.at(5, 3)));
  const auto back = unflatten(v, true);
  CHECK(sample_descriptor(back, MethodTag::single_view) == v);
  const auto u = sample_descriptor(normalize_dog(OrientationDensity(4, 16)), MethodTag::multi_view);
  for (float x : u.values) CHECK(x == 1.0f / 16);
  auto bad = v;
  bad.values.pop_back();
  CHECK_THROWS_AS(unflatten(bad, true), std::invalid_argument);
}

TEST_CASE("descriptor record round trip") {
  std::mt19937_64 rng(81);
  auto p = DescriptorParams::defaults(21);
  p.kernel = AngularKernel::wrapped_gaussian;
  const auto v = single_view_dog(testsupport::random_image(21, 21, rng), p);
  auto bytes = encode_descriptor(v, p);
  bytes.insert(bytes.begin(), {1, 2, 3});
  std::size_t off = 3;
  DescriptorParams back;
  CHECK(decode_descriptor(bytes, off, &back) == v);
  CHECK(off == bytes.size());
  CHECK(back == p);
  bytes[3] = 'X';
  off = 3;
  CHECK_THROWS(decode_descriptor(bytes, off));
  const auto js = descriptor_to_json(v, p);
  CHECK(js.find("\"values\"") != std::string::npos);
  CHECK(js.find("\"SV\"") != std::string::npos);
}
