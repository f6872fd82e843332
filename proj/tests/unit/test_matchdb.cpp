#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "mvdesc/matchdb.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace mvdesc;

namespace {

constexpr Metric kAll[] = {Metric::l1, Metric::l2, Metric::neg_correlation, Metric::chi2, Metric::bhattacharyya,
                           Metric::kl, Metric::likelihood};

DescriptorVector random_normalized(std::mt19937_64& rng, int cells = 2, int bins = 8, double sparsity = 0.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  OrientationDensity h(cells, bins);
  for (double& v : h.values) v = u(rng) < sparsity ? 0.0 : u(rng);
  return sample_descriptor(normalize_dog(h), MethodTag::single_view);
}

// Closed-form evaluation of each metric, in double, straight from the
// definitions.
double oracle(const DescriptorVector& a, const DescriptorVector& b, Metric m) {
  const std::size_t n = a.size(), B = static_cast<std::size_t>(a.bins);
  std::vector<double> x(a.values.begin(), a.values.end()), y(b.values.begin(), b.values.end());
  double s = 0.0;
  switch (m) {
    case Metric::l1:
      for (std::size_t i = 0; i < n; ++i) s += std::abs(x[i] - y[i]);
      return s;
    case Metric::l2:
      for (std::size_t i = 0; i < n; ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
      return std::sqrt(s);
    case Metric::neg_correlation: {
      double mx = 0, my = 0;
      for (std::size_t i = 0; i < n; ++i) mx += x[i] / n, my += y[i] / n;
      double sxy = 0, sxx = 0, syy = 0;
      for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
      }
      return 1.0 - sxy / std::sqrt(sxx * syy);
    }
    case Metric::chi2:
      for (std::size_t i = 0; i < n; ++i)
        if (x[i] + y[i] > 0) s += (x[i] - y[i]) * (x[i] - y[i]) / (x[i] + y[i]);
      return 0.5 * s;
    case Metric::bhattacharyya:
      for (std::size_t c = 0; c < n / B; ++c) {
        double bc = 0, sx = 0, sy = 0;
        for (std::size_t k = 0; k < B; ++k) {
          bc += std::sqrt(x[c * B + k] * y[c * B + k]);
          sx += x[c * B + k], sy += y[c * B + k];
        }
        s += -std::log(std::max(bc / std::sqrt(sx * sy), 1e-300));
      }
      return s;
    case Metric::kl:
    case Metric::likelihood:
      for (std::size_t c = 0; c < n / B; ++c) {
        double zx = 0, zy = 0;
        for (std::size_t k = 0; k < B; ++k) zx += x[c * B + k] + 1e-8, zy += y[c * B + k] + 1e-8;
        for (std::size_t k = 0; k < B; ++k) {
          const double p = (x[c * B + k] + 1e-8) / zx, q = (y[c * B + k] + 1e-8) / zy;
          s += m == Metric::kl ? p * std::log(p / q) : -x[c * B + k] * std::log(q);
        }
      }
      return s;
  }
  return 0.0;
}

DescriptorParams small_params() { return DescriptorParams::defaults(11, 8, 2); }

}  // namespace

TEST_CASE("names") {
  for (Metric m : kAll) CHECK(parse_metric(to_string(m)) == m);
  CHECK_THROWS_AS(parse_metric("cosine"), std::invalid_argument);
  for (Strategy s : {Strategy::svhog, Strategy::mvhog, Strategy::keepall, Strategy::rhog, Strategy::rhog_maxout})
    CHECK(parse_strategy(to_string(s)) == s);
  CHECK(to_string(Strategy::rhog_maxout) == "RHOG-MAX");
  CHECK(is_grouped(Strategy::keepall));
  CHECK_FALSE(is_grouped(Strategy::mvhog));
}

TEST_CASE("identical vectors are at distance zero") {
  std::mt19937_64 rng(1);
  const auto a = random_normalized(rng);
  for (Metric m : kAll) {
    if (m == Metric::likelihood) continue;  // a cross-entropy, not a divergence
    CHECK(distance(a, a, m) == doctest::Approx(0.0).epsilon(1e-9));
  }
  CHECK(distance(a, a, Metric::likelihood) == doctest::Approx(oracle(a, a, Metric::likelihood)).epsilon(1e-6));
}

TEST_CASE("disjoint one-hot cells") {
  DescriptorVector a, b;
  a.cells = b.cells = 2;
  a.bins = b.bins = 4;
  a.values = {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1};
  b.values = {0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 1, 0, 0, 0};
  CHECK(distance(a, b, Metric::l1) == doctest::Approx(2.0 * 4));
  CHECK(distance(a, b, Metric::l2) == doctest::Approx(std::sqrt(8.0)));
  CHECK(distance(a, b, Metric::chi2) == doctest::Approx(4.0));
  CHECK(distance(a, b, Metric::bhattacharyya) > 100.0);
}

TEST_CASE("metrics match the closed-form oracle") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const double sp = trial % 4 == 0 ? 0.5 : 0.0;
    const auto a = random_normalized(rng, 4, 16, sp), b = random_normalized(rng, 4, 16, sp);
    for (Metric m : kAll) {
      const double d = distance(a, b, m), o = oracle(a, b, m);
      INFO(to_string(m));
      REQUIRE(d == doctest::Approx(o).epsilon(1e-9));
      REQUIRE(d >= 0.0);
    }
  }
}

TEST_CASE("metric axioms") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = random_normalized(rng), b = random_normalized(rng);
    for (Metric m : kAll) {
      CHECK(distance(a, b, m) >= 0.0);
      if (m != Metric::kl && m != Metric::likelihood) CHECK(distance(a, b, m) == doctest::Approx(distance(b, a, m)));
    }
    for (Metric m : {Metric::l1, Metric::l2, Metric::chi2, Metric::bhattacharyya}) CHECK(distance(a, b, m) > 0.0);
  }
}

TEST_CASE("correlation on constant vectors") {
  DescriptorVector a, b;
  a.cells = b.cells = 1;
  a.bins = b.bins = 4;
  a.values = {0.25f, 0.25f, 0.25f, 0.25f};
  b.values = {0.1f, 0.2f, 0.3f, 0.4f};
  CHECK(distance(a, a, Metric::neg_correlation) == 0.0);
  CHECK(distance(a, b, Metric::neg_correlation) == 1.0);
}

TEST_CASE("divergences need normalized input and matching layouts") {
  std::mt19937_64 rng(4);
  const auto a = random_normalized(rng);
  auto raw = a;
  raw.values[0] += 0.5f;
  for (Metric m : {Metric::kl, Metric::bhattacharyya, Metric::likelihood})
    CHECK_THROWS_AS(distance(a, raw, m), std::invalid_argument);
  CHECK_NOTHROW(distance(a, raw, Metric::l1));
  const auto other = random_normalized(rng, 4, 8);
  CHECK_THROWS_AS(distance(a, other, Metric::l2), std::invalid_argument);
}

TEST_CASE("database bookkeeping") {
  std::mt19937_64 rng(5);
  DescriptorDatabase mv(Strategy::mvhog, small_params());
  mv.add(3, random_normalized(rng));
  mv.add(1, random_normalized(rng));
  CHECK_THROWS_AS(mv.add(3, random_normalized(rng)), std::invalid_argument);
  CHECK_THROWS_AS(mv.add(4, random_normalized(rng, 4, 16)), std::invalid_argument);
  CHECK(mv.num_tracks() == 2);
  CHECK(mv.contains_track(1));
  CHECK_FALSE(mv.contains_track(2));
  CHECK(mv.memory_bytes() == 2 * 32 * sizeof(float));
  CHECK(mv.all_normalized());
  auto raw = random_normalized(rng);
  raw.values[0] = 7.0f;
  mv.add(9, raw);
  CHECK_FALSE(mv.all_normalized());

  DescriptorDatabase keep(Strategy::keepall, small_params());
  for (std::uint32_t f = 0; f < 5; ++f) keep.add(2, random_normalized(rng), f);
  keep.add(4, random_normalized(rng), 0);
  CHECK(keep.size() == 6);
  CHECK(keep.num_tracks() == 2);
  CHECK(keep.memory_bytes() == 6 * 32 * sizeof(float));
}

TEST_CASE("nearest neighbour basics") {
  std::mt19937_64 rng(6);
  DescriptorDatabase db(Strategy::mvhog, small_params());
  std::vector<DescriptorVector> stored;
  for (std::uint32_t t = 0; t < 20; ++t) {
    stored.push_back(random_normalized(rng));
    db.add(t * 3, stored.back());
  }
  for (Metric m : {Metric::l1, Metric::l2, Metric::chi2, Metric::bhattacharyya, Metric::kl}) {
    const auto r = nn_query(db, stored[7], m);
    CHECK(r.track_id == 21);
    CHECK(r.distance == doctest::Approx(0.0).epsilon(1e-9));
  }
  CHECK_THROWS_AS(nn_query(DescriptorDatabase(Strategy::mvhog, small_params()), stored[0], Metric::l2),
                  std::invalid_argument);

  // Ties go to the lowest track id.
  DescriptorDatabase ties(Strategy::svhog, small_params());
  ties.add(8, stored[1]);
  ties.add(5, stored[1]);
  ties.add(6, stored[2]);
  CHECK(nn_query(ties, stored[1], Metric::l2).track_id == 5);
}

TEST_CASE("KeepAll is represented by the group minimum") {
  std::mt19937_64 rng(7);
  DescriptorDatabase db(Strategy::keepall, small_params());
  std::vector<DescriptorVector> frames;
  for (std::uint32_t f = 0; f < 12; ++f) {
    frames.push_back(random_normalized(rng));
    db.add(4, frames.back(), f);
  }
  for (std::uint32_t t = 0; t < 10; ++t) db.add(10 + t, random_normalized(rng));
  // A query next to frame 7 of track 4.
  auto q = frames[7];
  q.values[0] = q.values[0] * 0.9f + 0.1f * q.values[1];
  q.values[1] = q.values[1] * 0.9f + 0.1f * q.values[0];
  const auto r = nn_query(db, q, Metric::l2);
  CHECK(r.track_id == 4);
  CHECK(db.entries()[r.entry].index == 7);
  CHECK(r.distance == doctest::Approx(distance(q, frames[7], Metric::l2)));
}

TEST_CASE("nearest neighbour equals brute force on random databases") {
  std::mt19937_64 rng(8);
  int instances = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto strategy = trial % 3 == 0 ? Strategy::keepall : Strategy::mvhog;
    DescriptorDatabase db(strategy, small_params());
    const int tracks = 5 + static_cast<int>(rng() % 30);
    for (int t = 0; t < tracks; ++t) {
      const int reps = strategy == Strategy::keepall ? 1 + static_cast<int>(rng() % 40) : 1;
      for (int r = 0; r < reps; ++r) db.add(static_cast<std::uint32_t>(t), random_normalized(rng, 2, 8, 0.3), r);
    }
    if (trial % 2 == 0) db.build_index(8);
    for (int qi = 0; qi < 5; ++qi) {
      const auto q = random_normalized(rng, 2, 8, 0.3);
      for (Metric m : kAll) {
        const auto got = nn_query(db, q, m);
        const auto want = oracles::brute_nn(db, q, m);
        REQUIRE(got.track_id == want.track_id);
        REQUIRE(got.distance == doctest::Approx(want.distance).epsilon(1e-12));
        ++instances;
      }
    }
  }
  CHECK(instances == 100 * 5 * 7);
}

TEST_CASE("block index keeps exact answers with duplicates and ties") {
  std::mt19937_64 rng(9);
  DescriptorDatabase db(Strategy::rhog_maxout, small_params());
  std::vector<DescriptorVector> pool;
  for (int i = 0; i < 6; ++i) pool.push_back(random_normalized(rng));
  for (std::uint32_t t = 0; t < 30; ++t)
    for (std::uint32_t v = 0; v < 20; ++v) db.add(29 - t, pool[(t * 7 + v) % pool.size()], v);
  db.build_index(4);
  CHECK(db.has_index());
  for (const auto& q : pool)
    for (Metric m : {Metric::l1, Metric::l2}) {
      const auto got = nn_query(db, q, m);
      const auto want = oracles::brute_nn(db, q, m);
      CHECK(got.track_id == want.track_id);
      CHECK(got.distance == want.distance);
    }
  db.add(99, pool[0], 0);
  CHECK_FALSE(db.has_index());
}

TEST_CASE("argmin is unchanged by scaling the stored densities") {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  DescriptorDatabase a(Strategy::mvhog, small_params()), b(Strategy::mvhog, small_params());
  for (std::uint32_t t = 0; t < 40; ++t) {
    OrientationDensity h(2, 8);
    for (double& v : h.values) v = u(rng);
    a.add(t, sample_descriptor(normalize_dog(h), MethodTag::multi_view));
    h *= 3.7;
    b.add(t, sample_descriptor(normalize_dog(h), MethodTag::multi_view));
  }
  for (int i = 0; i < 50; ++i) {
    const auto q = random_normalized(rng);
    for (Metric m : kAll) CHECK(nn_query(a, q, m).track_id == nn_query(b, q, m).track_id);
  }
}

TEST_CASE("database file round trip") {
  std::mt19937_64 rng(11);
  DescriptorDatabase db(Strategy::keepall, small_params(), Metric::chi2);
  for (std::uint32_t i = 0; i < 9; ++i) db.add(i / 3, random_normalized(rng), i % 3);
  const auto bytes = encode_database(db);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "MVDB");
  const auto back = decode_database(bytes);
  CHECK(back.strategy() == Strategy::keepall);
  CHECK(back.default_metric() == Metric::chi2);
  CHECK(back.params() == db.params());
  REQUIRE(back.size() == db.size());
  for (std::size_t i = 0; i < db.size(); ++i) {
    CHECK(back.entries()[i].track_id == db.entries()[i].track_id);
    CHECK(back.entries()[i].index == db.entries()[i].index);
    CHECK(back.entries()[i].descriptor == db.entries()[i].descriptor);
  }
  const auto path = std::filesystem::temp_directory_path() / "mvdesc_test.mvdb";
  save_database(db, path);
  CHECK(encode_database(load_database(path)) == bytes);
  std::filesystem::remove(path);
  auto bad = bytes;
  bad[1] = 'X';
  CHECK_THROWS(decode_database(bad));
  bad = bytes;
  bad.resize(bad.size() - 1);
  CHECK_THROWS(decode_database(bad));
}

TEST_CASE("likelihood evaluation") {
  std::mt19937_64 rng(12);
  const auto p = DescriptorParams::defaults(11);
  const auto patch = testsupport::random_image(11, 11, rng);
  const auto model = normalize_dog(patch_density(patch, p));

  GrayImage rot(11, 11), mirror(11, 11);
  for (int y = 0; y < 11; ++y)
    for (int x = 0; x < 11; ++x) {
      rot(x, y) = patch(y, 10 - x);
      mirror(x, y) = patch(10 - x, y);
    }
  const double own = likelihood_eval(compute_gradient(patch), model, p);
  CHECK(own > likelihood_eval(compute_gradient(rot), model, p));
  CHECK(own > likelihood_eval(compute_gradient(mirror), model, p));

  const auto uniform = normalize_dog(OrientationDensity(4, 16));
  for (int i = 0; i < 5; ++i) {
    const auto test = testsupport::random_image(11, 11, rng);
    CHECK(likelihood_eval(compute_gradient(test), uniform, p) == doctest::Approx(-16.0 * std::log(16.0)));
  }

  // A constant test patch falls back to uniform cells.
  double expect = 0.0;
  for (int c = 0; c < 16; ++c) {
    double z = 0.0;
    for (int b = 0; b < 16; ++b) z += model.at(c, b) + 1e-8;
    for (int b = 0; b < 16; ++b) expect += std::log((model.at(c, b) + 1e-8) / z) / 16.0;
  }
  CHECK(likelihood_eval(compute_gradient(GrayImage(11, 11, 0.3)), model, p) == doctest::Approx(expect).epsilon(1e-12));

  // As a metric it is the negated score on the flattened vectors.
  const auto qv = single_view_dog(rot, p);
  const auto mv = sample_descriptor(model, MethodTag::single_view);
  CHECK(distance(qv, mv, Metric::likelihood) ==
        doctest::Approx(-likelihood_eval(compute_gradient(rot), model, p)).epsilon(1e-5));

  CHECK_THROWS_AS(likelihood_eval(compute_gradient(patch), patch_density(patch, p), p), std::invalid_argument);
}
