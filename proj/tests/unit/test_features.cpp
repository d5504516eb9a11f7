#include <doctest.h>

#include <cmath>

#include "features.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "scene.hpp"
#include "test_util.hpp"

using namespace hsi;

namespace {

// Direct window average, no integral image.
double window_mean(const std::vector<double>& z, std::size_t h, std::size_t w, std::size_t y, std::size_t x,
                   std::size_t r) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t yy = y >= r ? y - r : 0; yy <= std::min(h - 1, y + r); ++yy) {
    for (std::size_t xx = x >= r ? x - r : 0; xx <= std::min(w - 1, x + r); ++xx) {
      sum += z[yy * w + xx];
      ++count;
    }
  }
  return sum / static_cast<double>(count);
}

}  // namespace

TEST_CASE("3x3 center spike, r=1, no standardization") {
  HyperCube c{3, 3, 1, std::vector<float>(9, 0.0f), ""};
  c.data[4] = 9.0f;
  const auto f = extract_features(c, {1, false});
  CHECK(f.row(4)[0] == doctest::Approx(1.0));
  CHECK(f.row(0)[0] == doctest::Approx(9.0 / 4.0));  // corner window holds 4 pixels
  CHECK(f.row(1)[0] == doctest::Approx(9.0 / 6.0));
}

TEST_CASE("r=0 without standardization is the raw spectrum") {
  const auto scene = testing::make_scene({});
  const auto f = extract_features(scene.cube, {0, false});
  const std::size_t n = scene.cube.plane_size();
  for (std::size_t p = 0; p < n; p += 37) {
    for (std::size_t b = 0; b < scene.cube.bands; ++b) CHECK(f.row(p)[b] == scene.cube.data[b * n + p]);
  }
}

TEST_CASE("constant cube gives equal rows for any radius") {
  const HyperCube c{6, 5, 3, std::vector<float>(90, 2.5f), ""};
  for (std::size_t r : {0u, 1u, 2u}) {
    for (bool standardize : {false, true}) {
      const auto f = extract_features(c, {r, standardize});
      for (std::size_t p = 1; p < 30; ++p) {
        for (std::size_t b = 0; b < 3; ++b) CHECK(f.row(p)[b] == f.row(0)[b]);
      }
    }
  }
}

TEST_CASE("stats: population std, zero variance becomes 1") {
  const HyperCube c{1, 4, 2, {1, 2, 3, 4, 5, 5, 5, 5}, ""};
  const auto s = compute_feature_stats(c, make_mask({1, 4}, true));
  CHECK(s.mean[0] == doctest::Approx(2.5));
  CHECK(s.std[0] == doctest::Approx(std::sqrt(1.25)));
  CHECK(s.mean[1] == doctest::Approx(5.0));
  CHECK(s.std[1] == 1.0f);
  PixelMask m = make_mask({1, 4});
  CHECK(test::error_of([&] { compute_feature_stats(c, m); }) == ErrorCode::EmptyMask);
  m.mask = {1, 1, 0, 0};
  const auto partial = compute_feature_stats(c, m);
  CHECK(partial.mean[0] == doctest::Approx(1.5));
  CHECK(partial.std[0] == doctest::Approx(0.5));
}

TEST_CASE("features match a direct window oracle on random cubes") {
  SplitMix64 rng(99);
  for (int t = 0; t < 20; ++t) {
    const std::size_t h = 2 + rng.below(10), w = 2 + rng.below(10), bands = 1 + rng.below(4), n = h * w;
    HyperCube c{h, w, bands, std::vector<float>(n * bands), ""};
    for (auto& v : c.data) v = static_cast<float>(rng.uniform() * 10.0);
    const std::size_t r = rng.below(std::min(h, w) / 2 + 1);
    PixelMask train = make_mask({h, w});
    for (auto& m : train.mask) m = static_cast<std::uint8_t>(rng.below(2));
    train.mask[0] = 1;
    const auto stats = compute_feature_stats(c, train);
    const auto f = extract_features(c, {r, true}, stats);
    for (std::size_t b = 0; b < bands; ++b) {
      std::vector<double> z(n);
      for (std::size_t p = 0; p < n; ++p) z[p] = (c.data[b * n + p] - stats.mean[b]) / stats.std[b];
      for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
          CHECK(f.row(y * w + x)[b] == doctest::Approx(window_mean(z, h, w, y, x, r)).epsilon(1e-5));
        }
      }
    }
  }
}

TEST_CASE("patch radius larger than half the image is rejected") {
  const HyperCube c{3, 8, 1, std::vector<float>(24, 0.0f), ""};
  CHECK(test::error_of([&] { extract_features(c, {2, false}); }) == ErrorCode::InvalidArgument);
  CHECK_NOTHROW(extract_features(c, {1, false}));
}

TEST_CASE("features do not depend on the thread count") {
  const auto scene = testing::make_scene({});
  set_thread_count(1);
  const auto a = extract_features(scene.cube, {2, true});
  set_thread_count(5);
  const auto b = extract_features(scene.cube, {2, true});
  set_thread_count(0);
  CHECK(a.values == b.values);
}
