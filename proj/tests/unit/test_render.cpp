#include <doctest.h>

#include <set>

#include "render.hpp"
#include "png_reader.hpp"
#include "rng.hpp"
#include "test_util.hpp"

using namespace hsi;

TEST_CASE("default rgb bands") {
  const auto b = default_rgb_bands(200);
  CHECK(b.red == 119);
  CHECK(b.green == 80);
  CHECK(b.blue == 20);
  const auto one = default_rgb_bands(1);
  CHECK(one.red == 0);
  CHECK(one.green == 0);
  CHECK(one.blue == 0);
}

TEST_CASE("percentile interpolates between order statistics") {
  CHECK(percentile({4, 1, 3, 2}, 0.0) == 1.0);
  CHECK(percentile({4, 1, 3, 2}, 1.0) == 4.0);
  CHECK(percentile({4, 1, 3, 2}, 0.5) == doctest::Approx(2.5));
  CHECK(percentile({0, 10}, 0.02) == doctest::Approx(0.2));
}

TEST_CASE("constant band renders a single gray value") {
  const HyperCube c{3, 2, 1, std::vector<float>(6, 0.7f), ""};
  const auto rgb = cube_to_rgb(c, {0, 0, 0});
  CHECK(std::set<std::uint8_t>(rgb.rgb.begin(), rgb.rgb.end()).size() == 1);
}

TEST_CASE("2x1x3 cube scales each channel to 0 and 255") {
  // Two pixels per band: the clip range is [lo + 0.02 d, lo + 0.98 d], so the
  // smaller value maps to 0 and the larger to 255 in every channel.
  const HyperCube c{2, 1, 3, {0, 1, 2, 3, 4, 5}, ""};
  const auto rgb = cube_to_rgb(c, {0, 1, 2});
  CHECK(rgb.rgb == std::vector<std::uint8_t>{0, 0, 0, 255, 255, 255});
  const auto swapped = cube_to_rgb(HyperCube{2, 1, 3, {1, 0, 2, 3, 5, 4}, ""}, {0, 1, 2});
  CHECK(swapped.rgb == std::vector<std::uint8_t>{255, 0, 255, 0, 255, 0});
}

TEST_CASE("band index out of range") {
  const HyperCube c{1, 1, 2, {0, 1}, ""};
  CHECK(test::error_of([&] { cube_to_rgb(c, {0, 1, 2}); }) == ErrorCode::BandOutOfRange);
}

TEST_CASE("hot pixel does not flatten the band") {
  std::vector<float> v(100);
  for (std::size_t i = 0; i < 100; ++i) v[i] = static_cast<float>(i % 10);
  v[55] = 1e6f;
  const auto rgb = cube_to_rgb(HyperCube{10, 10, 1, v, ""}, {0, 0, 0});
  std::set<std::uint8_t> distinct;
  for (std::size_t p = 0; p < 100; ++p) distinct.insert(rgb.rgb[3 * p]);
  CHECK(distinct.size() >= 9);
}

TEST_CASE("single red pixel PNG") {
  const std::vector<Color> palette{{255, 0, 0}};
  const auto png = render_class_map(ClassMap{1, 1, {1}, 1}, palette);
  const auto img = test::decode_png(png);
  CHECK(img.width == 1);
  CHECK(img.height == 1);
  CHECK(img.rgb == std::vector<std::uint8_t>{255, 0, 0});
  CHECK(render_class_map(ClassMap{1, 1, {1}, 1}, palette) == png);
}

TEST_CASE("palette too small") {
  const std::vector<Color> palette{{255, 0, 0}};
  CHECK(test::error_of([&] { render_class_map(ClassMap{1, 2, {1, 2}, 2}, palette); }) ==
        ErrorCode::PaletteTooSmall);
}

TEST_CASE("16-class map uses at most 16 colors, label 0 renders black") {
  SplitMix64 rng(5);
  ClassMap z{20, 30, std::vector<ClassId>(600), 16};
  for (auto& c : z.classes) c = static_cast<ClassId>(1 + rng.below(16));
  const auto img = test::decode_png(render_class_map(z, default_palette()));
  std::set<std::array<std::uint8_t, 3>> colors;
  for (std::size_t p = 0; p < 600; ++p) {
    const std::array<std::uint8_t, 3> c{img.rgb[3 * p], img.rgb[3 * p + 1], img.rgb[3 * p + 2]};
    CHECK(c == default_palette()[z.classes[p] - 1]);
    colors.insert(c);
  }
  CHECK(colors.size() <= 16);

  const auto labels = make_label_map({1, 2}, {0, 2});
  const auto limg = test::decode_png(render_label_map(labels, default_palette()));
  CHECK(limg.rgb == std::vector<std::uint8_t>{0, 0, 0, default_palette()[1][0], default_palette()[1][1],
                                              default_palette()[1][2]});
}

TEST_CASE("default palette has 16 distinct non-black colors") {
  const auto& p = default_palette();
  CHECK(p.size() == 16);
  std::set<Color> s(p.begin(), p.end());
  CHECK(s.size() == 16);
  CHECK(s.count(kBackgroundColor) == 0);
}

TEST_CASE("boundary overlay marks pixels next to another segment") {
  const RgbImage img{2, 2, std::vector<std::uint8_t>(12, 0)};
  const SuperpixelMap sp{2, 2, {0, 1, 0, 1}, 2};
  const auto out = overlay_boundaries(img, sp);
  CHECK(out.rgb == std::vector<std::uint8_t>{255, 0, 0, 0, 0, 0, 255, 0, 0, 0, 0, 0});
}
