#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rng.hpp"
#include "sampling.hpp"
#include "scene.hpp"
#include "test_util.hpp"

using namespace hsi;

namespace {

// Hamilton apportionment with exact fractions compared by cross
// multiplication; no top-up.
std::vector<std::size_t> hamilton(const std::vector<std::size_t>& sizes, std::size_t total) {
  const std::size_t n = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
  std::vector<std::size_t> q(sizes.size()), rem(sizes.size());
  std::size_t given = 0;
  for (std::size_t c = 0; c < sizes.size(); ++c) {
    q[c] = total * sizes[c] / n;
    rem[c] = total * sizes[c] % n;
    given += q[c];
  }
  while (given < total) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < sizes.size(); ++c) {
      if (rem[c] > rem[best]) best = c;
    }
    ++q[best];
    rem[best] = 0;
    ++given;
  }
  return q;
}

LabelMap blocks(const std::vector<std::size_t>& sizes) {
  std::vector<ClassId> l;
  for (std::size_t c = 0; c < sizes.size(); ++c) l.insert(l.end(), sizes[c], static_cast<ClassId>(c + 1));
  return make_label_map({1, l.size()}, l);
}

}  // namespace

TEST_CASE("10 pixels of one class at 0.5") {
  const auto s = split(blocks({10}), {0.5, 3, true, 1});
  CHECK(s.train.count() == 5);
  CHECK(s.test.count() == 5);
}

TEST_CASE("90/10 classes at 0.1 give 9 + 1") {
  CHECK(apportion({90, 10}, 0.1, 1) == std::vector<std::size_t>{9, 1});
  const auto labels = blocks({90, 10});
  const auto s = split(labels, {0.1, 11, true, 1});
  std::size_t per[2] = {0, 0};
  for (std::size_t p = 0; p < 100; ++p) {
    if (s.train[p]) ++per[labels.labels[p] - 1];
  }
  CHECK(per[0] == 9);
  CHECK(per[1] == 1);
}

TEST_CASE("remainder ties go to the smaller class id") {
  // 3 * 0.5 = 1.5 each, total round(3) = 3: the half goes to class 1.
  CHECK(apportion({3, 3}, 0.5, 0) == std::vector<std::size_t>{2, 1});
}

TEST_CASE("apportion matches a Hamilton oracle without top-up") {
  SplitMix64 rng(17);
  for (int t = 0; t < 500; ++t) {
    const std::size_t k = 1 + rng.below(16);
    std::vector<std::size_t> sizes(k);
    for (auto& s : sizes) s = 1 + rng.below(2000);
    const double f = 0.001 + 0.99 * rng.uniform();
    const std::size_t n = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
    const auto total = static_cast<std::size_t>(std::llround(f * static_cast<double>(n)));
    const auto q = apportion(sizes, f, 0);
    CHECK(q == hamilton(sizes, total));
  }
}

TEST_CASE("min_per_class tops up small classes") {
  // round(0.05 * 100) = 5: Hamilton gives {5, 0, 0}; floors take two from class 1.
  CHECK(apportion({98, 1, 1}, 0.05, 1) == std::vector<std::size_t>{3, 1, 1});
  CHECK(test::error_of([] { apportion({98, 1, 1}, 0.01, 1); }) == ErrorCode::FractionTooSmall);
  // A class smaller than min_per_class only needs its own size.
  CHECK(apportion({50, 2}, 0.5, 5) == std::vector<std::size_t>{24, 2});
}

TEST_CASE("empty class and bad fraction") {
  auto labels = make_label_map({1, 3}, {1, 1, 3});
  CHECK(test::error_of([&] { split(labels, {0.5, 0, true, 1}); }) == ErrorCode::EmptyClass);
  CHECK(test::error_of([&] { split(blocks({4}), {0.0, 0, true, 1}); }) == ErrorCode::InvalidArgument);
  CHECK(test::error_of([&] { split(blocks({4}), {1.0, 0, true, 1}); }) == ErrorCode::InvalidArgument);
  CHECK(test::error_of([&] { split(make_label_map({1, 2}, {0, 0}), {0.5, 0, true, 1}); }) ==
        ErrorCode::EmptyClass);
}

TEST_CASE("split partitions the labeled pixels with round(f * labeled) training pixels") {
  const auto scene = testing::make_scene({145, 145, 8, 16, 3, 0.05, 0.3, 21});
  const auto& labels = scene.labels;
  const std::size_t labeled = labels.labeled_count();
  for (double f : {0.005, 0.05, 0.2}) {
    const auto s = split(labels, {f, 4, true, 1});
    for (std::size_t p = 0; p < labels.labels.size(); ++p) {
      CHECK_FALSE((s.train[p] && s.test[p]));
      CHECK((s.train[p] || s.test[p]) == (labels.labels[p] != 0));
    }
    const auto expected = static_cast<std::size_t>(std::llround(f * static_cast<double>(labeled)));
    CHECK(s.train.count() == expected);
    std::vector<std::size_t> per(labels.num_classes + 1);
    for (std::size_t p = 0; p < labels.labels.size(); ++p) per[labels.labels[p]] += s.train[p];
    for (std::size_t c = 1; c <= labels.num_classes; ++c) CHECK(per[c] >= 1);
  }
}

TEST_CASE("split is a pure function of the seed") {
  const auto scene = testing::make_scene({});
  const auto a = split(scene.labels, {0.1, 42, true, 1});
  const auto b = split(scene.labels, {0.1, 42, true, 1});
  const auto c = split(scene.labels, {0.1, 43, true, 1});
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);
  CHECK_FALSE(a.train == c.train);
}

TEST_CASE("unstratified split draws from the pooled labeled pixels") {
  const auto labels = blocks({90, 10});
  const auto s = split(labels, {0.3, 2, false, 1});
  CHECK(s.train.count() == 30);
  CHECK(s.test.count() == 70);
}

TEST_CASE("split reproduces the documented SplitMix64 procedure") {
  const auto labels = make_label_map({2, 4}, {1, 2, 1, 0, 2, 1, 2, 1});
  const auto s = split(labels, {0.5, 9, true, 1});
  SplitMix64 rng(9);
  std::vector<std::size_t> c1{0, 2, 5, 7}, c2{1, 4, 6};
  shuffle(c1, rng);
  shuffle(c2, rng);
  // quotas: 7 labeled * 0.5 = 3.5 -> 4; exact shares 2 and 1.5 -> {2, 2}
  PixelMask expect = make_mask({2, 4});
  for (std::size_t i = 0; i < 2; ++i) expect.mask[c1[i]] = 1;
  for (std::size_t i = 0; i < 2; ++i) expect.mask[c2[i]] = 1;
  CHECK(s.train == expect);
}
