#include <doctest.h>

#include <cmath>

#include "classifier.hpp"
#include "io.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "sampling.hpp"
#include "scene.hpp"
#include "test_util.hpp"

using namespace hsi;

namespace {

FeatureMatrix matrix(std::size_t cols, std::vector<float> values) {
  return {values.size() / cols, cols, std::move(values)};
}

double accuracy(const ClassMap& z, const LabelMap& l, const PixelMask& m) {
  std::size_t n = 0, ok = 0;
  for (std::size_t p = 0; p < m.mask.size(); ++p) {
    if (!m[p]) continue;
    ++n;
    ok += z.classes[p] == l.labels[p];
  }
  return static_cast<double>(ok) / static_cast<double>(n);
}

}  // namespace

TEST_CASE("centroids: hand-computed means") {
  // pixels: (1,2) c1, (3,4) c1, (10,0) c2, (20,2) c2
  const auto f = matrix(2, {1, 2, 3, 4, 10, 0, 20, 2});
  const auto labels = make_label_map({1, 4}, {1, 1, 2, 2});
  const auto m = train_centroid(f, labels, make_mask({1, 4}, true));
  CHECK(m.centroids == std::vector<float>{2, 3, 15, 1});
}

TEST_CASE("centroids: one pixel per class, duplicates change nothing") {
  const auto f = matrix(1, {4, 7, 4, 7});
  const auto labels = make_label_map({1, 4}, {1, 2, 1, 2});
  PixelMask single = make_mask({1, 4});
  single.mask = {1, 1, 0, 0};
  const auto a = train_centroid(f, labels, single);
  const auto b = train_centroid(f, labels, make_mask({1, 4}, true));
  CHECK(a.centroids == std::vector<float>{4, 7});
  CHECK(a == b);
}

TEST_CASE("centroid prediction and tie-break") {
  CentroidModel m{5, 1, {0, 10, 20, 30, 40}};
  const auto z = predict(m, matrix(1, {20, 25, 5, 100}), {1, 4});
  CHECK(z.classes == std::vector<ClassId>{3, 3, 1, 5});

  // equidistant to centroids 2 and 5
  CentroidModel tie{5, 2, {9, 9, 0, 1, 7, 7, 8, 8, 0, -1}};
  CHECK(predict(tie, matrix(2, {0, 0}), {1, 1}).classes[0] == 2);
}

TEST_CASE("missing class and unlabeled training pixel") {
  const auto f = matrix(1, {1, 2, 3});
  PixelMask m = make_mask({1, 3});
  m.mask = {1, 1, 0};
  CHECK(test::error_of([&] { train_centroid(f, make_label_map({1, 3}, {1, 1, 2}), m); }) ==
        ErrorCode::EmptyClass);
  m.mask = {1, 1, 1};
  CHECK(test::error_of([&] { train_centroid(f, make_label_map({1, 3}, {1, 0, 2}), m); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("softmax gradient matches central differences") {
  SplitMix64 rng(2024);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t d = 1 + rng.below(6), k = 3;
    FeatureMatrix f{5, d, std::vector<float>(5 * d)};
    for (auto& v : f.values) v = static_cast<float>(rng.uniform() * 4.0 - 2.0);
    std::vector<ClassId> targets(5);
    for (auto& c : targets) c = static_cast<ClassId>(1 + rng.below(k));
    std::vector<double> w(k * (d + 1));
    for (auto& v : w) v = rng.uniform() * 2.0 - 1.0;
    const double l2 = rng.uniform() * 0.1;
    const std::vector<std::size_t> rows{0, 1, 2, 3, 4};
    std::vector<double> grad;
    softmax_objective(w, k, f, rows, targets, l2, &grad);
    for (std::size_t i = 0; i < w.size(); ++i) {
      auto plus = w, minus = w;
      plus[i] += 1e-4;
      minus[i] -= 1e-4;
      const double fd = (softmax_objective(plus, k, f, rows, targets, l2, nullptr) -
                         softmax_objective(minus, k, f, rows, targets, l2, nullptr)) /
                        2e-4;
      const double rel = std::abs(fd - grad[i]) / std::max(1e-8, std::max(std::abs(fd), std::abs(grad[i])));
      worst = std::max(worst, rel);
    }
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("objective at zero weights is log(k)") {
  const auto f = matrix(2, {1, 2, 3, 4});
  const std::vector<ClassId> t{1, 3};
  CHECK(softmax_objective(std::vector<double>(9, 0.0), 3, f, {0, 1}, t, 0.5, nullptr) ==
        doctest::Approx(std::log(3.0)));
}

TEST_CASE("softmax: separable 1-D toy reaches full training accuracy") {
  std::vector<float> x;
  std::vector<ClassId> y;
  for (int i = 0; i < 20; ++i) {
    x.push_back(-1.0f);
    y.push_back(1);
    x.push_back(1.0f);
    y.push_back(2);
  }
  const auto f = matrix(1, x);
  const auto labels = make_label_map({1, 40}, y);
  const auto mask = make_mask({1, 40}, true);
  const auto m = train_softmax(f, labels, mask, {});
  CHECK(accuracy(predict(m, f, {1, 40}), labels, mask) == 1.0);
  CHECK(m.loss_history.size() == 41);
  CHECK(m.loss_history.back() < m.loss_history.front());
}

TEST_CASE("softmax: zero epochs is the zero initialization") {
  const auto f = matrix(1, {-1, 1, 2});
  const auto labels = make_label_map({1, 3}, {1, 2, 3});
  SoftmaxHyper h;
  h.epochs = 0;
  const auto m = train_softmax(f, labels, make_mask({1, 3}, true), h);
  CHECK(m.weights == std::vector<float>(6, 0.0f));
  CHECK(m.loss_history.size() == 1);
  CHECK(m.loss_history[0] == doctest::Approx(std::log(3.0)));
  // uniform probabilities: every logit ties, so the smallest class wins
  CHECK(predict(m, f, {1, 3}).classes == std::vector<ClassId>{1, 1, 1});
}

TEST_CASE("softmax: divergence is reported as NonFiniteLoss with the epoch") {
  const auto f = matrix(1, {-1e30f, 1e30f});
  const auto labels = make_label_map({1, 2}, {1, 2});
  SoftmaxHyper h;
  h.learning_rate = 1e30;
  try {
    train_softmax(f, labels, make_mask({1, 2}, true), h);
    FAIL("expected NonFiniteLoss");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFiniteLoss);
    CHECK(std::string(e.what()).find("epoch") != std::string::npos);
  }
}

TEST_CASE("end-to-end training on a synthetic scene") {
  const auto scene = testing::make_scene({});
  const auto s = split(scene.labels, {0.2, 1, true, 1});
  for (auto kind : {ModelKind::Centroid, ModelKind::Softmax}) {
    TrainConfig cfg;
    cfg.kind = kind;
    const auto model = train(scene.cube, scene.labels, s.train, cfg);
    const auto z = predict(model, scene.cube);
    CHECK(accuracy(z, scene.labels, s.test) > 0.9);
    for (auto c : z.classes) CHECK((c >= 1 && c <= scene.labels.num_classes));
  }
}

TEST_CASE("centroid predictions are invariant to reflectance scale") {
  const auto scene = testing::make_scene({});
  const auto s = split(scene.labels, {0.1, 3, true, 1});
  HyperCube scaled = scene.cube;
  for (auto& v : scaled.data) v *= 4.0f;  // power of two keeps z-scores bit-identical
  TrainConfig cfg;
  cfg.kind = ModelKind::Centroid;
  const auto a = predict(train(scene.cube, scene.labels, s.train, cfg), scene.cube);
  const auto b = predict(train(scaled, scene.labels, s.train, cfg), scaled);
  CHECK(a == b);

  HyperCube odd = scene.cube;
  for (auto& v : odd.data) v *= 3.7f;
  const auto c = predict(train(odd, scene.labels, s.train, cfg), odd);
  std::size_t differ = 0;
  for (std::size_t p = 0; p < a.classes.size(); ++p) differ += a.classes[p] != c.classes[p];
  CHECK(differ <= a.classes.size() / 1000);
}

TEST_CASE("training is deterministic across thread counts") {
  const auto scene = testing::make_scene({});
  const auto s = split(scene.labels, {0.2, 8, true, 1});
  TrainConfig cfg;
  cfg.softmax.seed = 5;
  set_thread_count(1);
  const auto a = train(scene.cube, scene.labels, s.train, cfg);
  set_thread_count(7);
  const auto b = train(scene.cube, scene.labels, s.train, cfg);
  const auto zb = predict(b, scene.cube);
  set_thread_count(0);
  CHECK(a == b);
  CHECK(predict(a, scene.cube) == zb);
  cfg.softmax.seed = 6;
  CHECK_FALSE(train(scene.cube, scene.labels, s.train, cfg) == a);
}

TEST_CASE("model files round-trip and predict identically") {
  test::TempDir dir;
  const auto scene = testing::make_scene({});
  const auto s = split(scene.labels, {0.2, 8, true, 1});
  for (auto kind : {ModelKind::Centroid, ModelKind::Softmax}) {
    for (bool standardize : {true, false}) {
      TrainConfig cfg;
      cfg.kind = kind;
      cfg.features.standardize = standardize;
      cfg.features.patch_radius = 1;
      const auto m = train(scene.cube, scene.labels, s.train, cfg);
      write_model(m, dir.path() / "m.hsw");
      const auto back = read_model(dir.path() / "m.hsw");
      CHECK(back == m);
      CHECK(predict(back, scene.cube) == predict(m, scene.cube));
      CHECK(encode_model(back) == encode_model(m));
    }
  }
  const auto bytes = encode_model(train(scene.cube, scene.labels, s.train, {}));
  CHECK(bytes.rfind(R"({"magic":"HSW1")", 0) == 0);
  CHECK(test::error_of([&] { decode_model(bytes.substr(0, bytes.size() - 1)); }) ==
        ErrorCode::TruncatedPayload);
}

TEST_CASE("importing a class map") {
  test::TempDir dir;
  const auto labels = make_label_map({2, 2}, {1, 0, 2, 3});
  const ClassMap z{2, 2, {1, 2, 2, 3}, 3};
  io::write_classmap(z, dir.path() / "z.hsp");
  CHECK(import_classmap(dir.path() / "z.hsp", labels) == z);
  CHECK(test::error_of([&] { import_classmap(dir.path() / "z.hsp", make_label_map({1, 4}, {1, 1, 2, 3})); }) ==
        ErrorCode::DimensionMismatch);
  const ClassMap wide{2, 2, {1, 4, 2, 3}, 4};
  io::write_classmap(wide, dir.path() / "w.hsp");
  CHECK(test::error_of([&] { import_classmap(dir.path() / "w.hsp", labels); }) == ErrorCode::LabelOutOfRange);
}
