#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "hsi/hsi.h"

namespace {

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / (std::string("hsi_capi_") + name);
}

}  // namespace

TEST_CASE("status names and version") {
  CHECK(std::string(hsi_status_name(HSI_OK)) == "Ok");
  CHECK(std::string(hsi_status_name(HSI_ERR_TRUNCATED_PAYLOAD)) == "TruncatedPayload");
  CHECK(std::string(hsi_status_name(HSI_ERR_INTERNAL)) == "Internal");
  CHECK(std::string(hsi_version()).size() > 0);
}

TEST_CASE("errors come back as status codes with a message") {
  hsi_cube* cube = nullptr;
  const auto missing = temp_file("definitely_missing.hsc");
  CHECK(hsi_cube_read(missing.c_str(), &cube) == HSI_ERR_IO_FAILURE);
  CHECK(cube == nullptr);
  CHECK(std::string(hsi_last_error()).find("definitely_missing.hsc") != std::string::npos);
  CHECK(hsi_cube_read(nullptr, &cube) == HSI_ERR_INVALID_ARGUMENT);

  const float data[4] = {0, 1, 2, 3};
  const uint16_t labels[9] = {0};
  hsi_labels* l = nullptr;
  REQUIRE(hsi_cube_create(2, 2, 1, data, &cube) == HSI_OK);
  REQUIRE(hsi_labels_create(3, 3, labels, &l) == HSI_OK);
  CHECK(hsi_validate(cube, l) == HSI_ERR_DIMENSION_MISMATCH);
  hsi_cube_free(cube);
  hsi_labels_free(l);
}

TEST_CASE("refine through the C API") {
  const uint16_t z[6] = {1, 2, 2, 3, 3, 1};
  const uint32_t ids[6] = {7, 7, 7, 4, 4, 4};
  hsi_classmap* map = nullptr;
  hsi_superpixels* sp = nullptr;
  REQUIRE(hsi_classmap_create(2, 3, 3, z, &map) == HSI_OK);
  REQUIRE(hsi_superpixels_create(2, 3, ids, &sp) == HSI_OK);
  size_t segments = 0;
  hsi_superpixels_dims(sp, nullptr, nullptr, &segments);
  CHECK(segments == 2);
  hsi_classmap* y = nullptr;
  REQUIRE(hsi_refine(map, sp, &y) == HSI_OK);
  const uint16_t* out = hsi_classmap_data(y);
  CHECK(std::vector<uint16_t>(out, out + 6) == std::vector<uint16_t>{2, 2, 2, 3, 3, 3});

  const uint16_t truth[6] = {2, 2, 1, 3, 1, 0};
  const uint8_t test[6] = {1, 1, 1, 1, 1, 0};
  hsi_labels* labels = nullptr;
  hsi_mask* mask = nullptr;
  REQUIRE(hsi_labels_create(2, 3, truth, &labels) == HSI_OK);
  REQUIRE(hsi_mask_create(2, 3, test, &mask) == HSI_OK);
  hsi_delta delta{};
  char* json = nullptr;
  REQUIRE(hsi_refinement_delta(map, y, labels, mask, sp, &delta, &json) == HSI_OK);
  // before: 2,2,2,3,3 vs 2,2,1,3,1 -> hits at 1,4 ... recount: z = 1,2,2,3,3
  CHECK(delta.test_pixels == 5);
  CHECK(delta.correct_before == 2);  // pixels 1 and 3
  CHECK(delta.correct_after == 3);   // pixels 0, 1 and 3
  CHECK(delta.fixed == 1);
  CHECK(delta.broken == 0);
  REQUIRE(json != nullptr);
  CHECK(std::string(json).find("\"correct_after\": 3") != std::string::npos);
  hsi_free_buffer(json);

  hsi_metrics m{};
  REQUIRE(hsi_evaluate(y, labels, mask, &m) == HSI_OK);
  CHECK(m.oa == doctest::Approx(0.6));
  CHECK(m.correct == 3);

  hsi_classmap_free(map);
  hsi_classmap_free(y);
  hsi_superpixels_free(sp);
  hsi_labels_free(labels);
  hsi_mask_free(mask);
}

TEST_CASE("split, train, predict and file round-trip") {
  const size_t h = 12, w = 12, b = 3, n = h * w;
  std::vector<float> cube_data(n * b);
  std::vector<uint16_t> labels(n);
  for (size_t p = 0; p < n; ++p) {
    const uint16_t c = (p % w) < 6 ? 1 : 2;
    labels[p] = c;
    for (size_t k = 0; k < b; ++k) cube_data[k * n + p] = static_cast<float>(c * (k + 1)) + 0.01f * (p % 7);
  }
  hsi_cube* cube = nullptr;
  hsi_labels* l = nullptr;
  REQUIRE(hsi_cube_create(h, w, b, cube_data.data(), &cube) == HSI_OK);
  REQUIRE(hsi_labels_create(h, w, labels.data(), &l) == HSI_OK);

  hsi_split_params sp = hsi_split_defaults();
  sp.fraction = 0.25;
  sp.seed = 3;
  hsi_mask *train = nullptr, *test = nullptr;
  REQUIRE(hsi_split(l, &sp, &train, &test) == HSI_OK);
  CHECK(hsi_mask_count(train) == 36);
  CHECK(hsi_mask_count(test) == 108);

  hsi_train_params tp = hsi_train_defaults();
  CHECK(tp.kind == HSI_MODEL_SOFTMAX);
  CHECK(tp.epochs == 40);
  CHECK(tp.batch_size == 16);
  CHECK(tp.learning_rate == 0.001);
  tp.patch_radius = 1;
  hsi_model* model = nullptr;
  REQUIRE(hsi_model_train(cube, l, train, &tp, &model) == HSI_OK);
  CHECK(hsi_model_loss_history(model, nullptr, 0) == 41);

  const auto path = temp_file("model.hsw");
  REQUIRE(hsi_model_write(model, path.c_str()) == HSI_OK);
  hsi_model* back = nullptr;
  REQUIRE(hsi_model_read(path.c_str(), &back) == HSI_OK);
  hsi_classmap *z1 = nullptr, *z2 = nullptr;
  REQUIRE(hsi_model_predict(model, cube, &z1) == HSI_OK);
  REQUIRE(hsi_model_predict(back, cube, &z2) == HSI_OK);
  CHECK(std::memcmp(hsi_classmap_data(z1), hsi_classmap_data(z2), n * 2) == 0);
  hsi_metrics m{};
  REQUIRE(hsi_evaluate(z1, l, test, &m) == HSI_OK);
  CHECK(m.oa == 1.0);
  std::filesystem::remove(path);

  hsi_rgb* rgb = nullptr;
  size_t r = 0, g = 0, bl = 0;
  hsi_default_rgb_bands(b, &r, &g, &bl);
  REQUIRE(hsi_cube_to_rgb(cube, r, g, bl, &rgb) == HSI_OK);
  hsi_slic_params slic = hsi_slic_defaults();
  CHECK(slic.n == 10000);
  slic.n = 9;
  hsi_superpixels* segs = nullptr;
  REQUIRE(hsi_superpixels_slic(rgb, &slic, &segs) == HSI_OK);
  CHECK(hsi_cube_to_rgb(cube, 0, 1, 3, &rgb) == HSI_ERR_BAND_OUT_OF_RANGE);

  uint8_t* png = nullptr;
  size_t size = 0;
  REQUIRE(hsi_classmap_render_png(z1, nullptr, 0, &png, &size) == HSI_OK);
  CHECK(size > 8);
  CHECK(std::memcmp(png, "\x89PNG", 4) == 0);
  hsi_free_buffer(png);
  const uint8_t one_color[3] = {1, 2, 3};
  CHECK(hsi_classmap_render_png(z1, one_color, 1, &png, &size) == HSI_ERR_PALETTE_TOO_SMALL);

  hsi_superpixels_free(segs);
  hsi_rgb_free(rgb);
  hsi_classmap_free(z1);
  hsi_classmap_free(z2);
  hsi_model_free(model);
  hsi_model_free(back);
  hsi_mask_free(train);
  hsi_mask_free(test);
  hsi_labels_free(l);
  hsi_cube_free(cube);
}

TEST_CASE("thread setting round-trips") {
  hsi_set_threads(2);
  CHECK(hsi_get_threads() == 2);
  hsi_set_threads(0);
}
