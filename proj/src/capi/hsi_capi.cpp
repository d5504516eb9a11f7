#include "hsi/hsi.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include <json.hpp>

#include "../core/classifier.hpp"
#include "../core/experiment.hpp"
#include "../core/io.hpp"
#include "../core/metrics.hpp"
#include "../core/parallel.hpp"
#include "../core/refine.hpp"
#include "../core/render.hpp"
#include "../core/sampling.hpp"
#include "../core/superpixel.hpp"

struct hsi_cube { hsi::HyperCube value; };
struct hsi_labels { hsi::LabelMap value; };
struct hsi_classmap { hsi::ClassMap value; };
struct hsi_superpixels { hsi::SuperpixelMap value; };
struct hsi_mask { hsi::PixelMask value; };
struct hsi_rgb { hsi::RgbImage value; };
struct hsi_affinity { hsi::AffinityMap value; };
struct hsi_model { hsi::Classifier value; };

namespace {

thread_local std::string t_last_error;

hsi_status to_status(hsi::ErrorCode code) { return static_cast<hsi_status>(static_cast<int>(code)); }

hsi_status record(hsi_status status, std::string message) {
  t_last_error = std::move(message);
  return status;
}

template <typename Fn>
hsi_status guarded(Fn&& fn) {
  try {
    t_last_error.clear();
    fn();
    return HSI_OK;
  } catch (const hsi::Error& e) {
    return record(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return record(HSI_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return record(HSI_ERR_INTERNAL, e.what());
  } catch (...) {
    return record(HSI_ERR_INTERNAL, "unknown exception");
  }
}

void require(const void* p, const char* what) {
  if (!p) hsi::fail(hsi::ErrorCode::InvalidArgument, std::string(what) + " is NULL");
}

template <typename Handle, typename Value>
void emit(Handle** out, Value&& v) {
  require(out, "output handle");
  *out = new Handle{std::forward<Value>(v)};
}

char* copy_string(const std::string& s) {
  auto* buf = static_cast<char*>(std::malloc(s.size() + 1));
  if (!buf) throw std::bad_alloc();
  std::memcpy(buf, s.c_str(), s.size() + 1);
  return buf;
}

void copy_bytes(const std::string& bytes, uint8_t** out, size_t* size) {
  require(out, "output buffer");
  require(size, "output size");
  auto* buf = static_cast<uint8_t*>(std::malloc(bytes.empty() ? 1 : bytes.size()));
  if (!buf) throw std::bad_alloc();
  std::memcpy(buf, bytes.data(), bytes.size());
  *out = buf;
  *size = bytes.size();
}

std::vector<hsi::Color> palette_from(const uint8_t* palette, size_t colors) {
  if (!palette) return hsi::default_palette();
  std::vector<hsi::Color> out(colors);
  for (size_t i = 0; i < colors; ++i) out[i] = {palette[3 * i], palette[3 * i + 1], palette[3 * i + 2]};
  return out;
}

}  // namespace

extern "C" {

const char* hsi_version(void) { return "1.0.0"; }

const char* hsi_last_error(void) { return t_last_error.c_str(); }

const char* hsi_status_name(hsi_status status) {
  if (status == HSI_OK) return "Ok";
  if (status < HSI_ERR_DIMENSION_MISMATCH || status > HSI_ERR_INTERNAL) return "Unknown";
  return hsi::error_code_name(static_cast<hsi::ErrorCode>(status)).data();
}

void hsi_set_threads(unsigned threads) { hsi::set_thread_count(threads); }
unsigned hsi_get_threads(void) { return hsi::thread_count(); }
void hsi_free_buffer(void* buffer) { std::free(buffer); }

// ---- cubes

hsi_status hsi_cube_create(size_t height, size_t width, size_t bands, const float* data, hsi_cube** out) {
  return guarded([&] {
    require(data, "data");
    hsi::HyperCube cube{height, width, bands, std::vector<float>(data, data + height * width * bands), {}};
    hsi::validate(cube);
    emit(out, std::move(cube));
  });
}

hsi_status hsi_cube_read(const char* path, hsi_cube** out) {
  return guarded([&] {
    require(path, "path");
    emit(out, hsi::io::read_cube(path));
  });
}

hsi_status hsi_cube_write(const hsi_cube* cube, const char* path) {
  return guarded([&] {
    require(cube, "cube");
    require(path, "path");
    hsi::io::write_cube(cube->value, path);
  });
}

void hsi_cube_dims(const hsi_cube* cube, size_t* height, size_t* width, size_t* bands) {
  if (!cube) return;
  if (height) *height = cube->value.height;
  if (width) *width = cube->value.width;
  if (bands) *bands = cube->value.bands;
}

const float* hsi_cube_data(const hsi_cube* cube) { return cube ? cube->value.data.data() : nullptr; }
void hsi_cube_free(hsi_cube* cube) { delete cube; }

// ---- labels

hsi_status hsi_labels_create(size_t height, size_t width, const uint16_t* labels, hsi_labels** out) {
  return guarded([&] {
    require(labels, "labels");
    auto map = hsi::make_label_map({height, width}, std::vector<uint16_t>(labels, labels + height * width));
    hsi::validate(map);
    emit(out, std::move(map));
  });
}

hsi_status hsi_labels_read(const char* path, hsi_labels** out) {
  return guarded([&] {
    require(path, "path");
    emit(out, hsi::io::read_labels(path));
  });
}

hsi_status hsi_labels_write(const hsi_labels* labels, const char* path) {
  return guarded([&] {
    require(labels, "labels");
    require(path, "path");
    hsi::io::write_labels(labels->value, path);
  });
}

void hsi_labels_dims(const hsi_labels* labels, size_t* height, size_t* width, size_t* num_classes) {
  if (!labels) return;
  if (height) *height = labels->value.height;
  if (width) *width = labels->value.width;
  if (num_classes) *num_classes = labels->value.num_classes;
}

const uint16_t* hsi_labels_data(const hsi_labels* labels) { return labels ? labels->value.labels.data() : nullptr; }

void hsi_labels_histogram(const hsi_labels* labels, uint64_t* counts) {
  if (!labels || !counts) return;
  std::fill(counts, counts + labels->value.num_classes + 1, 0);
  for (auto l : labels->value.labels) ++counts[l];
}

void hsi_labels_free(hsi_labels* labels) { delete labels; }

hsi_status hsi_validate(const hsi_cube* cube, const hsi_labels* labels) {
  return guarded([&] {
    require(cube, "cube");
    require(labels, "labels");
    hsi::validate(cube->value, labels->value);
  });
}

// ---- class maps

hsi_status hsi_classmap_create(size_t height, size_t width, size_t num_classes, const uint16_t* classes,
                               hsi_classmap** out) {
  return guarded([&] {
    require(classes, "classes");
    hsi::ClassMap map{height, width, std::vector<uint16_t>(classes, classes + height * width), num_classes};
    hsi::validate(map);
    emit(out, std::move(map));
  });
}

hsi_status hsi_classmap_read(const char* path, hsi_classmap** out) {
  return guarded([&] {
    require(path, "path");
    emit(out, hsi::io::read_classmap(path));
  });
}

hsi_status hsi_classmap_import(const char* path, const hsi_labels* labels, hsi_classmap** out) {
  return guarded([&] {
    require(path, "path");
    require(labels, "labels");
    emit(out, hsi::import_classmap(path, labels->value));
  });
}

hsi_status hsi_classmap_write(const hsi_classmap* map, const char* path) {
  return guarded([&] {
    require(map, "class map");
    require(path, "path");
    hsi::io::write_classmap(map->value, path);
  });
}

void hsi_classmap_dims(const hsi_classmap* map, size_t* height, size_t* width, size_t* num_classes) {
  if (!map) return;
  if (height) *height = map->value.height;
  if (width) *width = map->value.width;
  if (num_classes) *num_classes = map->value.num_classes;
}

const uint16_t* hsi_classmap_data(const hsi_classmap* map) { return map ? map->value.classes.data() : nullptr; }
void hsi_classmap_free(hsi_classmap* map) { delete map; }

// ---- masks

hsi_status hsi_mask_create(size_t height, size_t width, const uint8_t* values, hsi_mask** out) {
  return guarded([&] {
    require(values, "values");
    hsi::PixelMask m{height, width, std::vector<uint8_t>(values, values + height * width)};
    for (auto& v : m.mask) v = v ? 1 : 0;
    hsi::validate(m);
    emit(out, std::move(m));
  });
}

hsi_status hsi_mask_read(const char* path, hsi_mask** out) {
  return guarded([&] {
    require(path, "path");
    emit(out, hsi::io::read_mask(path));
  });
}

hsi_status hsi_mask_write(const hsi_mask* mask, const char* path) {
  return guarded([&] {
    require(mask, "mask");
    require(path, "path");
    hsi::io::write_mask(mask->value, path);
  });
}

size_t hsi_mask_count(const hsi_mask* mask) { return mask ? mask->value.count() : 0; }
const uint8_t* hsi_mask_data(const hsi_mask* mask) { return mask ? mask->value.mask.data() : nullptr; }
void hsi_mask_free(hsi_mask* mask) { delete mask; }

hsi_split_params hsi_split_defaults(void) {
  const hsi::SplitSpec d;
  return {d.fraction, d.seed, d.stratified ? 1 : 0, d.min_per_class};
}

hsi_status hsi_split(const hsi_labels* labels, const hsi_split_params* params, hsi_mask** train, hsi_mask** test) {
  return guarded([&] {
    require(labels, "labels");
    require(params, "params");
    require(train, "train output");
    require(test, "test output");
    auto s = hsi::split(labels->value, {params->fraction, params->seed, params->stratified != 0, params->min_per_class});
    auto* tr = new hsi_mask{std::move(s.train)};
    *test = new hsi_mask{std::move(s.test)};
    *train = tr;
  });
}

// ---- classifiers

hsi_train_params hsi_train_defaults(void) {
  const hsi::TrainConfig d;
  return {HSI_MODEL_SOFTMAX,     d.features.patch_radius, d.features.standardize ? 1 : 0, d.softmax.epochs,
          d.softmax.batch_size,  d.softmax.learning_rate, d.softmax.l2,                   d.softmax.seed};
}

hsi_status hsi_model_train(const hsi_cube* cube, const hsi_labels* labels, const hsi_mask* train_mask,
                           const hsi_train_params* params, hsi_model** out) {
  return guarded([&] {
    require(cube, "cube");
    require(labels, "labels");
    require(train_mask, "train mask");
    require(params, "params");
    if (params->kind != HSI_MODEL_CENTROID && params->kind != HSI_MODEL_SOFTMAX) {
      hsi::fail(hsi::ErrorCode::InvalidArgument, "unknown model kind");
    }
    hsi::TrainConfig cfg;
    cfg.kind = params->kind == HSI_MODEL_CENTROID ? hsi::ModelKind::Centroid : hsi::ModelKind::Softmax;
    cfg.features = {params->patch_radius, params->standardize != 0};
    cfg.softmax = {params->learning_rate, params->epochs, params->batch_size, params->l2, params->seed};
    emit(out, hsi::train(cube->value, labels->value, train_mask->value, cfg));
  });
}

hsi_status hsi_model_predict(const hsi_model* model, const hsi_cube* cube, hsi_classmap** out) {
  return guarded([&] {
    require(model, "model");
    require(cube, "cube");
    emit(out, hsi::predict(model->value, cube->value));
  });
}

hsi_status hsi_model_read(const char* path, hsi_model** out) {
  return guarded([&] {
    require(path, "path");
    emit(out, hsi::read_model(path));
  });
}

hsi_status hsi_model_write(const hsi_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    hsi::write_model(model->value, path);
  });
}

size_t hsi_model_loss_history(const hsi_model* model, double* out, size_t capacity) {
  if (!model) return 0;
  const auto* s = std::get_if<hsi::SoftmaxModel>(&model->value.model);
  if (!s) return 0;
  for (size_t i = 0; out && i < capacity && i < s->loss_history.size(); ++i) out[i] = s->loss_history[i];
  return s->loss_history.size();
}

void hsi_model_free(hsi_model* model) { delete model; }

// ---- rendering

hsi_status hsi_cube_to_rgb(const hsi_cube* cube, size_t band_r, size_t band_g, size_t band_b, hsi_rgb** out) {
  return guarded([&] {
    require(cube, "cube");
    emit(out, hsi::cube_to_rgb(cube->value, {band_r, band_g, band_b}));
  });
}

void hsi_default_rgb_bands(size_t bands, size_t* band_r, size_t* band_g, size_t* band_b) {
  const auto b = hsi::default_rgb_bands(bands);
  if (band_r) *band_r = b.red;
  if (band_g) *band_g = b.green;
  if (band_b) *band_b = b.blue;
}

void hsi_rgb_dims(const hsi_rgb* image, size_t* height, size_t* width) {
  if (!image) return;
  if (height) *height = image->value.height;
  if (width) *width = image->value.width;
}

const uint8_t* hsi_rgb_data(const hsi_rgb* image) { return image ? image->value.rgb.data() : nullptr; }

hsi_status hsi_rgb_write_png(const hsi_rgb* image, const char* path) {
  return guarded([&] {
    require(image, "image");
    require(path, "path");
    hsi::io::write_file(path, hsi::encode_png(image->value));
  });
}

void hsi_rgb_free(hsi_rgb* image) { delete image; }

hsi_status hsi_classmap_render_png(const hsi_classmap* map, const uint8_t* palette, size_t colors, uint8_t** png,
                                   size_t* size) {
  return guarded([&] {
    require(map, "class map");
    copy_bytes(hsi::render_class_map(map->value, palette_from(palette, colors)), png, size);
  });
}

hsi_status hsi_labels_render_png(const hsi_labels* labels, const uint8_t* palette, size_t colors, uint8_t** png,
                                 size_t* size) {
  return guarded([&] {
    require(labels, "labels");
    copy_bytes(hsi::render_label_map(labels->value, palette_from(palette, colors)), png, size);
  });
}

size_t hsi_default_palette(uint8_t* out, size_t capacity) {
  const auto& p = hsi::default_palette();
  for (size_t i = 0; out && i < p.size() && 3 * i + 2 < capacity; ++i) {
    out[3 * i] = p[i][0];
    out[3 * i + 1] = p[i][1];
    out[3 * i + 2] = p[i][2];
  }
  return p.size() * 3;
}

// ---- superpixels

hsi_slic_params hsi_slic_defaults(void) {
  const hsi::SlicConfig d;
  return {d.n, d.compactness, d.iterations, d.seed};
}

hsi_status hsi_superpixels_slic(const hsi_rgb* image, const hsi_slic_params* params, hsi_superpixels** out) {
  return guarded([&] {
    require(image, "image");
    require(params, "params");
    emit(out, hsi::slic(image->value, {params->n, params->compactness, params->iterations, params->seed}));
  });
}

hsi_status hsi_affinity_create(size_t height, size_t width, const float* right, const float* down,
                               hsi_affinity** out) {
  return guarded([&] {
    require(right, "right");
    require(down, "down");
    const size_t n = height * width;
    hsi::AffinityMap aff{height, width, std::vector<float>(right, right + n), std::vector<float>(down, down + n)};
    hsi::validate(aff);
    emit(out, std::move(aff));
  });
}

hsi_status hsi_affinity_read(const char* path, hsi_affinity** out) {
  return guarded([&] {
    require(path, "path");
    emit(out, hsi::io::read_affinity(path));
  });
}

hsi_status hsi_affinity_write(const hsi_affinity* aff, const char* path) {
  return guarded([&] {
    require(aff, "affinity");
    require(path, "path");
    hsi::io::write_affinity(aff->value, path);
  });
}

void hsi_affinity_free(hsi_affinity* aff) { delete aff; }

hsi_status hsi_superpixels_affinity(const hsi_affinity* aff, size_t n, uint64_t seed, hsi_superpixels** out) {
  return guarded([&] {
    require(aff, "affinity");
    emit(out, hsi::affinity_superpixels(aff->value, n, seed));
  });
}

hsi_status hsi_superpixels_create(size_t height, size_t width, const uint32_t* ids, hsi_superpixels** out) {
  return guarded([&] {
    require(ids, "ids");
    if (height == 0 || width == 0) hsi::fail(hsi::ErrorCode::DimensionMismatch, "empty superpixel map");
    emit(out, hsi::compact_segments({height, width}, std::vector<uint32_t>(ids, ids + height * width)));
  });
}

hsi_status hsi_superpixels_read(const char* path, hsi_superpixels** out) {
  return guarded([&] {
    require(path, "path");
    emit(out, hsi::io::read_superpixels(path));
  });
}

hsi_status hsi_superpixels_write(const hsi_superpixels* sp, const char* path) {
  return guarded([&] {
    require(sp, "superpixels");
    require(path, "path");
    hsi::io::write_superpixels(sp->value, path);
  });
}

hsi_status hsi_superpixels_enforce_connectivity(const hsi_superpixels* sp, hsi_superpixels** out) {
  return guarded([&] {
    require(sp, "superpixels");
    emit(out, hsi::enforce_connectivity(sp->value));
  });
}

void hsi_superpixels_dims(const hsi_superpixels* sp, size_t* height, size_t* width, size_t* segments) {
  if (!sp) return;
  if (height) *height = sp->value.height;
  if (width) *width = sp->value.width;
  if (segments) *segments = sp->value.num_segments;
}

const uint32_t* hsi_superpixels_data(const hsi_superpixels* sp) { return sp ? sp->value.segment_ids.data() : nullptr; }

hsi_status hsi_superpixels_overlay_png(const hsi_superpixels* sp, const hsi_rgb* image, const char* path) {
  return guarded([&] {
    require(sp, "superpixels");
    require(image, "image");
    require(path, "path");
    hsi::io::write_file(path, hsi::encode_png(hsi::overlay_boundaries(image->value, sp->value)));
  });
}

void hsi_superpixels_free(hsi_superpixels* sp) { delete sp; }

// ---- refinement

hsi_status hsi_refine(const hsi_classmap* z, const hsi_superpixels* sp, hsi_classmap** out) {
  return guarded([&] {
    require(z, "class map");
    require(sp, "superpixels");
    emit(out, hsi::refine(z->value, sp->value));
  });
}

hsi_status hsi_pin_training_labels(const hsi_classmap* z, const hsi_labels* truth, const hsi_mask* train_mask,
                                   hsi_classmap** out) {
  return guarded([&] {
    require(z, "class map");
    require(truth, "labels");
    require(train_mask, "train mask");
    emit(out, hsi::pin_training_labels(z->value, truth->value, train_mask->value));
  });
}

hsi_status hsi_refinement_delta(const hsi_classmap* z, const hsi_classmap* y, const hsi_labels* truth,
                                const hsi_mask* test_mask, const hsi_superpixels* sp, hsi_delta* out, char** json) {
  return guarded([&] {
    require(z, "raw class map");
    require(y, "refined class map");
    require(truth, "labels");
    require(test_mask, "test mask");
    require(sp, "superpixels");
    require(out, "output");
    const auto d = hsi::refinement_delta(z->value, y->value, truth->value, test_mask->value, sp->value);
    hsi_delta r{};
    r.test_pixels = d.test_pixels;
    r.correct_before = d.correct_before;
    r.correct_after = d.correct_after;
    r.oa_before = d.oa_before;
    r.oa_after = d.oa_after;
    r.changed_pixels = d.changed_pixels;
    r.segments_with_flips = d.flips.size();
    for (const auto& f : d.flips) {
      r.fixed += f.fixed;
      r.broken += f.broken;
    }
    if (json) {
      nlohmann::ordered_json j;
      j["test_pixels"] = d.test_pixels;
      j["correct_before"] = d.correct_before;
      j["correct_after"] = d.correct_after;
      j["oa_before"] = d.oa_before;
      j["oa_after"] = d.oa_after;
      j["oa_delta"] = d.oa_after - d.oa_before;
      j["changed_pixels"] = d.changed_pixels;
      j["fixed"] = r.fixed;
      j["broken"] = r.broken;
      auto flips = nlohmann::ordered_json::array();
      for (const auto& f : d.flips) flips.push_back({{"segment", f.segment}, {"fixed", f.fixed}, {"broken", f.broken}});
      j["segment_flips"] = std::move(flips);
      *json = copy_string(j.dump(2));
    }
    *out = r;
  });
}

// ---- evaluation

hsi_status hsi_evaluate(const hsi_classmap* pred, const hsi_labels* truth, const hsi_mask* mask, hsi_metrics* out) {
  return guarded([&] {
    require(pred, "class map");
    require(truth, "labels");
    require(mask, "mask");
    require(out, "output");
    const auto a = hsi::confusion_and_kappa(pred->value, truth->value, mask->value);
    *out = {a.oa, a.kappa, a.degenerate ? 1 : 0, static_cast<size_t>(a.confusion.total()),
            static_cast<size_t>(a.confusion.trace())};
  });
}

hsi_status hsi_evaluate_json(const hsi_classmap* pred, const hsi_labels* truth, const hsi_mask* mask, char** json) {
  return guarded([&] {
    require(pred, "class map");
    require(truth, "labels");
    require(mask, "mask");
    require(json, "output");
    const auto a = hsi::confusion_and_kappa(pred->value, truth->value, mask->value);
    nlohmann::ordered_json j;
    j["oa"] = a.oa;
    j["kappa"] = a.kappa;
    j["degenerate_marginals"] = a.degenerate;
    j["test_pixels"] = a.confusion.total();
    j["correct"] = a.confusion.trace();
    j["per_class_accuracy"] = a.per_class_accuracy;
    auto rows = nlohmann::ordered_json::array();
    for (size_t t = 1; t <= a.confusion.num_classes; ++t) {
      std::vector<uint64_t> row;
      for (size_t p = 1; p <= a.confusion.num_classes; ++p) row.push_back(a.confusion.at(t, p));
      rows.push_back(row);
    }
    j["confusion"] = std::move(rows);
    *json = copy_string(j.dump(2));
  });
}

// ---- experiments

hsi_status hsi_experiment_run(const char* config_path, const char* output_dir, char** table) {
  return guarded([&] {
    require(config_path, "config path");
    auto cfg = hsi::load_experiment_config(config_path);
    if (output_dir) cfg.output_dir = output_dir;
    const auto result = hsi::run_experiment(cfg);
    hsi::write_experiment_outputs(cfg, result);
    if (table) *table = copy_string(hsi::format_table(result.table));
  });
}

}  // extern "C"
