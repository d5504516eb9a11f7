// hsi: command-line front end over the libhsi C API.
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hsi/hsi.h"

namespace {

using json = nlohmann::ordered_json;

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

struct Failure {
  hsi_status status;
  std::string message;
};

void check(hsi_status s) {
  if (s != HSI_OK) throw Failure{s, hsi_last_error()};
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
template <typename T, void (*Free)(T*)>
using Owned = std::unique_ptr<T, Deleter<T, Free>>;

using Cube = Owned<hsi_cube, hsi_cube_free>;
using Labels = Owned<hsi_labels, hsi_labels_free>;
using ClassMap = Owned<hsi_classmap, hsi_classmap_free>;
using Superpixels = Owned<hsi_superpixels, hsi_superpixels_free>;
using Mask = Owned<hsi_mask, hsi_mask_free>;
using Rgb = Owned<hsi_rgb, hsi_rgb_free>;
using Affinity = Owned<hsi_affinity, hsi_affinity_free>;
using Model = Owned<hsi_model, hsi_model_free>;

template <typename Handle, typename Fn>
auto load(Fn fn, const std::string& path) {
  typename Handle::pointer raw = nullptr;
  check(fn(path.c_str(), &raw));
  return Handle(raw);
}

struct Buffer {
  void* p = nullptr;
  ~Buffer() { hsi_free_buffer(p); }
};

void write_bytes(const std::string& path, const uint8_t* data, size_t size) {
  std::ofstream f(path, std::ios::binary);
  f.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(size));
  if (!f) throw Failure{HSI_ERR_IO_FAILURE, "cannot write " + path};
}

void emit(const json& j) { std::cout << j.dump(2) << '\n'; }

Rgb rgb_from_cube(const hsi_cube* cube, const std::vector<size_t>& bands) {
  size_t b = 0;
  hsi_cube_dims(cube, nullptr, nullptr, &b);
  size_t r = 0, g = 0, bl = 0;
  hsi_default_rgb_bands(b, &r, &g, &bl);
  if (!bands.empty()) {
    if (bands.size() != 3) throw Failure{HSI_ERR_INVALID_ARGUMENT, "--bands takes exactly three indices"};
    r = bands[0];
    g = bands[1];
    bl = bands[2];
  }
  hsi_rgb* out = nullptr;
  check(hsi_cube_to_rgb(cube, r, g, bl, &out));
  return Rgb(out);
}

int exit_code_for(hsi_status s) {
  switch (s) {
    case HSI_ERR_NON_FINITE_LOSS: return kNumerical;
    case HSI_ERR_INVALID_ARGUMENT: return kUsage;
    default: return kData;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hyperspectral classification with superpixel majority-vote refinement"};
  app.require_subcommand(1);
  app.set_version_flag("--version", hsi_version());

  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: HSI_THREADS, then hardware concurrency)")
      ->check(CLI::NonNegativeNumber);

  // convert-check
  auto* cc = app.add_subcommand("convert-check", "Validate a cube/label pair and print a summary");
  std::string cc_cube, cc_labels;
  cc->add_option("--cube", cc_cube, "Cube (.hsc)")->required();
  cc->add_option("--labels", cc_labels, "Ground truth (.hsl)")->required();

  // split
  auto* sp = app.add_subcommand("split", "Seeded stratified train/test split");
  std::string sp_labels, sp_train, sp_test;
  hsi_split_params split_params = hsi_split_defaults();
  bool sp_random = false;
  sp->add_option("--labels", sp_labels, "Ground truth (.hsl)")->required();
  sp->add_option("--fraction", split_params.fraction, "Training fraction of labeled pixels")
      ->capture_default_str();
  sp->add_option("--seed", split_params.seed, "Split seed")->capture_default_str();
  sp->add_option("--min-per-class", split_params.min_per_class, "Minimum training pixels per class")
      ->capture_default_str();
  sp->add_flag("--no-stratify", sp_random, "Sample uniformly over all labeled pixels");
  sp->add_option("--train-out", sp_train, "Training mask output (.hsm)")->required();
  sp->add_option("--test-out", sp_test, "Test mask output (.hsm)")->required();

  // train
  auto* tr = app.add_subcommand("train", "Train a pixel classifier");
  std::string tr_cube, tr_labels, tr_mask, tr_out, tr_kind = "softmax";
  hsi_train_params train_params = hsi_train_defaults();
  bool tr_raw = false;
  tr->add_option("--cube", tr_cube, "Cube (.hsc)")->required();
  tr->add_option("--labels", tr_labels, "Ground truth (.hsl)")->required();
  tr->add_option("--train-mask", tr_mask, "Training mask (.hsm)")->required();
  tr->add_option("--model", tr_kind, "Model family")
      ->check(CLI::IsMember({"centroid", "softmax"}))
      ->capture_default_str();
  tr->add_option("--patch-radius", train_params.patch_radius, "Spatial patch radius")->capture_default_str();
  tr->add_flag("--no-standardize", tr_raw, "Skip per-band z-scoring");
  tr->add_option("--epochs", train_params.epochs, "SGD epochs")->capture_default_str();
  tr->add_option("--batch-size", train_params.batch_size, "Mini-batch size")->capture_default_str();
  tr->add_option("--lr", train_params.learning_rate, "Learning rate")->capture_default_str();
  tr->add_option("--l2", train_params.l2, "L2 penalty")->capture_default_str();
  tr->add_option("--seed", train_params.seed, "Shuffle seed")->capture_default_str();
  tr->add_option("-o,--out", tr_out, "Model output (.hsw)")->required();

  // predict
  auto* pr = app.add_subcommand("predict", "Classify every pixel of a cube");
  std::string pr_model, pr_cube, pr_out;
  pr->add_option("--model", pr_model, "Model (.hsw)")->required();
  pr->add_option("--cube", pr_cube, "Cube (.hsc)")->required();
  pr->add_option("-o,--out", pr_out, "Class map output (.hsp)")->required();

  // superpixels
  auto* su = app.add_subcommand("superpixels", "Generate a superpixel partition");
  std::string su_method = "slic", su_cube, su_affinity, su_out, su_overlay;
  std::vector<size_t> su_bands;
  hsi_slic_params slic_params = hsi_slic_defaults();
  su->add_option("--method", su_method, "Generator")
      ->check(CLI::IsMember({"slic", "affinity"}))
      ->capture_default_str();
  su->add_option("--cube", su_cube, "Cube (.hsc); required for slic and for --overlay");
  su->add_option("--bands", su_bands, "Pseudo-RGB band indices r g b")->expected(3)->delimiter(',');
  su->add_option("--affinity", su_affinity, "Affinity raster (.hsa) for --method affinity");
  su->add_option("--n", slic_params.n, "Target number of superpixels")->capture_default_str();
  su->add_option("--compactness", slic_params.compactness, "SLIC compactness")->capture_default_str();
  su->add_option("--iters", slic_params.iterations, "SLIC iterations")->capture_default_str();
  su->add_option("--seed", slic_params.seed, "Seed")->capture_default_str();
  su->add_option("-o,--out", su_out, "Superpixel output (.hss)")->required();
  su->add_option("--overlay", su_overlay, "Boundary overlay PNG");

  // refine
  auto* rf = app.add_subcommand("refine", "Superpixel majority-vote refinement");
  std::string rf_classmap, rf_sp, rf_out, rf_labels, rf_test, rf_train, rf_report;
  bool rf_pin = false;
  rf->add_option("--classmap", rf_classmap, "Pixel-wise class map (.hsp)")->required();
  rf->add_option("--superpixels", rf_sp, "Superpixel map (.hss)")->required();
  rf->add_option("-o,--out", rf_out, "Refined class map (.hsp)")->required();
  rf->add_option("--labels", rf_labels, "Ground truth (.hsl), enables the delta report");
  rf->add_option("--test-mask", rf_test, "Evaluation mask (.hsm) for the delta report");
  rf->add_option("--report", rf_report, "Write the delta report here instead of stdout");
  rf->add_flag("--pin-train", rf_pin, "Restore ground truth on training pixels after voting");
  rf->add_option("--train-mask", rf_train, "Training mask (.hsm) for --pin-train");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Overall accuracy, kappa and confusion matrix");
  std::string ev_classmap, ev_labels, ev_mask;
  ev->add_option("--classmap", ev_classmap, "Class map (.hsp)")->required();
  ev->add_option("--labels", ev_labels, "Ground truth (.hsl)")->required();
  ev->add_option("--mask", ev_mask, "Evaluation mask (.hsm)")->required();

  // render
  auto* re = app.add_subcommand("render", "Render a cube, class map or label map as PNG");
  std::string re_cube, re_classmap, re_labels, re_out;
  std::vector<size_t> re_bands;
  auto* re_src = re->add_option_group("source")->require_option(1);
  re_src->add_option("--cube", re_cube, "Cube (.hsc), pseudo-RGB");
  re_src->add_option("--classmap", re_classmap, "Class map (.hsp)");
  re_src->add_option("--labels", re_labels, "Ground truth (.hsl)");
  re->add_option("--bands", re_bands, "Pseudo-RGB band indices r g b")->expected(3)->delimiter(',');
  re->add_option("-o,--out", re_out, "PNG output")->required();

  // experiment
  auto* ex = app.add_subcommand("experiment", "Run a configured fraction x seed grid");
  std::string ex_config, ex_out;
  ex->add_option("--config", ex_config, "Config file (JSON or key = value)")->required();
  ex->add_option("--out", ex_out, "Output directory (overrides output_dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  if (threads == 0) {
    if (const char* env = std::getenv("HSI_THREADS")) {
      char* end = nullptr;
      const long v = std::strtol(env, &end, 10);
      if (end == env || *end != '\0' || v < 0) {
        std::cerr << "error: InvalidArgument: HSI_THREADS must be a non-negative integer\n";
        return kUsage;
      }
      threads = static_cast<int>(v);
    }
  }
  hsi_set_threads(static_cast<unsigned>(threads));

  try {
    if (*cc) {
      auto cube = load<Cube>(hsi_cube_read, cc_cube);
      auto labels = load<Labels>(hsi_labels_read, cc_labels);
      check(hsi_validate(cube.get(), labels.get()));
      size_t h = 0, w = 0, b = 0, k = 0;
      hsi_cube_dims(cube.get(), &h, &w, &b);
      hsi_labels_dims(labels.get(), nullptr, nullptr, &k);
      std::vector<uint64_t> hist(k + 1);
      hsi_labels_histogram(labels.get(), hist.data());
      json j;
      j["height"] = h;
      j["width"] = w;
      j["bands"] = b;
      j["num_classes"] = k;
      j["unlabeled"] = hist[0];
      j["class_counts"] = std::vector<uint64_t>(hist.begin() + 1, hist.end());
      emit(j);
    } else if (*sp) {
      auto labels = load<Labels>(hsi_labels_read, sp_labels);
      split_params.stratified = sp_random ? 0 : 1;
      hsi_mask *train = nullptr, *test = nullptr;
      check(hsi_split(labels.get(), &split_params, &train, &test));
      Mask train_owned(train), test_owned(test);
      check(hsi_mask_write(train, sp_train.c_str()));
      check(hsi_mask_write(test, sp_test.c_str()));
      emit({{"train_pixels", hsi_mask_count(train)}, {"test_pixels", hsi_mask_count(test)}});
    } else if (*tr) {
      auto cube = load<Cube>(hsi_cube_read, tr_cube);
      auto labels = load<Labels>(hsi_labels_read, tr_labels);
      auto mask = load<Mask>(hsi_mask_read, tr_mask);
      train_params.kind = tr_kind == "centroid" ? HSI_MODEL_CENTROID : HSI_MODEL_SOFTMAX;
      train_params.standardize = tr_raw ? 0 : 1;
      hsi_model* raw = nullptr;
      check(hsi_model_train(cube.get(), labels.get(), mask.get(), &train_params, &raw));
      Model model(raw);
      check(hsi_model_write(model.get(), tr_out.c_str()));
      json j;
      j["model"] = tr_kind;
      j["train_pixels"] = hsi_mask_count(mask.get());
      std::vector<double> loss(hsi_model_loss_history(model.get(), nullptr, 0));
      hsi_model_loss_history(model.get(), loss.data(), loss.size());
      if (!loss.empty()) j["final_loss"] = loss.back();
      j["loss_history"] = loss;
      emit(j);
    } else if (*pr) {
      auto model = load<Model>(hsi_model_read, pr_model);
      auto cube = load<Cube>(hsi_cube_read, pr_cube);
      hsi_classmap* raw = nullptr;
      check(hsi_model_predict(model.get(), cube.get(), &raw));
      ClassMap z(raw);
      check(hsi_classmap_write(z.get(), pr_out.c_str()));
    } else if (*su) {
      Cube cube;
      if (!su_cube.empty()) cube = load<Cube>(hsi_cube_read, su_cube);
      hsi_superpixels* raw = nullptr;
      std::optional<Rgb> rgb;
      if (su_method == "slic") {
        if (!cube) throw Failure{HSI_ERR_INVALID_ARGUMENT, "--method slic requires --cube"};
        rgb = rgb_from_cube(cube.get(), su_bands);
        check(hsi_superpixels_slic(rgb->get(), &slic_params, &raw));
      } else {
        if (su_affinity.empty()) throw Failure{HSI_ERR_INVALID_ARGUMENT, "--method affinity requires --affinity"};
        auto aff = load<Affinity>(hsi_affinity_read, su_affinity);
        check(hsi_superpixels_affinity(aff.get(), slic_params.n, slic_params.seed, &raw));
      }
      Superpixels segs(raw);
      check(hsi_superpixels_write(segs.get(), su_out.c_str()));
      if (!su_overlay.empty()) {
        if (!cube) throw Failure{HSI_ERR_INVALID_ARGUMENT, "--overlay requires --cube"};
        if (!rgb) rgb = rgb_from_cube(cube.get(), su_bands);
        check(hsi_superpixels_overlay_png(segs.get(), rgb->get(), su_overlay.c_str()));
      }
      size_t n = 0;
      hsi_superpixels_dims(segs.get(), nullptr, nullptr, &n);
      emit({{"method", su_method}, {"segments", n}});
    } else if (*rf) {
      auto z = load<ClassMap>(hsi_classmap_read, rf_classmap);
      auto segs = load<Superpixels>(hsi_superpixels_read, rf_sp);
      hsi_classmap* raw = nullptr;
      check(hsi_refine(z.get(), segs.get(), &raw));
      ClassMap y(raw);
      Labels labels;
      if (!rf_labels.empty()) labels = load<Labels>(hsi_labels_read, rf_labels);
      if (rf_pin) {
        if (!labels || rf_train.empty()) {
          throw Failure{HSI_ERR_INVALID_ARGUMENT, "--pin-train requires --labels and --train-mask"};
        }
        auto train = load<Mask>(hsi_mask_read, rf_train);
        check(hsi_pin_training_labels(y.get(), labels.get(), train.get(), &raw));
        y.reset(raw);
      }
      check(hsi_classmap_write(y.get(), rf_out.c_str()));
      if (labels) {
        if (rf_test.empty()) throw Failure{HSI_ERR_INVALID_ARGUMENT, "delta report requires --test-mask"};
        auto test = load<Mask>(hsi_mask_read, rf_test);
        hsi_delta delta{};
        Buffer text;
        char* js = nullptr;
        check(hsi_refinement_delta(z.get(), y.get(), labels.get(), test.get(), segs.get(), &delta, &js));
        text.p = js;
        if (rf_report.empty()) {
          std::cout << js << '\n';
        } else {
          std::string s = std::string(js) + "\n";
          write_bytes(rf_report, reinterpret_cast<const uint8_t*>(s.data()), s.size());
        }
      }
    } else if (*ev) {
      auto z = load<ClassMap>(hsi_classmap_read, ev_classmap);
      auto labels = load<Labels>(hsi_labels_read, ev_labels);
      auto mask = load<Mask>(hsi_mask_read, ev_mask);
      char* js = nullptr;
      check(hsi_evaluate_json(z.get(), labels.get(), mask.get(), &js));
      Buffer text{js};
      std::cout << js << '\n';
    } else if (*re) {
      if (!re_cube.empty()) {
        auto cube = load<Cube>(hsi_cube_read, re_cube);
        auto rgb = rgb_from_cube(cube.get(), re_bands);
        check(hsi_rgb_write_png(rgb.get(), re_out.c_str()));
      } else {
        uint8_t* png = nullptr;
        size_t size = 0;
        if (!re_classmap.empty()) {
          auto z = load<ClassMap>(hsi_classmap_read, re_classmap);
          check(hsi_classmap_render_png(z.get(), nullptr, 0, &png, &size));
        } else {
          auto labels = load<Labels>(hsi_labels_read, re_labels);
          check(hsi_labels_render_png(labels.get(), nullptr, 0, &png, &size));
        }
        Buffer owned{png};
        write_bytes(re_out, png, size);
      }
    } else if (*ex) {
      char* table = nullptr;
      check(hsi_experiment_run(ex_config.c_str(), ex_out.empty() ? nullptr : ex_out.c_str(), &table));
      Buffer owned{table};
      std::cout << table;
    }
  } catch (const Failure& f) {
    std::cerr << "error: " << hsi_status_name(f.status) << ": " << f.message << '\n';
    return exit_code_for(f.status);
  } catch (const std::exception& e) {
    std::cerr << "error: Internal: " << e.what() << '\n';
    return kData;
  }
  return kOk;
}
