#include "classifier.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

#include <json.hpp>

#include "io.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace hsi {

namespace {

struct TrainingSet {
  std::vector<std::size_t> rows;   // raster order
  std::vector<ClassId> targets;    // indexed by pixel
};

TrainingSet collect_training(const FeatureMatrix& features, const LabelMap& labels, const PixelMask& mask) {
  validate(labels);
  require_same_dims(labels.dims(), mask.dims(), "label map vs train mask");
  if (features.rows != labels.labels.size()) {
    fail(ErrorCode::DimensionMismatch, "feature matrix has " + std::to_string(features.rows) +
                                           " rows for " + std::to_string(labels.labels.size()) + " pixels");
  }
  TrainingSet set;
  set.targets = labels.labels;
  std::vector<std::size_t> per_class(labels.num_classes, 0);
  for (std::size_t p = 0; p < labels.labels.size(); ++p) {
    if (!mask[p]) continue;
    if (labels.labels[p] == 0) {
      fail(ErrorCode::InvalidArgument, "train mask selects unlabeled pixel " + std::to_string(p));
    }
    set.rows.push_back(p);
    ++per_class[labels.labels[p] - 1];
  }
  if (labels.num_classes == 0) fail(ErrorCode::EmptyClass, "label map has no classes");
  for (std::size_t c = 0; c < per_class.size(); ++c) {
    if (per_class[c] == 0) {
      fail(ErrorCode::EmptyClass, "class " + std::to_string(c + 1) + " has no training pixels");
    }
  }
  return set;
}

}  // namespace

std::size_t Classifier::num_classes() const {
  return std::visit([](const auto& m) { return m.num_classes; }, model);
}

CentroidModel train_centroid(const FeatureMatrix& features, const LabelMap& labels,
                             const PixelMask& train_mask) {
  const auto set = collect_training(features, labels, train_mask);
  const std::size_t k = labels.num_classes, d = features.cols;
  std::vector<double> sums(k * d, 0.0);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t p : set.rows) {
    const std::size_t c = set.targets[p] - 1;
    const auto row = features.row(p);
    for (std::size_t j = 0; j < d; ++j) sums[c * d + j] += row[j];
    ++counts[c];
  }
  CentroidModel model{k, d, std::vector<float>(k * d)};
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t j = 0; j < d; ++j) {
      model.centroids[c * d + j] = static_cast<float>(sums[c * d + j] / static_cast<double>(counts[c]));
    }
  }
  return model;
}

double softmax_objective(const std::vector<double>& weights, std::size_t num_classes,
                         const FeatureMatrix& features, const std::vector<std::size_t>& rows,
                         const std::vector<ClassId>& targets, double l2,
                         std::vector<double>* gradient) {
  const std::size_t d = features.cols, stride = d + 1;
  if (weights.size() != num_classes * stride) {
    fail(ErrorCode::DimensionMismatch, "weight matrix size does not match classes x (features+1)");
  }
  if (gradient) gradient->assign(weights.size(), 0.0);
  if (rows.empty()) fail(ErrorCode::EmptyMask, "objective over zero rows");

  std::vector<double> logits(num_classes);
  double loss = 0.0;
  for (std::size_t p : rows) {
    const auto x = features.row(p);
    for (std::size_t c = 0; c < num_classes; ++c) {
      const double* w = weights.data() + c * stride;
      double z = w[d];
      for (std::size_t j = 0; j < d; ++j) z += w[j] * x[j];
      logits[c] = z;
    }
    const double peak = *std::max_element(logits.begin(), logits.end());
    double norm = 0.0;
    for (double& z : logits) {
      z = std::exp(z - peak);
      norm += z;
    }
    const std::size_t target = targets[p] - 1;
    loss += -(std::log(logits[target] / norm));
    if (gradient) {
      for (std::size_t c = 0; c < num_classes; ++c) {
        const double delta = logits[c] / norm - (c == target ? 1.0 : 0.0);
        double* g = gradient->data() + c * stride;
        for (std::size_t j = 0; j < d; ++j) g[j] += delta * x[j];
        g[d] += delta;
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  double norm_sq = 0.0;
  for (double w : weights) norm_sq += w * w;
  if (gradient) {
    for (std::size_t i = 0; i < weights.size(); ++i) (*gradient)[i] = (*gradient)[i] * inv + l2 * weights[i];
  }
  return loss * inv + 0.5 * l2 * norm_sq;
}

SoftmaxModel train_softmax(const FeatureMatrix& features, const LabelMap& labels,
                           const PixelMask& train_mask, const SoftmaxHyper& hyper) {
  if (!(hyper.learning_rate > 0.0) || !std::isfinite(hyper.learning_rate)) {
    fail(ErrorCode::InvalidArgument, "learning_rate must be positive");
  }
  if (hyper.batch_size == 0) fail(ErrorCode::InvalidArgument, "batch_size must be >= 1");
  if (!(hyper.l2 >= 0.0)) fail(ErrorCode::InvalidArgument, "l2 must be >= 0");

  const auto set = collect_training(features, labels, train_mask);
  const std::size_t k = labels.num_classes, stride = features.cols + 1;
  std::vector<double> w(k * stride, 0.0);
  std::vector<double> grad;

  SoftmaxModel model{k, features.cols, {}, hyper, {}};
  model.loss_history.push_back(softmax_objective(w, k, features, set.rows, set.targets, hyper.l2, nullptr));

  SplitMix64 rng(hyper.seed);
  std::vector<std::size_t> order = set.rows;
  std::vector<std::size_t> batch;
  for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
    shuffle(order, rng);
    for (std::size_t start = 0; start < order.size(); start += hyper.batch_size) {
      const std::size_t end = std::min(order.size(), start + hyper.batch_size);
      batch.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                   order.begin() + static_cast<std::ptrdiff_t>(end));
      softmax_objective(w, k, features, batch, set.targets, hyper.l2, &grad);
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= hyper.learning_rate * grad[i];
    }
    const double loss = softmax_objective(w, k, features, set.rows, set.targets, hyper.l2, nullptr);
    if (!std::isfinite(loss)) {
      fail(ErrorCode::NonFiniteLoss, "training loss became non-finite at epoch " + std::to_string(epoch + 1));
    }
    model.loss_history.push_back(loss);
  }

  model.weights.resize(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!std::isfinite(w[i]) || std::abs(w[i]) > std::numeric_limits<float>::max()) {
      fail(ErrorCode::NonFiniteLoss, "trained weights are not representable as finite f32");
    }
    model.weights[i] = static_cast<float>(w[i]);
  }
  return model;
}

namespace {

void require_rows(const FeatureMatrix& features, std::size_t cols, Dims dims) {
  if (features.cols != cols) {
    fail(ErrorCode::DimensionMismatch, "feature width " + std::to_string(features.cols) +
                                           " but model expects " + std::to_string(cols));
  }
  if (features.rows != dims.pixels()) {
    fail(ErrorCode::DimensionMismatch, "feature rows " + std::to_string(features.rows) + " for " +
                                           to_string(dims) + " raster");
  }
}

template <typename Score>
ClassMap predict_with(std::size_t k, const FeatureMatrix& features, Dims dims, Score score) {
  ClassMap out{dims.height, dims.width, std::vector<ClassId>(dims.pixels()), k};
  parallel_for(dims.pixels(), [&](std::size_t p0, std::size_t p1) {
    for (std::size_t p = p0; p < p1; ++p) {
      const auto x = features.row(p);
      std::size_t best = 0;
      double best_score = score(0, x);
      for (std::size_t c = 1; c < k; ++c) {
        const double s = score(c, x);
        if (s > best_score) {  // strict: ties keep the smaller class id
          best = c;
          best_score = s;
        }
      }
      out.classes[p] = static_cast<ClassId>(best + 1);
    }
  });
  return out;
}

}  // namespace

ClassMap predict(const CentroidModel& model, const FeatureMatrix& features, Dims dims) {
  require_rows(features, model.num_features, dims);
  const std::size_t d = model.num_features;
  return predict_with(model.num_classes, features, dims, [&](std::size_t c, std::span<const float> x) {
    const float* mu = model.centroids.data() + c * d;
    double dist = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = static_cast<double>(x[j]) - mu[j];
      dist += diff * diff;
    }
    return -dist;
  });
}

ClassMap predict(const SoftmaxModel& model, const FeatureMatrix& features, Dims dims) {
  require_rows(features, model.num_features, dims);
  const std::size_t d = model.num_features;
  return predict_with(model.num_classes, features, dims, [&](std::size_t c, std::span<const float> x) {
    const float* w = model.weights.data() + c * (d + 1);
    double z = w[d];
    for (std::size_t j = 0; j < d; ++j) z += static_cast<double>(w[j]) * x[j];
    return z;
  });
}

Classifier train(const HyperCube& cube, const LabelMap& labels, const PixelMask& train_mask,
                 const TrainConfig& config) {
  validate(cube, labels);
  require_same_dims(cube.dims(), train_mask.dims(), "cube vs train mask");
  Classifier out;
  out.bands = cube.bands;
  out.features = config.features;
  std::optional<FeatureStats> stats;
  if (config.features.standardize) {
    stats = compute_feature_stats(cube, train_mask);
    out.stats = *stats;
  }
  const auto features = extract_features(cube, config.features, stats);
  if (config.kind == ModelKind::Centroid) {
    out.model = train_centroid(features, labels, train_mask);
  } else {
    out.model = train_softmax(features, labels, train_mask, config.softmax);
  }
  return out;
}

ClassMap predict(const Classifier& classifier, const HyperCube& cube) {
  validate(cube);
  if (cube.bands != classifier.bands) {
    fail(ErrorCode::DimensionMismatch, "model trained on " + std::to_string(classifier.bands) +
                                           " bands, cube has " + std::to_string(cube.bands));
  }
  std::optional<FeatureStats> stats;
  if (classifier.features.standardize) stats = classifier.stats;
  const auto features = extract_features(cube, classifier.features, stats);
  return std::visit([&](const auto& m) { return predict(m, features, cube.dims()); }, classifier.model);
}

void check_importable(const ClassMap& map, const LabelMap& labels) {
  require_same_dims(map.dims(), labels.dims(), "imported class map vs label map");
  for (std::size_t p = 0; p < map.classes.size(); ++p) {
    const ClassId c = map.classes[p];
    if (c == 0 || c > labels.num_classes) {
      fail(ErrorCode::LabelOutOfRange, "imported class " + std::to_string(c) + " at pixel " +
                                           std::to_string(p) + " outside 1.." +
                                           std::to_string(labels.num_classes));
    }
  }
}

ClassMap import_classmap(const std::filesystem::path& path, const LabelMap& labels) {
  ClassMap map = io::read_classmap(path);
  check_importable(map, labels);
  return map;
}

// ---- HSW1 serialization -----------------------------------------------

namespace {

using Json = nlohmann::ordered_json;
constexpr std::string_view kModelMagic = "HSW1";

void append_f32(std::string& out, const std::vector<float>& v) {
  static_assert(std::endian::native == std::endian::little, "model files assume a little-endian host");
  const std::size_t offset = out.size();
  out.resize(offset + v.size() * sizeof(float));
  if (!v.empty()) std::memcpy(out.data() + offset, v.data(), v.size() * sizeof(float));
}

std::vector<float> take_f32(std::string_view& payload, std::size_t count, const char* what) {
  if (payload.size() < count * sizeof(float)) {
    fail(ErrorCode::TruncatedPayload, std::string("model payload too short for ") + what);
  }
  std::vector<float> v(count);
  if (count) std::memcpy(v.data(), payload.data(), count * sizeof(float));
  payload.remove_prefix(count * sizeof(float));
  for (float x : v) {
    if (!std::isfinite(x)) fail(ErrorCode::NonFiniteValue, std::string("non-finite value in model ") + what);
  }
  return v;
}

}  // namespace

std::string encode_model(const Classifier& classifier) {
  Json h;
  h["magic"] = kModelMagic;
  h["model"] = std::holds_alternative<CentroidModel>(classifier.model) ? "centroid" : "softmax";
  h["num_classes"] = classifier.num_classes();
  h["num_features"] = std::visit([](const auto& m) { return m.num_features; }, classifier.model);
  h["bands"] = classifier.bands;
  h["patch_radius"] = classifier.features.patch_radius;
  h["standardize"] = classifier.features.standardize;
  if (const auto* s = std::get_if<SoftmaxModel>(&classifier.model)) {
    h["learning_rate"] = s->hyper.learning_rate;
    h["epochs"] = s->hyper.epochs;
    h["batch_size"] = s->hyper.batch_size;
    h["l2"] = s->hyper.l2;
    h["seed"] = s->hyper.seed;
  }
  h["dtype"] = "f32le";
  std::string out = h.dump() + "\n";
  if (classifier.features.standardize) {
    append_f32(out, classifier.stats.mean);
    append_f32(out, classifier.stats.std);
  }
  std::visit(
      [&](const auto& m) {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, CentroidModel>) {
          append_f32(out, m.centroids);
        } else {
          append_f32(out, m.weights);
        }
      },
      classifier.model);
  return out;
}

Classifier decode_model(std::string_view bytes) {
  std::string line;
  auto payload = io::split_header(bytes, kModelMagic, line);
  const Json h = Json::parse(line);
  Classifier out;
  std::size_t k = 0, d = 0;
  std::string kind;
  try {
    kind = h.at("model").get<std::string>();
    k = h.at("num_classes").get<std::size_t>();
    d = h.at("num_features").get<std::size_t>();
    out.bands = h.at("bands").get<std::size_t>();
    out.features.patch_radius = h.at("patch_radius").get<std::size_t>();
    out.features.standardize = h.at("standardize").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::BadHeader, std::string("model header: ") + e.what());
  }
  if (k == 0 || d == 0 || out.bands == 0 || k > 65535 || d > (1u << 20) || out.bands > (1u << 20)) {
    fail(ErrorCode::BadHeader, "model header counts out of range");
  }
  if (out.features.standardize) {
    out.stats.mean = take_f32(payload, out.bands, "stats mean");
    out.stats.std = take_f32(payload, out.bands, "stats std");
  }
  if (kind == "centroid") {
    out.model = CentroidModel{k, d, take_f32(payload, k * d, "centroids")};
  } else if (kind == "softmax") {
    SoftmaxModel m{k, d, take_f32(payload, k * (d + 1), "weights"), {}, {}};
    try {
      m.hyper.learning_rate = h.at("learning_rate").get<double>();
      m.hyper.epochs = h.at("epochs").get<std::size_t>();
      m.hyper.batch_size = h.at("batch_size").get<std::size_t>();
      m.hyper.l2 = h.at("l2").get<double>();
      m.hyper.seed = h.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::BadHeader, std::string("model hyperparameters: ") + e.what());
    }
    out.model = std::move(m);
  } else {
    fail(ErrorCode::BadHeader, "unknown model kind '" + kind + "'");
  }
  if (!payload.empty()) {
    fail(ErrorCode::TruncatedPayload, std::to_string(payload.size()) + " unexpected trailing model bytes");
  }
  return out;
}

void write_model(const Classifier& classifier, const std::filesystem::path& path) {
  io::write_file(path, encode_model(classifier));
}

Classifier read_model(const std::filesystem::path& path) {
  try {
    return decode_model(io::read_file(path));
  } catch (const Error& e) {
    throw Error(e.code(), "'" + path.string() + "': " + e.what());
  }
}

}  // namespace hsi
