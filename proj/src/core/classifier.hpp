#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "features.hpp"
#include "types.hpp"

namespace hsi {

struct CentroidModel {
  std::size_t num_classes = 0;
  std::size_t num_features = 0;
  std::vector<float> centroids;  // num_classes x num_features

  bool operator==(const CentroidModel&) const = default;
};

struct SoftmaxHyper {
  double learning_rate = 0.001;
  std::size_t epochs = 40;
  std::size_t batch_size = 16;
  double l2 = 1e-4;
  std::uint64_t seed = 0;

  bool operator==(const SoftmaxHyper&) const = default;
};

struct SoftmaxModel {
  std::size_t num_classes = 0;
  std::size_t num_features = 0;
  std::vector<float> weights;  // num_classes x (num_features + 1), bias last
  SoftmaxHyper hyper;
  std::vector<double> loss_history;  // full training objective at init and after each epoch; not serialized

  bool operator==(const SoftmaxModel& o) const {
    return num_classes == o.num_classes && num_features == o.num_features && weights == o.weights &&
           hyper == o.hyper;
  }
};

/// Everything needed to map a cube to a ClassMap.
struct Classifier {
  std::size_t bands = 0;
  FeatureConfig features;
  FeatureStats stats;  // empty when standardization is off
  std::variant<CentroidModel, SoftmaxModel> model;

  std::size_t num_classes() const;
  bool operator==(const Classifier&) const = default;
};

CentroidModel train_centroid(const FeatureMatrix& features, const LabelMap& labels,
                             const PixelMask& train_mask);

SoftmaxModel train_softmax(const FeatureMatrix& features, const LabelMap& labels,
                           const PixelMask& train_mask, const SoftmaxHyper& hyper);

/// Mean cross-entropy over `rows` plus l2/2 * ||W||^2, and its gradient.
/// W is row-major num_classes x (num_features + 1) with the bias last; target
/// class ids are 1-based. Exposed for gradient checking.
double softmax_objective(const std::vector<double>& weights, std::size_t num_classes,
                         const FeatureMatrix& features, const std::vector<std::size_t>& rows,
                         const std::vector<ClassId>& targets, double l2,
                         std::vector<double>* gradient);

ClassMap predict(const CentroidModel& model, const FeatureMatrix& features, Dims dims);
ClassMap predict(const SoftmaxModel& model, const FeatureMatrix& features, Dims dims);

enum class ModelKind { Centroid, Softmax };

struct TrainConfig {
  ModelKind kind = ModelKind::Softmax;
  FeatureConfig features;
  SoftmaxHyper softmax;
};

/// Standardization stats from the training pixels, feature extraction, then
/// the chosen trainer.
Classifier train(const HyperCube& cube, const LabelMap& labels, const PixelMask& train_mask,
                 const TrainConfig& config);
ClassMap predict(const Classifier& classifier, const HyperCube& cube);

/// Loads an externally produced prediction (.hsp) for the given ground truth.
ClassMap import_classmap(const std::filesystem::path& path, const LabelMap& labels);
void check_importable(const ClassMap& map, const LabelMap& labels);

// HSW1 model files: JSON header line with the model kind, sizes and
// hyperparameters, then f32le payload: stats mean[bands], stats std[bands]
// (omitted when standardize is false), then the weight matrix.
std::string encode_model(const Classifier& classifier);
Classifier decode_model(std::string_view bytes);
void write_model(const Classifier& classifier, const std::filesystem::path& path);
Classifier read_model(const std::filesystem::path& path);

}  // namespace hsi
