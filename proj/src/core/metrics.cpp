#include "metrics.hpp"

#include <algorithm>

namespace hsi {

namespace {

void check_inputs(const ClassMap& pred, const LabelMap& truth, const PixelMask& mask) {
  validate(pred);
  validate(truth);
  require_same_dims(pred.dims(), truth.dims(), "prediction vs ground truth");
  require_same_dims(pred.dims(), mask.dims(), "prediction vs mask");
  for (std::size_t p = 0; p < mask.mask.size(); ++p) {
    if (mask[p] && truth.labels[p] == 0) {
      fail(ErrorCode::InvalidArgument, "evaluation mask selects unlabeled pixel " + std::to_string(p));
    }
  }
}

}  // namespace

double overall_accuracy(const ClassMap& pred, const LabelMap& truth, const PixelMask& mask) {
  check_inputs(pred, truth, mask);
  std::size_t total = 0, correct = 0;
  for (std::size_t p = 0; p < mask.mask.size(); ++p) {
    if (!mask[p]) continue;
    ++total;
    correct += pred.classes[p] == truth.labels[p];
  }
  if (total == 0) fail(ErrorCode::EmptyMask, "evaluation mask selects no pixels");
  return static_cast<double>(correct) / static_cast<double>(total);
}

std::uint64_t Confusion::total() const {
  std::uint64_t s = 0;
  for (auto v : counts) s += v;
  return s;
}

std::uint64_t Confusion::trace() const {
  std::uint64_t s = 0;
  for (std::size_t c = 1; c <= num_classes; ++c) s += at(c, c);
  return s;
}

Agreement agreement_from(const Confusion& confusion) {
  Agreement out;
  out.confusion = confusion;
  const std::size_t k = confusion.num_classes;
  const std::uint64_t total = confusion.total();
  if (total == 0) fail(ErrorCode::EmptyMask, "confusion matrix is empty");
  const double n = static_cast<double>(total);

  std::vector<double> rows(k, 0.0), cols(k, 0.0);
  for (std::size_t t = 1; t <= k; ++t) {
    for (std::size_t p = 1; p <= k; ++p) {
      rows[t - 1] += static_cast<double>(confusion.at(t, p));
      cols[p - 1] += static_cast<double>(confusion.at(t, p));
    }
  }
  out.oa = static_cast<double>(confusion.trace()) / n;
  double pe = 0.0;
  for (std::size_t c = 0; c < k; ++c) pe += (rows[c] / n) * (cols[c] / n);
  if (pe >= 1.0) {
    out.degenerate = true;
    out.kappa = 0.0;
  } else {
    out.kappa = (out.oa - pe) / (1.0 - pe);
  }
  out.per_class_accuracy.resize(k);
  for (std::size_t c = 1; c <= k; ++c) {
    out.per_class_accuracy[c - 1] = rows[c - 1] > 0 ? static_cast<double>(confusion.at(c, c)) / rows[c - 1] : 0.0;
  }
  return out;
}

Agreement confusion_and_kappa(const ClassMap& pred, const LabelMap& truth, const PixelMask& mask) {
  check_inputs(pred, truth, mask);
  Confusion conf;
  conf.num_classes = std::max(pred.num_classes, truth.num_classes);
  conf.counts.assign(conf.num_classes * conf.num_classes, 0);
  for (std::size_t p = 0; p < mask.mask.size(); ++p) {
    if (!mask[p]) continue;
    ++conf.counts[(truth.labels[p] - 1) * conf.num_classes + (pred.classes[p] - 1)];
  }
  if (conf.total() == 0) fail(ErrorCode::EmptyMask, "evaluation mask selects no pixels");
  return agreement_from(conf);
}

}  // namespace hsi
