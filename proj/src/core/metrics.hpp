#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "types.hpp"

namespace hsi {

/// Fraction of masked pixels where pred == truth.
double overall_accuracy(const ClassMap& pred, const LabelMap& truth, const PixelMask& mask);

/// counts[(t-1) * num_classes + (p-1)]: truth t predicted as p.
struct Confusion {
  std::size_t num_classes = 0;
  std::vector<std::uint64_t> counts;

  std::uint64_t at(std::size_t truth, std::size_t pred) const {
    return counts[(truth - 1) * num_classes + (pred - 1)];
  }
  std::uint64_t total() const;
  std::uint64_t trace() const;
};

struct Agreement {
  Confusion confusion;
  double oa = 0.0;
  double kappa = 0.0;
  bool degenerate = false;  // expected agreement was 1; kappa reported as 0
  std::vector<double> per_class_accuracy;  // diag / row sum; 0 for classes absent from the mask
};

Agreement agreement_from(const Confusion& confusion);
Agreement confusion_and_kappa(const ClassMap& pred, const LabelMap& truth, const PixelMask& mask);

}  // namespace hsi
