#pragma once

#include <cstdint>
#include <vector>

#include "types.hpp"

namespace hsi {

struct SplitSpec {
  double fraction = 0.1;
  std::uint64_t seed = 0;
  bool stratified = true;
  std::size_t min_per_class = 1;
};

struct Split {
  PixelMask train;
  PixelMask test;
};

/// Per-class training quotas: round(fraction * labeled) apportioned by
/// largest remainder (ties to the smaller class id), then classes below
/// min(min_per_class, class size) are topped up by taking pixels from the
/// classes with the most slack above their own floor.
/// class_sizes[c] holds the labeled count of class c+1.
std::vector<std::size_t> apportion(const std::vector<std::size_t>& class_sizes, double fraction,
                                   std::size_t min_per_class);

/// Seeded train/test split over the labeled pixels. Within each class (in
/// ascending id order) the pixel indices, taken in raster order, are shuffled
/// with one SplitMix64 stream seeded by spec.seed and the first quota entries
/// go to train.
Split split(const LabelMap& labels, const SplitSpec& spec);

}  // namespace hsi
