#pragma once

#include <optional>
#include <span>
#include <vector>

#include "types.hpp"

namespace hsi {

struct FeatureConfig {
  std::size_t patch_radius = 2;  // 0 = spectral only
  bool standardize = true;

  bool operator==(const FeatureConfig&) const = default;
};

/// Per-band z-score statistics. Bands with zero variance get std 1.
struct FeatureStats {
  std::vector<float> mean;
  std::vector<float> std;

  bool operator==(const FeatureStats&) const = default;
};

/// Row-major, one row per pixel in raster order.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> values;

  std::span<const float> row(std::size_t r) const { return {values.data() + r * cols, cols}; }
};

void validate(const FeatureConfig& config, Dims dims);

/// Population mean/std of each raw band over the masked pixels.
FeatureStats compute_feature_stats(const HyperCube& cube, const PixelMask& mask);

/// Row p is the z-scored spectrum of pixel p averaged over the
/// (2r+1)x(2r+1) window clipped at the borders. When `stats` is absent and
/// standardization is on, statistics come from the whole cube.
FeatureMatrix extract_features(const HyperCube& cube, const FeatureConfig& config,
                               const std::optional<FeatureStats>& stats = std::nullopt);

}  // namespace hsi
