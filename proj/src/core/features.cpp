#include "features.hpp"

#include <algorithm>
#include <cmath>

#include "parallel.hpp"

namespace hsi {

void validate(const FeatureConfig& config, Dims dims) {
  if (2 * config.patch_radius > std::min(dims.height, dims.width)) {
    fail(ErrorCode::InvalidArgument, "patch_radius " + std::to_string(config.patch_radius) +
                                         " exceeds half the smaller image side (" + to_string(dims) + ")");
  }
}

FeatureStats compute_feature_stats(const HyperCube& cube, const PixelMask& mask) {
  require_same_dims(cube.dims(), mask.dims(), "cube vs mask");
  const std::size_t count = mask.count();
  if (count == 0) fail(ErrorCode::EmptyMask, "cannot compute feature statistics from an empty mask");

  FeatureStats stats{std::vector<float>(cube.bands), std::vector<float>(cube.bands)};
  parallel_for(cube.bands, [&](std::size_t b0, std::size_t b1) {
    for (std::size_t b = b0; b < b1; ++b) {
      const float* plane = cube.band_ptr(b);
      double sum = 0.0;
      for (std::size_t p = 0; p < cube.plane_size(); ++p) {
        if (mask[p]) sum += plane[p];
      }
      const double mean = sum / static_cast<double>(count);
      double sq = 0.0;
      for (std::size_t p = 0; p < cube.plane_size(); ++p) {
        if (mask[p]) sq += (plane[p] - mean) * (plane[p] - mean);
      }
      const double sd = std::sqrt(sq / static_cast<double>(count));
      stats.mean[b] = static_cast<float>(mean);
      stats.std[b] = (sd > 0.0 && std::isfinite(sd)) ? static_cast<float>(sd) : 1.0f;
      if (stats.std[b] == 0.0f) stats.std[b] = 1.0f;  // underflow after narrowing
    }
  });
  return stats;
}

FeatureMatrix extract_features(const HyperCube& cube, const FeatureConfig& config,
                               const std::optional<FeatureStats>& stats) {
  validate(cube);
  validate(config, cube.dims());

  FeatureStats used;
  if (config.standardize) {
    used = stats ? *stats : compute_feature_stats(cube, make_mask(cube.dims(), true));
    if (used.mean.size() != cube.bands || used.std.size() != cube.bands) {
      fail(ErrorCode::DimensionMismatch, "feature statistics cover " + std::to_string(used.mean.size()) +
                                             " bands, cube has " + std::to_string(cube.bands));
    }
  }

  const std::size_t h = cube.height, w = cube.width, n = cube.plane_size();
  const auto r = static_cast<std::ptrdiff_t>(config.patch_radius);
  FeatureMatrix out{n, cube.bands, std::vector<float>(n * cube.bands)};

  parallel_for(cube.bands, [&](std::size_t b0, std::size_t b1) {
    std::vector<double> z(n);
    std::vector<double> integral((h + 1) * (w + 1));
    for (std::size_t b = b0; b < b1; ++b) {
      const float* plane = cube.band_ptr(b);
      const double mean = config.standardize ? used.mean[b] : 0.0;
      const double sd = config.standardize ? used.std[b] : 1.0;
      for (std::size_t p = 0; p < n; ++p) z[p] = config.standardize ? (plane[p] - mean) / sd : plane[p];

      if (r == 0) {
        for (std::size_t p = 0; p < n; ++p) out.values[p * out.cols + b] = static_cast<float>(z[p]);
        continue;
      }
      for (std::size_t y = 0; y < h; ++y) {
        double row_sum = 0.0;
        for (std::size_t x = 0; x < w; ++x) {
          row_sum += z[y * w + x];
          integral[(y + 1) * (w + 1) + x + 1] = integral[y * (w + 1) + x + 1] + row_sum;
        }
      }
      for (std::size_t y = 0; y < h; ++y) {
        const auto y0 = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(y) - r));
        const std::size_t y1 = std::min(h, y + static_cast<std::size_t>(r) + 1);
        for (std::size_t x = 0; x < w; ++x) {
          const auto x0 = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(x) - r));
          const std::size_t x1 = std::min(w, x + static_cast<std::size_t>(r) + 1);
          const double sum = integral[y1 * (w + 1) + x1] - integral[y0 * (w + 1) + x1] -
                             integral[y1 * (w + 1) + x0] + integral[y0 * (w + 1) + x0];
          const double count = static_cast<double>((y1 - y0) * (x1 - x0));
          out.values[(y * w + x) * out.cols + b] = static_cast<float>(sum / count);
        }
      }
    }
  });
  return out;
}

}  // namespace hsi
