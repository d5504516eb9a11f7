#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "types.hpp"

namespace hsi {

using Color = std::array<std::uint8_t, 3>;

struct RgbBands {
  std::size_t red = 0;
  std::size_t green = 0;
  std::size_t blue = 0;
};

/// Default false-color bands for a cube with `bands` bands:
/// red = round(0.6*(B-1)), green = round(0.4*(B-1)), blue = round(0.1*(B-1)).
RgbBands default_rgb_bands(std::size_t bands);

/// Each selected band is clipped to its 2nd..98th percentile (linear
/// interpolation between order statistics) and min-max scaled to 0..255,
/// rounding to nearest. A band whose clip range collapses maps to 128.
RgbImage cube_to_rgb(const HyperCube& cube, RgbBands bands);

/// Percentile q in [0,1] of `values` with linear interpolation at q*(n-1).
double percentile(std::vector<float> values, double q);

/// 16 class colors; class i renders as palette[i-1].
const std::vector<Color>& default_palette();
/// Color used for label 0 when rendering ground truth.
inline constexpr Color kBackgroundColor{0, 0, 0};

/// Deterministic 8-bit RGB PNG (no ancillary chunks, filter 0, zlib level 9).
std::string encode_png(const RgbImage& image);

std::string render_class_map(const ClassMap& map, std::span<const Color> palette);
std::string render_label_map(const LabelMap& labels, std::span<const Color> palette);

/// Paints pixels whose right or down neighbor lies in another segment.
RgbImage overlay_boundaries(const RgbImage& image, const SuperpixelMap& sp,
                            Color color = {255, 0, 0});

}  // namespace hsi
