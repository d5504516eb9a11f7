#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "error.hpp"

namespace hsi {

using ClassId = std::uint16_t;
using SegmentId = std::uint32_t;

struct Dims {
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t pixels() const noexcept { return height * width; }
  bool operator==(const Dims&) const = default;
};

std::string to_string(const Dims& d);

/// Hyperspectral reflectance cube stored band-sequential: value (b, row, col)
/// lives at data[b * H * W + row * W + col].
struct HyperCube {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t bands = 0;
  std::vector<float> data;
  std::string name;

  Dims dims() const noexcept { return {height, width}; }
  std::size_t plane_size() const noexcept { return height * width; }

  float at(std::size_t band, std::size_t row, std::size_t col) const {
    return data[band * plane_size() + row * width + col];
  }
  const float* band_ptr(std::size_t band) const { return data.data() + band * plane_size(); }

  bool operator==(const HyperCube&) const = default;
};

/// Ground truth. 0 marks an unlabeled pixel; classes are 1..num_classes.
struct LabelMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<ClassId> labels;
  std::size_t num_classes = 0;

  Dims dims() const noexcept { return {height, width}; }
  std::size_t labeled_count() const;

  bool operator==(const LabelMap&) const = default;
};

/// Builds a LabelMap whose num_classes is the largest label present.
LabelMap make_label_map(Dims dims, std::vector<ClassId> labels);

/// Total prediction raster: every pixel carries a class in 1..num_classes.
struct ClassMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<ClassId> classes;
  std::size_t num_classes = 0;

  Dims dims() const noexcept { return {height, width}; }

  bool operator==(const ClassMap&) const = default;
};

struct SuperpixelMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<SegmentId> segment_ids;
  std::size_t num_segments = 0;

  Dims dims() const noexcept { return {height, width}; }
  std::vector<std::size_t> segment_sizes() const;

  bool operator==(const SuperpixelMap&) const = default;
};

/// Renumbers ids in order of first appearance (raster scan) so they form
/// 0..num_segments-1. Accepts arbitrary input ids.
SuperpixelMap compact_segments(Dims dims, const std::vector<SegmentId>& ids);

/// Interleaved 8-bit RGB.
struct RgbImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> rgb;

  Dims dims() const noexcept { return {height, width}; }

  bool operator==(const RgbImage&) const = default;
};

/// right[p] couples p with p+1, down[p] couples p with p+width.
/// Entries in the last column (right) and last row (down) are ignored.
struct AffinityMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> right;
  std::vector<float> down;

  Dims dims() const noexcept { return {height, width}; }

  bool operator==(const AffinityMap&) const = default;
};

struct PixelMask {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> mask;

  Dims dims() const noexcept { return {height, width}; }
  std::size_t count() const;
  bool operator[](std::size_t p) const { return mask[p] != 0; }

  bool operator==(const PixelMask&) const = default;
};

PixelMask make_mask(Dims dims, bool value = false);

// Invariant checks. Each throws hsi::Error naming the offending field or
// coordinate.
void validate(const HyperCube& cube);
void validate(const LabelMap& labels);
void validate(const ClassMap& map);
void validate(const SuperpixelMap& sp);
void validate(const RgbImage& image);
void validate(const AffinityMap& aff);
void validate(const PixelMask& mask);
void validate(const HyperCube& cube, const LabelMap& labels);

void require_same_dims(Dims a, Dims b, const char* what);

}  // namespace hsi
