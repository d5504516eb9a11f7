#include "types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace hsi {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::BadHeader: return "BadHeader";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::HeaderTooLarge: return "HeaderTooLarge";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::BandOutOfRange: return "BandOutOfRange";
    case ErrorCode::PaletteTooSmall: return "PaletteTooSmall";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::FractionTooSmall: return "FractionTooSmall";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::TooManySuperpixels: return "TooManySuperpixels";
    case ErrorCode::EmptySegment: return "EmptySegment";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

std::string to_string(const Dims& d) {
  return std::to_string(d.height) + "x" + std::to_string(d.width);
}

namespace {

std::string coord(Dims d, std::size_t p) {
  return "(" + std::to_string(p / d.width) + "," + std::to_string(p % d.width) + ")";
}

void require_nonempty(Dims d, std::size_t actual, std::size_t per_pixel, const char* type,
                      const char* field) {
  if (d.height == 0 || d.width == 0) {
    fail(ErrorCode::DimensionMismatch, std::string(type) + ": height and width must be >= 1");
  }
  if (actual != d.pixels() * per_pixel) {
    fail(ErrorCode::DimensionMismatch,
         std::string(type) + "." + field + " has " + std::to_string(actual) +
             " entries, expected " + std::to_string(d.pixels() * per_pixel));
  }
}

}  // namespace

void require_same_dims(Dims a, Dims b, const char* what) {
  if (a != b) {
    fail(ErrorCode::DimensionMismatch,
         std::string(what) + ": " + to_string(a) + " vs " + to_string(b));
  }
}

std::size_t LabelMap::labeled_count() const {
  return static_cast<std::size_t>(
      std::count_if(labels.begin(), labels.end(), [](ClassId c) { return c != 0; }));
}

LabelMap make_label_map(Dims dims, std::vector<ClassId> labels) {
  LabelMap out{dims.height, dims.width, std::move(labels), 0};
  if (!out.labels.empty()) {
    out.num_classes = *std::max_element(out.labels.begin(), out.labels.end());
  }
  return out;
}

std::vector<std::size_t> SuperpixelMap::segment_sizes() const {
  std::vector<std::size_t> sizes(num_segments, 0);
  for (SegmentId s : segment_ids) {
    if (s < num_segments) ++sizes[s];
  }
  return sizes;
}

SuperpixelMap compact_segments(Dims dims, const std::vector<SegmentId>& ids) {
  SuperpixelMap out{dims.height, dims.width, std::vector<SegmentId>(ids.size()), 0};
  std::unordered_map<SegmentId, SegmentId> remap;
  for (std::size_t p = 0; p < ids.size(); ++p) {
    auto [it, inserted] = remap.try_emplace(ids[p], static_cast<SegmentId>(remap.size()));
    out.segment_ids[p] = it->second;
  }
  out.num_segments = remap.size();
  return out;
}

std::size_t PixelMask::count() const {
  return static_cast<std::size_t>(
      std::count_if(mask.begin(), mask.end(), [](std::uint8_t v) { return v != 0; }));
}

PixelMask make_mask(Dims dims, bool value) {
  return PixelMask{dims.height, dims.width,
                   std::vector<std::uint8_t>(dims.pixels(), value ? 1 : 0)};
}

void validate(const HyperCube& cube) {
  if (cube.bands == 0) fail(ErrorCode::DimensionMismatch, "HyperCube: bands must be >= 1");
  require_nonempty(cube.dims(), cube.data.size(), cube.bands, "HyperCube", "data");
  for (std::size_t i = 0; i < cube.data.size(); ++i) {
    if (!std::isfinite(cube.data[i])) {
      const std::size_t plane = cube.plane_size();
      fail(ErrorCode::NonFiniteValue, "HyperCube.data: non-finite value at band " +
                                          std::to_string(i / plane) + ", pixel " +
                                          coord(cube.dims(), i % plane));
    }
  }
}

void validate(const LabelMap& labels) {
  require_nonempty(labels.dims(), labels.labels.size(), 1, "LabelMap", "labels");
  if (labels.num_classes > std::numeric_limits<ClassId>::max()) {
    fail(ErrorCode::LabelOutOfRange, "LabelMap.num_classes exceeds 65535");
  }
  for (std::size_t p = 0; p < labels.labels.size(); ++p) {
    if (labels.labels[p] > labels.num_classes) {
      fail(ErrorCode::LabelOutOfRange, "LabelMap.labels: value " +
                                           std::to_string(labels.labels[p]) + " at " +
                                           coord(labels.dims(), p) + " exceeds num_classes " +
                                           std::to_string(labels.num_classes));
    }
  }
}

void validate(const ClassMap& map) {
  require_nonempty(map.dims(), map.classes.size(), 1, "ClassMap", "classes");
  if (map.num_classes == 0 || map.num_classes > std::numeric_limits<ClassId>::max()) {
    fail(ErrorCode::LabelOutOfRange, "ClassMap.num_classes must be in 1..65535");
  }
  for (std::size_t p = 0; p < map.classes.size(); ++p) {
    const ClassId c = map.classes[p];
    if (c == 0 || c > map.num_classes) {
      fail(ErrorCode::LabelOutOfRange, "ClassMap.classes: value " + std::to_string(c) + " at " +
                                           coord(map.dims(), p) + " outside 1.." +
                                           std::to_string(map.num_classes));
    }
  }
}

void validate(const SuperpixelMap& sp) {
  require_nonempty(sp.dims(), sp.segment_ids.size(), 1, "SuperpixelMap", "segment_ids");
  std::vector<std::uint8_t> seen(sp.num_segments, 0);
  for (std::size_t p = 0; p < sp.segment_ids.size(); ++p) {
    const SegmentId s = sp.segment_ids[p];
    if (s >= sp.num_segments) {
      fail(ErrorCode::LabelOutOfRange, "SuperpixelMap.segment_ids: id " + std::to_string(s) +
                                           " at " + coord(sp.dims(), p) + " >= num_segments " +
                                           std::to_string(sp.num_segments));
    }
    seen[s] = 1;
  }
  for (std::size_t s = 0; s < seen.size(); ++s) {
    if (!seen[s]) {
      fail(ErrorCode::EmptySegment,
           "SuperpixelMap: segment id " + std::to_string(s) + " has no pixels");
    }
  }
}

void validate(const RgbImage& image) {
  require_nonempty(image.dims(), image.rgb.size(), 3, "RgbImage", "rgb");
}

void validate(const AffinityMap& aff) {
  require_nonempty(aff.dims(), aff.right.size(), 1, "AffinityMap", "right");
  require_nonempty(aff.dims(), aff.down.size(), 1, "AffinityMap", "down");
  auto check = [&](const std::vector<float>& plane, const char* field) {
    for (std::size_t p = 0; p < plane.size(); ++p) {
      const float v = plane[p];
      if (!std::isfinite(v)) {
        fail(ErrorCode::NonFiniteValue,
             std::string("AffinityMap.") + field + ": non-finite at " + coord(aff.dims(), p));
      }
      if (v < 0.0f || v > 1.0f) {
        fail(ErrorCode::InvalidArgument, std::string("AffinityMap.") + field + ": value " +
                                             std::to_string(v) + " at " +
                                             coord(aff.dims(), p) + " outside [0,1]");
      }
    }
  };
  check(aff.right, "right");
  check(aff.down, "down");
}

void validate(const PixelMask& mask) {
  require_nonempty(mask.dims(), mask.mask.size(), 1, "PixelMask", "mask");
}

void validate(const HyperCube& cube, const LabelMap& labels) {
  validate(cube);
  validate(labels);
  require_same_dims(cube.dims(), labels.dims(), "cube vs label map dimensions");
}

}  // namespace hsi
