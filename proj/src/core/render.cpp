#include "render.hpp"

#include <algorithm>
#include <cmath>

#include <zlib.h>


namespace hsi {

RgbBands default_rgb_bands(std::size_t bands) {
  const double last = bands ? static_cast<double>(bands - 1) : 0.0;
  auto pick = [&](double f) { return static_cast<std::size_t>(std::lround(f * last)); };
  return {pick(0.6), pick(0.4), pick(0.1)};
}

double percentile(std::vector<float> values, double q) {
  if (values.empty()) fail(ErrorCode::InvalidArgument, "percentile of empty set");
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(lo), values.end());
  const double a = values[lo];
  if (hi == lo) return a;
  const double b = *std::min_element(values.begin() + static_cast<std::ptrdiff_t>(lo) + 1, values.end());
  return a + (pos - static_cast<double>(lo)) * (b - a);
}

RgbImage cube_to_rgb(const HyperCube& cube, RgbBands bands) {
  for (std::size_t b : {bands.red, bands.green, bands.blue}) {
    if (b >= cube.bands) {
      fail(ErrorCode::BandOutOfRange,
           "band index " + std::to_string(b) + " but cube has " + std::to_string(cube.bands) + " bands");
    }
  }
  const std::size_t n = cube.plane_size();
  RgbImage out{cube.height, cube.width, std::vector<std::uint8_t>(n * 3)};
  const std::size_t selected[3] = {bands.red, bands.green, bands.blue};
  for (int ch = 0; ch < 3; ++ch) {
    const float* plane = cube.band_ptr(selected[ch]);
    std::vector<float> values(plane, plane + n);
    const double lo = percentile(values, 0.02);
    const double hi = percentile(std::move(values), 0.98);
    for (std::size_t p = 0; p < n; ++p) {
      std::uint8_t v = 128;
      if (hi > lo) {
        const double clipped = std::clamp(static_cast<double>(plane[p]), lo, hi);
        v = static_cast<std::uint8_t>(std::lround((clipped - lo) / (hi - lo) * 255.0));
      }
      out.rgb[p * 3 + ch] = v;
    }
  }
  return out;
}

const std::vector<Color>& default_palette() {
  static const std::vector<Color> palette = {
      {230, 25, 75},   {60, 180, 75},   {255, 225, 25},  {0, 130, 200},
      {245, 130, 48},  {145, 30, 180},  {70, 240, 240},  {240, 50, 230},
      {210, 245, 60},  {250, 190, 212}, {0, 128, 128},   {220, 190, 255},
      {170, 110, 40},  {255, 250, 200}, {128, 0, 0},     {170, 255, 195},
  };
  return palette;
}

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>(v & 0xFF));
}

void put_chunk(std::string& out, const char type[4], const std::string& data) {
  put_u32(out, static_cast<std::uint32_t>(data.size()));
  std::string body(type, 4);
  body += data;
  out += body;
  const auto crc = crc32(0L, reinterpret_cast<const Bytef*>(body.data()), static_cast<uInt>(body.size()));
  put_u32(out, static_cast<std::uint32_t>(crc));
}

}  // namespace

std::string encode_png(const RgbImage& image) {
  validate(image);
  std::string out("\x89PNG\r\n\x1a\n", 8);

  std::string ihdr;
  put_u32(ihdr, static_cast<std::uint32_t>(image.width));
  put_u32(ihdr, static_cast<std::uint32_t>(image.height));
  ihdr += std::string("\x08\x02\x00\x00\x00", 5);  // 8-bit, truecolor, deflate, filter 0, no interlace
  put_chunk(out, "IHDR", ihdr);

  const std::size_t stride = image.width * 3;
  std::string raw;
  raw.reserve(image.height * (stride + 1));
  for (std::size_t y = 0; y < image.height; ++y) {
    raw.push_back('\0');
    raw.append(reinterpret_cast<const char*>(image.rgb.data() + y * stride), stride);
  }
  uLongf packed_size = compressBound(static_cast<uLong>(raw.size()));
  std::string packed(packed_size, '\0');
  if (compress2(reinterpret_cast<Bytef*>(packed.data()), &packed_size,
                reinterpret_cast<const Bytef*>(raw.data()), static_cast<uLong>(raw.size()), 9) != Z_OK) {
    fail(ErrorCode::Internal, "zlib compression failed");
  }
  packed.resize(packed_size);
  put_chunk(out, "IDAT", packed);
  put_chunk(out, "IEND", "");
  return out;
}

namespace {

template <typename Values>
RgbImage paint(Dims dims, const Values& values, std::span<const Color> palette, bool allow_zero) {
  RgbImage img{dims.height, dims.width, std::vector<std::uint8_t>(dims.pixels() * 3)};
  for (std::size_t p = 0; p < dims.pixels(); ++p) {
    const ClassId c = values[p];
    Color color = kBackgroundColor;
    if (c != 0) {
      color = palette[c - 1];
    } else if (!allow_zero) {
      fail(ErrorCode::LabelOutOfRange, "class 0 in a prediction map");
    }
    std::copy(color.begin(), color.end(), img.rgb.begin() + static_cast<std::ptrdiff_t>(p * 3));
  }
  return img;
}

void require_palette(std::size_t num_classes, std::size_t entries) {
  if (entries < num_classes) {
    fail(ErrorCode::PaletteTooSmall, "palette has " + std::to_string(entries) + " colors for " +
                                         std::to_string(num_classes) + " classes");
  }
}

}  // namespace

std::string render_class_map(const ClassMap& map, std::span<const Color> palette) {
  validate(map);
  require_palette(map.num_classes, palette.size());
  return encode_png(paint(map.dims(), map.classes, palette, false));
}

std::string render_label_map(const LabelMap& labels, std::span<const Color> palette) {
  validate(labels);
  require_palette(labels.num_classes, palette.size());
  return encode_png(paint(labels.dims(), labels.labels, palette, true));
}

RgbImage overlay_boundaries(const RgbImage& image, const SuperpixelMap& sp, Color color) {
  require_same_dims(image.dims(), sp.dims(), "image vs superpixel map");
  RgbImage out = image;
  const std::size_t w = sp.width;
  for (std::size_t y = 0; y < sp.height; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t p = y * w + x;
      const bool edge = (x + 1 < w && sp.segment_ids[p] != sp.segment_ids[p + 1]) ||
                        (y + 1 < sp.height && sp.segment_ids[p] != sp.segment_ids[p + w]);
      if (edge) std::copy(color.begin(), color.end(), out.rgb.begin() + static_cast<std::ptrdiff_t>(p * 3));
    }
  }
  return out;
}

}  // namespace hsi
