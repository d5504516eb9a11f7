#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <zlib.h>

namespace hsi::test {

struct DecodedPng {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> rgb;
};

/// Minimal reader for the 8-bit RGB, filter-0 PNGs the library writes.
/// Checks the signature and every chunk CRC.
inline DecodedPng decode_png(const std::string& png) {
  auto u32 = [&](std::size_t at) {
    return (std::uint32_t(std::uint8_t(png[at])) << 24) | (std::uint32_t(std::uint8_t(png[at + 1])) << 16) |
           (std::uint32_t(std::uint8_t(png[at + 2])) << 8) | std::uint32_t(std::uint8_t(png[at + 3]));
  };
  if (png.compare(0, 8, "\x89PNG\r\n\x1a\n") != 0) throw std::runtime_error("bad signature");
  DecodedPng out;
  std::string idat;
  std::size_t pos = 8;
  while (pos + 12 <= png.size()) {
    const std::uint32_t len = u32(pos);
    const std::string type = png.substr(pos + 4, 4);
    const auto* body = reinterpret_cast<const Bytef*>(png.data() + pos + 4);
    if (crc32(0, body, len + 4) != u32(pos + 8 + len)) throw std::runtime_error("bad crc in " + type);
    if (type == "IHDR") {
      out.width = u32(pos + 8);
      out.height = u32(pos + 12);
      if (png[pos + 16] != 8 || png[pos + 17] != 2) throw std::runtime_error("not 8-bit RGB");
    } else if (type == "IDAT") {
      idat += png.substr(pos + 8, len);
    } else if (type == "IEND") {
      break;
    }
    pos += 12 + len;
  }
  const std::size_t stride = out.width * 3 + 1;
  std::vector<std::uint8_t> raw(stride * out.height);
  uLongf raw_len = raw.size();
  if (uncompress(raw.data(), &raw_len, reinterpret_cast<const Bytef*>(idat.data()), idat.size()) != Z_OK ||
      raw_len != raw.size()) {
    throw std::runtime_error("bad IDAT");
  }
  for (std::size_t y = 0; y < out.height; ++y) {
    if (raw[y * stride] != 0) throw std::runtime_error("unexpected filter");
    out.rgb.insert(out.rgb.end(), raw.begin() + y * stride + 1, raw.begin() + (y + 1) * stride);
  }
  return out;
}

}  // namespace hsi::test
