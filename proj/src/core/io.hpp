#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "types.hpp"

namespace hsi::io {

// Every raster file is one UTF-8 JSON object on a single newline-terminated
// line followed by a raw little-endian payload:
//
//   .hsc  HSC1  f32le  bands planes of height*width, band-sequential
//   .hsl  HSL1  u16le  ground truth, 0 = unlabeled
//   .hsp  HSP1  u16le  prediction, every value in 1..num_classes
//   .hss  HSS1  u32le  segment ids 0..num_segments-1
//   .hsa  HSA1  f32le  two planes: right affinities, then down affinities
//   .hsm  HSM1  u8     pixel mask, 0 or 1
//
// Header keys are written in the order magic, height, width, [bands], dtype,
// [num_classes | num_segments], [name].

inline constexpr std::string_view kCubeMagic = "HSC1";
inline constexpr std::string_view kLabelMagic = "HSL1";
inline constexpr std::string_view kClassMagic = "HSP1";
inline constexpr std::string_view kSegmentMagic = "HSS1";
inline constexpr std::string_view kAffinityMagic = "HSA1";
inline constexpr std::string_view kMaskMagic = "HSM1";

inline constexpr std::uint64_t kDefaultPayloadCap = 2ULL << 30;  // 2 GiB

struct ReadOptions {
  std::uint64_t max_payload_bytes = kDefaultPayloadCap;
};

struct CubeHeader {
  std::string magic;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t bands = 1;
  std::string dtype;
  std::string name;
};

// In-memory encoders/decoders. Byte output is deterministic.
std::string encode(const HyperCube& cube);
std::string encode(const LabelMap& labels);
std::string encode(const ClassMap& map);
std::string encode(const SuperpixelMap& sp);
std::string encode(const AffinityMap& aff);
std::string encode(const PixelMask& mask);

HyperCube decode_cube(std::string_view bytes, const ReadOptions& opts = {});
LabelMap decode_labels(std::string_view bytes, const ReadOptions& opts = {});
ClassMap decode_classmap(std::string_view bytes, const ReadOptions& opts = {});
SuperpixelMap decode_superpixels(std::string_view bytes, const ReadOptions& opts = {});
AffinityMap decode_affinity(std::string_view bytes, const ReadOptions& opts = {});
PixelMask decode_mask(std::string_view bytes, const ReadOptions& opts = {});

HyperCube read_cube(const std::filesystem::path& path, const ReadOptions& opts = {});
LabelMap read_labels(const std::filesystem::path& path, const ReadOptions& opts = {});
ClassMap read_classmap(const std::filesystem::path& path, const ReadOptions& opts = {});
SuperpixelMap read_superpixels(const std::filesystem::path& path, const ReadOptions& opts = {});
AffinityMap read_affinity(const std::filesystem::path& path, const ReadOptions& opts = {});
PixelMask read_mask(const std::filesystem::path& path, const ReadOptions& opts = {});

void write_cube(const HyperCube& cube, const std::filesystem::path& path);
void write_labels(const LabelMap& labels, const std::filesystem::path& path);
void write_classmap(const ClassMap& map, const std::filesystem::path& path);
void write_superpixels(const SuperpixelMap& sp, const std::filesystem::path& path);
void write_affinity(const AffinityMap& aff, const std::filesystem::path& path);
void write_mask(const PixelMask& mask, const std::filesystem::path& path);

/// Reads only the header line of any raster file.
CubeHeader read_header(const std::filesystem::path& path);

// Whole-file helpers shared with the model and report writers.
std::string read_file(const std::filesystem::path& path, std::uint64_t max_bytes = kDefaultPayloadCap);
void write_file(const std::filesystem::path& path, std::string_view bytes);

/// Splits "header\npayload", parses the header as JSON and checks its magic.
/// Returns the payload view. Throws BadMagic / BadHeader.
std::string_view split_header(std::string_view bytes, std::string_view magic,
                              std::string& header_json);

}  // namespace hsi::io
