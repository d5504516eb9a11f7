#include "io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include <json.hpp>

namespace hsi::io {

namespace {

using Json = nlohmann::ordered_json;

constexpr std::size_t kMaxHeaderBytes = 64 * 1024;

// ---- little-endian payload packing -------------------------------------

template <typename T>
void append_le(std::string& out, const std::vector<T>& values) {
  const std::size_t offset = out.size();
  out.resize(offset + values.size() * sizeof(T));
  char* dst = out.data() + offset;
  if constexpr (std::endian::native == std::endian::little) {
    if (!values.empty()) std::memcpy(dst, values.data(), values.size() * sizeof(T));
  } else {
    for (std::size_t i = 0; i < values.size(); ++i) {
      unsigned char bytes[sizeof(T)];
      std::memcpy(bytes, &values[i], sizeof(T));
      for (std::size_t k = 0; k < sizeof(T); ++k) dst[i * sizeof(T) + k] = bytes[sizeof(T) - 1 - k];
    }
  }
}

template <typename T>
std::vector<T> unpack_le(std::string_view bytes, std::size_t count) {
  std::vector<T> out(count);
  if constexpr (std::endian::native == std::endian::little) {
    if (count) std::memcpy(out.data(), bytes.data(), count * sizeof(T));
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      unsigned char tmp[sizeof(T)];
      for (std::size_t k = 0; k < sizeof(T); ++k) tmp[k] = bytes[i * sizeof(T) + sizeof(T) - 1 - k];
      std::memcpy(&out[i], tmp, sizeof(T));
    }
  }
  return out;
}

// ---- header handling ---------------------------------------------------

std::string header_line(const Json& header) { return header.dump() + "\n"; }

Json base_header(std::string_view magic, Dims dims) {
  Json h;
  h["magic"] = magic;
  h["height"] = dims.height;
  h["width"] = dims.width;
  return h;
}

Json parse_header(std::string_view line, std::string_view magic) {
  if (line.empty() || line.front() != '{') {
    fail(ErrorCode::BadMagic, "expected a JSON header with magic " + std::string(magic));
  }
  Json h;
  try {
    h = Json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::BadHeader, std::string("malformed header: ") + e.what());
  }
  if (!h.is_object() || !h.contains("magic") || !h["magic"].is_string()) {
    fail(ErrorCode::BadMagic, "header lacks a magic string");
  }
  const auto found = h["magic"].get<std::string>();
  if (found != magic) {
    fail(ErrorCode::BadMagic, "magic '" + found + "' where '" + std::string(magic) + "' expected");
  }
  return h;
}

std::size_t get_count(const Json& h, const char* key, bool allow_zero = false) {
  if (!h.contains(key) || !h[key].is_number_unsigned()) {
    fail(ErrorCode::BadHeader, std::string("header field '") + key + "' missing or not a count");
  }
  const auto v = h[key].get<std::uint64_t>();
  if (v == 0 && !allow_zero) fail(ErrorCode::BadHeader, std::string("header field '") + key + "' must be >= 1");
  return static_cast<std::size_t>(v);
}

void require_dtype(const Json& h, std::string_view dtype) {
  if (!h.contains("dtype") || !h["dtype"].is_string() || h["dtype"].get<std::string>() != dtype) {
    fail(ErrorCode::BadHeader, "header dtype must be '" + std::string(dtype) + "'");
  }
}

/// h*w*planes*elem with overflow and cap checks, before any allocation.
std::uint64_t payload_bytes(const Json& h, std::size_t planes, std::size_t elem,
                            const ReadOptions& opts) {
  const std::uint64_t height = get_count(h, "height");
  const std::uint64_t width = get_count(h, "width");
  std::uint64_t total = height;
  for (std::uint64_t f : {width, static_cast<std::uint64_t>(planes), static_cast<std::uint64_t>(elem)}) {
    if (f != 0 && total > std::numeric_limits<std::uint64_t>::max() / f) {
      fail(ErrorCode::HeaderTooLarge, "header dimensions overflow 64-bit byte count");
    }
    total *= f;
  }
  if (total > opts.max_payload_bytes) {
    fail(ErrorCode::HeaderTooLarge, "header declares " + std::to_string(total) +
                                        " payload bytes, cap is " +
                                        std::to_string(opts.max_payload_bytes));
  }
  return total;
}

void require_payload(std::string_view payload, std::uint64_t expected) {
  if (payload.size() != expected) {
    fail(ErrorCode::TruncatedPayload, "payload size mismatch: expected " + std::to_string(expected) +
                                          " bytes, found " + std::to_string(payload.size()));
  }
}

// ---- per-type decode from (header, payload) ----------------------------

HyperCube cube_from(const Json& h, std::string_view payload, const ReadOptions& opts) {
  require_dtype(h, "f32le");
  const std::size_t bands = get_count(h, "bands");
  const auto bytes = payload_bytes(h, bands, sizeof(float), opts);
  require_payload(payload, bytes);
  HyperCube cube;
  cube.height = get_count(h, "height");
  cube.width = get_count(h, "width");
  cube.bands = bands;
  cube.data = unpack_le<float>(payload, cube.height * cube.width * bands);
  if (h.contains("name") && h["name"].is_string()) cube.name = h["name"].get<std::string>();
  validate(cube);
  return cube;
}

template <typename Map>
Map u16_map_from(const Json& h, std::string_view payload, const ReadOptions& opts) {
  require_dtype(h, "u16le");
  const auto bytes = payload_bytes(h, 1, sizeof(ClassId), opts);
  require_payload(payload, bytes);
  Map m;
  m.height = get_count(h, "height");
  m.width = get_count(h, "width");
  auto values = unpack_le<ClassId>(payload, m.height * m.width);
  std::size_t max_value = 0;
  for (ClassId v : values) max_value = std::max<std::size_t>(max_value, v);
  m.num_classes = h.contains("num_classes") ? get_count(h, "num_classes", true) : max_value;
  if constexpr (std::is_same_v<Map, LabelMap>) {
    m.labels = std::move(values);
  } else {
    m.classes = std::move(values);
  }
  validate(m);
  return m;
}

SuperpixelMap segments_from(const Json& h, std::string_view payload, const ReadOptions& opts) {
  require_dtype(h, "u32le");
  const auto bytes = payload_bytes(h, 1, sizeof(SegmentId), opts);
  require_payload(payload, bytes);
  SuperpixelMap sp;
  sp.height = get_count(h, "height");
  sp.width = get_count(h, "width");
  sp.segment_ids = unpack_le<SegmentId>(payload, sp.height * sp.width);
  std::size_t max_id = 0;
  for (SegmentId s : sp.segment_ids) max_id = std::max<std::size_t>(max_id, s);
  sp.num_segments = h.contains("num_segments") ? get_count(h, "num_segments") : max_id + 1;
  validate(sp);
  return sp;
}

AffinityMap affinity_from(const Json& h, std::string_view payload, const ReadOptions& opts) {
  require_dtype(h, "f32le");
  const auto bytes = payload_bytes(h, 2, sizeof(float), opts);
  require_payload(payload, bytes);
  AffinityMap aff;
  aff.height = get_count(h, "height");
  aff.width = get_count(h, "width");
  const std::size_t n = aff.height * aff.width;
  aff.right = unpack_le<float>(payload.substr(0, n * sizeof(float)), n);
  aff.down = unpack_le<float>(payload.substr(n * sizeof(float)), n);
  validate(aff);
  return aff;
}

PixelMask mask_from(const Json& h, std::string_view payload, const ReadOptions& opts) {
  require_dtype(h, "u8");
  const auto bytes = payload_bytes(h, 1, 1, opts);
  require_payload(payload, bytes);
  PixelMask m;
  m.height = get_count(h, "height");
  m.width = get_count(h, "width");
  m.mask.assign(payload.begin(), payload.end());
  for (std::size_t p = 0; p < m.mask.size(); ++p) {
    if (m.mask[p] > 1) {
      fail(ErrorCode::BadHeader, "mask value " + std::to_string(m.mask[p]) + " at pixel " +
                                     std::to_string(p) + " is not 0 or 1");
    }
  }
  return m;
}

// ---- file plumbing -----------------------------------------------------

struct RawFile {
  Json header;
  std::string payload;
};

/// Reads the header line, lets `expected` compute (and cap-check) the payload
/// size from it, then reads exactly that many bytes.
template <typename SizeFn>
RawFile read_raw(const std::filesystem::path& path, std::string_view magic, SizeFn expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, "cannot open '" + path.string() + "' for reading");

  std::string line;
  char ch;
  while (in.get(ch) && ch != '\n') {
    line.push_back(ch);
    if (line.size() > kMaxHeaderBytes) {
      fail(ErrorCode::BadHeader, "'" + path.string() + "': header line longer than 64 KiB");
    }
    if (line.size() == 1 && ch != '{') break;
  }
  if (line.empty() || line.front() != '{') {
    fail(ErrorCode::BadMagic, "'" + path.string() + "' does not start with a " +
                                  std::string(magic) + " header");
  }
  if (ch != '\n') fail(ErrorCode::BadHeader, "'" + path.string() + "': header not newline-terminated");

  RawFile raw;
  raw.header = parse_header(line, magic);
  const std::uint64_t want = expected(raw.header);

  const auto start = in.tellg();
  in.seekg(0, std::ios::end);
  const auto end = in.tellg();
  in.seekg(start);
  const auto have = static_cast<std::uint64_t>(end - start);
  if (have != want) {
    fail(ErrorCode::TruncatedPayload, "'" + path.string() + "': expected " + std::to_string(want) +
                                          " payload bytes, found " + std::to_string(have));
  }
  raw.payload.resize(want);
  if (want && !in.read(raw.payload.data(), static_cast<std::streamsize>(want))) {
    fail(ErrorCode::IoFailure, "short read from '" + path.string() + "'");
  }
  return raw;
}

template <typename Fn>
auto with_path(const std::filesystem::path& path, Fn fn) {
  try {
    return fn();
  } catch (const Error& e) {
    const std::string msg = e.what();
    if (msg.find(path.string()) != std::string::npos) throw;
    throw Error(e.code(), "'" + path.string() + "': " + msg);
  }
}

}  // namespace

std::string_view split_header(std::string_view bytes, std::string_view magic,
                              std::string& header_json) {
  const auto nl = bytes.find('\n');
  if (bytes.empty() || bytes.front() != '{') {
    fail(ErrorCode::BadMagic, "data does not start with a " + std::string(magic) + " header");
  }
  if (nl == std::string_view::npos || nl > kMaxHeaderBytes) {
    fail(ErrorCode::BadHeader, "header line missing newline terminator");
  }
  header_json = std::string(bytes.substr(0, nl));
  parse_header(header_json, magic);
  return bytes.substr(nl + 1);
}

// ---- encoders ----------------------------------------------------------

std::string encode(const HyperCube& cube) {
  validate(cube);
  Json h = base_header(kCubeMagic, cube.dims());
  h["bands"] = cube.bands;
  h["dtype"] = "f32le";
  if (!cube.name.empty()) h["name"] = cube.name;
  std::string out = header_line(h);
  append_le(out, cube.data);
  return out;
}

std::string encode(const LabelMap& labels) {
  validate(labels);
  Json h = base_header(kLabelMagic, labels.dims());
  h["dtype"] = "u16le";
  h["num_classes"] = labels.num_classes;
  std::string out = header_line(h);
  append_le(out, labels.labels);
  return out;
}

std::string encode(const ClassMap& map) {
  validate(map);
  Json h = base_header(kClassMagic, map.dims());
  h["dtype"] = "u16le";
  h["num_classes"] = map.num_classes;
  std::string out = header_line(h);
  append_le(out, map.classes);
  return out;
}

std::string encode(const SuperpixelMap& sp) {
  validate(sp);
  Json h = base_header(kSegmentMagic, sp.dims());
  h["dtype"] = "u32le";
  h["num_segments"] = sp.num_segments;
  std::string out = header_line(h);
  append_le(out, sp.segment_ids);
  return out;
}

std::string encode(const AffinityMap& aff) {
  validate(aff);
  Json h = base_header(kAffinityMagic, aff.dims());
  h["dtype"] = "f32le";
  std::string out = header_line(h);
  append_le(out, aff.right);
  append_le(out, aff.down);
  return out;
}

std::string encode(const PixelMask& mask) {
  validate(mask);
  Json h = base_header(kMaskMagic, mask.dims());
  h["dtype"] = "u8";
  std::string out = header_line(h);
  out.reserve(out.size() + mask.mask.size());
  for (std::uint8_t v : mask.mask) out.push_back(v ? '\1' : '\0');
  return out;
}

// ---- decoders ----------------------------------------------------------

namespace {

template <typename Fn>
auto decode_with(std::string_view bytes, std::string_view magic, Fn fn) {
  std::string line;
  const auto payload = split_header(bytes, magic, line);
  return fn(Json::parse(line), payload);
}

}  // namespace

HyperCube decode_cube(std::string_view bytes, const ReadOptions& opts) {
  return decode_with(bytes, kCubeMagic, [&](const Json& h, std::string_view p) { return cube_from(h, p, opts); });
}
LabelMap decode_labels(std::string_view bytes, const ReadOptions& opts) {
  return decode_with(bytes, kLabelMagic,
                     [&](const Json& h, std::string_view p) { return u16_map_from<LabelMap>(h, p, opts); });
}
ClassMap decode_classmap(std::string_view bytes, const ReadOptions& opts) {
  return decode_with(bytes, kClassMagic,
                     [&](const Json& h, std::string_view p) { return u16_map_from<ClassMap>(h, p, opts); });
}
SuperpixelMap decode_superpixels(std::string_view bytes, const ReadOptions& opts) {
  return decode_with(bytes, kSegmentMagic,
                     [&](const Json& h, std::string_view p) { return segments_from(h, p, opts); });
}
AffinityMap decode_affinity(std::string_view bytes, const ReadOptions& opts) {
  return decode_with(bytes, kAffinityMagic,
                     [&](const Json& h, std::string_view p) { return affinity_from(h, p, opts); });
}
PixelMask decode_mask(std::string_view bytes, const ReadOptions& opts) {
  return decode_with(bytes, kMaskMagic, [&](const Json& h, std::string_view p) { return mask_from(h, p, opts); });
}

// ---- file readers ------------------------------------------------------

HyperCube read_cube(const std::filesystem::path& path, const ReadOptions& opts) {
  return with_path(path, [&] {
    auto raw = read_raw(path, kCubeMagic, [&](const Json& h) {
      return payload_bytes(h, get_count(h, "bands"), sizeof(float), opts);
    });
    return cube_from(raw.header, raw.payload, opts);
  });
}

LabelMap read_labels(const std::filesystem::path& path, const ReadOptions& opts) {
  return with_path(path, [&] {
    auto raw = read_raw(path, kLabelMagic, [&](const Json& h) { return payload_bytes(h, 1, 2, opts); });
    return u16_map_from<LabelMap>(raw.header, raw.payload, opts);
  });
}

ClassMap read_classmap(const std::filesystem::path& path, const ReadOptions& opts) {
  return with_path(path, [&] {
    auto raw = read_raw(path, kClassMagic, [&](const Json& h) { return payload_bytes(h, 1, 2, opts); });
    return u16_map_from<ClassMap>(raw.header, raw.payload, opts);
  });
}

SuperpixelMap read_superpixels(const std::filesystem::path& path, const ReadOptions& opts) {
  return with_path(path, [&] {
    auto raw = read_raw(path, kSegmentMagic, [&](const Json& h) { return payload_bytes(h, 1, 4, opts); });
    return segments_from(raw.header, raw.payload, opts);
  });
}

AffinityMap read_affinity(const std::filesystem::path& path, const ReadOptions& opts) {
  return with_path(path, [&] {
    auto raw = read_raw(path, kAffinityMagic, [&](const Json& h) { return payload_bytes(h, 2, 4, opts); });
    return affinity_from(raw.header, raw.payload, opts);
  });
}

PixelMask read_mask(const std::filesystem::path& path, const ReadOptions& opts) {
  return with_path(path, [&] {
    auto raw = read_raw(path, kMaskMagic, [&](const Json& h) { return payload_bytes(h, 1, 1, opts); });
    return mask_from(raw.header, raw.payload, opts);
  });
}

CubeHeader read_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, "cannot open '" + path.string() + "' for reading");
  std::string line;
  std::getline(in, line);
  if (line.empty() || line.front() != '{') fail(ErrorCode::BadMagic, "'" + path.string() + "' has no JSON header");
  Json h;
  try {
    h = Json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::BadHeader, "'" + path.string() + "': " + e.what());
  }
  CubeHeader out;
  out.magic = h.value("magic", "");
  out.height = h.value("height", std::size_t{0});
  out.width = h.value("width", std::size_t{0});
  out.bands = h.value("bands", std::size_t{1});
  out.dtype = h.value("dtype", "");
  out.name = h.value("name", "");
  return out;
}

// ---- writers -----------------------------------------------------------

std::string read_file(const std::filesystem::path& path, std::uint64_t max_bytes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, "cannot open '" + path.string() + "' for reading");
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::uint64_t>(in.tellg());
  if (size > max_bytes) {
    fail(ErrorCode::HeaderTooLarge, "'" + path.string() + "' is larger than " + std::to_string(max_bytes) + " bytes");
  }
  in.seekg(0);
  std::string out(size, '\0');
  if (size && !in.read(out.data(), static_cast<std::streamsize>(size))) {
    fail(ErrorCode::IoFailure, "short read from '" + path.string() + "'");
  }
  return out;
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoFailure, "cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::IoFailure, "write to '" + path.string() + "' failed");
}

void write_cube(const HyperCube& cube, const std::filesystem::path& path) { write_file(path, encode(cube)); }
void write_labels(const LabelMap& labels, const std::filesystem::path& path) { write_file(path, encode(labels)); }
void write_classmap(const ClassMap& map, const std::filesystem::path& path) { write_file(path, encode(map)); }
void write_superpixels(const SuperpixelMap& sp, const std::filesystem::path& path) { write_file(path, encode(sp)); }
void write_affinity(const AffinityMap& aff, const std::filesystem::path& path) { write_file(path, encode(aff)); }
void write_mask(const PixelMask& mask, const std::filesystem::path& path) { write_file(path, encode(mask)); }

}  // namespace hsi::io
