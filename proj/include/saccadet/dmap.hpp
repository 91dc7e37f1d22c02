#pragma once

// DMAP: little-endian exchange format for density map sets.
//
//   offset  size  field
//   0       4     magic "DMAP"
//   4       4     version (u32, = 1)
//   8       4     plane count (u32, = 4)
//   12      4     width (u32)
//   16      4     height (u32)
//   20      8     downsample (f64)
//   28      ...   plane_count * width * height f32, row-major,
//                 planes ordered tiny, small, middle, large
//
// Values are stored as f32, so a round trip is exact for maps whose values are
// representable in single precision (anything previously read from DMAP).

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <span>
#include <vector>

#include "saccadet/density.hpp"
#include "saccadet/error.hpp"

namespace saccadet {

inline constexpr std::uint32_t kDmapVersion = 1;
inline constexpr std::uint32_t kDmapPlaneCount = 4;
inline constexpr std::size_t kDmapHeaderSize = 28;

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[at + static_cast<std::size_t>(i)]) << (8 * i);
  return v;
}

inline std::uint64_t get_u64(std::span<const std::uint8_t> in, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in[at + static_cast<std::size_t>(i)]) << (8 * i);
  return v;
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_dmap(const DensityMapSet& set) {
  if (set.width() > std::numeric_limits<std::uint32_t>::max() ||
      set.height() > std::numeric_limits<std::uint32_t>::max()) {
    throw FormatError(FormatErrorKind::BadDimensions, "map too large for u32 dimensions");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kDmapHeaderSize + kDmapPlaneCount * set.width() * set.height() * 4);
  for (char c : {'D', 'M', 'A', 'P'}) out.push_back(static_cast<std::uint8_t>(c));
  detail::put_u32(out, kDmapVersion);
  detail::put_u32(out, kDmapPlaneCount);
  detail::put_u32(out, static_cast<std::uint32_t>(set.width()));
  detail::put_u32(out, static_cast<std::uint32_t>(set.height()));
  detail::put_u64(out, std::bit_cast<std::uint64_t>(set.downsample()));
  for (ScaleLevel level : kScaleLevels) {
    for (double v : set[level].values()) {
      if (!std::isfinite(v) || v < 0.0) {
        throw InputError("density plane " + std::string(to_string(level)) + " holds a negative or non-finite value");
      }
      detail::put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
  }
  return out;
}

inline DensityMapSet decode_dmap(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw FormatError(FormatErrorKind::Truncated, "file shorter than magic");
  if (std::memcmp(bytes.data(), "DMAP", 4) != 0) throw FormatError(FormatErrorKind::BadMagic, "expected 'DMAP'");
  if (bytes.size() < kDmapHeaderSize) throw FormatError(FormatErrorKind::Truncated, "incomplete header");

  const std::uint32_t version = detail::get_u32(bytes, 4);
  if (version != kDmapVersion) {
    throw FormatError(FormatErrorKind::UnsupportedVersion, "version " + std::to_string(version));
  }
  const std::uint32_t planes = detail::get_u32(bytes, 8);
  if (planes != kDmapPlaneCount) {
    throw FormatError(FormatErrorKind::BadPlaneCount, "declared " + std::to_string(planes) + " planes, need 4");
  }
  const std::uint64_t width = detail::get_u32(bytes, 12);
  const std::uint64_t height = detail::get_u32(bytes, 16);
  if (width == 0 || height == 0) throw FormatError(FormatErrorKind::BadDimensions, "zero-sized plane");
  // width * height fits in u64; the byte count of four f32 planes may not.
  const std::uint64_t cells = width * height;
  if (cells > (std::numeric_limits<std::uint64_t>::max() - kDmapHeaderSize) / (4ULL * kDmapPlaneCount) ||
      cells > std::numeric_limits<std::size_t>::max() / (4ULL * kDmapPlaneCount)) {
    throw FormatError(FormatErrorKind::BadDimensions, "plane size overflows");
  }
  const double downsample = std::bit_cast<double>(detail::get_u64(bytes, 20));
  if (!(downsample >= 1.0) || !std::isfinite(downsample)) {
    throw FormatError(FormatErrorKind::BadDownsample, "downsample must be finite and >= 1");
  }
  const std::uint64_t expected = kDmapHeaderSize + cells * 4ULL * kDmapPlaneCount;
  if (bytes.size() < expected) {
    throw FormatError(FormatErrorKind::Truncated,
                      "expected " + std::to_string(expected) + " bytes, got " + std::to_string(bytes.size()));
  }
  if (bytes.size() > expected) throw FormatError(FormatErrorKind::TrailingBytes, "data after last plane");

  DensityMapSet set(static_cast<std::size_t>(width), static_cast<std::size_t>(height), downsample);
  std::size_t at = kDmapHeaderSize;
  for (ScaleLevel level : kScaleLevels) {
    for (double& v : set[level].values()) {
      const float f = std::bit_cast<float>(detail::get_u32(bytes, at));
      at += 4;
      if (!std::isfinite(f) || f < 0.0f) {
        throw InputError("DMAP plane " + std::string(to_string(level)) + " holds a negative or non-finite value");
      }
      v = static_cast<double>(f);
    }
  }
  return set;
}

inline void write_dmap(const DensityMapSet& set, const std::filesystem::path& path) {
  const auto bytes = encode_dmap(set);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

inline DensityMapSet read_dmap(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_dmap(bytes);
}

// Rounds every value to the nearest f32, i.e. what a DMAP round trip keeps.
inline DensityMapSet quantize_to_f32(DensityMapSet set) {
  for (ScaleLevel level : kScaleLevels) {
    for (double& v : set[level].values()) v = static_cast<double>(static_cast<float>(v));
  }
  return set;
}

}  // namespace saccadet
