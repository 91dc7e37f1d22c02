#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace saccadet {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or out-of-contract input data (annotations, maps, boxes).
class InputError : public Error {
 public:
  using Error::Error;
};

// Invalid tunable or configuration file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Filesystem failure (open/read/write).
class IoError : public Error {
 public:
  using Error::Error;
};

// Scene specification that cannot be realized by the generator.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

enum class FormatErrorKind {
  BadMagic,
  UnsupportedVersion,
  BadPlaneCount,
  BadDimensions,
  BadDownsample,
  Truncated,
  TrailingBytes,
};

inline const char* to_string(FormatErrorKind kind) {
  switch (kind) {
    case FormatErrorKind::BadMagic: return "bad magic";
    case FormatErrorKind::UnsupportedVersion: return "unsupported version";
    case FormatErrorKind::BadPlaneCount: return "bad plane count";
    case FormatErrorKind::BadDimensions: return "bad dimensions";
    case FormatErrorKind::BadDownsample: return "bad downsample";
    case FormatErrorKind::Truncated: return "truncated payload";
    case FormatErrorKind::TrailingBytes: return "trailing bytes";
  }
  return "unknown";
}

// Binary density file that does not follow the DMAP layout.
class FormatError : public Error {
 public:
  FormatError(FormatErrorKind kind, const std::string& detail)
      : Error(std::string("DMAP ") + to_string(kind) + ": " + detail), kind_(kind) {}

  FormatErrorKind kind() const noexcept { return kind_; }

 private:
  FormatErrorKind kind_;
};

// A detector adapter failed on a specific patch.
class AdapterError : public Error {
 public:
  AdapterError(std::size_t patch_index, const std::string& detail)
      : Error("detector failed on patch " + std::to_string(patch_index) + ": " + detail),
        patch_index_(patch_index) {}

  std::size_t patch_index() const noexcept { return patch_index_; }

 private:
  std::size_t patch_index_;
};

}  // namespace saccadet
