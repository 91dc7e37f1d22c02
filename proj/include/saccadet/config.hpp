#pragma once

// Pipeline tunables and the line-oriented key=value files that carry them.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "saccadet/core.hpp"
#include "saccadet/density.hpp"
#include "saccadet/error.hpp"
#include "saccadet/gaze.hpp"
#include "saccadet/io.hpp"
#include "saccadet/saccade.hpp"
#include "saccadet/synth.hpp"

namespace saccadet {

struct PipelineConfig {
  double downsample = 32.0;
  ScaleBoundaries boundaries;
  GridSet grids = default_grids();
  double threshold = 0.2;
  double expansion = 1.2;
  ScaleWeights alphas = kDefaultScaleWeights;
  double count_scale = 1000.0;
  double nms_iou = 0.5;
  // Zero means derive from the scene: expanded tiny-grid cell size.
  StandardSize standard_size{0, 0};
  std::size_t workers = 1;
  std::uint64_t seed = 0;

  bool operator==(const PipelineConfig&) const = default;
};

inline void validate(const PipelineConfig& c) {
  if (!(c.downsample >= 1.0) || !std::isfinite(c.downsample)) throw ConfigError("downsample must be >= 1");
  validate(c.boundaries);
  for (ScaleLevel level : kScaleLevels) {
    const GridSpec& g = c.grids[index_of(level)];
    if (g.scale != level) throw ConfigError("grids must be ordered tiny, small, middle, large");
    validate(g);
  }
  validate_selection(c.threshold, c.expansion);
  for (double a : c.alphas) {
    if (!(a >= 0.0) || !std::isfinite(a)) throw ConfigError("alpha weights must be finite and >= 0");
  }
  if (!(c.count_scale > 0.0) || !std::isfinite(c.count_scale)) throw ConfigError("count_scale must be positive");
  if (!(c.nms_iou > 0.0 && c.nms_iou <= 1.0)) throw ConfigError("nms_iou must be in (0, 1]");
  if ((c.standard_size.width == 0) != (c.standard_size.height == 0) || c.standard_size.width < 0 ||
      c.standard_size.height < 0) {
    throw ConfigError("standard size must be both positive or both zero (auto)");
  }
  if (c.workers < 1) throw ConfigError("workers must be >= 1");
}

inline StandardSize effective_standard_size(const PipelineConfig& c, const SceneExtent& extent) {
  if (c.standard_size.width > 0) return c.standard_size;
  return default_standard_size(extent, c.grids[index_of(ScaleLevel::Tiny)], c.expansion);
}

// --- key=value parsing ------------------------------------------------------

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline double parse_double(std::string_view key, std::string_view text) {
  const std::string s(trim(text));
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("'" + std::string(key) + "' expects a number, got '" + s + "'");
  }
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view text) {
  const auto s = trim(text);
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ConfigError("'" + std::string(key) + "' expects an integer, got '" + std::string(s) + "'");
  }
  return v;
}

template <std::size_t N>
std::array<double, N> parse_list(std::string_view key, std::string_view text) {
  std::array<double, N> out{};
  std::size_t k = 0;
  std::string_view rest = text;
  while (true) {
    const auto comma = rest.find(',');
    if (k == N) throw ConfigError("'" + std::string(key) + "' expects " + std::to_string(N) + " values");
    out[k++] = parse_double(key, rest.substr(0, comma));
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  if (k != N) throw ConfigError("'" + std::string(key) + "' expects " + std::to_string(N) + " values");
  return out;
}

inline std::string format_double(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

}  // namespace detail

using KeyValues = std::vector<std::pair<std::string, std::string>>;

// Lines of `key = value`; '#' starts a comment.
inline KeyValues parse_key_values(std::string_view text) {
  KeyValues out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key=value");
    }
    out.emplace_back(std::string(detail::trim(line.substr(0, eq))), std::string(detail::trim(line.substr(eq + 1))));
  }
  return out;
}

inline void apply_setting(PipelineConfig& c, std::string_view key, std::string_view value) {
  using detail::parse_double;
  using detail::parse_int;
  if (key == "downsample") {
    c.downsample = parse_double(key, value);
  } else if (key == "boundaries") {
    const auto b = detail::parse_list<3>(key, value);
    c.boundaries = {b[0], b[1], b[2]};
  } else if (key == "grids") {
    const auto g = detail::parse_list<4>(key, value);
    for (ScaleLevel level : kScaleLevels) {
      const double n = g[index_of(level)];
      if (n != std::floor(n)) throw ConfigError("grids expects integers");
      c.grids[index_of(level)] = {level, static_cast<std::int64_t>(n), static_cast<std::int64_t>(n)};
    }
  } else if (key == "threshold") {
    c.threshold = parse_double(key, value);
  } else if (key == "expansion") {
    c.expansion = parse_double(key, value);
  } else if (key == "alphas") {
    c.alphas = detail::parse_list<4>(key, value);
  } else if (key == "count_scale") {
    c.count_scale = parse_double(key, value);
  } else if (key == "nms_iou") {
    c.nms_iou = parse_double(key, value);
  } else if (key == "standard_width") {
    c.standard_size.width = parse_int<std::int64_t>(key, value);
  } else if (key == "standard_height") {
    c.standard_size.height = parse_int<std::int64_t>(key, value);
  } else if (key == "workers") {
    c.workers = parse_int<std::size_t>(key, value);
  } else if (key == "seed") {
    c.seed = parse_int<std::uint64_t>(key, value);
  } else {
    throw ConfigError("unknown configuration key '" + std::string(key) + "'");
  }
}

inline PipelineConfig parse_config(std::string_view text, PipelineConfig base = {}) {
  for (const auto& [key, value] : parse_key_values(text)) apply_setting(base, key, value);
  validate(base);
  return base;
}

inline PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {}) {
  return parse_config(read_text(path), std::move(base));
}

// Effective configuration in the same key=value form parse_config accepts.
inline std::string to_config_text(const PipelineConfig& c) {
  using detail::format_double;
  std::ostringstream out;
  out << "downsample = " << format_double(c.downsample) << "\n";
  out << "boundaries = " << format_double(c.boundaries.small) << "," << format_double(c.boundaries.middle) << ","
      << format_double(c.boundaries.large) << "\n";
  out << "grids = " << c.grids[0].cells_x << "," << c.grids[1].cells_x << "," << c.grids[2].cells_x << ","
      << c.grids[3].cells_x << "\n";
  out << "threshold = " << format_double(c.threshold) << "\n";
  out << "expansion = " << format_double(c.expansion) << "\n";
  out << "alphas = " << format_double(c.alphas[0]) << "," << format_double(c.alphas[1]) << ","
      << format_double(c.alphas[2]) << "," << format_double(c.alphas[3]) << "\n";
  out << "count_scale = " << format_double(c.count_scale) << "\n";
  out << "nms_iou = " << format_double(c.nms_iou) << "\n";
  out << "standard_width = " << c.standard_size.width << "\n";
  out << "standard_height = " << c.standard_size.height << "\n";
  out << "workers = " << c.workers << "\n";
  out << "seed = " << c.seed << "\n";
  return out.str();
}

// --- scene specs -------------------------------------------------------------

inline void apply_setting(SceneSpec& s, std::string_view key, std::string_view value) {
  using detail::parse_double;
  using detail::parse_int;
  if (key == "width") {
    s.extent.width = parse_int<std::int64_t>(key, value);
  } else if (key == "height") {
    s.extent.height = parse_int<std::int64_t>(key, value);
  } else if (key == "objects") {
    s.object_count = parse_int<std::size_t>(key, value);
  } else if (key == "foreground") {
    s.foreground_fraction_target = parse_double(key, value);
  } else if (key == "min_side") {
    s.min_side = parse_double(key, value);
  } else if (key == "max_side") {
    s.max_side = parse_double(key, value);
  } else if (key == "clusters") {
    s.cluster_count = parse_int<std::size_t>(key, value);
  } else if (key == "seed") {
    s.seed = parse_int<std::uint64_t>(key, value);
  } else if (key == "max_iou") {
    s.max_pairwise_iou = parse_double(key, value);
  } else {
    throw ConfigError("unknown scene key '" + std::string(key) + "'");
  }
}

inline SceneSpec parse_scene_spec(std::string_view text, SceneSpec base = {}) {
  for (const auto& [key, value] : parse_key_values(text)) apply_setting(base, key, value);
  try {
    validate(base);
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
  return base;
}

}  // namespace saccadet
