#pragma once

// Geometry primitives and scale buckets shared by every pipeline stage.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "saccadet/error.hpp"

namespace saccadet {

// Axis-aligned box, top-left origin. Whether it lives in the global or a
// patch frame is tracked by the container holding it.
struct BoundingBox {
  double x = 0.0;
  double y = 0.0;
  double width = 0.0;
  double height = 0.0;

  double right() const noexcept { return x + width; }
  double bottom() const noexcept { return y + height; }
  double center_x() const noexcept { return x + 0.5 * width; }
  double center_y() const noexcept { return y + 0.5 * height; }
  double area() const noexcept { return width * height; }
  double longest_side() const noexcept { return std::max(width, height); }

  bool operator==(const BoundingBox&) const = default;
};

inline bool is_valid(const BoundingBox& box) noexcept {
  return std::isfinite(box.x) && std::isfinite(box.y) && std::isfinite(box.width) &&
         std::isfinite(box.height) && box.width > 0.0 && box.height > 0.0;
}

inline double intersection_area(const BoundingBox& a, const BoundingBox& b) noexcept {
  const double w = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const double h = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  return (w > 0.0 && h > 0.0) ? w * h : 0.0;
}

inline double iou(const BoundingBox& a, const BoundingBox& b) noexcept {
  const double inter = intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

enum class ScaleLevel : std::uint8_t { Tiny = 0, Small = 1, Middle = 2, Large = 3 };

inline constexpr std::size_t kScaleCount = 4;
inline constexpr std::array<ScaleLevel, kScaleCount> kScaleLevels = {
    ScaleLevel::Tiny, ScaleLevel::Small, ScaleLevel::Middle, ScaleLevel::Large};

constexpr std::size_t index_of(ScaleLevel level) noexcept { return static_cast<std::size_t>(level); }

inline std::string_view to_string(ScaleLevel level) noexcept {
  switch (level) {
    case ScaleLevel::Tiny: return "tiny";
    case ScaleLevel::Small: return "small";
    case ScaleLevel::Middle: return "middle";
    case ScaleLevel::Large: return "large";
  }
  return "tiny";
}

inline ScaleLevel parse_scale_level(std::string_view text) {
  for (ScaleLevel level : kScaleLevels) {
    if (to_string(level) == text) return level;
  }
  throw InputError("unknown scale level '" + std::string(text) + "'");
}

// Longest-side thresholds separating Tiny/Small, Small/Middle, Middle/Large.
struct ScaleBoundaries {
  double small = 800.0;
  double middle = 1600.0;
  double large = 3200.0;

  bool operator==(const ScaleBoundaries&) const = default;
};

inline void validate(const ScaleBoundaries& b) {
  if (!(b.small > 0.0 && b.small < b.middle && b.middle < b.large) || !std::isfinite(b.large)) {
    throw ConfigError("scale boundaries must be positive and strictly increasing");
  }
}

inline ScaleLevel scale_bucket(const BoundingBox& box, const ScaleBoundaries& boundaries = {}) noexcept {
  const double side = box.longest_side();
  if (side < boundaries.small) return ScaleLevel::Tiny;
  if (side < boundaries.middle) return ScaleLevel::Small;
  if (side < boundaries.large) return ScaleLevel::Middle;
  return ScaleLevel::Large;
}

// COCO-style area ranges used when reporting AP per object size.
enum class EvalSize : std::uint8_t { Small = 0, Middle = 1, Large = 2 };

inline constexpr std::array<EvalSize, 3> kEvalSizes = {EvalSize::Small, EvalSize::Middle, EvalSize::Large};

inline std::string_view to_string(EvalSize size) noexcept {
  switch (size) {
    case EvalSize::Small: return "small";
    case EvalSize::Middle: return "middle";
    case EvalSize::Large: return "large";
  }
  return "small";
}

inline EvalSize eval_size_bucket(const BoundingBox& box) noexcept {
  constexpr double kSmallMax = 96.0 * 96.0;
  constexpr double kMiddleMax = 288.0 * 288.0;
  const double area = box.area();
  if (area < kSmallMax) return EvalSize::Small;
  if (area < kMiddleMax) return EvalSize::Middle;
  return EvalSize::Large;
}

struct SceneExtent {
  std::int64_t width = 0;
  std::int64_t height = 0;

  std::int64_t pixel_count() const noexcept { return width * height; }
  bool operator==(const SceneExtent&) const = default;
};

inline void validate(const SceneExtent& extent) {
  if (extent.width <= 0 || extent.height <= 0) {
    throw InputError("scene extent must be positive");
  }
}

struct Annotation {
  std::int64_t id = 0;
  BoundingBox bbox;
  int category = 0;

  bool operator==(const Annotation&) const = default;
};

// Intersection of a box with the scene; nullopt when nothing is left.
inline std::optional<BoundingBox> clip_to(const BoundingBox& box, double width, double height) noexcept {
  const double x0 = std::clamp(box.x, 0.0, width);
  const double y0 = std::clamp(box.y, 0.0, height);
  const double x1 = std::clamp(box.right(), 0.0, width);
  const double y1 = std::clamp(box.bottom(), 0.0, height);
  if (x1 <= x0 || y1 <= y0) return std::nullopt;
  return BoundingBox{x0, y0, x1 - x0, y1 - y0};
}

inline std::optional<BoundingBox> clip_to(const BoundingBox& box, const SceneExtent& extent) noexcept {
  return clip_to(box, static_cast<double>(extent.width), static_cast<double>(extent.height));
}

inline bool contains_point(const BoundingBox& box, double px, double py) noexcept {
  return px >= box.x && px < box.right() && py >= box.y && py < box.bottom();
}

// Scene ground truth as exchanged through annotation JSON.
struct AnnotationSet {
  SceneExtent extent;
  std::vector<Annotation> annotations;
};

}  // namespace saccadet
