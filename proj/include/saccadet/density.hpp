#pragma once

// Multi-scale ground-truth density maps and the scale-weighted MSE metric.
//
// Every annotation is represented by a truncated Gaussian whose width follows
// the object's longest side, splatted onto the map of its scale bucket. Mass
// is renormalized after truncation so each object integrates to one unless
// part of its stamp falls off the raster.

#include <array>
#include <cmath>
#include <cstddef>
#include <future>
#include <span>
#include <vector>

#include "saccadet/core.hpp"
#include "saccadet/error.hpp"

namespace saccadet {

class DensityMap {
 public:
  DensityMap() = default;

  DensityMap(std::size_t width, std::size_t height, double downsample)
      : width_(width), height_(height), downsample_(downsample), values_(width * height, 0.0) {
    if (width == 0 || height == 0) throw InputError("density map must have at least one cell");
    if (!(downsample >= 1.0) || !std::isfinite(downsample)) {
      throw InputError("density map downsample must be finite and >= 1");
    }
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  double downsample() const noexcept { return downsample_; }
  std::size_t size() const noexcept { return values_.size(); }

  double& at(std::size_t x, std::size_t y) noexcept { return values_[y * width_ + x]; }
  double at(std::size_t x, std::size_t y) const noexcept { return values_[y * width_ + x]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  double total_mass() const noexcept {
    double sum = 0.0;
    for (double v : values_) sum += v;
    return sum;
  }

  bool same_geometry(const DensityMap& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ && downsample_ == other.downsample_;
  }

  bool operator==(const DensityMap&) const = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  double downsample_ = 1.0;
  std::vector<double> values_;
};

// One map per scale level, all sharing the same raster geometry.
class DensityMapSet {
 public:
  DensityMapSet() = default;

  DensityMapSet(std::size_t width, std::size_t height, double downsample) {
    for (auto& m : maps_) m = DensityMap(width, height, downsample);
  }

  explicit DensityMapSet(std::array<DensityMap, kScaleCount> maps) : maps_(std::move(maps)) {
    for (const auto& m : maps_) {
      if (!m.same_geometry(maps_[0])) throw InputError("density maps of a set must share geometry");
    }
  }

  DensityMap& operator[](ScaleLevel level) noexcept { return maps_[index_of(level)]; }
  const DensityMap& operator[](ScaleLevel level) const noexcept { return maps_[index_of(level)]; }

  std::size_t width() const noexcept { return maps_[0].width(); }
  std::size_t height() const noexcept { return maps_[0].height(); }
  double downsample() const noexcept { return maps_[0].downsample(); }

  bool same_geometry(const DensityMapSet& other) const noexcept { return maps_[0].same_geometry(other.maps_[0]); }

  bool operator==(const DensityMapSet&) const = default;

 private:
  std::array<DensityMap, kScaleCount> maps_;
};

// Kernel width in original-image pixels: longest side // 3, at least 1.
inline double sigma_for(const BoundingBox& box) noexcept {
  const double sigma = std::floor(box.longest_side() / 3.0);
  return std::max(sigma, 1.0);
}

inline double map_sigma(double sigma_pixels, double downsample) noexcept {
  return std::max(sigma_pixels / downsample, 1.0);
}

// Truncated, renormalized Gaussian over a (2r+1)^2 window of map cells.
struct GaussianStamp {
  double center_x = 0.0;  // map coordinates, cell (i, j) spans [i, i+1) x [j, j+1)
  double center_y = 0.0;
  double sigma = 1.0;     // map cells
  int radius = 0;
  std::int64_t origin_x = 0;  // map cell of weights[0]
  std::int64_t origin_y = 0;
  std::vector<double> weights;

  int side() const noexcept { return 2 * radius + 1; }
  double weight(int dx, int dy) const noexcept { return weights[static_cast<std::size_t>(dy * side() + dx)]; }
};

inline GaussianStamp make_stamp(double center_x, double center_y, double sigma) {
  GaussianStamp stamp;
  stamp.center_x = center_x;
  stamp.center_y = center_y;
  stamp.sigma = sigma;
  stamp.radius = static_cast<int>(std::ceil(3.0 * sigma));
  stamp.origin_x = static_cast<std::int64_t>(std::floor(center_x)) - stamp.radius;
  stamp.origin_y = static_cast<std::int64_t>(std::floor(center_y)) - stamp.radius;

  const int side = stamp.side();
  const double inv_two_var = 1.0 / (2.0 * sigma * sigma);
  // Separable kernel evaluated at cell centers.
  std::vector<double> gx(static_cast<std::size_t>(side));
  std::vector<double> gy(static_cast<std::size_t>(side));
  for (int k = 0; k < side; ++k) {
    const double dx = static_cast<double>(stamp.origin_x + k) + 0.5 - center_x;
    const double dy = static_cast<double>(stamp.origin_y + k) + 0.5 - center_y;
    gx[static_cast<std::size_t>(k)] = std::exp(-dx * dx * inv_two_var);
    gy[static_cast<std::size_t>(k)] = std::exp(-dy * dy * inv_two_var);
  }
  stamp.weights.resize(static_cast<std::size_t>(side) * static_cast<std::size_t>(side));
  double total = 0.0;
  for (int j = 0; j < side; ++j) {
    for (int i = 0; i < side; ++i) {
      const double w = gx[static_cast<std::size_t>(i)] * gy[static_cast<std::size_t>(j)];
      stamp.weights[static_cast<std::size_t>(j * side + i)] = w;
      total += w;
    }
  }
  for (double& w : stamp.weights) w /= total;
  return stamp;
}

// Stamp for an annotation on a map with the given downsample ratio.
inline GaussianStamp stamp_for(const BoundingBox& box, double downsample) {
  return make_stamp(box.center_x() / downsample, box.center_y() / downsample,
                    map_sigma(sigma_for(box), downsample));
}

// Adds the stamp to the map; cells outside the raster are dropped.
inline void splat(DensityMap& map, const GaussianStamp& stamp) noexcept {
  const int side = stamp.side();
  const auto w = static_cast<std::int64_t>(map.width());
  const auto h = static_cast<std::int64_t>(map.height());
  for (int dy = 0; dy < side; ++dy) {
    const std::int64_t y = stamp.origin_y + dy;
    if (y < 0 || y >= h) continue;
    for (int dx = 0; dx < side; ++dx) {
      const std::int64_t x = stamp.origin_x + dx;
      if (x < 0 || x >= w) continue;
      map.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) += stamp.weight(dx, dy);
    }
  }
}

inline std::size_t map_cells(std::int64_t pixels, double downsample) noexcept {
  return static_cast<std::size_t>(std::ceil(static_cast<double>(pixels) / downsample));
}

// Each scale map is accumulated by its own task in annotation order, so the
// result does not depend on scheduling.
inline DensityMapSet render_gt_density(std::span<const Annotation> annotations, const SceneExtent& extent,
                                       double downsample, const ScaleBoundaries& boundaries = {}) {
  validate(extent);
  validate(boundaries);
  if (!(downsample >= 1.0) || !std::isfinite(downsample)) throw InputError("downsample must be >= 1");

  std::array<std::vector<const Annotation*>, kScaleCount> per_scale;
  for (const Annotation& a : annotations) {
    if (!is_valid(a.bbox)) throw InputError("annotation " + std::to_string(a.id) + " has an invalid box");
    const double cx = a.bbox.center_x();
    const double cy = a.bbox.center_y();
    if (cx < 0.0 || cy < 0.0 || cx > static_cast<double>(extent.width) || cy > static_cast<double>(extent.height)) {
      throw InputError("annotation " + std::to_string(a.id) + " is centered outside the scene");
    }
    per_scale[index_of(scale_bucket(a.bbox, boundaries))].push_back(&a);
  }

  const std::size_t mw = map_cells(extent.width, downsample);
  const std::size_t mh = map_cells(extent.height, downsample);
  DensityMapSet set(mw, mh, downsample);

  std::array<std::future<void>, kScaleCount> jobs;
  for (ScaleLevel level : kScaleLevels) {
    const auto& items = per_scale[index_of(level)];
    DensityMap& map = set[level];
    if (items.empty()) continue;
    jobs[index_of(level)] = std::async(std::launch::async, [&items, &map, downsample] {
      for (const Annotation* a : items) splat(map, stamp_for(a->bbox, downsample));
    });
  }
  for (auto& job : jobs) {
    if (job.valid()) job.get();
  }
  return set;
}

using ScaleWeights = std::array<double, kScaleCount>;

inline constexpr ScaleWeights kDefaultScaleWeights = {0.01, 0.1, 10.0, 100.0};

inline double mean_squared_error(const DensityMap& a, const DensityMap& b) {
  if (!a.same_geometry(b)) throw InputError("density maps differ in geometry");
  const auto va = a.values();
  const auto vb = b.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) {
    const double d = va[i] - vb[i];
    sum += d * d;
  }
  return sum / static_cast<double>(va.size());
}

// Sum over scales of alpha_s * per-pixel MSE of scale s.
inline double scale_aware_loss(const DensityMapSet& pred, const DensityMapSet& gt,
                               const ScaleWeights& alphas = kDefaultScaleWeights) {
  if (!pred.same_geometry(gt)) throw InputError("prediction and ground truth differ in geometry");
  double loss = 0.0;
  for (ScaleLevel level : kScaleLevels) {
    loss += alphas[index_of(level)] * mean_squared_error(pred[level], gt[level]);
  }
  return loss;
}

inline DensityMap apply_count_scale(DensityMap map, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw InputError("count scale factor must be positive");
  for (double& v : map.values()) v *= factor;
  return map;
}

inline DensityMap remove_count_scale(DensityMap map, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw InputError("count scale factor must be positive");
  for (double& v : map.values()) v /= factor;
  return map;
}

inline DensityMapSet apply_count_scale(DensityMapSet set, double factor) {
  for (ScaleLevel level : kScaleLevels) set[level] = apply_count_scale(std::move(set[level]), factor);
  return set;
}

inline DensityMapSet remove_count_scale(DensityMapSet set, double factor) {
  for (ScaleLevel level : kScaleLevels) set[level] = remove_count_scale(std::move(set[level]), factor);
  return set;
}

}  // namespace saccadet
