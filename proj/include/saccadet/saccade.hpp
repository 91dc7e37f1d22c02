#pragma once

// Stage one: integrate each scale's density over a grid and keep the cells
// whose expected object count exceeds a threshold, grown about their centers.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <tuple>
#include <vector>

#include "saccadet/core.hpp"
#include "saccadet/density.hpp"

namespace saccadet {

struct GridSpec {
  ScaleLevel scale = ScaleLevel::Tiny;
  std::int64_t cells_x = 1;
  std::int64_t cells_y = 1;

  bool operator==(const GridSpec&) const = default;
};

using GridSet = std::array<GridSpec, kScaleCount>;

inline GridSet default_grids() {
  return {GridSpec{ScaleLevel::Tiny, 16, 16}, GridSpec{ScaleLevel::Small, 8, 8},
          GridSpec{ScaleLevel::Middle, 4, 4}, GridSpec{ScaleLevel::Large, 2, 2}};
}

inline void validate(const GridSpec& grid) {
  if (grid.cells_x < 1 || grid.cells_y < 1) throw ConfigError("grid needs at least one cell per axis");
}

inline void validate(const GridSpec& grid, const SceneExtent& extent) {
  validate(grid);
  validate(extent);
  if (grid.cells_x > extent.width || grid.cells_y > extent.height) {
    throw ConfigError("grid has more cells than the scene has pixels");
  }
}

// Summed-area table with a zero top row and left column.
class IntegralImage {
 public:
  explicit IntegralImage(const DensityMap& map)
      : width_(map.width()), height_(map.height()), table_((map.width() + 1) * (map.height() + 1), 0.0) {
    const std::size_t stride = width_ + 1;
    for (std::size_t y = 0; y < height_; ++y) {
      double row = 0.0;
      for (std::size_t x = 0; x < width_; ++x) {
        row += map.at(x, y);
        table_[(y + 1) * stride + (x + 1)] = table_[y * stride + (x + 1)] + row;
      }
    }
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }

  // Cumulative sum over [0, x) x [0, y).
  double at(std::size_t x, std::size_t y) const noexcept { return table_[y * (width_ + 1) + x]; }

  // Sum over cells [x0, x1) x [y0, y1).
  double sum(std::size_t x0, std::size_t y0, std::size_t x1, std::size_t y1) const noexcept {
    return at(x1, y1) - at(x0, y1) - at(x1, y0) + at(x0, y0);
  }

  // Cumulative sum at a fractional position, treating each cell's mass as
  // uniform over the cell (the bilinear interpolant of the table).
  double cumulative(double x, double y) const noexcept {
    x = std::clamp(x, 0.0, static_cast<double>(width_));
    y = std::clamp(y, 0.0, static_cast<double>(height_));
    auto ix = static_cast<std::size_t>(x);
    auto iy = static_cast<std::size_t>(y);
    if (ix == width_) --ix;
    if (iy == height_) --iy;
    const double fx = x - static_cast<double>(ix);
    const double fy = y - static_cast<double>(iy);
    const double c00 = at(ix, iy);
    const double c10 = at(ix + 1, iy);
    const double c01 = at(ix, iy + 1);
    const double c11 = at(ix + 1, iy + 1);
    return c00 + fx * (c10 - c00) + fy * (c01 - c00) + fx * fy * (c11 - c10 - c01 + c00);
  }

  double sum(double x0, double y0, double x1, double y1) const noexcept {
    return cumulative(x1, y1) - cumulative(x0, y1) - cumulative(x1, y0) + cumulative(x0, y0);
  }

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<double> table_;
};

inline IntegralImage build_integral(const DensityMap& map) { return IntegralImage(map); }

struct CellDensity {
  ScaleLevel scale = ScaleLevel::Tiny;
  std::int64_t cell_i = 0;
  std::int64_t cell_j = 0;
  BoundingBox region;  // original-image pixels
  double density = 0.0;
};

// Pixel span of cell k out of n along an axis of the given length; the spans
// tile [0, length) exactly.
inline std::int64_t cell_edge(std::int64_t k, std::int64_t n, std::int64_t length) noexcept {
  return (k * length) / n;
}

inline BoundingBox cell_region(std::int64_t i, std::int64_t j, const GridSpec& grid, const SceneExtent& extent) noexcept {
  const auto x0 = cell_edge(i, grid.cells_x, extent.width);
  const auto x1 = cell_edge(i + 1, grid.cells_x, extent.width);
  const auto y0 = cell_edge(j, grid.cells_y, extent.height);
  const auto y1 = cell_edge(j + 1, grid.cells_y, extent.height);
  return {static_cast<double>(x0), static_cast<double>(y0), static_cast<double>(x1 - x0), static_cast<double>(y1 - y0)};
}

inline std::vector<CellDensity> grid_densities(const IntegralImage& integral, double downsample, const GridSpec& grid,
                                               const SceneExtent& extent) {
  validate(grid, extent);
  // The last raster row/column may extend past the scene; the scene edge maps
  // to the raster edge so the grid tiles the whole raster.
  const auto to_map = [downsample](std::int64_t pixel, std::int64_t length, std::size_t cells) {
    return pixel >= length ? static_cast<double>(cells) : static_cast<double>(pixel) / downsample;
  };
  std::vector<CellDensity> cells;
  cells.reserve(static_cast<std::size_t>(grid.cells_x * grid.cells_y));
  for (std::int64_t j = 0; j < grid.cells_y; ++j) {
    const double my0 = to_map(cell_edge(j, grid.cells_y, extent.height), extent.height, integral.height());
    const double my1 = to_map(cell_edge(j + 1, grid.cells_y, extent.height), extent.height, integral.height());
    for (std::int64_t i = 0; i < grid.cells_x; ++i) {
      const double mx0 = to_map(cell_edge(i, grid.cells_x, extent.width), extent.width, integral.width());
      const double mx1 = to_map(cell_edge(i + 1, grid.cells_x, extent.width), extent.width, integral.width());
      const double mass = integral.sum(mx0, my0, mx1, my1);
      cells.push_back({grid.scale, i, j, cell_region(i, j, grid, extent), std::max(mass, 0.0)});
    }
  }
  return cells;
}

inline std::vector<CellDensity> grid_densities(const DensityMap& map, const GridSpec& grid, const SceneExtent& extent) {
  return grid_densities(build_integral(map), map.downsample(), grid, extent);
}

struct Patch {
  ScaleLevel scale = ScaleLevel::Tiny;
  std::int64_t cell_i = 0;
  std::int64_t cell_j = 0;
  BoundingBox cell_region;  // before expansion
  BoundingBox region;       // expanded and clipped to the scene
  double density = 0.0;

  bool operator==(const Patch&) const = default;
};

inline BoundingBox expand_region(const BoundingBox& cell, double expansion, const SceneExtent& extent) {
  const double w = cell.width * expansion;
  const double h = cell.height * expansion;
  const BoundingBox grown{cell.center_x() - 0.5 * w, cell.center_y() - 0.5 * h, w, h};
  return clip_to(grown, extent).value_or(cell);
}

inline void validate_selection(double threshold, double expansion) {
  if (!(threshold >= 0.0) || !std::isfinite(threshold)) throw ConfigError("density threshold must be >= 0");
  if (!(expansion >= 1.0) || !std::isfinite(expansion)) throw ConfigError("patch expansion must be >= 1");
}

// Cells with density strictly above the threshold, ordered by (scale, j, i).
inline std::vector<Patch> select_patches(std::span<const CellDensity> cells, double threshold, double expansion,
                                         const SceneExtent& extent) {
  validate_selection(threshold, expansion);
  std::vector<Patch> patches;
  for (const CellDensity& c : cells) {
    if (!(c.density > threshold)) continue;
    patches.push_back({c.scale, c.cell_i, c.cell_j, c.region, expand_region(c.region, expansion, extent), c.density});
  }
  std::sort(patches.begin(), patches.end(), [](const Patch& a, const Patch& b) {
    return std::tuple(index_of(a.scale), a.cell_j, a.cell_i) < std::tuple(index_of(b.scale), b.cell_j, b.cell_i);
  });
  return patches;
}

inline std::vector<Patch> saccade(const DensityMapSet& set, const GridSet& grids, double threshold, double expansion,
                                  const SceneExtent& extent) {
  validate_selection(threshold, expansion);
  std::vector<Patch> patches;
  for (ScaleLevel level : kScaleLevels) {
    const GridSpec& grid = grids[index_of(level)];
    if (grid.scale != level) throw ConfigError("grid set must be ordered tiny, small, middle, large");
    const auto cells = grid_densities(set[level], grid, extent);
    const auto selected = select_patches(cells, threshold, expansion, extent);
    patches.insert(patches.end(), selected.begin(), selected.end());
  }
  return patches;
}

// Every cell of a count x count grid, expanded; the sliding-window baseline.
inline std::vector<Patch> all_cells(const SceneExtent& extent, std::int64_t count, double expansion,
                                    ScaleLevel label = ScaleLevel::Tiny) {
  validate_selection(0.0, expansion);
  const GridSpec grid{label, count, count};
  validate(grid, extent);
  std::vector<Patch> patches;
  patches.reserve(static_cast<std::size_t>(count * count));
  for (std::int64_t j = 0; j < count; ++j) {
    for (std::int64_t i = 0; i < count; ++i) {
      const BoundingBox cell = cell_region(i, j, grid, extent);
      patches.push_back({label, i, j, cell, expand_region(cell, expansion, extent), 0.0});
    }
  }
  return patches;
}

}  // namespace saccadet
