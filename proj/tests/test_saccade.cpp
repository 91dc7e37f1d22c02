#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace saccadet;

TEST(IntegralImage, IntegerQueriesMatchDirectSums) {
  std::mt19937_64 rng(41);
  const auto map = oracle::random_map(rng, 97, 61);
  const IntegralImage ii(map);
  std::uniform_int_distribution<std::size_t> xs(0, 97), ys(0, 61);
  for (int k = 0; k < 500; ++k) {
    std::size_t x0 = xs(rng), x1 = xs(rng), y0 = ys(rng), y1 = ys(rng);
    if (x0 > x1) std::swap(x0, x1);
    if (y0 > y1) std::swap(y0, y1);
    const double ref = oracle::rect_sum(map, x0, y0, x1, y1);
    EXPECT_NEAR(ii.sum(x0, y0, x1, y1), ref, 1e-9 * std::max(1.0, ref));
  }
}

TEST(IntegralImage, FractionalQueriesMatchAreaWeightedSums) {
  std::mt19937_64 rng(42);
  const auto map = oracle::random_map(rng, 40, 30);
  const IntegralImage ii(map);
  std::uniform_real_distribution<double> xs(0, 40), ys(0, 30);
  for (int k = 0; k < 300; ++k) {
    double x0 = xs(rng), x1 = xs(rng), y0 = ys(rng), y1 = ys(rng);
    if (x0 > x1) std::swap(x0, x1);
    if (y0 > y1) std::swap(y0, y1);
    const double ref = oracle::fractional_sum(map, x0, y0, x1, y1);
    EXPECT_NEAR(ii.sum(x0, y0, x1, y1), ref, 1e-9 * std::max(1.0, ref));
  }
}

TEST(CellRegions, TileTheSceneExactly) {
  const SceneExtent extent{1003, 517};
  for (std::int64_t n : {1, 2, 3, 7, 16}) {
    const GridSpec grid{ScaleLevel::Tiny, n, n};
    double area = 0.0;
    for (std::int64_t j = 0; j < n; ++j) {
      for (std::int64_t i = 0; i < n; ++i) area += cell_region(i, j, grid, extent).area();
    }
    EXPECT_DOUBLE_EQ(area, 1003.0 * 517.0);
    EXPECT_DOUBLE_EQ(cell_region(n - 1, n - 1, grid, extent).right(), 1003.0);
    EXPECT_DOUBLE_EQ(cell_region(n - 1, n - 1, grid, extent).bottom(), 517.0);
  }
}

TEST(GridDensities, ConserveMapMassForEveryGrid) {
  std::mt19937_64 rng(43);
  const SceneExtent extent{26368, 14976};
  const auto map = oracle::random_map(rng, 824, 468);
  for (std::int64_t n : {16, 8, 4, 2, 5, 13}) {
    const auto cells = grid_densities(map, {ScaleLevel::Tiny, n, n}, extent);
    ASSERT_EQ(cells.size(), static_cast<std::size_t>(n * n));
    double total = 0.0;
    for (const auto& c : cells) total += c.density;
    EXPECT_NEAR(total, map.total_mass(), 1e-9 * map.total_mass());
  }
}

TEST(GridDensities, PartialLastRasterCellIsIncluded) {
  // 100 px over d=32 gives 4 cells, the last covering only 4 px.
  DensityMap map(4, 1, 32);
  map.at(3, 0) = 1.0;
  const auto cells = grid_densities(map, {ScaleLevel::Tiny, 2, 1}, SceneExtent{100, 20});
  EXPECT_NEAR(cells[0].density + cells[1].density, 1.0, 1e-12);
  EXPECT_NEAR(cells[1].density, 1.0, 1e-12);
}

TEST(GridValidation, RejectsEmptyOrOversizedGrids) {
  EXPECT_THROW(validate(GridSpec{ScaleLevel::Tiny, 0, 4}), ConfigError);
  EXPECT_THROW(validate(GridSpec{ScaleLevel::Tiny, 20, 20}, SceneExtent{10, 100}), ConfigError);
  EXPECT_NO_THROW(validate(GridSpec{ScaleLevel::Tiny, 16, 16}, SceneExtent{26368, 14976}));
  const auto grids = default_grids();
  EXPECT_EQ(grids[0].cells_x, 16);
  EXPECT_EQ(grids[1].cells_x, 8);
  EXPECT_EQ(grids[2].cells_x, 4);
  EXPECT_EQ(grids[3].cells_x, 2);
}

TEST(ExpandRegion, GrowsAboutCenterAndClips) {
  const SceneExtent extent{1000, 1000};
  const auto mid = expand_region({400, 400, 100, 100}, 1.2, extent);
  EXPECT_DOUBLE_EQ(mid.x, 390);
  EXPECT_DOUBLE_EQ(mid.width, 120);
  EXPECT_DOUBLE_EQ(mid.center_y(), 450);
  const auto corner = expand_region({0, 0, 100, 100}, 1.2, extent);
  EXPECT_EQ(corner, (BoundingBox{0, 0, 110, 110}));
  EXPECT_EQ(expand_region({0, 0, 100, 100}, 1.0, extent), (BoundingBox{0, 0, 100, 100}));
}

TEST(SelectPatches, StrictThresholdAndOrdering) {
  const SceneExtent extent{400, 400};
  std::vector<CellDensity> cells{
      {ScaleLevel::Small, 1, 0, {200, 0, 200, 200}, 0.5},
      {ScaleLevel::Tiny, 1, 1, {200, 200, 200, 200}, 0.21},
      {ScaleLevel::Tiny, 0, 1, {0, 200, 200, 200}, 0.2},  // equal: rejected
      {ScaleLevel::Tiny, 1, 0, {200, 0, 200, 200}, 3.0},
  };
  const auto patches = select_patches(cells, 0.2, 1.2, extent);
  ASSERT_EQ(patches.size(), 3u);
  EXPECT_EQ(patches[0].scale, ScaleLevel::Tiny);
  EXPECT_EQ(patches[0].cell_j, 0);
  EXPECT_EQ(patches[1].cell_j, 1);
  EXPECT_EQ(patches[2].scale, ScaleLevel::Small);
  EXPECT_EQ(patches[1].cell_region, (BoundingBox{200, 200, 200, 200}));
  EXPECT_EQ(patches[1].region, (BoundingBox{180, 180, 220, 220}));
}

TEST(SelectPatches, RejectsBadParameters) {
  EXPECT_THROW(select_patches({}, -0.1, 1.2, SceneExtent{10, 10}), ConfigError);
  EXPECT_THROW(select_patches({}, 0.2, 0.9, SceneExtent{10, 10}), ConfigError);
}

TEST(Saccade, ThresholdSweepIsMonotoneAndZeroKeepsAllMass) {
  std::mt19937_64 rng(44);
  const SceneExtent extent{26368, 14976};
  for (int scene = 0; scene < 5; ++scene) {
    std::vector<Annotation> anns;
    for (ScaleLevel level : kScaleLevels) {
      for (int k = 0; k < 20; ++k) {
        anns.push_back(oracle::interior_annotation(rng, level, extent, 32, static_cast<std::int64_t>(anns.size())));
      }
    }
    const auto set = render_gt_density(anns, extent, 32.0);
    std::size_t previous = std::numeric_limits<std::size_t>::max();
    for (double t : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}) {
      const auto n = saccade(set, default_grids(), t, 1.2, extent).size();
      EXPECT_LE(n, previous);
      previous = n;
    }
    std::size_t positive = 0;
    for (ScaleLevel level : kScaleLevels) {
      for (const auto& c : grid_densities(set[level], default_grids()[index_of(level)], extent)) {
        positive += c.density > 0.0;
      }
    }
    EXPECT_EQ(saccade(set, default_grids(), 0.0, 1.2, extent).size(), positive);
  }
}

TEST(Saccade, EmptyDensitySelectsNothing) {
  const SceneExtent extent{26368, 14976};
  EXPECT_TRUE(saccade(DensityMapSet(824, 468, 32), default_grids(), 0.0, 1.2, extent).empty());
}

TEST(AllCells, SlidingWindowCounts) {
  const SceneExtent extent{26368, 14976};
  EXPECT_EQ(all_cells(extent, 16, 1.2).size(), 256u);
  EXPECT_EQ(all_cells(extent, 8, 1.2).size(), 64u);
}
