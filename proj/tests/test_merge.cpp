#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace saccadet;

namespace {

std::vector<GlobalDetection> random_instance(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> pos(0, 800), size(10, 120), score(0, 1);
  std::uniform_int_distribution<int> category(0, 2);
  std::vector<GlobalDetection> dets;
  for (std::size_t k = 0; k < n; ++k) {
    // Coarse scores force ties so the tie-break order is exercised too.
    const double s = std::round(score(rng) * 20.0) / 20.0;
    dets.push_back({{pos(rng), pos(rng), size(rng), size(rng)}, s, category(rng), k});
  }
  return dets;
}

}  // namespace

TEST(GlobalNms, EquivalentToReferenceOnRandomInstances) {
  std::mt19937_64 rng(61);
  for (int instance = 0; instance < 50; ++instance) {
    const auto dets = random_instance(rng, 200);
    auto got = global_nms(dets, 0.5);
    auto want = oracle::nms(dets, 0.5);
    std::sort(want.begin(), want.end(), detection_precedes);
    EXPECT_EQ(got, want);
  }
}

TEST(GlobalNms, CategoriesDoNotSuppressEachOther) {
  const std::vector<GlobalDetection> dets{{{0, 0, 10, 10}, 0.9, 0, 0}, {{0, 0, 10, 10}, 0.8, 1, 1},
                                          {{1, 0, 10, 10}, 0.7, 0, 2}};
  const auto kept = global_nms(dets, 0.5);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].category, 0);
  EXPECT_EQ(kept[1].category, 1);
}

TEST(GlobalNms, ThresholdIsStrict) {
  // 200 px overlap over a 400 px union.
  const BoundingBox a{0, 0, 30, 10};
  const BoundingBox b{10, 0, 30, 10};
  ASSERT_DOUBLE_EQ(iou(a, b), 0.5);
  const std::vector<GlobalDetection> dets{{a, 0.9, 0, 0}, {b, 0.8, 0, 1}};
  EXPECT_EQ(global_nms(dets, 0.5).size(), 2u);
  EXPECT_EQ(global_nms(dets, 0.49).size(), 1u);
  EXPECT_THROW(global_nms(dets, 0.0), ConfigError);
  EXPECT_THROW(global_nms(dets, 1.5), ConfigError);
}

TEST(GlobalNms, OutputIndependentOfInputOrder) {
  std::mt19937_64 rng(62);
  auto dets = random_instance(rng, 150);
  const auto expected = global_nms(dets, 0.5);
  for (int k = 0; k < 5; ++k) {
    std::shuffle(dets.begin(), dets.end(), rng);
    EXPECT_EQ(global_nms(dets, 0.5), expected);
  }
}

TEST(GlobalNms, TieBreakPrefersLargerView) {
  const std::vector<GlobalDetection> dets{{{0, 0, 8, 10}, 1.0, 0, 0}, {{0, 0, 10, 10}, 1.0, 0, 1}};
  const auto kept = global_nms(dets, 0.5);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_DOUBLE_EQ(kept[0].bbox.width, 10.0);
}

TEST(ToGlobal, RoundTripAcrossRandomPatches) {
  std::mt19937_64 rng(63);
  std::uniform_real_distribution<double> pos(0, 25000), size(1, 6000);
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const BoundingBox region{pos(rng), pos(rng), 500 + size(rng), 500 + size(rng)};
    const auto np = normalize(Patch{ScaleLevel::Tiny, 0, 0, region, region, 1.0}, {1978, 1124});
    const BoundingBox truth{pos(rng), pos(rng), size(rng), size(rng)};
    const auto g = to_global(PatchDetection{np.to_normalized(truth), 0.5, 0}, np);
    worst = std::max({worst, std::abs(g.bbox.x - truth.x), std::abs(g.bbox.y - truth.y),
                      std::abs(g.bbox.width - truth.width), std::abs(g.bbox.height - truth.height)});
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(MergeRun, DuplicatesFromOverlappingPatchesCollapse) {
  const SceneExtent extent{2000, 1000};
  const std::vector<Annotation> anns{{0, {950, 450, 60, 120}, 0}};
  const auto oracle = oracle_detector(anns);
  const std::vector<Patch> patches{
      {ScaleLevel::Tiny, 0, 0, {0, 0, 1000, 1000}, {0, 0, 1100, 1000}, 1.0},
      {ScaleLevel::Tiny, 1, 0, {1000, 0, 1000, 1000}, {900, 0, 1100, 1000}, 1.0},
  };
  const auto results = run_gaze(patches, *oracle, {1100, 1000}, 1);
  ASSERT_EQ(results[0].detections.size() + results[1].detections.size(), 2u);
  const auto merged = merge_run(results, extent, 0.5);
  ASSERT_EQ(merged.size(), 1u);
  EXPECT_NEAR(merged[0].bbox.x, 950.0, 1e-9);
  EXPECT_NEAR(merged[0].bbox.width, 60.0, 1e-9);
}

TEST(MergeRun, ClipsToSceneAndDropsOutside) {
  const SceneExtent extent{100, 100};
  PatchResult r;
  r.normalized = normalize(Patch{ScaleLevel::Tiny, 0, 0, {50, 50, 50, 50}, {50, 50, 50, 50}, 1.0}, {50, 50});
  r.detections = {{{40, 40, 20, 20}, 0.5, 0}};
  const std::vector<PatchResult> results{r};
  const auto merged = merge_run(results, extent, 0.5);
  ASSERT_EQ(merged.size(), 1u);
  EXPECT_EQ(merged[0].bbox, (BoundingBox{90, 90, 10, 10}));
}
