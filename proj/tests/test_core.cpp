#include <random>

#include <gtest/gtest.h>

#include "saccadet/core.hpp"

using namespace saccadet;

TEST(BoundingBox, DerivedEdgesAndCenter) {
  const BoundingBox b{10, 20, 30, 40};
  EXPECT_DOUBLE_EQ(b.right(), 40);
  EXPECT_DOUBLE_EQ(b.bottom(), 60);
  EXPECT_DOUBLE_EQ(b.center_x(), 25);
  EXPECT_DOUBLE_EQ(b.center_y(), 40);
  EXPECT_DOUBLE_EQ(b.area(), 1200);
  EXPECT_DOUBLE_EQ(b.longest_side(), 40);
}

TEST(Iou, KnownValues) {
  EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {0, 0, 10, 10}), 1.0);
  EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {10, 0, 10, 10}), 0.0);
  // 50 overlap / (100 + 100 - 50)
  EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {5, 0, 10, 10}), 50.0 / 150.0);
  EXPECT_DOUBLE_EQ(iou({0, 0, 0, 0}, {0, 0, 0, 0}), 0.0);
}

TEST(Iou, SymmetricAndBoundedOnRandomBoxes) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> pos(0, 100), size(0.5, 60);
  for (int k = 0; k < 2000; ++k) {
    const BoundingBox a{pos(rng), pos(rng), size(rng), size(rng)};
    const BoundingBox b{pos(rng), pos(rng), size(rng), size(rng)};
    const double v = iou(a, b);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    EXPECT_DOUBLE_EQ(v, iou(b, a));
  }
}

TEST(Clip, InsideOutsideAndPartial) {
  const SceneExtent e{100, 50};
  EXPECT_EQ(clip_to(BoundingBox{10, 10, 20, 20}, e), (BoundingBox{10, 10, 20, 20}));
  EXPECT_EQ(clip_to(BoundingBox{90, 40, 20, 20}, e), (BoundingBox{90, 40, 10, 10}));
  EXPECT_EQ(clip_to(BoundingBox{-5, -5, 10, 10}, e), (BoundingBox{0, 0, 5, 5}));
  EXPECT_FALSE(clip_to(BoundingBox{100, 0, 10, 10}, e).has_value());
  EXPECT_FALSE(clip_to(BoundingBox{-20, 0, 10, 10}, e).has_value());
}

TEST(ContainsPoint, HalfOpen) {
  const BoundingBox b{0, 0, 10, 10};
  EXPECT_TRUE(contains_point(b, 0, 0));
  EXPECT_TRUE(contains_point(b, 9.999, 5));
  EXPECT_FALSE(contains_point(b, 10, 5));
  EXPECT_FALSE(contains_point(b, 5, 10));
}

TEST(ScaleBucket, BoundariesUseLongestSide) {
  EXPECT_EQ(scale_bucket({0, 0, 10, 799}), ScaleLevel::Tiny);
  EXPECT_EQ(scale_bucket({0, 0, 800, 10}), ScaleLevel::Small);
  EXPECT_EQ(scale_bucket({0, 0, 10, 1599.5}), ScaleLevel::Small);
  EXPECT_EQ(scale_bucket({0, 0, 10, 1600}), ScaleLevel::Middle);
  EXPECT_EQ(scale_bucket({0, 0, 3199, 3199}), ScaleLevel::Middle);
  EXPECT_EQ(scale_bucket({0, 0, 3200, 1}), ScaleLevel::Large);
  EXPECT_EQ(scale_bucket({0, 0, 50, 150}, ScaleBoundaries{100, 200, 300}), ScaleLevel::Small);
}

TEST(ScaleBucket, ValidateRejectsUnordered) {
  EXPECT_THROW(validate(ScaleBoundaries{800, 800, 3200}), ConfigError);
  EXPECT_THROW(validate(ScaleBoundaries{-1, 800, 3200}), ConfigError);
  EXPECT_NO_THROW(validate(ScaleBoundaries{}));
}

TEST(ScaleLevelNames, RoundTrip) {
  for (ScaleLevel level : kScaleLevels) EXPECT_EQ(parse_scale_level(to_string(level)), level);
  EXPECT_THROW(parse_scale_level("huge"), InputError);
}

TEST(EvalSizeBucket, AreaRanges) {
  EXPECT_EQ(eval_size_bucket({0, 0, 95, 96}), EvalSize::Small);
  EXPECT_EQ(eval_size_bucket({0, 0, 96, 96}), EvalSize::Middle);
  EXPECT_EQ(eval_size_bucket({0, 0, 287, 288}), EvalSize::Middle);
  EXPECT_EQ(eval_size_bucket({0, 0, 288, 288}), EvalSize::Large);
}

TEST(SceneExtent, Validation) {
  EXPECT_THROW(validate(SceneExtent{0, 10}), InputError);
  EXPECT_THROW(validate(SceneExtent{10, -1}), InputError);
  EXPECT_EQ((SceneExtent{26368, 14976}.pixel_count()), 26368LL * 14976LL);
}
