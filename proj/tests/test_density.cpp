#include <cstring>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace saccadet;

TEST(Sigma, FloorOfLongestSideOverThree) {
  EXPECT_DOUBLE_EQ(sigma_for({0, 0, 10, 30}), 10.0);
  EXPECT_DOUBLE_EQ(sigma_for({0, 0, 31, 5}), 10.0);
  EXPECT_DOUBLE_EQ(sigma_for({0, 0, 2, 2}), 1.0);  // clamped
  EXPECT_DOUBLE_EQ(map_sigma(96.0, 32.0), 3.0);
  EXPECT_DOUBLE_EQ(map_sigma(10.0, 32.0), 1.0);
}

TEST(Stamp, UnitMassAndRadius) {
  const auto stamp = make_stamp(10.3, 7.8, 2.5);
  EXPECT_EQ(stamp.radius, 8);
  EXPECT_EQ(stamp.side(), 17);
  double total = 0.0;
  for (double w : stamp.weights) total += w;
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Stamp, MatchesDirectTwoDimensionalGaussian) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pos(8, 40), sig(1, 4);
  for (int k = 0; k < 20; ++k) {
    const double cx = pos(rng), cy = pos(rng), s = sig(rng);
    DensityMap map(48, 48, 32);
    splat(map, make_stamp(cx, cy, s));
    const DensityMap expected = oracle::gaussian_blob(48, 48, 32, cx, cy, s);
    for (std::size_t i = 0; i < map.size(); ++i) EXPECT_NEAR(map.values()[i], expected.values()[i], 1e-12);
  }
}

TEST(Stamp, ClippedAtRasterEdgeLosesMass) {
  DensityMap map(10, 10, 32);
  splat(map, make_stamp(0.5, 0.5, 2.0));
  EXPECT_LT(map.total_mass(), 0.5);
  EXPECT_GT(map.total_mass(), 0.0);
}

TEST(RenderDensity, ConservesMassPerScale) {
  const SceneExtent extent{26368, 14976};
  std::mt19937_64 rng(17);
  std::vector<Annotation> anns;
  const std::array<std::size_t, 4> counts{37, 11, 5, 3};
  for (ScaleLevel level : kScaleLevels) {
    for (std::size_t k = 0; k < counts[index_of(level)]; ++k) {
      anns.push_back(oracle::interior_annotation(rng, level, extent, 32.0, static_cast<std::int64_t>(anns.size())));
    }
  }
  const DensityMapSet set = render_gt_density(anns, extent, 32.0);
  EXPECT_EQ(set.width(), 824u);
  EXPECT_EQ(set.height(), 468u);
  for (ScaleLevel level : kScaleLevels) {
    EXPECT_NEAR(set[level].total_mass(), static_cast<double>(counts[index_of(level)]), 1e-9);
  }
}

TEST(RenderDensity, PartialCellRasterForNonMultipleExtent) {
  const DensityMapSet set = render_gt_density({}, SceneExtent{100, 33}, 32.0);
  EXPECT_EQ(set.width(), 4u);
  EXPECT_EQ(set.height(), 2u);
  EXPECT_DOUBLE_EQ(set[ScaleLevel::Tiny].total_mass(), 0.0);
}

TEST(RenderDensity, RejectsCenterOutsideScene) {
  const std::vector<Annotation> anns{{1, {990, 10, 40, 40}, 0}};
  EXPECT_THROW(render_gt_density(anns, SceneExtent{1000, 1000}, 32.0), InputError);
}

TEST(RenderDensity, DeterministicAcrossCalls) {
  std::mt19937_64 rng(3);
  const SceneExtent extent{8000, 6000};
  std::vector<Annotation> anns;
  for (int k = 0; k < 300; ++k) anns.push_back(oracle::interior_annotation(rng, ScaleLevel::Tiny, extent, 32, k));
  EXPECT_EQ(render_gt_density(anns, extent, 32.0), render_gt_density(anns, extent, 32.0));
}

TEST(ScaleAwareLoss, MatchesBruteForce) {
  std::mt19937_64 rng(21);
  for (int k = 0; k < 5; ++k) {
    const auto a = oracle::random_set(rng, 64, 64);
    const auto b = oracle::random_set(rng, 64, 64);
    const double lib = scale_aware_loss(a, b);
    const double ref = oracle::scale_loss(a, b, kDefaultScaleWeights);
    EXPECT_NEAR(lib, ref, 1e-9 * std::abs(ref));
  }
}

TEST(ScaleAwareLoss, ZeroOnIdenticalInputs) {
  std::mt19937_64 rng(22);
  const auto a = oracle::random_set(rng, 16, 9);
  EXPECT_EQ(scale_aware_loss(a, a), 0.0);
}

TEST(ScaleAwareLoss, LinearInEachWeight) {
  std::mt19937_64 rng(23);
  const auto a = oracle::random_set(rng, 20, 20);
  const auto b = oracle::random_set(rng, 20, 20);
  for (std::size_t s = 0; s < kScaleCount; ++s) {
    ScaleWeights unit{};
    unit[s] = 1.0;
    const double base = scale_aware_loss(a, b, unit);
    for (double alpha : {0.01, 0.1, 10.0, 100.0}) {
      ScaleWeights w{};
      w[s] = alpha;
      EXPECT_NEAR(scale_aware_loss(a, b, w), alpha * base, 1e-12 * alpha * base);
    }
  }
}

TEST(ScaleAwareLoss, RejectsGeometryMismatch) {
  EXPECT_THROW(scale_aware_loss(DensityMapSet(4, 4, 32), DensityMapSet(4, 5, 32)), InputError);
}

TEST(CountScale, RoundTripAndValidation) {
  std::mt19937_64 rng(24);
  const auto a = oracle::random_set(rng, 10, 10);
  const auto scaled = apply_count_scale(a, 1000.0);
  EXPECT_NEAR(scaled[ScaleLevel::Small].total_mass(), 1000.0 * a[ScaleLevel::Small].total_mass(), 1e-6);
  const auto back = remove_count_scale(scaled, 1000.0);
  for (ScaleLevel level : kScaleLevels) {
    for (std::size_t i = 0; i < a[level].size(); ++i) {
      EXPECT_NEAR(back[level].values()[i], a[level].values()[i], 1e-15);
    }
  }
  EXPECT_THROW(apply_count_scale(a, 0.0), InputError);
  EXPECT_THROW(remove_count_scale(a, -1.0), InputError);
}

// --- DMAP ---------------------------------------------------------------------

namespace {

DensityMapSet quantized_random(std::uint64_t seed, std::size_t w, std::size_t h) {
  std::mt19937_64 rng(seed);
  return quantize_to_f32(oracle::random_set(rng, w, h));
}

FormatErrorKind decode_error(const std::vector<std::uint8_t>& bytes) {
  try {
    decode_dmap(bytes);
  } catch (const FormatError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "decode succeeded";
  return FormatErrorKind::BadMagic;
}

}  // namespace

TEST(Dmap, HeaderLayout) {
  const auto bytes = encode_dmap(DensityMapSet(3, 2, 32.0));
  ASSERT_EQ(bytes.size(), 28u + 4u * 3u * 2u * 4u);
  EXPECT_EQ(std::memcmp(bytes.data(), "DMAP", 4), 0);
  EXPECT_EQ(bytes[4], 1);   // version
  EXPECT_EQ(bytes[8], 4);   // planes
  EXPECT_EQ(bytes[12], 3);  // width
  EXPECT_EQ(bytes[16], 2);  // height
  double d = 0.0;
  std::memcpy(&d, bytes.data() + 20, 8);
  EXPECT_EQ(d, 32.0);
}

TEST(Dmap, RoundTripIsBitExact) {
  const auto set = quantized_random(31, 37, 23);
  const auto bytes = encode_dmap(set);
  const auto decoded = decode_dmap(bytes);
  EXPECT_EQ(decoded, set);
  EXPECT_EQ(encode_dmap(decoded), bytes);
}

TEST(Dmap, FileRoundTrip) {
  const auto set = quantized_random(32, 8, 5);
  const auto path = std::filesystem::temp_directory_path() / "saccadet_test_roundtrip.dmap";
  write_dmap(set, path);
  EXPECT_EQ(read_dmap(path), set);
  std::filesystem::remove(path);
  EXPECT_THROW(read_dmap(path), IoError);
}

TEST(Dmap, CorruptionKindsAreDistinct) {
  const auto good = encode_dmap(quantized_random(33, 4, 4));

  auto magic = good;
  magic[0] = 'X';
  EXPECT_EQ(decode_error(magic), FormatErrorKind::BadMagic);

  auto version = good;
  version[4] = 9;
  EXPECT_EQ(decode_error(version), FormatErrorKind::UnsupportedVersion);

  auto planes = good;
  planes[8] = 3;
  EXPECT_EQ(decode_error(planes), FormatErrorKind::BadPlaneCount);

  auto dims = good;
  std::fill(dims.begin() + 12, dims.begin() + 16, 0);
  EXPECT_EQ(decode_error(dims), FormatErrorKind::BadDimensions);

  auto downsample = good;
  const double half = 0.5;
  std::memcpy(downsample.data() + 20, &half, 8);
  EXPECT_EQ(decode_error(downsample), FormatErrorKind::BadDownsample);

  const std::vector<std::uint8_t> truncated(good.begin(), good.end() - 1);
  EXPECT_EQ(decode_error(truncated), FormatErrorKind::Truncated);
  EXPECT_EQ(decode_error({'D', 'M'}), FormatErrorKind::Truncated);
  EXPECT_EQ(decode_error(std::vector<std::uint8_t>(good.begin(), good.begin() + 20)), FormatErrorKind::Truncated);

  auto trailing = good;
  trailing.push_back(0);
  EXPECT_EQ(decode_error(trailing), FormatErrorKind::TrailingBytes);
}

TEST(Dmap, RejectsNegativeOrNonFiniteValues) {
  DensityMapSet set(2, 2, 32.0);
  set[ScaleLevel::Middle].at(1, 1) = -0.5;
  EXPECT_THROW(encode_dmap(set), InputError);
  auto bytes = encode_dmap(DensityMapSet(2, 2, 32.0));
  const float nan = std::numeric_limits<float>::quiet_NaN();
  std::memcpy(bytes.data() + 28, &nan, 4);
  EXPECT_THROW(decode_dmap(bytes), InputError);
}
