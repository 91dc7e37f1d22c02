#pragma once

// Stage two: bring every selected patch to the standard (tiny-scale) frame and
// hand it to a detector adapter. Larger-scale patches are shrunk, so each
// patch costs the same detector budget regardless of its source size.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "saccadet/core.hpp"
#include "saccadet/error.hpp"
#include "saccadet/saccade.hpp"

namespace saccadet {

struct StandardSize {
  std::int64_t width = 0;
  std::int64_t height = 0;

  std::int64_t area() const noexcept { return width * height; }
  bool operator==(const StandardSize&) const = default;
};

inline void validate(const StandardSize& size) {
  if (size.width <= 0 || size.height <= 0) throw ConfigError("standard patch size must be positive");
}

inline std::int64_t round_to_even(double v) noexcept {
  return std::max<std::int64_t>(2, 2 * static_cast<std::int64_t>(std::llround(v / 2.0)));
}

// Expanded tiny-grid cell size, rounded to even pixel counts.
inline StandardSize default_standard_size(const SceneExtent& extent, const GridSpec& tiny_grid, double expansion) {
  const double cell_w = static_cast<double>(extent.width) / static_cast<double>(tiny_grid.cells_x);
  const double cell_h = static_cast<double>(extent.height) / static_cast<double>(tiny_grid.cells_y);
  return {round_to_even(cell_w * expansion), round_to_even(cell_h * expansion)};
}

// A patch together with its uniform scaling into the standard frame:
//   normalized = (global - region.origin) * zoom
struct NormalizedPatch {
  Patch patch;
  StandardSize standard_size;
  double zoom = 1.0;

  double frame_width() const noexcept { return patch.region.width * zoom; }
  double frame_height() const noexcept { return patch.region.height * zoom; }

  double to_normalized_x(double gx) const noexcept { return (gx - patch.region.x) * zoom; }
  double to_normalized_y(double gy) const noexcept { return (gy - patch.region.y) * zoom; }
  double to_global_x(double nx) const noexcept { return nx / zoom + patch.region.x; }
  double to_global_y(double ny) const noexcept { return ny / zoom + patch.region.y; }

  BoundingBox to_normalized(const BoundingBox& b) const noexcept {
    return {to_normalized_x(b.x), to_normalized_y(b.y), b.width * zoom, b.height * zoom};
  }
  BoundingBox to_global(const BoundingBox& b) const noexcept {
    return {to_global_x(b.x), to_global_y(b.y), b.width / zoom, b.height / zoom};
  }
};

// The zoom fits the whole region inside the standard frame; for the
// near-square patches the saccade produces both ratios agree.
inline NormalizedPatch normalize(const Patch& patch, const StandardSize& standard_size) {
  validate(standard_size);
  if (!is_valid(patch.region)) throw InputError("patch region must be a valid box");
  const double zx = static_cast<double>(standard_size.width) / patch.region.width;
  const double zy = static_cast<double>(standard_size.height) / patch.region.height;
  return {patch, standard_size, std::min(zx, zy)};
}

struct PatchDetection {
  BoundingBox bbox;  // normalized-patch frame
  double score = 0.0;
  int category = 0;

  bool operator==(const PatchDetection&) const = default;
};

// Boundary to any megapixel-scale detector. Implementations must be callable
// from several workers at once and return the same output for the same patch.
class DetectorAdapter {
 public:
  virtual ~DetectorAdapter() = default;
  virtual std::vector<PatchDetection> detect(const NormalizedPatch& patch) const = 0;
};

// Adapters that prefer to receive many patches in one call (external
// processes). run_gaze hands them the whole list at once.
class BatchDetectorAdapter : public DetectorAdapter {
 public:
  virtual std::vector<std::vector<PatchDetection>> detect_batch(std::span<const NormalizedPatch> patches) const = 0;

  std::vector<PatchDetection> detect(const NormalizedPatch& patch) const override {
    auto out = detect_batch(std::span<const NormalizedPatch>(&patch, 1));
    return out.empty() ? std::vector<PatchDetection>{} : std::move(out.front());
  }
};

struct PatchResult {
  NormalizedPatch normalized;
  std::vector<PatchDetection> detections;
};

namespace detail {

// Clip adapter output to the patch frame and reject malformed values.
inline std::vector<PatchDetection> sanitize(std::vector<PatchDetection> raw, const NormalizedPatch& np) {
  std::vector<PatchDetection> out;
  out.reserve(raw.size());
  for (PatchDetection& d : raw) {
    if (!std::isfinite(d.score) || d.score < 0.0 || d.score > 1.0) {
      throw Error("score " + std::to_string(d.score) + " outside [0, 1]");
    }
    if (!std::isfinite(d.bbox.x) || !std::isfinite(d.bbox.y) || !std::isfinite(d.bbox.width) ||
        !std::isfinite(d.bbox.height)) {
      throw Error("non-finite box coordinates");
    }
    const auto clipped = clip_to(d.bbox, np.frame_width(), np.frame_height());
    if (!clipped) continue;
    d.bbox = *clipped;
    out.push_back(d);
  }
  return out;
}

}  // namespace detail

// Normalizes and detects every patch. Output order equals input order and the
// result does not depend on the worker count.
inline std::vector<PatchResult> run_gaze(std::span<const Patch> patches, const DetectorAdapter& adapter,
                                         const StandardSize& standard_size, std::size_t workers = 1) {
  if (workers < 1) throw ConfigError("workers must be >= 1");
  std::vector<PatchResult> results(patches.size());
  for (std::size_t k = 0; k < patches.size(); ++k) results[k].normalized = normalize(patches[k], standard_size);
  if (patches.empty()) return results;

  if (const auto* batch = dynamic_cast<const BatchDetectorAdapter*>(&adapter)) {
    std::vector<NormalizedPatch> frames;
    frames.reserve(results.size());
    for (const auto& r : results) frames.push_back(r.normalized);
    std::vector<std::vector<PatchDetection>> all;
    try {
      all = batch->detect_batch(frames);
    } catch (const AdapterError&) {
      throw;
    } catch (const std::exception& e) {
      throw AdapterError(0, e.what());
    }
    if (all.size() != results.size()) {
      throw AdapterError(0, "batch returned " + std::to_string(all.size()) + " results for " +
                                std::to_string(results.size()) + " patches");
    }
    for (std::size_t k = 0; k < results.size(); ++k) {
      try {
        results[k].detections = detail::sanitize(std::move(all[k]), results[k].normalized);
      } catch (const std::exception& e) {
        throw AdapterError(k, e.what());
      }
    }
    return results;
  }

  std::vector<std::string> failures(results.size());
  std::vector<char> failed(results.size(), 0);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next.fetch_add(1); k < results.size(); k = next.fetch_add(1)) {
      try {
        results[k].detections = detail::sanitize(adapter.detect(results[k].normalized), results[k].normalized);
      } catch (const std::exception& e) {
        failed[k] = 1;
        failures[k] = e.what();
      } catch (...) {
        failed[k] = 1;
        failures[k] = "unknown exception";
      }
    }
  };

  const std::size_t pool = std::min(workers, results.size());
  if (pool == 1) {
    work();
  } else {
    std::vector<std::jthread> threads;
    threads.reserve(pool);
    for (std::size_t t = 0; t < pool; ++t) threads.emplace_back(work);
  }

  for (std::size_t k = 0; k < results.size(); ++k) {
    if (failed[k]) throw AdapterError(k, failures[k]);
  }
  return results;
}

}  // namespace saccadet
