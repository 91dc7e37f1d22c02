#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "saccadet/core.hpp"
#include "saccadet/gaze.hpp"

namespace saccadet {

struct GlobalDetection {
  BoundingBox bbox;  // original-image pixels
  double score = 0.0;
  int category = 0;
  std::size_t source_patch = 0;

  bool operator==(const GlobalDetection&) const = default;
};

inline GlobalDetection to_global(const PatchDetection& det, const NormalizedPatch& np, std::size_t source_patch = 0) {
  return {np.to_global(det.bbox), det.score, det.category, source_patch};
}

// Ranking used by NMS and for canonical output order.
inline bool detection_precedes(const GlobalDetection& a, const GlobalDetection& b) noexcept {
  if (a.score != b.score) return a.score > b.score;
  if (a.bbox.x != b.bbox.x) return a.bbox.x < b.bbox.x;
  if (a.bbox.y != b.bbox.y) return a.bbox.y < b.bbox.y;
  // Same corner: the larger (less clipped) view first.
  if (a.bbox.width != b.bbox.width) return a.bbox.width > b.bbox.width;
  if (a.bbox.height != b.bbox.height) return a.bbox.height > b.bbox.height;
  if (a.source_patch != b.source_patch) return a.source_patch < b.source_patch;
  return a.category < b.category;
}

// Greedy per-category suppression: a box survives unless a higher-ranked
// survivor of its category overlaps it with IoU above the threshold.
inline std::vector<GlobalDetection> global_nms(std::span<const GlobalDetection> dets, double iou_threshold = 0.5) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) throw ConfigError("NMS IoU threshold must be in (0, 1]");

  std::map<int, std::vector<GlobalDetection>> by_category;
  for (const auto& d : dets) by_category[d.category].push_back(d);

  std::vector<GlobalDetection> kept;
  for (auto& [category, group] : by_category) {
    std::sort(group.begin(), group.end(), detection_precedes);
    std::vector<GlobalDetection> survivors;
    for (const auto& candidate : group) {
      const bool suppressed = std::any_of(survivors.begin(), survivors.end(), [&](const GlobalDetection& s) {
        return iou(s.bbox, candidate.bbox) > iou_threshold;
      });
      if (!suppressed) survivors.push_back(candidate);
    }
    kept.insert(kept.end(), survivors.begin(), survivors.end());
  }
  std::sort(kept.begin(), kept.end(), detection_precedes);
  return kept;
}

// Maps every patch detection to the scene, clips it, and runs global NMS.
inline std::vector<GlobalDetection> merge_run(std::span<const PatchResult> results, const SceneExtent& extent,
                                              double iou_threshold = 0.5) {
  std::vector<GlobalDetection> all;
  for (std::size_t k = 0; k < results.size(); ++k) {
    for (const auto& det : results[k].detections) {
      GlobalDetection g = to_global(det, results[k].normalized, k);
      const auto clipped = clip_to(g.bbox, extent);
      if (!clipped) continue;
      g.bbox = *clipped;
      all.push_back(g);
    }
  }
  return global_nms(all, iou_threshold);
}

}  // namespace saccadet
