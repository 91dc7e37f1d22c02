#pragma once

// AP50 in original-image coordinates (COCO-style greedy matching, 101-point
// interpolation) and the pixel-budget harness used for speed comparisons.

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "saccadet/core.hpp"
#include "saccadet/gaze.hpp"
#include "saccadet/merge.hpp"
#include "saccadet/saccade.hpp"

namespace saccadet {

inline constexpr std::size_t kRecallSamples = 101;

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
};

struct ApResult {
  std::optional<double> ap;  // nullopt when no ground truth is in scope
  std::vector<PrPoint> curve;
  std::size_t ground_truths = 0;
  std::size_t detections = 0;  // detections not ignored by the size filter
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::vector<std::int64_t> gt_match;  // per ground truth: index of matched detection or -1
};

// Greedy matching in score order. With a size filter, ground truths outside
// the bucket are ignored: a detection matched to one is dropped, and an
// unmatched detection only counts as a false positive in its own bucket.
inline ApResult average_precision(std::span<const GlobalDetection> dets, std::span<const Annotation> gts,
                                  std::optional<EvalSize> filter = std::nullopt, double iou_threshold = 0.5) {
  ApResult result;
  const std::size_t ng = gts.size();
  std::vector<char> gt_ignored(ng, 0);
  for (std::size_t g = 0; g < ng; ++g) gt_ignored[g] = filter && eval_size_bucket(gts[g].bbox) != *filter;
  result.ground_truths = static_cast<std::size_t>(std::count(gt_ignored.begin(), gt_ignored.end(), 0));

  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });

  result.gt_match.assign(ng, -1);
  std::vector<char> is_tp;
  is_tp.reserve(dets.size());
  for (std::size_t d : order) {
    const GlobalDetection& det = dets[d];
    std::int64_t best = -1;
    for (int pass = 0; pass < 2 && best < 0; ++pass) {
      double best_iou = iou_threshold;
      for (std::size_t g = 0; g < ng; ++g) {
        if (gt_ignored[g] != pass || result.gt_match[g] >= 0 || gts[g].category != det.category) continue;
        const double overlap = iou(det.bbox, gts[g].bbox);
        if (overlap >= best_iou && (best < 0 || overlap > best_iou)) {
          best_iou = overlap;
          best = static_cast<std::int64_t>(g);
        }
      }
    }
    if (best >= 0) {
      result.gt_match[static_cast<std::size_t>(best)] = static_cast<std::int64_t>(d);
      if (gt_ignored[static_cast<std::size_t>(best)]) continue;
      is_tp.push_back(1);
    } else {
      if (filter && eval_size_bucket(det.bbox) != *filter) continue;
      is_tp.push_back(0);
    }
  }

  result.detections = is_tp.size();
  std::vector<double> recall(is_tp.size());
  std::vector<double> precision(is_tp.size());
  double tp = 0.0;
  double fp = 0.0;
  for (std::size_t k = 0; k < is_tp.size(); ++k) {
    (is_tp[k] ? tp : fp) += 1.0;
    recall[k] = result.ground_truths ? tp / static_cast<double>(result.ground_truths) : 0.0;
    precision[k] = tp / (tp + fp);
  }
  result.true_positives = static_cast<std::size_t>(tp);
  result.false_positives = static_cast<std::size_t>(fp);
  if (result.ground_truths == 0) return result;

  // Precision envelope, then sample at recall 0, 0.01, ..., 1.
  for (std::size_t k = precision.size(); k-- > 1;) precision[k - 1] = std::max(precision[k - 1], precision[k]);
  result.curve.resize(kRecallSamples);
  double sum = 0.0;
  for (std::size_t r = 0; r < kRecallSamples; ++r) {
    const double level = static_cast<double>(r) / static_cast<double>(kRecallSamples - 1);
    const auto it = std::lower_bound(recall.begin(), recall.end(), level);
    const double p = it == recall.end() ? 0.0 : precision[static_cast<std::size_t>(it - recall.begin())];
    result.curve[r] = {level, p};
    sum += p;
  }
  result.ap = sum / static_cast<double>(kRecallSamples);
  return result;
}

struct EvalReport {
  std::optional<double> ap50;
  std::optional<double> ap_small;
  std::optional<double> ap_middle;
  std::optional<double> ap_large;
  std::vector<PrPoint> curve;
  std::size_t detections = 0;
  std::size_t ground_truths = 0;
  std::size_t matched = 0;
  std::size_t unmatched_detections = 0;
  std::size_t unmatched_ground_truths = 0;
  // Breakdown of the overall matching by the ground truth's size bucket.
  std::array<std::size_t, 3> ground_truths_by_size{};
  std::array<std::size_t, 3> matched_by_size{};
};

inline EvalReport evaluate(std::span<const GlobalDetection> dets, std::span<const Annotation> gts) {
  EvalReport report;
  const ApResult overall = average_precision(dets, gts);
  report.ap50 = overall.ap;
  report.curve = overall.curve;
  report.detections = dets.size();
  report.ground_truths = gts.size();
  report.matched = overall.true_positives;
  report.unmatched_detections = overall.false_positives;
  report.unmatched_ground_truths = gts.size() - overall.true_positives;
  for (std::size_t g = 0; g < gts.size(); ++g) {
    const auto bucket = static_cast<std::size_t>(eval_size_bucket(gts[g].bbox));
    ++report.ground_truths_by_size[bucket];
    if (overall.gt_match[g] >= 0) ++report.matched_by_size[bucket];
  }
  report.ap_small = average_precision(dets, gts, EvalSize::Small).ap;
  report.ap_middle = average_precision(dets, gts, EvalSize::Middle).ap;
  report.ap_large = average_precision(dets, gts, EvalSize::Large).ap;
  return report;
}

// Detector work of one run. The pixel count is deterministic; wall time is
// informative only.
struct BudgetReport {
  std::string name;
  std::uint64_t pixels_processed = 0;
  std::size_t patch_count = 0;
  double wall_seconds = 0.0;
  double budget_ratio = 1.0;  // baseline pixels / these pixels
  bool ratio_infinite = false;
  std::string baseline;
};

struct BudgetRatio {
  double value = 1.0;
  bool infinite = false;
};

inline BudgetRatio compare_budgets(const BudgetReport& candidate, const BudgetReport& baseline) {
  if (candidate.pixels_processed == 0) return {std::numeric_limits<double>::infinity(), true};
  return {static_cast<double>(baseline.pixels_processed) / static_cast<double>(candidate.pixels_processed), false};
}

inline void set_baseline(BudgetReport& report, const BudgetReport& baseline) {
  const BudgetRatio r = compare_budgets(report, baseline);
  report.budget_ratio = r.value;
  report.ratio_infinite = r.infinite;
  report.baseline = baseline.name;
}

inline std::uint64_t standard_pixels(std::size_t patch_count, const StandardSize& standard) noexcept {
  return static_cast<std::uint64_t>(patch_count) * static_cast<std::uint64_t>(standard.area());
}

// How sliding-window patches are sized for the detector: the pipeline's
// standard frame, or each window's own expanded size (zoom 1).
enum class WindowPolicy { Standard, Native };

struct SlidingWindowParams {
  std::int64_t grid = 16;
  double expansion = 1.2;
  WindowPolicy policy = WindowPolicy::Standard;
  StandardSize standard_size;  // used with WindowPolicy::Standard
  double nms_iou = 0.5;
  std::size_t workers = 1;
};

struct SlidingWindowRun {
  std::vector<Patch> patches;
  std::vector<GlobalDetection> detections;
  BudgetReport budget;
};

// Every grid cell becomes a patch; no density-driven selection.
inline SlidingWindowRun sliding_window_run(const SceneExtent& extent, const DetectorAdapter& adapter,
                                           const SlidingWindowParams& params) {
  const auto start = std::chrono::steady_clock::now();
  SlidingWindowRun run;
  run.patches = all_cells(extent, params.grid, params.expansion);
  const StandardSize standard =
      params.policy == WindowPolicy::Native
          ? default_standard_size(extent, GridSpec{ScaleLevel::Tiny, params.grid, params.grid}, params.expansion)
          : params.standard_size;
  const auto results = run_gaze(run.patches, adapter, standard, params.workers);
  run.detections = merge_run(results, extent, params.nms_iou);
  run.budget.name = "sw-" + std::to_string(params.grid * params.grid);
  run.budget.patch_count = run.patches.size();
  run.budget.pixels_processed = standard_pixels(run.patches.size(), standard);
  run.budget.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

}  // namespace saccadet
