#pragma once

// density -> saccade -> gaze -> merge, wired from a PipelineConfig.

#include <chrono>
#include <optional>
#include <vector>

#include "saccadet/config.hpp"
#include "saccadet/core.hpp"
#include "saccadet/density.hpp"
#include "saccadet/eval.hpp"
#include "saccadet/gaze.hpp"
#include "saccadet/merge.hpp"
#include "saccadet/saccade.hpp"

namespace saccadet {

struct PipelineResult {
  DensityMapSet density;
  std::vector<Patch> patches;
  std::vector<PatchResult> gaze;
  std::vector<GlobalDetection> detections;
  BudgetReport budget;
};

inline DensityMapSet render_density(const AnnotationSet& scene, const PipelineConfig& config) {
  return render_gt_density(scene.annotations, scene.extent, config.downsample, config.boundaries);
}

inline std::vector<Patch> select_regions(const DensityMapSet& density, const SceneExtent& extent,
                                         const PipelineConfig& config) {
  return saccade(density, config.grids, config.threshold, config.expansion, extent);
}

// Runs the full pipeline on a given density set (ground truth or an external
// prediction with the count scale already removed).
inline PipelineResult run_pipeline(const SceneExtent& extent, const DetectorAdapter& adapter,
                                   const PipelineConfig& config, DensityMapSet density) {
  validate(config);
  validate(extent);
  const auto start = std::chrono::steady_clock::now();
  PipelineResult result;
  result.density = std::move(density);
  if (result.density.width() != map_cells(extent.width, result.density.downsample()) ||
      result.density.height() != map_cells(extent.height, result.density.downsample())) {
    throw InputError("density raster does not match the scene extent");
  }
  result.patches = select_regions(result.density, extent, config);
  const StandardSize standard = effective_standard_size(config, extent);
  result.gaze = run_gaze(result.patches, adapter, standard, config.workers);
  result.detections = merge_run(result.gaze, extent, config.nms_iou);
  result.budget.name = "saccade";
  result.budget.patch_count = result.patches.size();
  result.budget.pixels_processed = standard_pixels(result.patches.size(), standard);
  result.budget.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

// Ground-truth density of `scene` drives the saccade stage.
inline PipelineResult run_pipeline(const AnnotationSet& scene, const DetectorAdapter& adapter,
                                   const PipelineConfig& config) {
  validate(config);
  return run_pipeline(scene.extent, adapter, config, render_density(scene, config));
}

}  // namespace saccadet
