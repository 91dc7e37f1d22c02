// saccadet command-line entry point.
//
// Exit codes: 0 success, 1 unexpected failure, 2 invalid configuration,
// 3 I/O or input-format error, 4 detector adapter failure.

#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "saccadet/saccadet.hpp"

namespace {

using namespace saccadet;

enum ExitCode : int { kOk = 0, kUnexpected = 1, kConfig = 2, kIo = 3, kAdapter = 4 };

// Pipeline flags; unset flags leave the config-file or default value alone.
struct ConfigFlags {
  std::string config_path;
  std::optional<double> downsample;
  std::optional<double> threshold;
  std::optional<double> expansion;
  std::optional<double> nms_iou;
  std::optional<double> count_scale;
  std::optional<std::string> boundaries;
  std::optional<std::string> grids;
  std::optional<std::string> alphas;
  std::optional<std::int64_t> standard_width;
  std::optional<std::int64_t> standard_height;
  std::optional<std::size_t> workers;
  std::optional<std::uint64_t> seed;
  std::string dump_config;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "key=value configuration file");
    app->add_option("--downsample", downsample, "original pixels per density cell (default 32)");
    app->add_option("--threshold", threshold, "cell density threshold (default 0.2)");
    app->add_option("--expansion", expansion, "patch expansion ratio (default 1.2)");
    app->add_option("--nms-iou", nms_iou, "merge NMS IoU threshold (default 0.5)");
    app->add_option("--count-scale", count_scale, "density count scale factor (default 1000)");
    app->add_option("--boundaries", boundaries, "scale boundaries, e.g. 800,1600,3200");
    app->add_option("--grids", grids, "grid sizes per scale, e.g. 16,8,4,2");
    app->add_option("--alphas", alphas, "scale-aware loss weights, e.g. 0.01,0.1,10,100");
    app->add_option("--standard-width", standard_width, "standard patch width (0 = auto)");
    app->add_option("--standard-height", standard_height, "standard patch height (0 = auto)");
    app->add_option("--workers", workers, "gaze worker count");
    app->add_option("--seed", seed, "root seed");
    app->add_option("--dump-config", dump_config, "write the effective configuration here");
  }

  PipelineConfig resolve() const {
    PipelineConfig c;
    if (!config_path.empty()) c = load_config(config_path);
    auto set = [&c](const char* key, const std::string& value) { apply_setting(c, key, value); };
    if (downsample) c.downsample = *downsample;
    if (threshold) c.threshold = *threshold;
    if (expansion) c.expansion = *expansion;
    if (nms_iou) c.nms_iou = *nms_iou;
    if (count_scale) c.count_scale = *count_scale;
    if (boundaries) set("boundaries", *boundaries);
    if (grids) set("grids", *grids);
    if (alphas) set("alphas", *alphas);
    if (standard_width) c.standard_size.width = *standard_width;
    if (standard_height) c.standard_size.height = *standard_height;
    if (workers) c.workers = *workers;
    if (seed) c.seed = *seed;
    validate(c);
    if (!dump_config.empty()) write_text(dump_config, to_config_text(c));
    return c;
  }
};

struct AdapterFlags {
  std::string adapter = "oracle";
  double jitter = 0.0;
  double miss_rate = 0.0;
  double fp_rate = 0.0;
  std::size_t batch_size = 0;

  void attach(CLI::App* app) {
    app->add_option("--adapter", adapter, "oracle | noisy | exec:<command>");
    app->add_option("--jitter", jitter, "noisy adapter: box jitter std-dev in pixels");
    app->add_option("--miss-rate", miss_rate, "noisy adapter: probability of missing an object");
    app->add_option("--fp-rate", fp_rate, "noisy adapter: probability of a false positive per patch");
    app->add_option("--batch-size", batch_size, "exec adapter: patches per external call (0 = all)");
  }

  std::shared_ptr<const DetectorAdapter> make(const AnnotationSet& scene, const PipelineConfig& config) const {
    if (adapter == "oracle") return oracle_detector(scene.annotations);
    if (adapter == "noisy") {
      return noisy_detector(scene.annotations, {jitter, miss_rate, fp_rate, split_seed(config.seed, "noisy")});
    }
    if (adapter.rfind("exec:", 0) == 0) return std::make_shared<ExecDetector>(adapter.substr(5), batch_size);
    throw ConfigError("unknown adapter '" + adapter + "'");
  }
};

DensityMapSet density_for(const AnnotationSet& scene, const PipelineConfig& config, const std::string& dmap_path) {
  if (dmap_path.empty()) return render_density(scene, config);
  return read_dmap(dmap_path);
}

int cmd_synth(const std::string& spec_path, const SceneSpec& flags_spec, const std::vector<std::string>& given,
              std::optional<std::uint64_t> seed, const std::string& out) {
  SceneSpec spec;
  std::uint64_t root = 0;
  if (!spec_path.empty()) {
    for (const auto& [key, value] : parse_key_values(read_text(spec_path))) {
      if (key == "seed") root = detail::parse_int<std::uint64_t>(key, value);
      else apply_setting(spec, key, value);
    }
  }
  for (const auto& name : given) {
    if (name == "objects") spec.object_count = flags_spec.object_count;
    if (name == "clusters") spec.cluster_count = flags_spec.cluster_count;
    if (name == "foreground") spec.foreground_fraction_target = flags_spec.foreground_fraction_target;
    if (name == "min-side") spec.min_side = flags_spec.min_side;
    if (name == "max-side") spec.max_side = flags_spec.max_side;
    if (name == "width") spec.extent.width = flags_spec.extent.width;
    if (name == "height") spec.extent.height = flags_spec.extent.height;
  }
  if (seed) root = *seed;
  spec.seed = split_seed(root, "synth");
  try {
    validate(spec);
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
  const AnnotationSet scene = generate_scene(spec);
  write_annotations(scene, out);
  std::cout << format_table(scene_stats(scene.annotations, scene.extent));
  return kOk;
}

int cmd_stats(const std::string& annotations, const std::string& out) {
  const AnnotationSet scene = read_annotations(annotations);
  const SceneStats stats = scene_stats(scene.annotations, scene.extent);
  std::cout << format_table(stats);
  if (!out.empty()) write_text(out, to_json(stats).dump(2) + "\n");
  return kOk;
}

int cmd_density(const std::string& annotations, const ConfigFlags& flags, const std::string& out) {
  const PipelineConfig config = flags.resolve();
  const AnnotationSet scene = read_annotations(annotations);
  const DensityMapSet set = render_density(scene, config);
  write_dmap(set, out);
  for (ScaleLevel level : kScaleLevels) {
    std::printf("%-8s mass %.4f\n", std::string(to_string(level)).c_str(), set[level].total_mass());
  }
  return kOk;
}

int cmd_saccade(const std::string& annotations, const std::string& dmap, const ConfigFlags& flags,
                const std::string& out) {
  const PipelineConfig config = flags.resolve();
  const AnnotationSet scene = read_annotations(annotations);
  const auto patches = select_regions(density_for(scene, config, dmap), scene.extent, config);
  write_text(out, to_json(std::span<const Patch>(patches)).dump(2) + "\n");
  std::printf("%zu patches\n", patches.size());
  return kOk;
}

struct RunArgs {
  std::string annotations;
  std::string dmap;
  std::string out;
  std::string budget_out;
  std::string dump_density;
  std::string dump_patches;
};

int cmd_run(const RunArgs& args, const ConfigFlags& flags, const AdapterFlags& adapter_flags) {
  const PipelineConfig config = flags.resolve();
  const AnnotationSet scene = read_annotations(args.annotations);
  const auto adapter = adapter_flags.make(scene, config);
  const PipelineResult result = run_pipeline(scene.extent, *adapter, config, density_for(scene, config, args.dmap));
  if (!args.dump_density.empty()) write_dmap(result.density, args.dump_density);
  if (!args.dump_patches.empty()) {
    write_text(args.dump_patches, to_json(std::span<const Patch>(result.patches)).dump(2) + "\n");
  }
  write_detections(result.detections, args.out);
  const std::vector<BudgetReport> reports{result.budget};
  std::cout << format_table(reports);
  if (!args.budget_out.empty()) write_text(args.budget_out, to_json(result.budget).dump(2) + "\n");
  return kOk;
}

int cmd_eval(const std::string& detections, const std::string& annotations, const std::string& out,
             const std::string& pr_csv) {
  const auto dets = read_detections(detections);
  const AnnotationSet scene = read_annotations(annotations);
  const EvalReport report = evaluate(dets, scene.annotations);
  std::cout << format_table(report);
  if (!out.empty()) write_text(out, to_json(report).dump(2) + "\n");
  if (!pr_csv.empty()) write_text(pr_csv, pr_curve_csv(report));
  return kOk;
}

int cmd_bench(const std::string& annotations, const std::string& dmap, const ConfigFlags& flags,
              const AdapterFlags& adapter_flags, double cost_per_pixel, const std::string& policy,
              const std::string& out) {
  const PipelineConfig config = flags.resolve();
  const AnnotationSet scene = read_annotations(annotations);
  const auto inner = adapter_flags.make(scene, config);
  const StandardSize standard = effective_standard_size(config, scene.extent);
  WindowPolicy window_policy = WindowPolicy::Standard;
  if (policy == "native") window_policy = WindowPolicy::Native;
  else if (policy != "standard") throw ConfigError("window policy must be 'standard' or 'native'");

  Json runs = Json::array();
  std::vector<BudgetReport> reports;

  const CostedDetector saccade_adapter(inner, cost_per_pixel);
  const PipelineResult saccade_run =
      run_pipeline(scene.extent, saccade_adapter, config, density_for(scene, config, dmap));
  BudgetReport saccade_budget = saccade_run.budget;

  std::vector<SlidingWindowRun> windows;
  for (std::int64_t grid : {16, 8}) {
    const CostedDetector adapter(inner, cost_per_pixel);
    windows.push_back(sliding_window_run(
        scene.extent, adapter, {grid, config.expansion, window_policy, standard, config.nms_iou, config.workers}));
  }
  const BudgetReport& sw256 = windows[0].budget;
  set_baseline(saccade_budget, sw256);
  reports.push_back(saccade_budget);
  runs.push_back({{"budget", to_json(saccade_budget)},
                  {"eval", to_json(evaluate(saccade_run.detections, scene.annotations), false)}});
  for (auto& w : windows) {
    set_baseline(w.budget, sw256);
    reports.push_back(w.budget);
    runs.push_back({{"budget", to_json(w.budget)}, {"eval", to_json(evaluate(w.detections, scene.annotations), false)}});
  }
  std::cout << format_table(reports);
  std::cout << "note: " << kBudgetNote << "\n";
  const Json doc{{"standard_size", Json::array({standard.width, standard.height})},
                 {"cost_per_pixel", cost_per_pixel},
                 {"note", kBudgetNote},
                 {"runs", runs}};
  if (!out.empty()) write_text(out, doc.dump(2) + "\n");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"saccadet: density-guided patch selection and detection for gigapixel scenes"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic annotated scene");
  SceneSpec synth_spec;
  std::string synth_spec_path;
  std::string synth_out;
  std::optional<std::uint64_t> synth_seed;
  synth->add_option("--spec", synth_spec_path, "key=value scene spec file");
  synth->add_option("--objects", synth_spec.object_count, "object count");
  synth->add_option("--clusters", synth_spec.cluster_count, "cluster count");
  synth->add_option("--foreground", synth_spec.foreground_fraction_target, "foreground fraction target");
  synth->add_option("--min-side", synth_spec.min_side, "object height at the top edge");
  synth->add_option("--max-side", synth_spec.max_side, "object height at the bottom edge");
  synth->add_option("--width", synth_spec.extent.width, "scene width");
  synth->add_option("--height", synth_spec.extent.height, "scene height");
  synth->add_option("--seed", synth_seed, "root seed");
  synth->add_option("--out", synth_out, "annotation JSON output")->required();

  // stats
  auto* stats = app.add_subcommand("stats", "summarize an annotation set");
  std::string stats_in;
  std::string stats_out;
  stats->add_option("--annotations", stats_in, "annotation JSON")->required();
  stats->add_option("--out", stats_out, "JSON report output");

  // density
  auto* density = app.add_subcommand("density", "render ground-truth density maps to DMAP");
  std::string density_in;
  std::string density_out;
  ConfigFlags density_flags;
  density->add_option("--annotations", density_in, "annotation JSON")->required();
  density->add_option("--out", density_out, "DMAP output")->required();
  density_flags.attach(density);

  // saccade
  auto* sacc = app.add_subcommand("saccade", "select patches and write a patch manifest");
  std::string sacc_in;
  std::string sacc_dmap;
  std::string sacc_out;
  ConfigFlags sacc_flags;
  sacc->add_option("--annotations", sacc_in, "annotation JSON (scene extent, ground-truth density)")->required();
  sacc->add_option("--density", sacc_dmap, "external DMAP prediction (unscaled counts)");
  sacc->add_option("--out", sacc_out, "patch manifest output")->required();
  sacc_flags.attach(sacc);

  // run
  auto* run = app.add_subcommand("run", "run the full pipeline");
  RunArgs run_args;
  ConfigFlags run_flags;
  AdapterFlags run_adapter;
  run->add_option("--annotations", run_args.annotations, "annotation JSON")->required();
  run->add_option("--density", run_args.dmap, "external DMAP prediction (unscaled counts)");
  run->add_option("--out", run_args.out, "detections JSON output")->required();
  run->add_option("--budget-out", run_args.budget_out, "budget report JSON output");
  run->add_option("--dump-density", run_args.dump_density, "write the density maps used (DMAP)");
  run->add_option("--dump-patches", run_args.dump_patches, "write the patch manifest");
  run_flags.attach(run);
  run_adapter.attach(run);

  // eval
  auto* ev = app.add_subcommand("eval", "evaluate detections against annotations");
  std::string ev_dets;
  std::string ev_anns;
  std::string ev_out;
  std::string ev_csv;
  ev->add_option("--detections", ev_dets, "detections JSON")->required();
  ev->add_option("--annotations", ev_anns, "annotation JSON")->required();
  ev->add_option("--out", ev_out, "JSON report output");
  ev->add_option("--pr-csv", ev_csv, "precision-recall samples CSV output");

  // bench
  auto* bench = app.add_subcommand("bench", "compare saccade budget against sliding windows (256 and 64)");
  std::string bench_in;
  std::string bench_dmap;
  std::string bench_out;
  std::string bench_policy = "standard";
  double bench_cost = 0.0;
  ConfigFlags bench_flags;
  AdapterFlags bench_adapter;
  bench->add_option("--annotations", bench_in, "annotation JSON")->required();
  bench->add_option("--density", bench_dmap, "external DMAP prediction (unscaled counts)");
  bench->add_option("--out", bench_out, "JSON report output");
  bench->add_option("--cost-per-pixel", bench_cost, "busy-work units per standard-frame pixel");
  bench->add_option("--window-policy", bench_policy, "standard | native sizing of sliding windows");
  bench_flags.attach(bench);
  bench_adapter.attach(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*synth) {
      std::vector<std::string> given;
      for (const char* name : {"objects", "clusters", "foreground", "min-side", "max-side", "width", "height"}) {
        if (synth->count(std::string("--") + name) > 0) given.emplace_back(name);
      }
      return cmd_synth(synth_spec_path, synth_spec, given, synth_seed, synth_out);
    }
    if (*stats) return cmd_stats(stats_in, stats_out);
    if (*density) return cmd_density(density_in, density_flags, density_out);
    if (*sacc) return cmd_saccade(sacc_in, sacc_dmap, sacc_flags, sacc_out);
    if (*run) return cmd_run(run_args, run_flags, run_adapter);
    if (*ev) return cmd_eval(ev_dets, ev_anns, ev_out, ev_csv);
    if (*bench) return cmd_bench(bench_in, bench_dmap, bench_flags, bench_adapter, bench_cost, bench_policy, bench_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const InfeasibleError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const AdapterError& e) {
    std::cerr << "adapter error: " << e.what() << "\n";
    return kAdapter;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kIo;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kIo;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUnexpected;
  }
  return kUnexpected;
}
