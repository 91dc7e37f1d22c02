#pragma once

// JSON, CSV and plain-text renderings of evaluation and budget reports.

#include <cstdio>
#include <optional>
#include <span>
#include <sstream>
#include <string>

#include "saccadet/eval.hpp"
#include "saccadet/io.hpp"
#include "saccadet/synth.hpp"

namespace saccadet {

inline constexpr const char* kBudgetNote =
    "pixel budgets are deterministic normalized-frame pixel counts; wall-clock times are informative only and "
    "do not reproduce GPU FPS of external systems";

inline Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

inline Json to_json(const EvalReport& r, bool with_curve = true) {
  Json by_size = Json::object();
  for (EvalSize s : kEvalSizes) {
    const auto k = static_cast<std::size_t>(s);
    by_size[std::string(to_string(s))] = {{"ground_truths", r.ground_truths_by_size[k]}, {"matched", r.matched_by_size[k]}};
  }
  Json out{{"ap50", optional_json(r.ap50)},
           {"ap_small", optional_json(r.ap_small)},
           {"ap_middle", optional_json(r.ap_middle)},
           {"ap_large", optional_json(r.ap_large)},
           {"detections", r.detections},
           {"ground_truths", r.ground_truths},
           {"matched", r.matched},
           {"unmatched_detections", r.unmatched_detections},
           {"unmatched_ground_truths", r.unmatched_ground_truths},
           {"by_size", by_size}};
  if (with_curve) {
    Json curve = Json::array();
    for (const auto& p : r.curve) curve.push_back(Json::array({p.recall, p.precision}));
    out["pr_curve"] = curve;
  }
  return out;
}

inline Json to_json(const BudgetReport& b) {
  return Json{{"name", b.name},
              {"patch_count", b.patch_count},
              {"pixels_processed", b.pixels_processed},
              {"wall_seconds", b.wall_seconds},
              {"baseline", b.baseline},
              {"budget_ratio", b.ratio_infinite ? Json(nullptr) : Json(b.budget_ratio)},
              {"ratio_infinite", b.ratio_infinite}};
}

inline Json to_json(const SceneStats& s) {
  Json counts = Json::object();
  for (ScaleLevel level : kScaleLevels) counts[std::string(to_string(level))] = s.scale_counts[index_of(level)];
  Json eval_counts = Json::object();
  for (EvalSize size : kEvalSizes) {
    eval_counts[std::string(to_string(size))] = s.eval_size_counts[static_cast<std::size_t>(size)];
  }
  return Json{{"scale_counts", counts},
              {"eval_size_counts", eval_counts},
              {"foreground_fraction", s.foreground_fraction},
              {"min_side", s.min_side},
              {"max_side", s.max_side},
              {"side_ratio", s.side_ratio},
              {"side_histogram_log2", s.side_histogram}};
}

namespace detail {

inline std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

inline std::string fmt_ap(const std::optional<double>& v) { return v ? fmt("%.4f", *v) : std::string("n/a"); }

}  // namespace detail

inline std::string format_table(const EvalReport& r) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-8s %-8s %-8s %-8s %8s %8s %8s\n", "AP50", "AP_S", "AP_M", "AP_L", "dets", "gts",
                "matched");
  out << line;
  std::snprintf(line, sizeof line, "%-8s %-8s %-8s %-8s %8zu %8zu %8zu\n", detail::fmt_ap(r.ap50).c_str(),
                detail::fmt_ap(r.ap_small).c_str(), detail::fmt_ap(r.ap_middle).c_str(),
                detail::fmt_ap(r.ap_large).c_str(), r.detections, r.ground_truths, r.matched);
  out << line;
  return out.str();
}

inline std::string format_table(std::span<const BudgetReport> reports) {
  std::ostringstream out;
  char line[200];
  std::snprintf(line, sizeof line, "%-10s %8s %16s %10s %10s  %s\n", "run", "patches", "pixels", "wall_s", "ratio",
                "baseline");
  out << line;
  for (const auto& b : reports) {
    const std::string ratio = b.baseline.empty()    ? std::string("-")
                              : b.ratio_infinite ? std::string("inf")
                                                 : detail::fmt("%.2f", b.budget_ratio);
    std::snprintf(line, sizeof line, "%-10s %8zu %16llu %10.3f %10s  %s\n", b.name.c_str(), b.patch_count,
                  static_cast<unsigned long long>(b.pixels_processed), b.wall_seconds, ratio.c_str(),
                  b.baseline.c_str());
    out << line;
  }
  return out.str();
}

inline std::string format_table(const SceneStats& s) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-8s %-8s %-8s %-8s %10s %10s\n", "tiny", "small", "middle", "large",
                "fg_frac", "side_ratio");
  out << line;
  std::snprintf(line, sizeof line, "%-8zu %-8zu %-8zu %-8zu %10.4f %10.1f\n", s.scale_counts[0], s.scale_counts[1],
                s.scale_counts[2], s.scale_counts[3], s.foreground_fraction, s.side_ratio);
  out << line;
  return out.str();
}

inline std::string pr_curve_csv(const EvalReport& r) {
  std::ostringstream out;
  out << "recall,precision\n";
  out.precision(10);
  for (const auto& p : r.curve) out << p.recall << "," << p.precision << "\n";
  return out.str();
}

}  // namespace saccadet
