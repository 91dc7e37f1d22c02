#pragma once

// JSON interchange: annotation sets, patch manifests and detection lists.

#include <filesystem>
#include <fstream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "saccadet/core.hpp"
#include "saccadet/error.hpp"
#include "saccadet/gaze.hpp"
#include "saccadet/merge.hpp"
#include "saccadet/saccade.hpp"

namespace saccadet {

using Json = nlohmann::ordered_json;

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

inline Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw InputError(what + ": " + e.what());
  }
}

inline Json box_json(const BoundingBox& b) { return Json::array({b.x, b.y, b.width, b.height}); }

inline BoundingBox box_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 4) throw InputError("bbox must be [x, y, w, h]");
  for (const auto& v : j) {
    if (!v.is_number()) throw InputError("bbox entries must be numbers");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

// --- annotations -----------------------------------------------------------

inline Json to_json(const AnnotationSet& set) {
  Json anns = Json::array();
  for (const auto& a : set.annotations) {
    anns.push_back(Json{{"id", a.id}, {"bbox", box_json(a.bbox)}, {"category", a.category}});
  }
  return Json{{"scene", {{"width", set.extent.width}, {"height", set.extent.height}}}, {"annotations", anns}};
}

// Boxes are clipped to the scene; ids must be unique.
inline AnnotationSet annotations_from_json(const Json& j) {
  try {
    AnnotationSet set;
    const Json& scene = j.at("scene");
    set.extent = {scene.at("width").get<std::int64_t>(), scene.at("height").get<std::int64_t>()};
    validate(set.extent);
    std::set<std::int64_t> ids;
    for (const Json& a : j.at("annotations")) {
      Annotation ann;
      ann.id = a.at("id").get<std::int64_t>();
      ann.bbox = box_from_json(a.at("bbox"));
      ann.category = a.value("category", 0);
      if (!is_valid(ann.bbox)) throw InputError("annotation " + std::to_string(ann.id) + " has a degenerate box");
      if (!ids.insert(ann.id).second) throw InputError("duplicate annotation id " + std::to_string(ann.id));
      const auto clipped = clip_to(ann.bbox, set.extent);
      if (!clipped) throw InputError("annotation " + std::to_string(ann.id) + " lies outside the scene");
      ann.bbox = *clipped;
      set.annotations.push_back(ann);
    }
    return set;
  } catch (const Json::exception& e) {
    throw InputError(std::string("annotation JSON: ") + e.what());
  }
}

inline AnnotationSet read_annotations(const std::filesystem::path& path) {
  return annotations_from_json(parse_json(read_text(path), path.string()));
}

inline void write_annotations(const AnnotationSet& set, const std::filesystem::path& path) {
  write_text(path, to_json(set).dump(2) + "\n");
}

// --- patch manifest ---------------------------------------------------------

inline Json to_json(std::span<const Patch> patches) {
  Json out = Json::array();
  for (const auto& p : patches) {
    out.push_back(Json{{"scale", std::string(to_string(p.scale))},
                       {"cell", Json::array({p.cell_i, p.cell_j})},
                       {"region", box_json(p.region)},
                       {"density", p.density}});
  }
  return out;
}

// Reads a manifest back; cell_region is recomputed by the caller if needed.
inline std::vector<Patch> patches_from_json(const Json& j) {
  try {
    std::vector<Patch> patches;
    for (const Json& p : j) {
      Patch patch;
      patch.scale = parse_scale_level(p.at("scale").get<std::string>());
      patch.cell_i = p.at("cell").at(0).get<std::int64_t>();
      patch.cell_j = p.at("cell").at(1).get<std::int64_t>();
      patch.region = box_from_json(p.at("region"));
      patch.cell_region = patch.region;
      patch.density = p.at("density").get<double>();
      patches.push_back(patch);
    }
    return patches;
  } catch (const Json::exception& e) {
    throw InputError(std::string("patch manifest: ") + e.what());
  }
}

// --- detections ---------------------------------------------------------------

inline Json to_json(std::span<const GlobalDetection> dets) {
  Json out = Json::array();
  for (const auto& d : dets) {
    out.push_back(Json{{"bbox", box_json(d.bbox)}, {"score", d.score}, {"category", d.category}});
  }
  return out;
}

inline std::vector<GlobalDetection> detections_from_json(const Json& j) {
  try {
    std::vector<GlobalDetection> dets;
    for (const Json& d : j) {
      GlobalDetection g;
      g.bbox = box_from_json(d.at("bbox"));
      g.score = d.at("score").get<double>();
      g.category = d.value("category", 0);
      if (!is_valid(g.bbox)) throw InputError("detection has a degenerate box");
      if (!(g.score >= 0.0 && g.score <= 1.0)) throw InputError("detection score outside [0, 1]");
      g.source_patch = dets.size();
      dets.push_back(g);
    }
    return dets;
  } catch (const Json::exception& e) {
    throw InputError(std::string("detection JSON: ") + e.what());
  }
}

inline std::vector<GlobalDetection> read_detections(const std::filesystem::path& path) {
  return detections_from_json(parse_json(read_text(path), path.string()));
}

inline void write_detections(std::span<const GlobalDetection> dets, const std::filesystem::path& path) {
  write_text(path, to_json(dets).dump(2) + "\n");
}

// --- external detector exchange -----------------------------------------------
//
// Request:  {"patches": [{"patch_id", "scale", "cell", "region", "zoom", "standard_size": [w, h]}]}
// Response: [{"patch_id", "bbox": [x, y, w, h] (normalized frame), "score", "category"}]

inline Json exchange_request(std::span<const NormalizedPatch> patches) {
  Json list = Json::array();
  for (std::size_t k = 0; k < patches.size(); ++k) {
    const auto& np = patches[k];
    list.push_back(Json{{"patch_id", k},
                        {"scale", std::string(to_string(np.patch.scale))},
                        {"cell", Json::array({np.patch.cell_i, np.patch.cell_j})},
                        {"region", box_json(np.patch.region)},
                        {"zoom", np.zoom},
                        {"standard_size", Json::array({np.standard_size.width, np.standard_size.height})}});
  }
  return Json{{"patches", list}};
}

inline std::vector<std::vector<PatchDetection>> exchange_response(const Json& j, std::size_t patch_count) {
  try {
    if (!j.is_array()) throw InputError("detector response must be a JSON array");
    std::vector<std::vector<PatchDetection>> out(patch_count);
    for (const Json& d : j) {
      const auto id = d.at("patch_id").get<std::size_t>();
      if (id >= patch_count) throw InputError("detector response names unknown patch " + std::to_string(id));
      out[id].push_back({box_from_json(d.at("bbox")), d.at("score").get<double>(), d.value("category", 0)});
    }
    return out;
  } catch (const Json::exception& e) {
    throw InputError(std::string("detector response: ") + e.what());
  }
}

}  // namespace saccadet
