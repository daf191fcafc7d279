#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "twinseg/cost_model.hpp"
#include "twinseg/evaluator.hpp"
#include "twinseg/instance_segmenter.hpp"
#include "twinseg/synth.hpp"

namespace twinseg {

using Json = nlohmann::json;  // std::map-backed, so keys serialize sorted

inline constexpr const char* kEvalSchema = "twinseg.eval.v1";
inline constexpr const char* kCostSchema = "twinseg.cost.v1";
inline constexpr const char* kSweepSchema = "twinseg.mu_sweep.v1";
inline constexpr const char* kStatsSchema = "twinseg.stats.v1";
inline constexpr const char* kSceneSchema = "twinseg.scene.v1";
inline constexpr const char* kCurveSchema = "twinseg.annotation_curves.v1";

/// Two-space indented dump with a trailing newline.
[[nodiscard]] std::string dump_stable(const Json& doc);
/// Throws IoError naming the path.
void write_json(const std::filesystem::path& path, const Json& doc);
/// Throws IoError for unreadable files and ParseError for malformed JSON.
[[nodiscard]] Json read_json(const std::filesystem::path& path);

[[nodiscard]] Json to_json(const MatchResult& m);
[[nodiscard]] Json to_json(const ClassMetrics& m);
[[nodiscard]] Json to_json(const CurvePoint& p);
[[nodiscard]] Json to_json(const EvalReport& report);
/// Inverse of to_json(EvalReport). Throws ParseError on schema mismatch.
[[nodiscard]] EvalReport eval_report_from_json(const Json& doc);

[[nodiscard]] Json to_json(const std::vector<MuSweepPoint>& sweep, double iou);

[[nodiscard]] Json to_json(const FacilityStats& stats);
[[nodiscard]] FacilityStats facility_stats_from_json(const Json& doc);
/// Accepts a stats document holding a "facilities" list.
[[nodiscard]] std::vector<FacilityStats> stats_file_from_json(const Json& doc);
[[nodiscard]] Json to_json(const FacilityCost& cost);
[[nodiscard]] Json cost_report_json(const std::vector<FacilityCost>& costs);

struct NamedCurve {
  std::string name;
  AnnotationCurve curve;
};
[[nodiscard]] std::vector<NamedCurve> annotation_curves_from_json(const Json& doc);

[[nodiscard]] Json to_json(const SceneSpec& spec);
/// Throws ParseError for unknown shapes or keys and InvalidPrimitive for bad sizes.
[[nodiscard]] SceneSpec scene_spec_from_json(const Json& doc);

/// Lookup helpers that raise ParseError with the key path.
[[nodiscard]] const Json& require_key(const Json& obj, const std::string& key, const std::string& where);
/// Throws ParseError if `obj` has keys outside `allowed`.
void reject_unknown_keys(const Json& obj, const std::vector<std::string>& allowed, const std::string& where);

}  // namespace twinseg
