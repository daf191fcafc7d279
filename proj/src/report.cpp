#include "twinseg/report.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "twinseg/error.hpp"

namespace twinseg {

std::string dump_stable(const Json& doc) { return doc.dump(2) + "\n"; }

void write_json(const std::filesystem::path& path, const Json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  out << dump_stable(doc);
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return Json::parse(ss.str());
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

const Json& require_key(const Json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw Error(ErrorCode::ParseError, where + ": missing key '" + key + "'");
  return obj.at(key);
}

void reject_unknown_keys(const Json& obj, const std::vector<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorCode::ParseError, where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw Error(ErrorCode::ParseError, where + ": unknown key '" + key + "'");
    }
  }
}

namespace {

template <typename T>
T get_as(const Json& obj, const std::string& key, const std::string& where) {
  const Json& v = require_key(obj, key, where);
  try {
    return v.get<T>();
  } catch (const Json::exception&) {
    throw Error(ErrorCode::ParseError, where + ": key '" + key + "' has the wrong type");
  }
}

void check_schema(const Json& doc, const char* schema) {
  const auto got = get_as<std::string>(doc, "schema_version", "document");
  if (got != schema) {
    throw Error(ErrorCode::ParseError, "expected schema '" + std::string(schema) + "', found '" + got + "'");
  }
}

ClassLabel class_key(const std::string& name, const std::string& where) {
  auto c = class_from_name(name);
  if (!c) throw Error(ErrorCode::ParseError, where + ": unknown class '" + name + "'");
  return *c;
}

template <typename T>
Json per_class(const std::array<T, kNumClasses>& values) {
  Json out = Json::object();
  for (ClassLabel c : kAllClasses) out[std::string(class_name(c))] = values[static_cast<std::size_t>(c)];
  return out;
}

template <typename T>
std::array<T, kNumClasses> per_class_from(const Json& obj, const std::string& where) {
  std::array<T, kNumClasses> out{};
  if (!obj.is_object()) throw Error(ErrorCode::ParseError, where + ": expected an object keyed by class");
  for (const auto& [key, value] : obj.items()) {
    out[static_cast<std::size_t>(class_key(key, where))] = value.template get<T>();
  }
  return out;
}

Json point_json(const Point3& p) { return Json::array({p.x, p.y, p.z}); }

Point3 point_from(const Json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 3) throw Error(ErrorCode::ParseError, where + ": expected [x, y, z]");
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

}  // namespace

Json to_json(const MatchResult& m) {
  Json per = Json::object();
  for (ClassLabel c : kAllClasses) {
    const ClassPR& pr = m.per_class[static_cast<std::size_t>(c)];
    per[std::string(class_name(c))] = {
        {"num_pred", pr.num_pred},
        {"num_gt", pr.num_gt},
        {"true_positives", pr.true_positives},
        {"precision", pr.precision},
        {"recall", pr.recall},
        {"precision_undefined", !pr.precision_defined},
        {"recall_undefined", !pr.recall_defined},
    };
  }
  Json matches = Json::array();
  for (const InstanceMatch& im : m.matches) {
    matches.push_back({{"pred_id", im.pred_id}, {"gt_id", im.gt_id}, {"class", class_name(im.cls)}, {"iou", im.iou}});
  }
  return {{"threshold", m.threshold},     {"mean_precision", m.mean_precision}, {"mean_recall", m.mean_recall},
          {"precision_classes", m.precision_classes}, {"recall_classes", m.recall_classes},
          {"per_class", per},               {"matches", matches}};
}

Json to_json(const ClassMetrics& m) {
  Json iou = Json::object();
  for (ClassLabel c : kAllClasses) {
    const auto k = static_cast<std::size_t>(c);
    iou[std::string(class_name(c))] = m.present[k] ? Json(m.iou[k]) : Json(nullptr);
  }
  return {{"accuracy", m.accuracy}, {"miou", m.miou}, {"iou", iou}};
}

Json to_json(const CurvePoint& p) {
  return {{"threshold", p.threshold},
          {"mean_precision", p.mean_precision},
          {"mean_recall", p.mean_recall},
          {"precision", per_class(p.precision)},
          {"recall", per_class(p.recall)}};
}

Json to_json(const EvalReport& report) {
  Json curve = Json::array();
  for (const CurvePoint& p : report.curve) curve.push_back(to_json(p));
  return {{"schema_version", kEvalSchema},
          {"instances", to_json(report.instances)},
          {"classes", to_json(report.classes)},
          {"curve", curve}};
}

EvalReport eval_report_from_json(const Json& doc) {
  check_schema(doc, kEvalSchema);
  EvalReport r;
  try {
    const Json& inst = doc.at("instances");
    r.instances.threshold = inst.at("threshold").get<double>();
    r.instances.mean_precision = inst.at("mean_precision").get<double>();
    r.instances.mean_recall = inst.at("mean_recall").get<double>();
    r.instances.precision_classes = inst.at("precision_classes").get<std::size_t>();
    r.instances.recall_classes = inst.at("recall_classes").get<std::size_t>();
    for (const auto& [name, v] : inst.at("per_class").items()) {
      ClassPR& pr = r.instances.per_class[static_cast<std::size_t>(class_key(name, "instances.per_class"))];
      pr.num_pred = v.at("num_pred").get<std::size_t>();
      pr.num_gt = v.at("num_gt").get<std::size_t>();
      pr.true_positives = v.at("true_positives").get<std::size_t>();
      pr.precision = v.at("precision").get<double>();
      pr.recall = v.at("recall").get<double>();
      pr.precision_defined = !v.at("precision_undefined").get<bool>();
      pr.recall_defined = !v.at("recall_undefined").get<bool>();
    }
    for (const Json& m : inst.at("matches")) {
      r.instances.matches.push_back({m.at("pred_id").get<InstanceId>(), m.at("gt_id").get<InstanceId>(),
                                     class_key(m.at("class").get<std::string>(), "matches"),
                                     m.at("iou").get<double>()});
    }
    const Json& cls = doc.at("classes");
    r.classes.accuracy = cls.at("accuracy").get<double>();
    r.classes.miou = cls.at("miou").get<double>();
    for (const auto& [name, v] : cls.at("iou").items()) {
      const auto k = static_cast<std::size_t>(class_key(name, "classes.iou"));
      r.classes.present[k] = !v.is_null();
      r.classes.iou[k] = v.is_null() ? 0.0 : v.get<double>();
    }
    for (const Json& p : doc.at("curve")) {
      CurvePoint cp;
      cp.threshold = p.at("threshold").get<double>();
      cp.mean_precision = p.at("mean_precision").get<double>();
      cp.mean_recall = p.at("mean_recall").get<double>();
      cp.precision = per_class_from<double>(p.at("precision"), "curve.precision");
      cp.recall = per_class_from<double>(p.at("recall"), "curve.recall");
      r.curve.push_back(cp);
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("eval report: ") + e.what());
  }
  return r;
}

Json to_json(const std::vector<MuSweepPoint>& sweep, double iou) {
  Json points = Json::array();
  for (const MuSweepPoint& p : sweep) {
    Json precision = Json::object(), recall = Json::object();
    for (ClassLabel c : kAllClasses) {
      const ClassPR& pr = p.match.per_class[static_cast<std::size_t>(c)];
      precision[std::string(class_name(c))] = pr.precision;
      recall[std::string(class_name(c))] = pr.recall;
    }
    points.push_back({{"mu", p.mu},
                      {"instances", p.instances},
                      {"mean_precision", p.match.mean_precision},
                      {"mean_recall", p.match.mean_recall},
                      {"precision", precision},
                      {"recall", recall}});
  }
  return {{"schema_version", kSweepSchema}, {"iou_threshold", iou}, {"points", points}};
}

Json to_json(const FacilityStats& stats) {
  Json classes = Json::object();
  for (ClassLabel c : kAllClasses) {
    const auto k = static_cast<std::size_t>(c);
    classes[std::string(class_name(c))] = {{"total", stats.total[k]}, {"recall", stats.recall[k]}};
  }
  Json out = {{"name", stats.name}, {"classes", classes}};
  if (stats.per_shape_minutes) out["per_shape_minutes"] = *stats.per_shape_minutes;
  if (stats.total_hours) out["total_hours"] = *stats.total_hours;
  return out;
}

FacilityStats facility_stats_from_json(const Json& doc) {
  const std::string where = "facility";
  reject_unknown_keys(doc, {"name", "classes", "per_shape_minutes", "total_hours", "note"}, where);
  FacilityStats s;
  s.name = get_as<std::string>(doc, "name", where);
  const Json& classes = require_key(doc, "classes", where);
  if (!classes.is_object()) throw Error(ErrorCode::ParseError, where + ": 'classes' must be an object");
  for (const auto& [name, v] : classes.items()) {
    const auto k = static_cast<std::size_t>(class_key(name, where));
    reject_unknown_keys(v, {"total", "recall"}, where + "." + name);
    const auto total = get_as<long long>(v, "total", where + "." + name);
    if (total < 0) throw Error(ErrorCode::InvalidCounts, where + "." + name + ": negative total");
    s.total[k] = static_cast<std::size_t>(total);
    s.recall[k] = get_as<double>(v, "recall", where + "." + name);
  }
  if (doc.contains("per_shape_minutes")) s.per_shape_minutes = get_as<double>(doc, "per_shape_minutes", where);
  if (doc.contains("total_hours")) s.total_hours = get_as<double>(doc, "total_hours", where);
  s.validate();
  return s;
}

std::vector<FacilityStats> stats_file_from_json(const Json& doc) {
  check_schema(doc, kStatsSchema);
  std::vector<FacilityStats> out;
  for (const Json& f : require_key(doc, "facilities", "stats")) out.push_back(facility_stats_from_json(f));
  if (out.empty()) throw Error(ErrorCode::EmptyFacility, "stats file lists no facilities");
  return out;
}

Json to_json(const FacilityCost& cost) {
  Json classes = Json::object();
  for (ClassLabel c : kAllClasses) {
    const auto k = static_cast<std::size_t>(c);
    classes[std::string(class_name(c))] = {{"total", cost.stats.total[k]},
                                           {"recall", cost.stats.recall[k]},
                                           {"manual", cost.manual[k]}};
  }
  return {{"name", cost.stats.name},
          {"classes", classes},
          {"total_shapes", cost.total_shapes},
          {"manual_shapes", cost.hours.manual_shapes},
          {"savings_fraction", cost.savings},
          {"hours", cost.hours.hours},
          {"minutes_per_shape", cost.hours.minutes_per_shape},
          {"rate_inferred", cost.hours.rate_inferred},
          {"person_months", person_months(cost.hours.hours)}};
}

Json cost_report_json(const std::vector<FacilityCost>& costs) {
  Json list = Json::array();
  for (const FacilityCost& c : costs) list.push_back(to_json(c));
  return {{"schema_version", kCostSchema}, {"facilities", list}};
}

std::vector<NamedCurve> annotation_curves_from_json(const Json& doc) {
  check_schema(doc, kCurveSchema);
  std::vector<NamedCurve> out;
  for (const Json& c : require_key(doc, "curves", "curves")) {
    reject_unknown_keys(c, {"name", "samples", "annotation_cost", "correction_cost", "points", "expected_optimum"},
                        "curve");
    NamedCurve nc;
    nc.name = get_as<std::string>(c, "name", "curve");
    nc.curve.annotation_cost = get_as<double>(c, "annotation_cost", nc.name);
    nc.curve.correction_cost = get_as<double>(c, "correction_cost", nc.name);
    nc.curve.points = get_as<double>(c, "points", nc.name);
    for (const Json& s : require_key(c, "samples", nc.name)) {
      if (!s.is_array() || s.size() != 2) throw Error(ErrorCode::ParseError, nc.name + ": samples are [x, accuracy]");
      nc.curve.samples.emplace_back(s[0].get<double>(), s[1].get<double>());
    }
    nc.curve.validate();
    out.push_back(std::move(nc));
  }
  return out;
}

namespace {

struct Field {
  const char* key;
  double* value;
};

std::vector<Field> shape_fields(ShapeParams& shape) {
  return std::visit(
      [](auto& s) -> std::vector<Field> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, CylinderShape>) {
          return {{"radius", &s.radius}, {"length", &s.length}};
        } else if constexpr (std::is_same_v<T, ElbowShape>) {
          return {{"pipe_radius", &s.pipe_radius}, {"bend_radius", &s.bend_radius}, {"angle", &s.angle}};
        } else if constexpr (std::is_same_v<T, ChannelShape> || std::is_same_v<T, IBeamShape>) {
          return {{"height", &s.height},
                  {"width", &s.width},
                  {"flange_thickness", &s.flange_thickness},
                  {"web_thickness", &s.web_thickness},
                  {"length", &s.length}};
        } else if constexpr (std::is_same_v<T, AngleShape>) {
          return {{"leg_a", &s.leg_a}, {"leg_b", &s.leg_b}, {"thickness", &s.thickness}, {"length", &s.length}};
        } else if constexpr (std::is_same_v<T, FlangeShape>) {
          return {{"inner_radius", &s.inner_radius}, {"outer_radius", &s.outer_radius}, {"thickness", &s.thickness}};
        } else if constexpr (std::is_same_v<T, ValveShape>) {
          return {{"pipe_radius", &s.pipe_radius},
                  {"body_radius", &s.body_radius},
                  {"length", &s.length},
                  {"flange_radius", &s.flange_radius},
                  {"flange_thickness", &s.flange_thickness}};
        } else {
          return {{"size_x", &s.size_x}, {"size_y", &s.size_y}, {"size_z", &s.size_z}};
        }
      },
      shape);
}

ShapeParams default_shape(ClassLabel c) {
  switch (c) {
    case ClassLabel::Cylinder: return CylinderShape{};
    case ClassLabel::Elbow: return ElbowShape{};
    case ClassLabel::Channel: return ChannelShape{};
    case ClassLabel::IBeam: return IBeamShape{};
    case ClassLabel::Angle: return AngleShape{};
    case ClassLabel::Flange: return FlangeShape{};
    case ClassLabel::Valve: return ValveShape{};
    case ClassLabel::Other: return BoxShape{};
  }
  return BoxShape{};
}

}  // namespace

Json to_json(const SceneSpec& spec) {
  Json objects = Json::array();
  for (const ObjectSpec& obj : spec.objects) {
    ShapeParams shape = obj.shape;
    Json size = Json::object();
    for (const Field& f : shape_fields(shape)) size[f.key] = *f.value;
    objects.push_back({{"class", class_name(shape_class(obj.shape))},
                       {"size", size},
                       {"density", obj.density},
                       {"pose",
                        {{"translation", point_json(obj.pose.translation)},
                         {"yaw", obj.pose.yaw},
                         {"pitch", obj.pose.pitch},
                         {"roll", obj.pose.roll}}}});
  }
  Json cuts = Json::array();
  for (const HalfSpaceCut& c : spec.cuts) cuts.push_back({{"normal", point_json(c.normal)}, {"offset", c.offset}});
  return {{"schema_version", kSceneSchema}, {"seed", spec.seed},
          {"objects", objects},             {"noise_sigma", spec.noise_sigma},
          {"cuts", cuts},                   {"drop_fraction", spec.drop_fraction},
          {"clutter_points", spec.clutter_points}, {"clutter_blobs", spec.clutter_blobs},
          {"clutter_sigma", spec.clutter_sigma},   {"boundary_radius", spec.boundary_radius}};
}

SceneSpec scene_spec_from_json(const Json& doc) {
  check_schema(doc, kSceneSchema);
  reject_unknown_keys(doc,
                      {"schema_version", "seed", "objects", "noise_sigma", "cuts", "drop_fraction", "clutter_points",
                       "clutter_blobs", "clutter_sigma", "boundary_radius"},
                      "scene");
  SceneSpec spec;
  try {
    spec.seed = doc.value("seed", std::uint64_t{0});
    spec.noise_sigma = doc.value("noise_sigma", 0.0);
    spec.drop_fraction = doc.value("drop_fraction", 0.0);
    spec.clutter_points = doc.value("clutter_points", std::size_t{0});
    spec.clutter_blobs = doc.value("clutter_blobs", std::size_t{0});
    spec.clutter_sigma = doc.value("clutter_sigma", 0.05);
    spec.boundary_radius = doc.value("boundary_radius", 0.04);
    if (doc.contains("cuts")) {
      for (const Json& c : doc.at("cuts")) {
        reject_unknown_keys(c, {"normal", "offset"}, "cut");
        spec.cuts.push_back({point_from(require_key(c, "normal", "cut"), "cut.normal"), get_as<double>(c, "offset", "cut")});
      }
    }
    for (const Json& o : require_key(doc, "objects", "scene")) {
      reject_unknown_keys(o, {"class", "size", "density", "pose"}, "object");
      ObjectSpec obj;
      obj.shape = default_shape(class_key(get_as<std::string>(o, "class", "object"), "object"));
      if (o.contains("size")) {
        const Json& size = o.at("size");
        std::vector<std::string> allowed;
        for (const Field& f : shape_fields(obj.shape)) {
          allowed.emplace_back(f.key);
          if (size.contains(f.key)) *f.value = size.at(f.key).get<double>();
        }
        reject_unknown_keys(size, allowed, "object.size");
      }
      obj.density = o.value("density", obj.density);
      if (o.contains("pose")) {
        const Json& p = o.at("pose");
        reject_unknown_keys(p, {"translation", "yaw", "pitch", "roll"}, "object.pose");
        if (p.contains("translation")) obj.pose.translation = point_from(p.at("translation"), "pose.translation");
        obj.pose.yaw = p.value("yaw", 0.0);
        obj.pose.pitch = p.value("pitch", 0.0);
        obj.pose.roll = p.value("roll", 0.0);
      }
      spec.objects.push_back(std::move(obj));
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("scene spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

}  // namespace twinseg
