#include "twinseg/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "twinseg/error.hpp"
#include "twinseg/io.hpp"
#include "twinseg/parallel.hpp"

namespace twinseg {

namespace {

const std::vector<std::string> kTopKeys = {"input",     "ground_truth", "run_dir",  "threads", "seed",
                                           "partition", "classify",     "segment",  "evaluate"};
const std::vector<std::string> kPartitionKeys = {"window_size", "block_size", "block_stride"};
const std::vector<std::string> kClassifyKeys = {"mode",         "noise_diagonal", "noise_matrix",
                                                "k",            "feature_radius", "training",
                                                "training_cap", "refine_iters",   "confidence_threshold",
                                                "refine_radius"};
const std::vector<std::string> kSegmentKeys = {"preset",       "epsilon",     "mu",
                                               "cylinder_epsilon", "cylinder_mu", "boundary_constraint",
                                               "boundary_radius"};
const std::vector<std::string> kEvaluateKeys = {"iou", "sweep"};

template <typename T>
T config_value(const Json& obj, const std::string& key, const T& fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const Json::exception&) {
    throw Error(ErrorCode::InvalidConfig, where + "." + key + " has the wrong type");
  }
}

void check_keys(const Json& obj, const std::vector<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorCode::InvalidConfig, where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw Error(ErrorCode::InvalidConfig, "unknown key '" + where + "." + key + "'");
    }
  }
}

/// Re-tags any library error with the failing stage.
template <typename Fn>
auto stage(const char* name, std::vector<StageTiming>& timings, Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  auto record = [&] {
    timings.push_back({name, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()});
  };
  try {
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      record();
    } else {
      auto out = fn();
      record();
      return out;
    }
  } catch (const Error& e) {
    throw Error(e.code(), "stage '" + std::string(name) + "': " + e.message());
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, "stage '" + std::string(name) + "': " + e.what());
  }
}

std::string file_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return fnv1a_hex(ss.str());
}

}  // namespace

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ClassifyMode classify_mode_from_name(const std::string& name) {
  if (name == "passthrough") return ClassifyMode::Passthrough;
  if (name == "noise") return ClassifyMode::Noise;
  if (name == "knn") return ClassifyMode::Knn;
  throw Error(ErrorCode::InvalidConfig, "classify mode must be passthrough, noise or knn (got '" + name + "')");
}

const char* classify_mode_name(ClassifyMode mode) {
  switch (mode) {
    case ClassifyMode::Passthrough: return "passthrough";
    case ClassifyMode::Noise: return "noise";
    case ClassifyMode::Knn: return "knn";
  }
  return "passthrough";
}

NoiseSpec ClassifyConfig::noise(std::uint64_t seed) const {
  NoiseSpec spec = noise_matrix ? NoiseSpec{*noise_matrix, seed} : NoiseSpec::uniform(noise_diagonal, seed);
  spec.validate();
  return spec;
}

RefineParams ClassifyConfig::refine() const {
  return RefineParams{refine_radius, refine_iters, confidence_threshold};
}

unsigned PipelineConfig::workers() const { return threads > 0 ? threads : default_parallelism(); }

BfsParams bfs_params_from_json(const Json& doc) {
  check_keys(doc, kSegmentKeys, "segment");
  const auto preset = config_value<std::string>(doc, "preset", "default", "segment");
  BfsParams p;
  if (preset == "gt") {
    p = BfsParams::gt_preset();
  } else if (preset != "default") {
    throw Error(ErrorCode::InvalidConfig, "segment.preset must be 'default' or 'gt'");
  }
  p.epsilon = config_value(doc, "epsilon", p.epsilon, "segment");
  p.mu_min_points = config_value(doc, "mu", p.mu_min_points, "segment");
  if (doc.contains("cylinder_epsilon") || doc.contains("cylinder_mu")) {
    ClassParams cyl = p.for_class(ClassLabel::Cylinder);
    cyl.epsilon = config_value(doc, "cylinder_epsilon", cyl.epsilon, "segment");
    cyl.mu = config_value(doc, "cylinder_mu", cyl.mu, "segment");
    p.per_class_overrides[ClassLabel::Cylinder] = cyl;
  }
  p.boundary_constraint = config_value(doc, "boundary_constraint", p.boundary_constraint, "segment");
  p.boundary_radius = config_value(doc, "boundary_radius", p.boundary_radius, "segment");
  try {
    p.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidConfig, "segment: " + e.message());
  }
  return p;
}

Json to_json(const BfsParams& p) {
  Json overrides = Json::object();
  for (const auto& [cls, cp] : p.per_class_overrides) {
    overrides[std::string(class_name(cls))] = {{"epsilon", cp.epsilon}, {"mu", cp.mu}};
  }
  return {{"epsilon", p.epsilon},
          {"mu", p.mu_min_points},
          {"overrides", overrides},
          {"boundary_constraint", p.boundary_constraint},
          {"boundary_radius", p.boundary_radius}};
}

PipelineConfig config_from_json(const Json& doc) {
  check_keys(doc, kTopKeys, "config");
  PipelineConfig cfg;
  if (!doc.contains("input")) throw Error(ErrorCode::InvalidConfig, "config.input is required");
  cfg.input = config_value<std::string>(doc, "input", "", "config");
  if (doc.contains("ground_truth")) cfg.ground_truth = config_value<std::string>(doc, "ground_truth", "", "config");
  cfg.run_dir = config_value<std::string>(doc, "run_dir", cfg.run_dir.string(), "config");
  const auto threads = config_value<long long>(doc, "threads", 0, "config");
  if (threads < 0) throw Error(ErrorCode::InvalidConfig, "config.threads must be >= 0");
  cfg.threads = static_cast<unsigned>(threads);
  cfg.seed = config_value<std::uint64_t>(doc, "seed", 0, "config");

  if (doc.contains("partition")) {
    const Json& p = doc.at("partition");
    check_keys(p, kPartitionKeys, "partition");
    cfg.partition.window_size = config_value(p, "window_size", cfg.partition.window_size, "partition");
    cfg.partition.block_size = config_value(p, "block_size", cfg.partition.block_size, "partition");
    cfg.partition.block_stride = config_value(p, "block_stride", cfg.partition.block_stride, "partition");
  }
  if (doc.contains("classify")) {
    const Json& c = doc.at("classify");
    check_keys(c, kClassifyKeys, "classify");
    ClassifyConfig& k = cfg.classify;
    k.mode = classify_mode_from_name(config_value<std::string>(c, "mode", "passthrough", "classify"));
    k.noise_diagonal = config_value(c, "noise_diagonal", k.noise_diagonal, "classify");
    if (c.contains("noise_matrix")) {
      k.noise_matrix = config_value(c, "noise_matrix", std::array<std::array<double, kNumClasses>, kNumClasses>{},
                                    "classify");
    }
    k.k = config_value(c, "k", k.k, "classify");
    k.feature_radius = config_value(c, "feature_radius", k.feature_radius, "classify");
    k.training = config_value<std::string>(c, "training", k.training.string(), "classify");
    k.training_cap = config_value(c, "training_cap", k.training_cap, "classify");
    k.refine_iters = config_value(c, "refine_iters", k.refine_iters, "classify");
    k.confidence_threshold = config_value(c, "confidence_threshold", k.confidence_threshold, "classify");
    k.refine_radius = config_value(c, "refine_radius", k.refine_radius, "classify");
  }
  if (doc.contains("segment")) cfg.segment = bfs_params_from_json(doc.at("segment"));
  if (doc.contains("evaluate")) {
    const Json& e = doc.at("evaluate");
    check_keys(e, kEvaluateKeys, "evaluate");
    cfg.evaluate.iou_threshold = config_value(e, "iou", cfg.evaluate.iou_threshold, "evaluate");
    if (e.contains("sweep")) {
      const Json& s = e.at("sweep");
      try {
        cfg.evaluate.threshold_sweep = s.is_string() ? parse_sweep(s.get<std::string>()) : s.get<std::vector<double>>();
      } catch (const Json::exception&) {
        throw Error(ErrorCode::InvalidConfig, "evaluate.sweep must be 'start:stop:step' or a list");
      }
    }
  }

  // Everything is validated before any stage runs.
  try {
    cfg.partition.validate();
    cfg.evaluate.validate();
    if (cfg.classify.mode == ClassifyMode::Noise) (void)cfg.classify.noise(cfg.seed);
    if (cfg.classify.mode == ClassifyMode::Knn) {
      if (cfg.classify.training.empty()) throw Error(ErrorCode::InvalidConfig, "knn mode needs classify.training");
      if (cfg.classify.k < 1 || !(cfg.classify.feature_radius > 0.0) || cfg.classify.training_cap < 1) {
        throw Error(ErrorCode::InvalidConfig, "knn needs k >= 1, feature_radius > 0 and training_cap >= 1");
      }
    }
    if (cfg.classify.refine_iters > 0 && !(cfg.classify.refine_radius > 0.0)) {
      throw Error(ErrorCode::InvalidConfig, "refine_radius must be > 0");
    }
    if (!(cfg.classify.confidence_threshold >= 0.0 && cfg.classify.confidence_threshold <= 1.0)) {
      throw Error(ErrorCode::InvalidConfig, "confidence_threshold must lie in [0, 1]");
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidConfig) throw;
    throw Error(ErrorCode::InvalidConfig, e.message());
  }
  return cfg;
}

Json to_json(const PipelineConfig& cfg) {
  Json classify = {{"mode", classify_mode_name(cfg.classify.mode)},
                   {"noise_diagonal", cfg.classify.noise_diagonal},
                   {"k", cfg.classify.k},
                   {"feature_radius", cfg.classify.feature_radius},
                   {"training", cfg.classify.training.string()},
                   {"training_cap", cfg.classify.training_cap},
                   {"refine_iters", cfg.classify.refine_iters},
                   {"confidence_threshold", cfg.classify.confidence_threshold},
                   {"refine_radius", cfg.classify.refine_radius}};
  if (cfg.classify.noise_matrix) classify["noise_matrix"] = *cfg.classify.noise_matrix;
  Json segment = {{"epsilon", cfg.segment.epsilon},
                  {"mu", cfg.segment.mu_min_points},
                  {"boundary_constraint", cfg.segment.boundary_constraint},
                  {"boundary_radius", cfg.segment.boundary_radius},
                  {"cylinder_epsilon", cfg.segment.for_class(ClassLabel::Cylinder).epsilon},
                  {"cylinder_mu", cfg.segment.for_class(ClassLabel::Cylinder).mu}};
  Json out = {{"input", cfg.input.string()},
              {"run_dir", cfg.run_dir.string()},
              {"threads", cfg.threads},
              {"seed", cfg.seed},
              {"partition",
               {{"window_size", cfg.partition.window_size},
                {"block_size", cfg.partition.block_size},
                {"block_stride", cfg.partition.block_stride}}},
              {"classify", classify},
              {"segment", segment},
              {"evaluate", {{"iou", cfg.evaluate.iou_threshold}, {"sweep", cfg.evaluate.threshold_sweep}}}};
  if (cfg.ground_truth) out["ground_truth"] = cfg.ground_truth->string();
  return out;
}

Labeling run_classification(const PointCloud& cloud, const Labeling* gt, const ClassifyConfig& config,
                            std::uint64_t seed, unsigned threads) {
  Labeling out;
  switch (config.mode) {
    case ClassifyMode::Passthrough:
    case ClassifyMode::Noise:
      if (gt == nullptr || gt->size() != cloud.size()) {
        throw Error(ErrorCode::MissingLabels, std::string(classify_mode_name(config.mode)) +
                                                  " classification needs ground-truth labels for every point");
      }
      out = config.mode == ClassifyMode::Passthrough ? classify_passthrough(*gt)
                                                     : inject_label_noise(*gt, config.noise(seed));
      break;
    case ClassifyMode::Knn: {
      const io::LabeledCloud train = io::read_cloud(config.training, true);
      const auto samples =
          make_training_set(train.cloud, *train.labeling, config.feature_radius, config.training_cap, threads);
      const SpatialIndex index(cloud);
      out = classify_knn(extract_all_features(index, config.feature_radius, threads), samples, config.k, threads);
      break;
    }
  }
  if (config.refine_iters > 0 && !cloud.empty()) {
    const SpatialIndex index(cloud);
    out = refine_context(out, index, config.refine(), threads);
  }
  return out;
}

void mark_boundaries(const PointCloud& cloud, Labeling& labeling, double radius, unsigned threads) {
  if (cloud.empty()) {
    labeling.boundary.clear();
    return;
  }
  const SpatialIndex index(cloud);
  labeling.boundary = detect_boundaries(index, labeling, radius, BoundaryMode::PredictedClass, threads);
}

PipelineResult run_pipeline(const PipelineConfig& config) {
  PipelineResult res;
  const unsigned workers = config.workers();
  auto& t = res.timings;

  const io::LabeledCloud input = stage("load", t, [&] {
    if (!std::filesystem::exists(config.input)) {
      throw Error(ErrorCode::IoError, "input '" + config.input.string() + "' does not exist");
    }
    return io::read_cloud(config.input);
  });
  std::optional<Labeling> gt = input.labeling;
  if (config.ground_truth) {
    gt = stage("load_ground_truth", t, [&] {
      io::LabeledCloud g = io::read_cloud(*config.ground_truth, true);
      if (g.cloud.size() != input.cloud.size()) {
        throw Error(ErrorCode::MissingLabels, "ground truth '" + config.ground_truth->string() +
                                                  "' has a different point count than the input");
      }
      return g.labeling;
    });
  }

  const BlockGrid grid = stage("partition", t, [&] { return partition(input.cloud, config.partition); });
  res.classified = stage("classify", t, [&] {
    return run_classification(input.cloud, gt ? &*gt : nullptr, config.classify, config.seed, workers);
  });
  stage("boundaries", t, [&] {
    if (config.segment.boundary_constraint) {
      mark_boundaries(input.cloud, res.classified, config.segment.boundary_radius, workers);
    } else {
      res.classified.boundary.assign(input.cloud.size(), 0);
    }
  });
  res.segmented = stage("segment", t, [&] {
    return segment_instances(input.cloud, res.classified, config.segment, grid, workers);
  });
  if (gt) {
    res.evaluation = stage("evaluate", t, [&] { return evaluate(res.segmented.labeling, *gt, config.evaluate); });
  }

  Json outputs = Json::object();
  stage("write", t, [&] {
    std::error_code ec;
    std::filesystem::create_directories(config.run_dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create run directory '" + config.run_dir.string() + "'");
    const io::Columns cols{input.cloud.has_intensity(), true, true, true};
    const auto classified = config.run_dir / "classified.xyz";
    const auto segmented = config.run_dir / "segmented.xyz";
    io::write_labeled(classified, input.cloud, &res.classified, io::Format::Xyz, cols);
    io::write_labeled(segmented, input.cloud, &res.segmented.labeling, io::Format::Xyz, cols);
    outputs["classified.xyz"] = file_hash(classified);
    outputs["segmented.xyz"] = file_hash(segmented);
    if (res.evaluation) {
      const auto eval = config.run_dir / "eval.json";
      write_json(eval, to_json(*res.evaluation));
      outputs["eval.json"] = file_hash(eval);
    }
  });

  Json timings = Json::array();
  for (const StageTiming& s : t) timings.push_back({{"stage", s.name}, {"seconds", s.seconds}});
  const Json cfg = to_json(config);
  res.manifest = {{"schema_version", kManifestSchema},
                  {"version", kVersion},
                  {"config", cfg},
                  {"config_hash", fnv1a_hex(cfg.dump())},
                  {"workers", workers},
                  {"points", input.cloud.size()},
                  {"instances", res.segmented.component_count},
                  {"discarded_points", res.segmented.discarded},
                  {"timings", timings},
                  {"outputs", outputs}};
  write_json(config.run_dir / "manifest.json", res.manifest);
  return res;
}

}  // namespace twinseg
