#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "twinseg/class_segmenter.hpp"
#include "twinseg/cost_model.hpp"
#include "twinseg/error.hpp"
#include "twinseg/evaluator.hpp"
#include "twinseg/instance_segmenter.hpp"
#include "twinseg/io.hpp"
#include "twinseg/parallel.hpp"
#include "twinseg/partition.hpp"
#include "twinseg/pipeline.hpp"
#include "twinseg/report.hpp"
#include "twinseg/synth.hpp"

namespace fs = std::filesystem;
using namespace twinseg;

namespace {

void write_cloud(const fs::path& path, const PointCloud& cloud, const Labeling& labels) {
  io::write_labeled(path, cloud, &labels, io::format_for(path), io::Columns{false, true, true, true});
}

void emit(const Json& doc, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << dump_stable(doc);
  } else {
    write_json(out, doc);
  }
}

std::array<std::array<double, kNumClasses>, kNumClasses> read_matrix(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open noise matrix '" + path.string() + "'");
  std::stringstream raw;
  raw << in.rdbuf();
  std::string text = raw.str();
  for (char& c : text) {
    if (c == '[' || c == ']' || c == ',') c = ' ';
  }
  std::istringstream ss(text);
  std::array<std::array<double, kNumClasses>, kNumClasses> m{};
  for (auto& row : m) {
    for (double& v : row) {
      if (!(ss >> v)) throw Error(ErrorCode::InvalidNoiseSpec, path.string() + ": expected 64 numbers");
    }
  }
  std::string extra;
  if (ss >> extra) throw Error(ErrorCode::InvalidNoiseSpec, path.string() + ": more than 64 numbers");
  return m;
}

struct PartitionFlags {
  PartitionParams params;
  void add(CLI::App* app) {
    app->add_option("--window-size", params.window_size, "Window edge length (m)")->capture_default_str();
    app->add_option("--block-size", params.block_size, "Block edge length (m)")->capture_default_str();
    app->add_option("--block-stride", params.block_stride, "Block stride (m)")->capture_default_str();
  }
};

struct SegmentFlags {
  std::string preset = "default";
  std::optional<double> epsilon, cylinder_epsilon, boundary_radius;
  std::optional<std::size_t> mu, cylinder_mu;
  bool no_boundary = false;

  void add(CLI::App* app) {
    app->add_option("--preset", preset, "default or gt")->check(CLI::IsMember({"default", "gt"}));
    app->add_option("--epsilon", epsilon, "Neighborhood radius (m), default 0.04");
    app->add_option("--mu", mu, "Minimum instance size, default 200");
    app->add_option("--cylinder-epsilon", cylinder_epsilon, "Cylinder radius override, default 0.03");
    app->add_option("--cylinder-mu", cylinder_mu, "Cylinder size override, default 50");
    app->add_flag("--no-boundary-constraint", no_boundary, "Traverse boundary points too");
    app->add_option("--boundary-radius", boundary_radius, "Boundary census radius (m), default 0.04");
  }

  BfsParams params() const {
    Json doc = {{"preset", preset}};
    if (epsilon) doc["epsilon"] = *epsilon;
    if (mu) doc["mu"] = *mu;
    if (cylinder_epsilon) doc["cylinder_epsilon"] = *cylinder_epsilon;
    if (cylinder_mu) doc["cylinder_mu"] = *cylinder_mu;
    if (boundary_radius) doc["boundary_radius"] = *boundary_radius;
    doc["boundary_constraint"] = !no_boundary;
    return bfs_params_from_json(doc);
  }
};

std::vector<std::size_t> parse_mu_list(const std::string& spec) {
  std::vector<std::size_t> out;
  if (spec.find(':') != std::string::npos) {
    for (double v : parse_sweep(spec)) out.push_back(static_cast<std::size_t>(std::llround(v)));
    return out;
  }
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      const long long v = std::stoll(tok);
      if (v < 1) throw std::invalid_argument(tok);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidSweep, "bad mu value '" + tok + "'");
    }
  }
  return out;
}

Labeling require_labels(const io::LabeledCloud& data, const std::string& what) {
  if (!data.labeling) throw Error(ErrorCode::MissingLabels, what + " carries no labels");
  return *data.labeling;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Point-cloud class/instance segmentation toolkit"};
  app.require_subcommand(1);
  unsigned threads = default_parallelism();
  app.add_option("--threads", threads, "Worker threads (env TWINSEG_THREADS)")->capture_default_str();

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a labeled synthetic scene");
  std::string spec_path, synth_out, spec_out;
  std::optional<std::uint64_t> random_seed;
  RandomSceneParams random_params;
  synth->add_option("--spec", spec_path, "Scene spec (JSON)");
  synth->add_option("--random", random_seed, "Random separated scene with this seed");
  synth->add_option("--objects", random_params.objects, "Objects in a random scene")->capture_default_str();
  synth->add_option("--density", random_params.density, "Points per m^2 in a random scene")->capture_default_str();
  synth->add_option("--noise", random_params.noise_sigma, "Gaussian noise sigma (m) in a random scene");
  synth->add_option("--clutter", random_params.clutter_points, "Clutter points in a random scene");
  synth->add_flag("--zipf", random_params.zipf, "Zipf-like class frequencies in a random scene");
  synth->add_option("--out", synth_out, "Output cloud (.xyz or .pcd)")->required();
  synth->add_option("--spec-out", spec_out, "Write the effective spec here");

  // partition
  auto* part = app.add_subcommand("partition", "Summarize windows and blocks");
  std::string part_in, part_out;
  PartitionFlags part_flags;
  part->add_option("--in", part_in, "Input cloud")->required();
  part->add_option("--out", part_out, "Summary JSON (default stdout)");
  part_flags.add(part);

  // classify
  auto* cls = app.add_subcommand("classify", "Assign class labels");
  std::string cls_in, cls_gt, cls_out, cls_mode = "passthrough", cls_matrix, cls_training;
  ClassifyConfig cls_cfg;
  std::uint64_t seed = 0;
  cls->add_option("--in", cls_in, "Input cloud")->required();
  cls->add_option("--gt", cls_gt, "Ground-truth labels (default: labels in --in)");
  cls->add_option("--mode", cls_mode, "passthrough, noise or knn")
      ->check(CLI::IsMember({"passthrough", "noise", "knn"}))
      ->capture_default_str();
  cls->add_option("--noise-diagonal", cls_cfg.noise_diagonal, "Uniform confusion diagonal")->capture_default_str();
  cls->add_option("--noise-matrix", cls_matrix, "8x8 confusion matrix file");
  cls->add_option("--k", cls_cfg.k, "Neighbors for knn")->capture_default_str();
  cls->add_option("--feature-radius", cls_cfg.feature_radius, "Feature radius (m)")->capture_default_str();
  cls->add_option("--training", cls_training, "Labeled training cloud for knn");
  cls->add_option("--training-cap", cls_cfg.training_cap, "Training samples per class")->capture_default_str();
  cls->add_option("--refine-iters", cls_cfg.refine_iters, "Contextual refinement passes")->capture_default_str();
  cls->add_option("--confidence-threshold", cls_cfg.confidence_threshold, "Refine points below this confidence")
      ->capture_default_str();
  cls->add_option("--refine-radius", cls_cfg.refine_radius, "Refinement radius (m)")->capture_default_str();
  cls->add_option("--seed", seed, "Noise seed")->capture_default_str();
  cls->add_option("--out", cls_out, "Output cloud")->required();

  // boundaries
  auto* bnd = app.add_subcommand("boundaries", "Flag class or instance boundary points");
  std::string bnd_in, bnd_out, bnd_mode = "predicted";
  double bnd_radius = 0.04;
  bnd->add_option("--in", bnd_in, "Labeled cloud")->required();
  bnd->add_option("--radius", bnd_radius, "Census radius (m)")->capture_default_str();
  bnd->add_option("--mode", bnd_mode, "predicted (classes) or gt (instances)")
      ->check(CLI::IsMember({"predicted", "gt"}))
      ->capture_default_str();
  bnd->add_option("--out", bnd_out, "Output cloud")->required();

  // segment
  auto* seg = app.add_subcommand("segment", "Instance segmentation of a classified cloud");
  std::string seg_in, seg_out;
  bool seg_file_boundaries = false;
  SegmentFlags seg_flags;
  PartitionFlags seg_part;
  seg->add_option("--in", seg_in, "Classified cloud")->required();
  seg->add_option("--out", seg_out, "Output cloud")->required();
  seg->add_flag("--use-file-boundaries", seg_file_boundaries, "Use boundary flags from the input file");
  seg_flags.add(seg);
  seg_part.add(seg);

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Score predictions against ground truth");
  std::string ev_gt, ev_pred, ev_sweep, ev_out;
  double ev_iou = 0.25;
  ev->add_option("--gt", ev_gt, "Ground-truth cloud")->required();
  ev->add_option("--pred", ev_pred, "Predicted cloud")->required();
  ev->add_option("--iou", ev_iou, "IoU threshold")->capture_default_str();
  ev->add_option("--sweep", ev_sweep, "Threshold sweep start:stop:step");
  ev->add_option("--out", ev_out, "Report JSON (default stdout)");

  // sweep-mu
  auto* sw = app.add_subcommand("sweep-mu", "Precision/recall against minimum instance size");
  std::string sw_in, sw_gt, sw_mu = "20,50,100,200,300,400,500", sw_out;
  double sw_iou = 0.5;
  SegmentFlags sw_flags;
  sw->add_option("--in", sw_in, "Classified cloud")->required();
  sw->add_option("--gt", sw_gt, "Ground-truth cloud")->required();
  sw->add_option("--mu-values", sw_mu, "Comma list or start:stop:step")->capture_default_str();
  sw->add_option("--iou", sw_iou, "IoU threshold")->capture_default_str();
  sw->add_option("--out", sw_out, "Report JSON (default stdout)");
  sw_flags.add(sw);

  // cost-report
  auto* cost = app.add_subcommand("cost-report", "Manual labor estimate from instance recalls");
  std::string cost_stats, cost_out;
  std::optional<double> rate_minutes, total_hours;
  cost->add_option("--stats", cost_stats, "Facility stats JSON")->required();
  auto* rate_opt = cost->add_option("--rate-minutes", rate_minutes, "Minutes per manually segmented shape");
  cost->add_option("--total-hours", total_hours, "Observed hours; infers the rate")->excludes(rate_opt);
  cost->add_option("--out", cost_out, "Report JSON (default stdout)");

  // run
  auto* run = app.add_subcommand("run", "Full pipeline from a config file");
  std::string run_config, run_dir;
  run->add_option("--config", run_config, "Pipeline config JSON")->required();
  run->add_option("--run-dir", run_dir, "Override the run directory");

  CLI11_PARSE(app, argc, argv);

  const char* stage_name = app.get_subcommands().front()->get_name().c_str();
  try {
    if (*synth) {
      SceneSpec spec;
      if (random_seed) {
        spec = random_separated_scene(*random_seed, random_params);
      } else if (!spec_path.empty()) {
        spec = scene_spec_from_json(read_json(spec_path));
      } else {
        throw Error(ErrorCode::InvalidParams, "synth needs --spec or --random");
      }
      const Scene scene = generate_scene(spec, threads);
      write_cloud(synth_out, scene.cloud, scene.labels);
      if (!spec_out.empty()) write_json(spec_out, to_json(spec));
      std::cerr << scene.cloud.size() << " points, " << spec.objects.size() << " objects\n";
    } else if (*part) {
      const io::LabeledCloud data = io::read_cloud(part_in);
      const BlockGrid grid = partition(data.cloud, part_flags.params);
      Json windows = Json::array();
      for (const Window& w : grid.windows) windows.push_back({{"window_id", w.window_id}, {"points", w.indices.size()}});
      Json blocks = Json::array();
      for (const Block& b : grid.blocks) {
        blocks.push_back({{"window_id", b.window_id}, {"block_id", b.block_id}, {"points", b.indices.size()}});
      }
      emit({{"schema_version", "twinseg.partition.v1"},
            {"window_size", grid.params.window_size},
            {"block_size", grid.params.block_size},
            {"block_stride", grid.params.block_stride},
            {"origin", {grid.origin.x, grid.origin.y, grid.origin.z}},
            {"windows", windows},
            {"blocks", blocks}},
           part_out);
    } else if (*cls) {
      const io::LabeledCloud data = io::read_cloud(cls_in);
      std::optional<Labeling> gt = data.labeling;
      if (!cls_gt.empty()) gt = require_labels(io::read_cloud(cls_gt, true), cls_gt);
      cls_cfg.mode = classify_mode_from_name(cls_mode);
      cls_cfg.training = cls_training;
      if (!cls_matrix.empty()) cls_cfg.noise_matrix = read_matrix(cls_matrix);
      const Labeling out = run_classification(data.cloud, gt ? &*gt : nullptr, cls_cfg, seed, threads);
      write_cloud(cls_out, data.cloud, out);
    } else if (*bnd) {
      const io::LabeledCloud data = io::read_cloud(bnd_in, true);
      Labeling labels = *data.labeling;
      const SpatialIndex index(data.cloud);
      labels.boundary = detect_boundaries(index, labels, bnd_radius,
                                          bnd_mode == "gt" ? BoundaryMode::GtInstance : BoundaryMode::PredictedClass,
                                          threads);
      write_cloud(bnd_out, data.cloud, labels);
    } else if (*seg) {
      const io::LabeledCloud data = io::read_cloud(seg_in, true);
      Labeling labels = *data.labeling;
      const BfsParams params = seg_flags.params();
      if (params.boundary_constraint && !seg_file_boundaries) {
        mark_boundaries(data.cloud, labels, params.boundary_radius, threads);
      }
      const BlockGrid grid = partition(data.cloud, seg_part.params);
      const InstanceResult res = segment_instances(data.cloud, labels, params, grid, threads);
      write_cloud(seg_out, data.cloud, res.labeling);
      std::cerr << res.component_count << " instances, " << res.discarded << " points below mu\n";
    } else if (*ev) {
      const Labeling gt = require_labels(io::read_cloud(ev_gt, true), ev_gt);
      const Labeling pred = require_labels(io::read_cloud(ev_pred, true), ev_pred);
      EvalParams params;
      params.iou_threshold = ev_iou;
      if (!ev_sweep.empty()) params.threshold_sweep = parse_sweep(ev_sweep);
      emit(to_json(evaluate(pred, gt, params)), ev_out);
    } else if (*sw) {
      const io::LabeledCloud data = io::read_cloud(sw_in, true);
      Labeling labels = *data.labeling;
      const Labeling gt = require_labels(io::read_cloud(sw_gt, true), sw_gt);
      const BfsParams params = sw_flags.params();
      if (params.boundary_constraint) mark_boundaries(data.cloud, labels, params.boundary_radius, threads);
      const auto mus = parse_mu_list(sw_mu);
      emit(to_json(sweep_mu(data.cloud, labels, params, mus, gt, sw_iou), sw_iou), sw_out);
    } else if (*cost) {
      std::vector<FacilityCost> costs;
      for (FacilityStats stats : stats_file_from_json(read_json(cost_stats))) {
        if (rate_minutes) {
          stats.per_shape_minutes = *rate_minutes;
          stats.total_hours.reset();
        } else if (total_hours) {
          stats.total_hours = *total_hours;
          stats.per_shape_minutes.reset();
        }
        costs.push_back(facility_cost(stats));
      }
      emit(cost_report_json(costs), cost_out);
    } else if (*run) {
      PipelineConfig cfg = config_from_json(read_json(run_config));
      if (!run_dir.empty()) cfg.run_dir = run_dir;
      if (app.get_option("--threads")->count() > 0) cfg.threads = threads;
      const PipelineResult res = run_pipeline(cfg);
      std::cerr << "run directory: " << cfg.run_dir.string() << " (" << res.segmented.component_count
                << " instances)\n";
    }
  } catch (const Error& e) {
    std::cerr << "twinseg " << stage_name << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "twinseg " << stage_name << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}
