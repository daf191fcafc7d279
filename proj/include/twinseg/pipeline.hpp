#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "twinseg/class_segmenter.hpp"
#include "twinseg/evaluator.hpp"
#include "twinseg/instance_segmenter.hpp"
#include "twinseg/partition.hpp"
#include "twinseg/report.hpp"

namespace twinseg {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kManifestSchema = "twinseg.manifest.v1";

enum class ClassifyMode { Passthrough, Noise, Knn };

struct ClassifyConfig {
  ClassifyMode mode = ClassifyMode::Passthrough;
  double noise_diagonal = 0.8;
  std::optional<std::array<std::array<double, kNumClasses>, kNumClasses>> noise_matrix;
  std::size_t k = 5;
  double feature_radius = 0.1;
  std::filesystem::path training;  ///< labeled cloud for knn mode
  std::size_t training_cap = 2000;
  std::size_t refine_iters = 0;
  double confidence_threshold = 0.8;
  double refine_radius = 0.04;

  [[nodiscard]] NoiseSpec noise(std::uint64_t seed) const;
  [[nodiscard]] RefineParams refine() const;
};

struct PipelineConfig {
  std::filesystem::path input;
  std::optional<std::filesystem::path> ground_truth;
  std::filesystem::path run_dir = "run";
  unsigned threads = 0;  ///< 0: default parallelism
  std::uint64_t seed = 0;
  PartitionParams partition;
  ClassifyConfig classify;
  BfsParams segment;
  EvalParams evaluate;

  [[nodiscard]] unsigned workers() const;
};

/// Parses and validates a config document; unknown keys and out-of-range
/// values raise InvalidConfig.
[[nodiscard]] PipelineConfig config_from_json(const Json& doc);
[[nodiscard]] Json to_json(const PipelineConfig& config);

[[nodiscard]] ClassifyMode classify_mode_from_name(const std::string& name);
[[nodiscard]] const char* classify_mode_name(ClassifyMode mode);

/// Reads "segment" settings; `doc` may be partial.
[[nodiscard]] BfsParams bfs_params_from_json(const Json& doc);
[[nodiscard]] Json to_json(const BfsParams& params);

/// Class labels for `cloud` according to `config`. Passthrough and noise
/// modes need `gt`; knn mode reads its training cloud from disk.
[[nodiscard]] Labeling run_classification(const PointCloud& cloud, const Labeling* gt, const ClassifyConfig& config,
                                          std::uint64_t seed, unsigned threads);

/// Whole-cloud predicted-class boundary flags written into `labeling`.
void mark_boundaries(const PointCloud& cloud, Labeling& labeling, double radius, unsigned threads);

struct StageTiming {
  std::string name;
  double seconds = 0.0;
};

struct PipelineResult {
  Labeling classified;
  InstanceResult segmented;
  std::optional<EvalReport> evaluation;
  std::vector<StageTiming> timings;
  Json manifest;
};

/// load -> partition -> classify -> boundaries -> segment -> evaluate, writing
/// classified.xyz, segmented.xyz, eval.json (when ground truth exists) and
/// manifest.json to the run directory. Stage failures are rethrown with the
/// stage name prefixed to the message.
PipelineResult run_pipeline(const PipelineConfig& config);

/// 64-bit FNV-1a, printed as 16 hex digits.
[[nodiscard]] std::string fnv1a_hex(std::string_view bytes);

}  // namespace twinseg
