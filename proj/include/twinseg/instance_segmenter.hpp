#pragma once

#include <map>
#include <span>
#include <vector>

#include "twinseg/evaluator.hpp"
#include "twinseg/geometry.hpp"
#include "twinseg/labels.hpp"
#include "twinseg/partition.hpp"
#include "twinseg/spatial_index.hpp"

namespace twinseg {

struct ClassParams {
  double epsilon = 0.04;
  std::size_t mu = 200;
};

struct BfsParams {
  double epsilon = 0.04;
  std::size_t mu_min_points = 200;
  std::map<ClassLabel, ClassParams> per_class_overrides{{ClassLabel::Cylinder, {0.03, 50}}};
  bool boundary_constraint = true;
  double boundary_radius = 0.04;

  [[nodiscard]] ClassParams for_class(ClassLabel c) const;
  /// Largest effective epsilon over all classes.
  [[nodiscard]] double max_epsilon() const;
  /// Throws InvalidParams for epsilon <= 0 or mu < 1 in any effective class.
  void validate() const;

  /// Settings for segmenting ground-truth class labels: eps 0.04, mu 20, no overrides.
  [[nodiscard]] static BfsParams gt_preset();
};

enum class BoundaryMode { GtInstance, PredictedClass };

/// Flags points whose radius-`r` neighborhood (self included) holds two or
/// more distinct instance ids > 0 (GtInstance) or class labels (PredictedClass).
/// The index must cover the whole cloud. Throws MissingLabels when the
/// needed labels do not match the cloud size.
[[nodiscard]] std::vector<std::uint8_t> detect_boundaries(const SpatialIndex& index, const Labeling& labeling,
                                                          double r, BoundaryMode mode, unsigned threads = 1);

struct InstanceResult {
  Labeling labeling;
  std::size_t discarded = 0;        ///< points in components below mu
  std::size_t component_count = 0;  ///< instances kept
};

/// Connected components of one block before attachment and size filtering.
struct BlockComponents {
  std::vector<PointIndex> indices;    ///< traversed global indices, ascending
  std::vector<std::uint32_t> component;  ///< local component per entry of `indices`
  std::vector<ClassLabel> classes;    ///< class per local component
  std::size_t component_count = 0;
};

/// Same-class epsilon-connectivity over the points of `subset` (all points
/// when empty). Boundary points are skipped when the constraint is on.
[[nodiscard]] BlockComponents bfs_traverse(const PointCloud& cloud, const Labeling& labeling, const BfsParams& params,
                                           std::span<const PointIndex> subset = {});

/// Unites block components sharing a point, attaches boundary points to the
/// nearest same-class traversed point within epsilon, drops components below
/// mu and assigns canonical ids. Throws LabelConflict if blocks disagree on
/// the class of a shared point.
[[nodiscard]] InstanceResult merge_blocks(std::span<const BlockComponents> blocks, const PointCloud& cloud,
                                          const Labeling& labeling, const BfsParams& params);

/// Whole-cloud segmentation. Uses `labeling.boundary` when the constraint is on.
[[nodiscard]] InstanceResult bfs_components(const PointCloud& cloud, const Labeling& labeling,
                                            const BfsParams& params);

/// Per-block traversal in parallel followed by merge_blocks.
[[nodiscard]] InstanceResult segment_instances(const PointCloud& cloud, const Labeling& labeling,
                                               const BfsParams& params, const BlockGrid& grid,
                                               unsigned threads = 1);

/// Renumbers instances 1..K by their smallest member index.
[[nodiscard]] InstanceResult canonicalize_ids(InstanceResult result);

struct MuSweepPoint {
  std::size_t mu = 0;
  MatchResult match;
  std::size_t instances = 0;
};

/// Runs the segmentation once and re-filters for each mu (applied to every
/// class, epsilon overrides kept), evaluating each against `gt` at `iou`.
/// Throws InvalidSweep for an empty mu list or mu < 1.
[[nodiscard]] std::vector<MuSweepPoint> sweep_mu(const PointCloud& cloud, const Labeling& labeling,
                                                 const BfsParams& params, std::span<const std::size_t> mu_values,
                                                 const Labeling& gt, double iou = 0.5);

}  // namespace twinseg
