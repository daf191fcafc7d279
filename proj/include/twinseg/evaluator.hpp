#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "twinseg/labels.hpp"

namespace twinseg {

struct EvalParams {
  double iou_threshold = 0.25;
  std::vector<double> threshold_sweep;

  /// Throws InvalidParams unless every threshold lies in (0, 1].
  void validate() const;
};

/// Parses "start:stop:step" (inclusive stop) into thresholds rounded to 1e-9.
/// Throws InvalidSweep for malformed ranges or thresholds outside (0, 1].
[[nodiscard]] std::vector<double> parse_sweep(const std::string& spec);

/// |A ∩ B| / |A ∪ B| of two ascending index sets. Throws UndefinedIoU when both are empty.
[[nodiscard]] double instance_iou(std::span<const PointIndex> a, std::span<const PointIndex> b);

struct InstanceMatch {
  InstanceId pred_id = 0;
  InstanceId gt_id = 0;
  ClassLabel cls = ClassLabel::Other;
  double iou = 0.0;
};

struct ClassPR {
  std::size_t num_pred = 0;
  std::size_t num_gt = 0;
  std::size_t true_positives = 0;
  double precision = 0.0;  ///< 0 with precision_defined == false when num_pred == 0
  double recall = 0.0;     ///< 0 with recall_defined == false when num_gt == 0
  bool precision_defined = false;
  bool recall_defined = false;
};

struct MatchResult {
  double threshold = 0.0;
  std::array<ClassPR, kNumClasses> per_class{};
  /// Unweighted means over the shape classes where the value is defined:
  /// precision over classes with predictions, recall over classes with
  /// ground truth. 0 when no class qualifies.
  double mean_precision = 0.0;
  double mean_recall = 0.0;
  std::size_t precision_classes = 0;
  std::size_t recall_classes = 0;
  std::vector<InstanceMatch> matches;  ///< true positives, sorted by IoU descending
};

enum class MatchStrategy {
  /// Greedy by descending IoU, then completed with augmenting paths so the
  /// number of true positives is maximal.
  GreedyMaximal,
  /// Plain greedy by descending IoU.
  Greedy,
};

/// One-to-one matching of predicted to ground-truth instances. An instance's
/// class is the majority class of its points in its own labeling; only pairs
/// of equal class with IoU >= threshold are candidates.
[[nodiscard]] MatchResult match_instances(const Labeling& pred, const Labeling& gt, double threshold,
                                          MatchStrategy strategy = MatchStrategy::GreedyMaximal);

struct CurvePoint {
  double threshold = 0.0;
  std::array<double, kNumClasses> precision{};
  std::array<double, kNumClasses> recall{};
  double mean_precision = 0.0;
  double mean_recall = 0.0;
};

/// One matching per threshold. Throws InvalidSweep for an empty sweep.
[[nodiscard]] std::vector<CurvePoint> pr_vs_iou(const Labeling& pred, const Labeling& gt,
                                                std::span<const double> sweep);

struct ClassMetrics {
  double accuracy = 0.0;
  std::array<double, kNumClasses> iou{};
  std::array<bool, kNumClasses> present{};  ///< class occurs in gt or pred
  double miou = 0.0;                        ///< mean IoU over present classes
};

/// Point-wise class metrics. Throws InvalidParams for unequal lengths.
[[nodiscard]] ClassMetrics class_metrics(std::span<const ClassLabel> pred, std::span<const ClassLabel> gt);

struct EvalReport {
  MatchResult instances;
  ClassMetrics classes;
  std::vector<CurvePoint> curve;
};

[[nodiscard]] EvalReport evaluate(const Labeling& pred, const Labeling& gt, const EvalParams& params);

}  // namespace twinseg
