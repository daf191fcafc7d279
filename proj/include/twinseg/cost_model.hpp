#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "twinseg/labels.hpp"

namespace twinseg {

/// Per-class shape totals and instance recalls of one facility.
struct FacilityStats {
  std::string name;
  std::array<std::size_t, kNumClasses> total{};
  std::array<double, kNumClasses> recall{};
  std::optional<double> per_shape_minutes;
  std::optional<double> total_hours;

  /// Throws InvalidCounts for recalls outside [0, 1] or non-positive rate/hours.
  void validate() const;
};

/// (1 - recall) * total rounded half away from zero.
[[nodiscard]] std::size_t manual_counts(std::size_t total, double recall);

/// 1 - sum(manual) / sum(total). Throws EmptyFacility when every total is 0.
[[nodiscard]] double savings_fraction(const FacilityStats& stats);

struct HoursEstimate {
  double hours = 0.0;
  double minutes_per_shape = 0.0;
  std::size_t manual_shapes = 0;
  bool rate_inferred = false;
};

/// Hours for the shapes left to manual work. A given per-shape rate wins;
/// otherwise the rate is inferred from total_hours. Throws MissingRate when
/// neither is present.
[[nodiscard]] HoursEstimate framework_hours(const FacilityStats& stats);

struct ToolCounts {
  std::string name;
  std::array<std::size_t, kNumClasses> detected{};  ///< shapes the tool segments without manual work
};

struct ToolComparison {
  std::array<double, kNumClasses> minutes{};
  std::vector<std::string> tools;
  std::vector<std::array<double, kNumClasses>> class_hours;  ///< per tool
  std::vector<double> hours;                                 ///< per tool
  /// Reduction of tool k relative to tool 0, per class and overall; 0 where tool 0 needs no hours.
  std::vector<std::array<double, kNumClasses>> class_reduction;
  std::vector<double> reduction;
};

/// Manual hours per tool: sum_c (total_c - detected_c) * minutes_c / 60.
/// Throws InvalidCounts when a tool detects more shapes than exist or the
/// tool list is empty.
[[nodiscard]] ToolComparison tool_comparison(const std::array<std::size_t, kNumClasses>& total,
                                             const std::array<double, kNumClasses>& minutes,
                                             const std::vector<ToolCounts>& tools);

/// Shapes a facility's framework run segments automatically: total - manual_counts.
[[nodiscard]] std::array<std::size_t, kNumClasses> detected_counts(const FacilityStats& stats);

struct AnnotationCurve {
  std::vector<std::pair<double, double>> samples;  ///< (pre-annotated fraction, validation accuracy)
  double annotation_cost = 1.0;                    ///< a
  double correction_cost = 1.0;                    ///< b
  double points = 1.0;                             ///< N

  /// Throws InvalidCurve for fewer than 3 samples, unsorted or duplicate X,
  /// values outside [0, 1] or negative coefficients.
  void validate() const;
  /// Piecewise-linear accuracy, clamped to the end samples.
  [[nodiscard]] double accuracy(double x) const;
  /// a * x * N + b * (1 - acc(x)) * N
  [[nodiscard]] double total_cost(double x) const;
};

/// Minimizer of total_cost over x = 0, 0.01, ..., 1 (ties to the smaller x).
[[nodiscard]] double optimal_preannotation(const AnnotationCurve& curve);

/// Everything the cost report prints for one facility.
struct FacilityCost {
  FacilityStats stats;
  std::array<std::size_t, kNumClasses> manual{};
  std::size_t total_shapes = 0;
  double savings = 0.0;  ///< fraction
  HoursEstimate hours;
};

[[nodiscard]] FacilityCost facility_cost(const FacilityStats& stats);

inline constexpr double kHoursPerPersonMonth = 160.0;
[[nodiscard]] inline double person_months(double hours) { return hours / kHoursPerPersonMonth; }

}  // namespace twinseg
