#include "twinseg/cost_model.hpp"

#include <algorithm>
#include <cmath>

#include "twinseg/error.hpp"

namespace twinseg {

void FacilityStats::validate() const {
  for (double r : recall) {
    if (!(r >= 0.0 && r <= 1.0)) throw Error(ErrorCode::InvalidCounts, "recall outside [0, 1] in " + name);
  }
  if (per_shape_minutes && !(*per_shape_minutes > 0.0)) {
    throw Error(ErrorCode::InvalidCounts, "per-shape minutes must be > 0");
  }
  if (total_hours && !(*total_hours >= 0.0)) throw Error(ErrorCode::InvalidCounts, "total hours must be >= 0");
}

std::size_t manual_counts(std::size_t total, double recall) {
  if (!(recall >= 0.0 && recall <= 1.0)) throw Error(ErrorCode::InvalidCounts, "recall outside [0, 1]");
  return static_cast<std::size_t>(std::llround((1.0 - recall) * static_cast<double>(total)));
}

double savings_fraction(const FacilityStats& stats) {
  stats.validate();
  std::size_t total = 0, manual = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    total += stats.total[c];
    manual += manual_counts(stats.total[c], stats.recall[c]);
  }
  if (total == 0) throw Error(ErrorCode::EmptyFacility, "facility '" + stats.name + "' has no shapes");
  return 1.0 - static_cast<double>(manual) / static_cast<double>(total);
}

HoursEstimate framework_hours(const FacilityStats& stats) {
  stats.validate();
  HoursEstimate est;
  for (std::size_t c = 0; c < kNumClasses; ++c) est.manual_shapes += manual_counts(stats.total[c], stats.recall[c]);
  if (stats.per_shape_minutes) {
    est.minutes_per_shape = *stats.per_shape_minutes;
  } else if (stats.total_hours) {
    est.rate_inferred = true;
    est.minutes_per_shape =
        est.manual_shapes > 0 ? *stats.total_hours * 60.0 / static_cast<double>(est.manual_shapes) : 0.0;
  } else {
    throw Error(ErrorCode::MissingRate, "facility '" + stats.name + "' needs a per-shape rate or total hours");
  }
  est.hours = static_cast<double>(est.manual_shapes) * est.minutes_per_shape / 60.0;
  return est;
}

ToolComparison tool_comparison(const std::array<std::size_t, kNumClasses>& total,
                               const std::array<double, kNumClasses>& minutes, const std::vector<ToolCounts>& tools) {
  if (tools.empty()) throw Error(ErrorCode::InvalidCounts, "no tools to compare");
  ToolComparison out;
  out.minutes = minutes;
  for (const ToolCounts& tool : tools) {
    std::array<double, kNumClasses> hours{};
    double sum = 0.0;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      if (tool.detected[c] > total[c]) {
        throw Error(ErrorCode::InvalidCounts, tool.name + " detects more " + std::string(class_name(kAllClasses[c])) +
                                                  " shapes than exist");
      }
      if (minutes[c] < 0.0) throw Error(ErrorCode::InvalidCounts, "negative modeling minutes");
      hours[c] = static_cast<double>(total[c] - tool.detected[c]) * minutes[c] / 60.0;
      sum += hours[c];
    }
    out.tools.push_back(tool.name);
    out.class_hours.push_back(hours);
    out.hours.push_back(sum);
  }
  auto reduction = [](double base, double other) { return base > 0.0 ? (base - other) / base : 0.0; };
  for (std::size_t k = 0; k < tools.size(); ++k) {
    std::array<double, kNumClasses> red{};
    for (std::size_t c = 0; c < kNumClasses; ++c) red[c] = reduction(out.class_hours[0][c], out.class_hours[k][c]);
    out.class_reduction.push_back(red);
    out.reduction.push_back(reduction(out.hours[0], out.hours[k]));
  }
  return out;
}

std::array<std::size_t, kNumClasses> detected_counts(const FacilityStats& stats) {
  stats.validate();
  std::array<std::size_t, kNumClasses> out{};
  for (std::size_t c = 0; c < kNumClasses; ++c) out[c] = stats.total[c] - manual_counts(stats.total[c], stats.recall[c]);
  return out;
}

FacilityCost facility_cost(const FacilityStats& stats) {
  FacilityCost out;
  out.stats = stats;
  out.savings = savings_fraction(stats);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    out.manual[c] = manual_counts(stats.total[c], stats.recall[c]);
    out.total_shapes += stats.total[c];
  }
  out.hours = framework_hours(stats);
  return out;
}

void AnnotationCurve::validate() const {
  if (samples.size() < 3) throw Error(ErrorCode::InvalidCurve, "annotation curve needs at least 3 samples");
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto [x, acc] = samples[k];
    if (!(x >= 0.0 && x <= 1.0) || !(acc >= 0.0 && acc <= 1.0)) {
      throw Error(ErrorCode::InvalidCurve, "curve samples must lie in [0, 1]");
    }
    if (k > 0 && !(x > samples[k - 1].first)) {
      throw Error(ErrorCode::InvalidCurve, "curve samples must have strictly increasing X");
    }
  }
  if (!(annotation_cost >= 0.0) || !(correction_cost >= 0.0) || !(points > 0.0)) {
    throw Error(ErrorCode::InvalidCurve, "cost coefficients must be >= 0 and N > 0");
  }
}

double AnnotationCurve::accuracy(double x) const {
  if (x <= samples.front().first) return samples.front().second;
  if (x >= samples.back().first) return samples.back().second;
  auto hi = std::upper_bound(samples.begin(), samples.end(), x,
                             [](double v, const std::pair<double, double>& s) { return v < s.first; });
  auto lo = hi - 1;
  const double t = (x - lo->first) / (hi->first - lo->first);
  return lo->second + t * (hi->second - lo->second);
}

double AnnotationCurve::total_cost(double x) const {
  return annotation_cost * x * points + correction_cost * (1.0 - accuracy(x)) * points;
}

double optimal_preannotation(const AnnotationCurve& curve) {
  curve.validate();
  double best_x = 0.0;
  double best = curve.total_cost(0.0);
  for (int i = 1; i <= 100; ++i) {
    const double x = i / 100.0;
    const double cost = curve.total_cost(x);
    if (cost < best - 1e-12 * std::max(1.0, std::abs(best))) {
      best = cost;
      best_x = x;
    }
  }
  return best_x;
}

}  // namespace twinseg
