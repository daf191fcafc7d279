#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "twinseg/geometry.hpp"

namespace twinseg {

/// Object classes. Integer codes are fixed and appear in every file format.
enum class ClassLabel : std::uint8_t {
  Cylinder = 0,
  Elbow = 1,
  Channel = 2,
  IBeam = 3,
  Angle = 4,
  Flange = 5,
  Valve = 6,
  Other = 7,
};

inline constexpr std::size_t kNumClasses = 8;
/// The seven shape classes; Other is excluded from mean metrics.
inline constexpr std::size_t kNumShapeClasses = 7;

inline constexpr std::array<ClassLabel, kNumClasses> kAllClasses = {
    ClassLabel::Cylinder, ClassLabel::Elbow,  ClassLabel::Channel, ClassLabel::IBeam,
    ClassLabel::Angle,    ClassLabel::Flange, ClassLabel::Valve,   ClassLabel::Other};

[[nodiscard]] constexpr int class_code(ClassLabel c) noexcept { return static_cast<int>(c); }
[[nodiscard]] constexpr bool is_shape_class(ClassLabel c) noexcept { return c != ClassLabel::Other; }

/// Throws InvalidParams for codes outside 0..7.
[[nodiscard]] ClassLabel class_from_code(long code);
[[nodiscard]] std::string_view class_name(ClassLabel c) noexcept;
[[nodiscard]] std::optional<ClassLabel> class_from_name(std::string_view name) noexcept;

using InstanceId = std::uint32_t;
inline constexpr InstanceId kNoInstance = 0;

/// Per-point labels. All four sequences are parallel to the cloud.
struct Labeling {
  std::vector<ClassLabel> classes;
  std::vector<InstanceId> instances;
  std::vector<double> confidence;
  std::vector<std::uint8_t> boundary;

  Labeling() = default;
  /// n points labeled Other, no instance, confidence 1, not boundary.
  explicit Labeling(std::size_t n);

  [[nodiscard]] std::size_t size() const noexcept { return classes.size(); }
  /// Throws MissingLabels if any sequence length differs from `n`, and
  /// InvalidParams for confidences outside [0, 1].
  void validate(std::size_t n) const;
};

/// Indices with class `c`, ascending.
[[nodiscard]] std::vector<PointIndex> class_point_cluster(const Labeling& labeling, ClassLabel c);
/// Indices with instance `id`, ascending. Throws ReservedId for id 0.
[[nodiscard]] std::vector<PointIndex> instance_point_cluster(const Labeling& labeling, InstanceId id);
/// All instance clusters keyed by id (> 0).
[[nodiscard]] std::map<InstanceId, std::vector<PointIndex>> instance_clusters(const Labeling& labeling);

/// Majority class over `members` (ties: smaller class code).
[[nodiscard]] ClassLabel majority_class(const Labeling& labeling, const std::vector<PointIndex>& members);

}  // namespace twinseg
