#pragma once

#include <optional>
#include <span>
#include <vector>

#include "twinseg/geometry.hpp"

namespace twinseg {

/// Static kD-tree over a subset of a cloud's points answering exact
/// fixed-radius queries with closed-ball semantics (distance <= r).
///
/// The index keeps a pointer to the source cloud, which must outlive it.
/// Queries are const and safe to issue concurrently.
class SpatialIndex {
 public:
  /// Indexes every point of `cloud`, or only `subset` when given.
  /// Throws EmptyIndex when the effective subset is empty and
  /// InvalidParams when a subset index is out of range.
  explicit SpatialIndex(const PointCloud& cloud,
                        std::optional<std::span<const PointIndex>> subset = std::nullopt);

  /// Global indices within `r` of `center`, ascending. Throws InvalidRadius for r <= 0.
  [[nodiscard]] std::vector<PointIndex> radius_neighbors(const Point3& center, double r) const;
  /// Same, centered on an indexed or non-indexed point of the source cloud.
  [[nodiscard]] std::vector<PointIndex> radius_neighbors(PointIndex i, double r) const;

  /// Appends hits to `out` without sorting; avoids allocation in hot loops.
  void radius_search(const Point3& center, double r, std::vector<PointIndex>& out) const;

  /// Closest indexed point within `r` (ties: smaller global index), if any.
  [[nodiscard]] std::optional<PointIndex> nearest_within(const Point3& center, double r) const;

  [[nodiscard]] std::size_t size() const noexcept { return order_.size(); }
  [[nodiscard]] const PointCloud& cloud() const noexcept { return *cloud_; }

 private:
  static constexpr std::size_t kLeafSize = 12;

  void build(std::size_t lo, std::size_t hi);
  void search(std::size_t lo, std::size_t hi, const Point3& c, double r, double r2,
              std::vector<PointIndex>& out) const;

  const PointCloud* cloud_;
  std::vector<PointIndex> order_;   // global ids, permuted into tree order
  std::vector<Point3> coords_;      // coordinates in tree order
  std::vector<std::uint8_t> axis_;  // split axis of the node whose median sits at position i
};

}  // namespace twinseg
