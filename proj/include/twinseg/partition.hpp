#pragma once

#include <cstdint>
#include <vector>

#include "twinseg/geometry.hpp"

namespace twinseg {

struct PartitionParams {
  double window_size = 10.0;   ///< meters
  double block_size = 1.0;     ///< meters
  double block_stride = 0.5;   ///< meters

  /// Throws InvalidPartition unless 0 < stride <= block <= window.
  void validate() const;
};

/// Non-overlapping cube of side window_size. Point sets of windows are disjoint.
struct Window {
  std::uint32_t window_id = 0;
  Aabb aabb;
  std::vector<PointIndex> indices;
};

/// Cube of side block_size inside one window; blocks of a window overlap
/// whenever stride < block_size.
struct Block {
  std::uint32_t window_id = 0;
  std::uint32_t block_id = 0;
  Aabb aabb;
  std::vector<PointIndex> indices;
};

struct BlockGrid {
  PartitionParams params;
  Point3 origin;  ///< axis-wise minimum of the cloud
  std::vector<Window> windows;
  std::vector<Block> blocks;
};

/// Splits the cloud into windows anchored at its minimum corner, then tiles
/// each window with blocks every `block_stride`. Window membership is
/// half-open per axis; a point at local window coordinate u belongs to block k
/// along that axis iff k*stride <= u < k*stride + block_size. Empty blocks
/// are dropped. Windows and blocks are numbered in lexicographic cell order.
///
/// Throws InvalidPartition for bad params or an empty cloud.
[[nodiscard]] BlockGrid partition(const PointCloud& cloud, const PartitionParams& params);

[[nodiscard]] inline Point3 to_global(const Block& block, const Point3& local) { return local + block.aabb.min; }
[[nodiscard]] inline Point3 to_local(const Block& block, const Point3& global) { return global - block.aabb.min; }

}  // namespace twinseg
