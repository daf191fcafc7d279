#include "twinseg/partition.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include "twinseg/error.hpp"

namespace twinseg {

void PartitionParams::validate() const {
  const bool ok = std::isfinite(window_size) && std::isfinite(block_size) && std::isfinite(block_stride) &&
                  block_stride > 0.0 && block_stride <= block_size && block_size <= window_size;
  if (!ok) {
    throw Error(ErrorCode::InvalidPartition, "require 0 < block_stride <= block_size <= window_size");
  }
}

namespace {

using Cell = std::array<std::int64_t, 3>;

}  // namespace

BlockGrid partition(const PointCloud& cloud, const PartitionParams& params) {
  params.validate();
  if (cloud.empty()) throw Error(ErrorCode::InvalidPartition, "cannot partition an empty cloud");

  BlockGrid grid;
  grid.params = params;
  grid.origin = cloud.bounds().min;

  const double w = params.window_size;
  const double s = params.block_stride;
  const double b = params.block_size;

  std::map<Cell, std::vector<PointIndex>> window_cells;
  // Per point: window cell and its local offset inside the window.
  std::vector<Point3> local(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Point3 rel = cloud[i] - grid.origin;
    Cell cell{};
    for (int a = 0; a < 3; ++a) cell[static_cast<std::size_t>(a)] = static_cast<std::int64_t>(std::floor(rel[a] / w));
    local[i] = {rel.x - static_cast<double>(cell[0]) * w, rel.y - static_cast<double>(cell[1]) * w,
                rel.z - static_cast<double>(cell[2]) * w};
    window_cells[cell].push_back(static_cast<PointIndex>(i));
  }

  for (auto& [cell, members] : window_cells) {
    Window win;
    win.window_id = static_cast<std::uint32_t>(grid.windows.size());
    win.aabb.min = {grid.origin.x + static_cast<double>(cell[0]) * w, grid.origin.y + static_cast<double>(cell[1]) * w,
                    grid.origin.z + static_cast<double>(cell[2]) * w};
    win.aabb.max = win.aabb.min + Point3{w, w, w};

    std::map<Cell, std::vector<PointIndex>> block_cells;
    for (PointIndex i : members) {
      // Block k along an axis holds u iff u/s - b/s < k <= u/s. The upper end
      // k = floor(u/s) always qualifies, so every point lands in some block.
      std::array<std::int64_t, 3> hi{}, lo{};
      for (int a = 0; a < 3; ++a) {
        const double t = std::max(0.0, local[i][a]) / s;
        const auto k_hi = static_cast<std::int64_t>(std::floor(t));
        std::int64_t k_lo = static_cast<std::int64_t>(std::floor(t - b / s)) + 1;
        k_lo = std::clamp<std::int64_t>(k_lo, 0, k_hi);
        hi[static_cast<std::size_t>(a)] = k_hi;
        lo[static_cast<std::size_t>(a)] = k_lo;
      }
      for (auto kx = lo[0]; kx <= hi[0]; ++kx)
        for (auto ky = lo[1]; ky <= hi[1]; ++ky)
          for (auto kz = lo[2]; kz <= hi[2]; ++kz) block_cells[{kx, ky, kz}].push_back(i);
    }
    for (auto& [bcell, bmembers] : block_cells) {
      Block blk;
      blk.window_id = win.window_id;
      blk.block_id = static_cast<std::uint32_t>(grid.blocks.size());
      blk.aabb.min = {win.aabb.min.x + static_cast<double>(bcell[0]) * s,
                      win.aabb.min.y + static_cast<double>(bcell[1]) * s,
                      win.aabb.min.z + static_cast<double>(bcell[2]) * s};
      blk.aabb.max = blk.aabb.min + Point3{b, b, b};
      blk.indices = std::move(bmembers);
      grid.blocks.push_back(std::move(blk));
    }
    win.indices = std::move(members);
    grid.windows.push_back(std::move(win));
  }
  return grid;
}

}  // namespace twinseg
