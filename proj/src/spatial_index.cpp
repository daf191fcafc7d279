#include "twinseg/spatial_index.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "twinseg/error.hpp"

namespace twinseg {

SpatialIndex::SpatialIndex(const PointCloud& cloud,
                           std::optional<std::span<const PointIndex>> subset)
    : cloud_(&cloud) {
  if (subset) {
    order_.assign(subset->begin(), subset->end());
    for (PointIndex i : order_) {
      if (i >= cloud.size()) {
        throw Error(ErrorCode::InvalidParams, "subset index " + std::to_string(i) + " out of range");
      }
    }
  } else {
    order_.resize(cloud.size());
    std::iota(order_.begin(), order_.end(), PointIndex{0});
  }
  if (order_.empty()) throw Error(ErrorCode::EmptyIndex, "cannot index an empty point set");

  // Sorting first makes the tree layout independent of the caller's ordering.
  std::sort(order_.begin(), order_.end());
  order_.erase(std::unique(order_.begin(), order_.end()), order_.end());

  coords_.resize(order_.size());
  axis_.assign(order_.size(), 0);
  build(0, order_.size());
  for (std::size_t i = 0; i < order_.size(); ++i) coords_[i] = cloud[order_[i]];
}

void SpatialIndex::build(std::size_t lo, std::size_t hi) {
  if (hi - lo <= kLeafSize) return;

  Point3 mn = (*cloud_)[order_[lo]];
  Point3 mx = mn;
  for (std::size_t i = lo + 1; i < hi; ++i) {
    const Point3& p = (*cloud_)[order_[i]];
    mn = {std::min(mn.x, p.x), std::min(mn.y, p.y), std::min(mn.z, p.z)};
    mx = {std::max(mx.x, p.x), std::max(mx.y, p.y), std::max(mx.z, p.z)};
  }
  const Point3 extent = mx - mn;
  int axis = 0;
  if (extent.y > extent[axis]) axis = 1;
  if (extent.z > extent[axis]) axis = 2;

  const std::size_t mid = lo + (hi - lo) / 2;
  const PointCloud& cloud = *cloud_;
  std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(lo),
                   order_.begin() + static_cast<std::ptrdiff_t>(mid),
                   order_.begin() + static_cast<std::ptrdiff_t>(hi),
                   [&](PointIndex a, PointIndex b) {
                     const double ca = cloud[a][axis];
                     const double cb = cloud[b][axis];
                     return ca < cb || (ca == cb && a < b);
                   });
  axis_[mid] = static_cast<std::uint8_t>(axis);
  build(lo, mid);
  build(mid + 1, hi);
}

void SpatialIndex::search(std::size_t lo, std::size_t hi, const Point3& c, double r, double r2,
                          std::vector<PointIndex>& out) const {
  if (hi - lo <= kLeafSize) {
    for (std::size_t i = lo; i < hi; ++i) {
      if (squared_distance(coords_[i], c) <= r2) out.push_back(order_[i]);
    }
    return;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  const int axis = axis_[mid];
  const double split = coords_[mid][axis];
  const double q = c[axis];
  if (squared_distance(coords_[mid], c) <= r2) out.push_back(order_[mid]);
  // Left holds coordinates <= split, right holds >= split.
  if (q - r <= split) search(lo, mid, c, r, r2, out);
  if (q + r >= split) search(mid + 1, hi, c, r, r2, out);
}

void SpatialIndex::radius_search(const Point3& center, double r, std::vector<PointIndex>& out) const {
  if (!(r > 0.0)) throw Error(ErrorCode::InvalidRadius, "radius must be positive");
  search(0, order_.size(), center, r, r * r, out);
}

std::vector<PointIndex> SpatialIndex::radius_neighbors(const Point3& center, double r) const {
  std::vector<PointIndex> out;
  radius_search(center, r, out);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<PointIndex> SpatialIndex::radius_neighbors(PointIndex i, double r) const {
  if (i >= cloud_->size()) {
    throw Error(ErrorCode::InvalidParams, "query index " + std::to_string(i) + " out of range");
  }
  return radius_neighbors((*cloud_)[i], r);
}

std::optional<PointIndex> SpatialIndex::nearest_within(const Point3& center, double r) const {
  std::vector<PointIndex> hits;
  radius_search(center, r, hits);
  std::optional<PointIndex> best;
  double best_d2 = 0.0;
  for (PointIndex j : hits) {
    const double d2 = squared_distance((*cloud_)[j], center);
    if (!best || d2 < best_d2 || (d2 == best_d2 && j < *best)) {
      best = j;
      best_d2 = d2;
    }
  }
  return best;
}

}  // namespace twinseg
