#include "twinseg/geometry.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "twinseg/error.hpp"

namespace twinseg {

namespace {

void require_finite(const Point3& p, std::size_t index) {
  if (!p.finite()) {
    throw Error(ErrorCode::InvalidCoordinate,
                "point " + std::to_string(index) + " has a non-finite coordinate");
  }
}

}  // namespace

PointCloud::PointCloud(std::vector<Point3> points) : points_(std::move(points)) {
  for (std::size_t i = 0; i < points_.size(); ++i) require_finite(points_[i], i);
}

PointCloud::PointCloud(std::vector<Point3> points, std::vector<double> intensity)
    : PointCloud(std::move(points)) {
  if (intensity.size() != points_.size()) {
    throw Error(ErrorCode::InvalidParams, "intensity length does not match point count");
  }
  intensity_ = std::move(intensity);
  has_intensity_ = true;
}

void PointCloud::reserve(std::size_t n) {
  points_.reserve(n);
  if (has_intensity_) intensity_.reserve(n);
}

void PointCloud::push_back(const Point3& p, std::optional<double> intensity) {
  require_finite(p, points_.size());
  if (points_.empty()) has_intensity_ = intensity.has_value();
  if (intensity.has_value() != has_intensity_) {
    throw Error(ErrorCode::InvalidParams, "intensity must be given for all points or none");
  }
  points_.push_back(p);
  if (intensity) intensity_.push_back(*intensity);
}

Aabb PointCloud::bounds() const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  Aabb box{{inf, inf, inf}, {-inf, -inf, -inf}};
  for (const Point3& p : points_) {
    box.min = {std::min(box.min.x, p.x), std::min(box.min.y, p.y), std::min(box.min.z, p.z)};
    box.max = {std::max(box.max.x, p.x), std::max(box.max.y, p.y), std::max(box.max.z, p.z)};
  }
  return box;
}

}  // namespace twinseg
