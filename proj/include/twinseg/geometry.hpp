#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace twinseg {

/// Global point identity. Stable for a whole pipeline run.
using PointIndex = std::uint32_t;

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Point3&, const Point3&) = default;

  Point3& operator+=(const Point3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  Point3& operator-=(const Point3& o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  friend Point3 operator+(Point3 a, const Point3& b) { return a += b; }
  friend Point3 operator-(Point3 a, const Point3& b) { return a -= b; }
  friend Point3 operator*(double s, const Point3& p) { return {s * p.x, s * p.y, s * p.z}; }

  [[nodiscard]] double operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
  [[nodiscard]] double& operator[](int axis) { return axis == 0 ? x : (axis == 1 ? y : z); }
  [[nodiscard]] bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

[[nodiscard]] inline double squared_distance(const Point3& a, const Point3& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return dx * dx + dy * dy + dz * dz;
}

[[nodiscard]] inline double distance(const Point3& a, const Point3& b) {
  return std::sqrt(squared_distance(a, b));
}

/// Axis-aligned box. Containment is half-open: [min, max).
struct Aabb {
  Point3 min;
  Point3 max;

  [[nodiscard]] bool contains(const Point3& p) const {
    return p.x >= min.x && p.x < max.x && p.y >= min.y && p.y < max.y && p.z >= min.z &&
           p.z < max.z;
  }
};

/// Flat point store. Position in `points()` is the global index of a point.
class PointCloud {
 public:
  PointCloud() = default;

  /// Throws InvalidCoordinate if any point is non-finite.
  explicit PointCloud(std::vector<Point3> points);
  PointCloud(std::vector<Point3> points, std::vector<double> intensity);

  void reserve(std::size_t n);
  /// Appends a point; intensity must be given for every point or for none.
  void push_back(const Point3& p, std::optional<double> intensity = std::nullopt);

  [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }
  [[nodiscard]] bool empty() const noexcept { return points_.empty(); }
  [[nodiscard]] const Point3& operator[](std::size_t i) const { return points_[i]; }
  [[nodiscard]] std::span<const Point3> points() const noexcept { return points_; }

  [[nodiscard]] bool has_intensity() const noexcept { return has_intensity_; }
  [[nodiscard]] std::span<const double> intensity() const noexcept { return intensity_; }

  [[nodiscard]] Aabb bounds() const;

 private:
  std::vector<Point3> points_;
  std::vector<double> intensity_;
  bool has_intensity_ = false;
};

}  // namespace twinseg
