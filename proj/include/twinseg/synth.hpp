#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "twinseg/geometry.hpp"
#include "twinseg/labels.hpp"

namespace twinseg {

/// Rotation Rz(yaw) * Ry(pitch) * Rx(roll) (radians) followed by translation.
struct Pose {
  Point3 translation{0.0, 0.0, 0.0};
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;

  [[nodiscard]] Point3 apply(const Point3& local) const;
};

// Local frames: extrusions and pipes run along z, centered on the origin.

struct CylinderShape {
  double radius = 0.1;
  double length = 1.0;
};
/// Torus section bent about the z axis; `angle` in radians.
struct ElbowShape {
  double pipe_radius = 0.1;
  double bend_radius = 0.3;
  double angle = 1.5707963267948966;
};
struct IBeamShape {
  double height = 0.3;
  double width = 0.15;
  double flange_thickness = 0.015;
  double web_thickness = 0.01;
  double length = 2.0;
};
struct ChannelShape {
  double height = 0.25;
  double width = 0.1;
  double flange_thickness = 0.012;
  double web_thickness = 0.008;
  double length = 2.0;
};
struct AngleShape {
  double leg_a = 0.1;
  double leg_b = 0.1;
  double thickness = 0.01;
  double length = 1.5;
};
/// Two annular faces and the outer rim.
struct FlangeShape {
  double inner_radius = 0.1;
  double outer_radius = 0.18;
  double thickness = 0.02;
};
/// Pipe stubs through a spherical body, closed by a flange at each end.
struct ValveShape {
  double pipe_radius = 0.06;
  double body_radius = 0.12;
  double length = 0.6;
  double flange_radius = 0.12;
  double flange_thickness = 0.03;
};
/// Box surface, used for Other objects.
struct BoxShape {
  double size_x = 0.5;
  double size_y = 0.5;
  double size_z = 0.5;
};

using ShapeParams = std::variant<CylinderShape, ElbowShape, ChannelShape, IBeamShape, AngleShape, FlangeShape,
                                 ValveShape, BoxShape>;

[[nodiscard]] ClassLabel shape_class(const ShapeParams& shape) noexcept;
/// Throws InvalidPrimitive for non-positive or inconsistent dimensions.
void validate_shape(const ShapeParams& shape);
[[nodiscard]] double surface_area(const ShapeParams& shape);
/// Radius of a sphere about the local origin enclosing the shape.
[[nodiscard]] double bounding_radius(const ShapeParams& shape);

/// Uniform surface samples in the local frame; each surface part receives
/// round(density * part area) points. Throws InvalidPrimitive for density <= 0.
[[nodiscard]] std::vector<Point3> sample_primitive(const ShapeParams& shape, double density, std::uint64_t seed);

/// Unsigned distance of a local-frame point to the analytic surface.
[[nodiscard]] double surface_distance(const ShapeParams& shape, const Point3& local);

struct ObjectSpec {
  ShapeParams shape;
  Pose pose;
  double density = 5000.0;  ///< points per square meter
};

/// Points with dot(normal, p) > offset are removed.
struct HalfSpaceCut {
  Point3 normal{1.0, 0.0, 0.0};
  double offset = 0.0;
};

struct SceneSpec {
  std::uint64_t seed = 0;
  std::vector<ObjectSpec> objects;
  double noise_sigma = 0.0;
  std::vector<HalfSpaceCut> cuts;
  double drop_fraction = 0.0;
  std::size_t clutter_points = 0;
  /// 0 spreads clutter uniformly over the scene box; otherwise clutter forms
  /// this many Gaussian blobs of `clutter_sigma`.
  std::size_t clutter_blobs = 0;
  double clutter_sigma = 0.05;
  double boundary_radius = 0.04;

  /// Throws InvalidPrimitive or InvalidParams.
  void validate() const;
};

struct Scene {
  PointCloud cloud;
  Labeling labels;  ///< classes, instances (object order, 1..K), boundary flags
};

/// Objects are sampled with per-object seeds, so output does not depend on
/// `threads`. Objects losing every point to occlusion get no instance id.
[[nodiscard]] Scene generate_scene(const SceneSpec& spec, unsigned threads = 1);

struct RandomSceneParams {
  std::size_t objects = 8;
  double extent = 6.0;          ///< objects placed inside [0, extent]^3
  double min_gap = 0.1;         ///< surface separation lower bound via bounding spheres
  double density = 4000.0;
  bool zipf = false;            ///< class frequencies proportional to 1/rank
  std::vector<ClassLabel> classes{ClassLabel::Cylinder, ClassLabel::Elbow,  ClassLabel::Channel,
                                  ClassLabel::IBeam,    ClassLabel::Angle,  ClassLabel::Flange,
                                  ClassLabel::Valve};
  std::size_t min_points = 300;  ///< resample shapes whose expected count is lower
  double noise_sigma = 0.0;
  std::size_t clutter_points = 0;
  std::size_t clutter_blobs = 0;
  double clutter_sigma = 0.05;
};

/// Random dimensions for a class, drawn from fixed plausible ranges.
[[nodiscard]] ShapeParams random_shape(ClassLabel cls, std::uint64_t seed);

/// Objects with random classes and poses whose bounding spheres are at least
/// `min_gap` apart; placement attempts that fail are skipped.
[[nodiscard]] SceneSpec random_separated_scene(std::uint64_t seed, const RandomSceneParams& params);

/// Straight pipe runs of `pipes` segments joined by flanges whose faces touch
/// the pipe ends, repeated `chains` times with separated runs.
[[nodiscard]] SceneSpec random_assembly_scene(std::uint64_t seed, std::size_t chains, std::size_t pipes,
                                              double density);

/// splitmix64 step; used to derive independent seeds.
[[nodiscard]] std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

}  // namespace twinseg
