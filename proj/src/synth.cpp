#include "twinseg/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "twinseg/error.hpp"
#include "twinseg/instance_segmenter.hpp"
#include "twinseg/parallel.hpp"
#include "twinseg/spatial_index.hpp"

namespace twinseg {

namespace {

constexpr double kPi = std::numbers::pi;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t below(std::size_t n) { return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n))); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    spare_ = mag * std::sin(2.0 * kPi * u2);
    has_spare_ = true;
    return mag * std::cos(2.0 * kPi * u2);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::size_t count_for(double density, double area) {
  return static_cast<std::size_t>(std::llround(density * area));
}

struct Polygon {
  std::vector<std::array<double, 2>> v;

  double perimeter() const {
    double p = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) p += edge_length(k);
    return p;
  }
  double edge_length(std::size_t k) const {
    const auto& a = v[k];
    const auto& b = v[(k + 1) % v.size()];
    return std::hypot(b[0] - a[0], b[1] - a[1]);
  }
  std::array<double, 2> at(double s) const {
    for (std::size_t k = 0; k < v.size(); ++k) {
      const double len = edge_length(k);
      if (s <= len || k + 1 == v.size()) {
        const auto& a = v[k];
        const auto& b = v[(k + 1) % v.size()];
        const double t = std::clamp(s / len, 0.0, 1.0);
        return {a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])};
      }
      s -= len;
    }
    return v.front();
  }
  double distance(double x, double y) const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < v.size(); ++k) {
      const auto& a = v[k];
      const auto& b = v[(k + 1) % v.size()];
      const double dx = b[0] - a[0], dy = b[1] - a[1];
      const double t = std::clamp(((x - a[0]) * dx + (y - a[1]) * dy) / (dx * dx + dy * dy), 0.0, 1.0);
      best = std::min(best, std::hypot(x - a[0] - t * dx, y - a[1] - t * dy));
    }
    return best;
  }
};

Polygon section(const IBeamShape& s) {
  const double w = s.width / 2, h = s.height / 2, t = s.web_thickness / 2, f = s.flange_thickness;
  return {{{-w, -h}, {w, -h}, {w, -h + f}, {t, -h + f}, {t, h - f}, {w, h - f},
           {w, h}, {-w, h}, {-w, h - f}, {-t, h - f}, {-t, -h + f}, {-w, -h + f}}};
}

Polygon section(const ChannelShape& s) {
  const double x0 = -s.width / 2, x1 = s.width / 2, h = s.height / 2, t = s.web_thickness, f = s.flange_thickness;
  return {{{x0, -h}, {x1, -h}, {x1, -h + f}, {x0 + t, -h + f}, {x0 + t, h - f}, {x1, h - f}, {x1, h}, {x0, h}}};
}

Polygon section(const AngleShape& s) {
  const double a = s.leg_a, b = s.leg_b, t = s.thickness;
  return {{{0, 0}, {a, 0}, {a, t}, {t, t}, {t, b}, {0, b}}};
}

// Surface parts shared by several shapes.

void sample_lateral(Rng& rng, double r, double z0, double z1, std::size_t n, std::vector<Point3>& out) {
  for (std::size_t k = 0; k < n; ++k) {
    const double th = 2.0 * kPi * rng.uniform();
    out.push_back({r * std::cos(th), r * std::sin(th), rng.uniform(z0, z1)});
  }
}

void sample_annulus(Rng& rng, double ri, double ro, double z, std::size_t n, std::vector<Point3>& out) {
  for (std::size_t k = 0; k < n; ++k) {
    const double r = std::sqrt(ri * ri + rng.uniform() * (ro * ro - ri * ri));
    const double th = 2.0 * kPi * rng.uniform();
    out.push_back({r * std::cos(th), r * std::sin(th), z});
  }
}

void sample_extrusion(Rng& rng, const Polygon& poly, double length, double density, std::vector<Point3>& out) {
  const double per = poly.perimeter();
  const std::size_t n = count_for(density, per * length);
  for (std::size_t k = 0; k < n; ++k) {
    const auto xy = poly.at(rng.uniform() * per);
    out.push_back({xy[0], xy[1], rng.uniform(-length / 2, length / 2)});
  }
}

double lateral_distance(const Point3& p, double r, double z0, double z1) {
  const double dr = std::hypot(p.x, p.y) - r;
  const double dz = p.z < z0 ? z0 - p.z : (p.z > z1 ? p.z - z1 : 0.0);
  return std::hypot(dr, dz);
}

double annulus_distance(const Point3& p, double ri, double ro, double z) {
  const double r = std::hypot(p.x, p.y);
  const double dr = r < ri ? ri - r : (r > ro ? r - ro : 0.0);
  return std::hypot(dr, p.z - z);
}

struct FlangeParts {
  double ri, ro, t, zc;
};

void sample_flange(Rng& rng, const FlangeParts& f, double density, std::vector<Point3>& out) {
  const double face = kPi * (f.ro * f.ro - f.ri * f.ri);
  sample_annulus(rng, f.ri, f.ro, f.zc - f.t / 2, count_for(density, face), out);
  sample_annulus(rng, f.ri, f.ro, f.zc + f.t / 2, count_for(density, face), out);
  sample_lateral(rng, f.ro, f.zc - f.t / 2, f.zc + f.t / 2, count_for(density, 2.0 * kPi * f.ro * f.t), out);
}

double flange_area(const FlangeParts& f) {
  return 2.0 * kPi * (f.ro * f.ro - f.ri * f.ri) + 2.0 * kPi * f.ro * f.t;
}

double flange_distance(const Point3& p, const FlangeParts& f) {
  return std::min({annulus_distance(p, f.ri, f.ro, f.zc - f.t / 2), annulus_distance(p, f.ri, f.ro, f.zc + f.t / 2),
                   lateral_distance(p, f.ro, f.zc - f.t / 2, f.zc + f.t / 2)});
}

double valve_half_body(const ValveShape& s) {
  return std::sqrt(s.body_radius * s.body_radius - s.pipe_radius * s.pipe_radius);
}

std::array<FlangeParts, 2> valve_flanges(const ValveShape& s) {
  const double zc = s.length / 2 - s.flange_thickness / 2;
  return {FlangeParts{s.pipe_radius, s.flange_radius, s.flange_thickness, -zc},
          FlangeParts{s.pipe_radius, s.flange_radius, s.flange_thickness, zc}};
}

template <typename... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <typename... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::InvalidPrimitive, what);
}

}  // namespace

Point3 Pose::apply(const Point3& p) const {
  const double cy = std::cos(yaw), sy = std::sin(yaw);
  const double cp = std::cos(pitch), sp = std::sin(pitch);
  const double cr = std::cos(roll), sr = std::sin(roll);
  // Rx, then Ry, then Rz.
  const double y1 = cr * p.y - sr * p.z;
  const double z1 = sr * p.y + cr * p.z;
  const double x2 = cp * p.x + sp * z1;
  const double z2 = -sp * p.x + cp * z1;
  const double x3 = cy * x2 - sy * y1;
  const double y3 = sy * x2 + cy * y1;
  return {x3 + translation.x, y3 + translation.y, z2 + translation.z};
}

ClassLabel shape_class(const ShapeParams& shape) noexcept {
  return std::visit(Overloaded{
                        [](const CylinderShape&) { return ClassLabel::Cylinder; },
                        [](const ElbowShape&) { return ClassLabel::Elbow; },
                        [](const ChannelShape&) { return ClassLabel::Channel; },
                        [](const IBeamShape&) { return ClassLabel::IBeam; },
                        [](const AngleShape&) { return ClassLabel::Angle; },
                        [](const FlangeShape&) { return ClassLabel::Flange; },
                        [](const ValveShape&) { return ClassLabel::Valve; },
                        [](const BoxShape&) { return ClassLabel::Other; },
                    },
                    shape);
}

void validate_shape(const ShapeParams& shape) {
  std::visit(Overloaded{
                 [](const CylinderShape& s) { require(s.radius > 0 && s.length > 0, "cylinder sizes must be > 0"); },
                 [](const ElbowShape& s) {
                   require(s.pipe_radius > 0 && s.bend_radius > s.pipe_radius,
                           "elbow needs pipe radius > 0 and bend radius > pipe radius");
                   require(s.angle > 0 && s.angle <= 2 * kPi, "elbow angle must lie in (0, 2pi]");
                 },
                 [](const ChannelShape& s) {
                   require(s.height > 0 && s.width > 0 && s.length > 0 && s.flange_thickness > 0 &&
                               s.web_thickness > 0 && 2 * s.flange_thickness < s.height &&
                               s.web_thickness < s.width,
                           "channel dimensions must be positive and consistent");
                 },
                 [](const IBeamShape& s) {
                   require(s.height > 0 && s.width > 0 && s.length > 0 && s.flange_thickness > 0 &&
                               s.web_thickness > 0 && 2 * s.flange_thickness < s.height &&
                               s.web_thickness < s.width,
                           "I-beam dimensions must be positive and consistent");
                 },
                 [](const AngleShape& s) {
                   require(s.leg_a > 0 && s.leg_b > 0 && s.length > 0 && s.thickness > 0 &&
                               s.thickness < std::min(s.leg_a, s.leg_b),
                           "angle dimensions must be positive and consistent");
                 },
                 [](const FlangeShape& s) {
                   require(s.inner_radius > 0 && s.outer_radius > s.inner_radius && s.thickness > 0,
                           "flange needs 0 < inner radius < outer radius and thickness > 0");
                 },
                 [](const ValveShape& s) {
                   require(s.pipe_radius > 0 && s.body_radius > s.pipe_radius && s.flange_radius > s.pipe_radius &&
                               s.flange_thickness > 0 && s.length > 0,
                           "valve dimensions must be positive and consistent");
                   require(s.length / 2 - s.flange_thickness > valve_half_body(s),
                           "valve length too short for its body and flanges");
                 },
                 [](const BoxShape& s) { require(s.size_x > 0 && s.size_y > 0 && s.size_z > 0, "box sizes must be > 0"); },
             },
             shape);
}

double surface_area(const ShapeParams& shape) {
  validate_shape(shape);
  return std::visit(
      Overloaded{
          [](const CylinderShape& s) { return 2 * kPi * s.radius * s.length; },
          [](const ElbowShape& s) { return s.angle * s.bend_radius * 2 * kPi * s.pipe_radius; },
          [](const ChannelShape& s) { return section(s).perimeter() * s.length; },
          [](const IBeamShape& s) { return section(s).perimeter() * s.length; },
          [](const AngleShape& s) { return section(s).perimeter() * s.length; },
          [](const FlangeShape& s) { return flange_area({s.inner_radius, s.outer_radius, s.thickness, 0.0}); },
          [](const ValveShape& s) {
            const double h = valve_half_body(s);
            const double stub = s.length / 2 - s.flange_thickness - h;
            const auto fl = valve_flanges(s);
            return 2 * (2 * kPi * s.pipe_radius * stub) + 2 * kPi * s.body_radius * 2 * h + flange_area(fl[0]) +
                   flange_area(fl[1]);
          },
          [](const BoxShape& s) { return 2 * (s.size_x * s.size_y + s.size_y * s.size_z + s.size_x * s.size_z); },
      },
      shape);
}

double bounding_radius(const ShapeParams& shape) {
  validate_shape(shape);
  auto extrusion = [](const Polygon& poly, double length) {
    double r2 = 0.0;
    for (const auto& v : poly.v) r2 = std::max(r2, v[0] * v[0] + v[1] * v[1]);
    return std::sqrt(r2 + length * length / 4);
  };
  return std::visit(Overloaded{
                        [](const CylinderShape& s) { return std::hypot(s.radius, s.length / 2); },
                        [](const ElbowShape& s) { return s.bend_radius + s.pipe_radius; },
                        [&](const ChannelShape& s) { return extrusion(section(s), s.length); },
                        [&](const IBeamShape& s) { return extrusion(section(s), s.length); },
                        [&](const AngleShape& s) { return extrusion(section(s), s.length); },
                        [](const FlangeShape& s) { return std::hypot(s.outer_radius, s.thickness / 2); },
                        [](const ValveShape& s) {
                          return std::max(s.body_radius, std::hypot(s.flange_radius, s.length / 2));
                        },
                        [](const BoxShape& s) { return std::hypot(s.size_x, s.size_y, s.size_z) / 2; },
                    },
                    shape);
}

std::vector<Point3> sample_primitive(const ShapeParams& shape, double density, std::uint64_t seed) {
  if (!(density > 0.0) || !std::isfinite(density)) throw Error(ErrorCode::InvalidPrimitive, "density must be > 0");
  validate_shape(shape);
  Rng rng(seed);
  std::vector<Point3> out;
  std::visit(
      Overloaded{
          [&](const CylinderShape& s) {
            sample_lateral(rng, s.radius, -s.length / 2, s.length / 2,
                           count_for(density, 2 * kPi * s.radius * s.length), out);
          },
          [&](const ElbowShape& s) {
            const std::size_t n = count_for(density, s.angle * s.bend_radius * 2 * kPi * s.pipe_radius);
            // Area element grows with distance from the bend axis; rejection keeps it uniform.
            while (out.size() < n) {
              const double phi = s.angle * rng.uniform();
              const double psi = 2 * kPi * rng.uniform();
              const double rho = s.bend_radius + s.pipe_radius * std::cos(psi);
              if (rng.uniform() * (s.bend_radius + s.pipe_radius) > rho) continue;
              out.push_back({rho * std::cos(phi), rho * std::sin(phi), s.pipe_radius * std::sin(psi)});
            }
          },
          [&](const ChannelShape& s) { sample_extrusion(rng, section(s), s.length, density, out); },
          [&](const IBeamShape& s) { sample_extrusion(rng, section(s), s.length, density, out); },
          [&](const AngleShape& s) { sample_extrusion(rng, section(s), s.length, density, out); },
          [&](const FlangeShape& s) { sample_flange(rng, {s.inner_radius, s.outer_radius, s.thickness, 0.0}, density, out); },
          [&](const ValveShape& s) {
            const double h = valve_half_body(s);
            const double stub_end = s.length / 2 - s.flange_thickness;
            const std::size_t stub_n = count_for(density, 2 * kPi * s.pipe_radius * (stub_end - h));
            sample_lateral(rng, s.pipe_radius, -stub_end, -h, stub_n, out);
            sample_lateral(rng, s.pipe_radius, h, stub_end, stub_n, out);
            // Archimedes: a sphere zone's area is uniform in z.
            const std::size_t body_n = count_for(density, 2 * kPi * s.body_radius * 2 * h);
            for (std::size_t k = 0; k < body_n; ++k) {
              const double z = rng.uniform(-h, h);
              const double r = std::sqrt(s.body_radius * s.body_radius - z * z);
              const double th = 2 * kPi * rng.uniform();
              out.push_back({r * std::cos(th), r * std::sin(th), z});
            }
            for (const FlangeParts& f : valve_flanges(s)) sample_flange(rng, f, density, out);
          },
          [&](const BoxShape& s) {
            const double hx = s.size_x / 2, hy = s.size_y / 2, hz = s.size_z / 2;
            for (int sign : {-1, 1}) {
              for (std::size_t k = count_for(density, s.size_x * s.size_y); k > 0; --k)
                out.push_back({rng.uniform(-hx, hx), rng.uniform(-hy, hy), sign * hz});
              for (std::size_t k = count_for(density, s.size_y * s.size_z); k > 0; --k)
                out.push_back({sign * hx, rng.uniform(-hy, hy), rng.uniform(-hz, hz)});
              for (std::size_t k = count_for(density, s.size_x * s.size_z); k > 0; --k)
                out.push_back({rng.uniform(-hx, hx), sign * hy, rng.uniform(-hz, hz)});
            }
          },
      },
      shape);
  return out;
}

double surface_distance(const ShapeParams& shape, const Point3& p) {
  auto extrusion = [&](const Polygon& poly, double length) {
    const double dz = std::max(0.0, std::abs(p.z) - length / 2);
    return std::hypot(poly.distance(p.x, p.y), dz);
  };
  return std::visit(
      Overloaded{
          [&](const CylinderShape& s) { return lateral_distance(p, s.radius, -s.length / 2, s.length / 2); },
          [&](const ElbowShape& s) {
            const double phi = std::clamp(std::atan2(p.y, p.x) < 0 ? std::atan2(p.y, p.x) + 2 * kPi
                                                                     : std::atan2(p.y, p.x),
                                          0.0, s.angle);
            const Point3 c{s.bend_radius * std::cos(phi), s.bend_radius * std::sin(phi), 0.0};
            return std::abs(distance(p, c) - s.pipe_radius);
          },
          [&](const ChannelShape& s) { return extrusion(section(s), s.length); },
          [&](const IBeamShape& s) { return extrusion(section(s), s.length); },
          [&](const AngleShape& s) { return extrusion(section(s), s.length); },
          [&](const FlangeShape& s) { return flange_distance(p, {s.inner_radius, s.outer_radius, s.thickness, 0.0}); },
          [&](const ValveShape& s) {
            const double h = valve_half_body(s);
            const double stub_end = s.length / 2 - s.flange_thickness;
            double d = std::min(lateral_distance(p, s.pipe_radius, -stub_end, -h),
                                lateral_distance(p, s.pipe_radius, h, stub_end));
            if (std::abs(p.z) <= h) d = std::min(d, std::abs(std::hypot(p.x, p.y, p.z) - s.body_radius));
            for (const FlangeParts& f : valve_flanges(s)) d = std::min(d, flange_distance(p, f));
            return d;
          },
          [&](const BoxShape& s) {
            const double hx = s.size_x / 2, hy = s.size_y / 2, hz = s.size_z / 2;
            const double ox = std::abs(p.x) - hx, oy = std::abs(p.y) - hy, oz = std::abs(p.z) - hz;
            if (ox <= 0 && oy <= 0 && oz <= 0) return -std::max({ox, oy, oz});
            return std::hypot(std::max(ox, 0.0), std::max(oy, 0.0), std::max(oz, 0.0));
          },
      },
      shape);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

void SceneSpec::validate() const {
  for (const ObjectSpec& obj : objects) {
    validate_shape(obj.shape);
    if (!(obj.density > 0.0)) throw Error(ErrorCode::InvalidPrimitive, "object density must be > 0");
    if (!obj.pose.translation.finite() || !std::isfinite(obj.pose.yaw) || !std::isfinite(obj.pose.pitch) ||
        !std::isfinite(obj.pose.roll)) {
      throw Error(ErrorCode::InvalidParams, "object pose must be finite");
    }
  }
  if (!(noise_sigma >= 0.0)) throw Error(ErrorCode::InvalidParams, "noise sigma must be >= 0");
  if (!(drop_fraction >= 0.0 && drop_fraction < 1.0)) throw Error(ErrorCode::InvalidParams, "drop fraction must lie in [0, 1)");
  if (!(clutter_sigma > 0.0)) throw Error(ErrorCode::InvalidParams, "clutter sigma must be > 0");
  if (!(boundary_radius > 0.0)) throw Error(ErrorCode::InvalidParams, "boundary radius must be > 0");
  for (const HalfSpaceCut& cut : cuts) {
    if (!cut.normal.finite() || !std::isfinite(cut.offset) || squared_distance(cut.normal, {0, 0, 0}) == 0.0) {
      throw Error(ErrorCode::InvalidParams, "half-space cut needs a finite non-zero normal");
    }
  }
}

namespace {

bool survives(const SceneSpec& spec, const Point3& p, Rng& rng) {
  for (const HalfSpaceCut& cut : spec.cuts) {
    if (cut.normal.x * p.x + cut.normal.y * p.y + cut.normal.z * p.z > cut.offset) return false;
  }
  return !(spec.drop_fraction > 0.0 && rng.uniform() < spec.drop_fraction);
}

void add_noise(const SceneSpec& spec, Point3& p, Rng& rng) {
  if (spec.noise_sigma > 0.0) {
    p.x += spec.noise_sigma * rng.normal();
    p.y += spec.noise_sigma * rng.normal();
    p.z += spec.noise_sigma * rng.normal();
  }
}

}  // namespace

Scene generate_scene(const SceneSpec& spec, unsigned threads) {
  spec.validate();
  std::vector<std::vector<Point3>> parts(spec.objects.size());
  parallel_for(spec.objects.size(), threads, [&](std::size_t k) {
    const ObjectSpec& obj = spec.objects[k];
    std::vector<Point3> local = sample_primitive(obj.shape, obj.density, mix_seed(spec.seed, 2 * k));
    Rng rng(mix_seed(spec.seed, 2 * k + 1));
    auto& kept = parts[k];
    kept.reserve(local.size());
    for (const Point3& q : local) {
      Point3 p = obj.pose.apply(q);
      add_noise(spec, p, rng);
      if (survives(spec, p, rng)) kept.push_back(p);
    }
  });

  Scene scene;
  std::vector<Point3> points;
  std::vector<ClassLabel> classes;
  std::vector<InstanceId> instances;
  InstanceId next = 1;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (parts[k].empty()) continue;
    const ClassLabel cls = shape_class(spec.objects[k].shape);
    for (const Point3& p : parts[k]) {
      points.push_back(p);
      classes.push_back(cls);
      instances.push_back(next);
    }
    ++next;
  }

  if (spec.clutter_points > 0) {
    Aabb box{{0, 0, 0}, {1, 1, 1}};
    if (!points.empty()) {
      box = Aabb{points.front(), points.front()};
      for (const Point3& p : points) {
        for (int a = 0; a < 3; ++a) {
          box.min[a] = std::min(box.min[a], p[a]);
          box.max[a] = std::max(box.max[a], p[a]);
        }
      }
    }
    Rng rng(mix_seed(spec.seed, 2 * spec.objects.size()));
    auto uniform_in_box = [&] {
      Point3 p;
      for (int a = 0; a < 3; ++a) p[a] = rng.uniform(box.min[a], box.max[a]);
      return p;
    };
    std::vector<Point3> centers;
    for (std::size_t b = 0; b < spec.clutter_blobs; ++b) centers.push_back(uniform_in_box());
    for (std::size_t k = 0; k < spec.clutter_points; ++k) {
      Point3 p;
      if (centers.empty()) {
        p = uniform_in_box();
      } else {
        const Point3& c = centers[k % centers.size()];
        p = {c.x + spec.clutter_sigma * rng.normal(), c.y + spec.clutter_sigma * rng.normal(),
             c.z + spec.clutter_sigma * rng.normal()};
      }
      if (!survives(spec, p, rng)) continue;
      points.push_back(p);
      classes.push_back(ClassLabel::Other);
      instances.push_back(kNoInstance);
    }
  }

  scene.cloud = PointCloud(std::move(points));
  scene.labels = Labeling(scene.cloud.size());
  scene.labels.classes = std::move(classes);
  scene.labels.instances = std::move(instances);
  if (!scene.cloud.empty()) {
    const SpatialIndex index(scene.cloud);
    scene.labels.boundary = detect_boundaries(index, scene.labels, spec.boundary_radius, BoundaryMode::GtInstance, threads);
  }
  return scene;
}

namespace {

ClassLabel pick_class(Rng& rng, const RandomSceneParams& params) {
  if (!params.zipf) return params.classes[rng.below(params.classes.size())];
  double total = 0.0;
  for (std::size_t k = 0; k < params.classes.size(); ++k) total += 1.0 / static_cast<double>(k + 1);
  double u = rng.uniform() * total;
  for (std::size_t k = 0; k < params.classes.size(); ++k) {
    u -= 1.0 / static_cast<double>(k + 1);
    if (u < 0.0) return params.classes[k];
  }
  return params.classes.back();
}

}  // namespace

ShapeParams random_shape(ClassLabel cls, std::uint64_t seed) {
  Rng rng(seed);
  switch (cls) {
    case ClassLabel::Cylinder:
      return CylinderShape{rng.uniform(0.05, 0.2), rng.uniform(0.6, 2.0)};
    case ClassLabel::Elbow: {
      const double r = rng.uniform(0.05, 0.15);
      return ElbowShape{r, rng.uniform(2.0, 3.5) * r, kPi / 2};
    }
    case ClassLabel::Channel:
      return ChannelShape{rng.uniform(0.15, 0.3), rng.uniform(0.07, 0.12), rng.uniform(0.01, 0.015),
                          rng.uniform(0.006, 0.01), rng.uniform(1.0, 2.0)};
    case ClassLabel::IBeam:
      return IBeamShape{rng.uniform(0.2, 0.4), rng.uniform(0.1, 0.2), rng.uniform(0.01, 0.02),
                        rng.uniform(0.008, 0.015), rng.uniform(1.0, 2.5)};
    case ClassLabel::Angle:
      return AngleShape{rng.uniform(0.08, 0.15), rng.uniform(0.08, 0.15), rng.uniform(0.008, 0.012),
                        rng.uniform(1.0, 2.0)};
    case ClassLabel::Flange: {
      const double r = rng.uniform(0.05, 0.15);
      return FlangeShape{r, r + 0.08, rng.uniform(0.02, 0.04)};
    }
    case ClassLabel::Valve: {
      const double r = rng.uniform(0.05, 0.1);
      return ValveShape{r, 2.0 * r, rng.uniform(0.5, 0.7), r + 0.06, 0.03};
    }
    case ClassLabel::Other:
      return BoxShape{rng.uniform(0.2, 0.6), rng.uniform(0.2, 0.6), rng.uniform(0.2, 0.6)};
  }
  return CylinderShape{};
}

SceneSpec random_separated_scene(std::uint64_t seed, const RandomSceneParams& params) {
  if (params.classes.empty() || !(params.extent > 0.0) || !(params.density > 0.0) || !(params.min_gap >= 0.0)) {
    throw Error(ErrorCode::InvalidParams, "random scene needs classes, extent > 0, density > 0 and gap >= 0");
  }
  Rng rng(mix_seed(seed, 0xC0FFEE));
  SceneSpec spec;
  spec.seed = seed;
  spec.noise_sigma = params.noise_sigma;
  spec.clutter_points = params.clutter_points;
  spec.clutter_blobs = params.clutter_blobs;
  spec.clutter_sigma = params.clutter_sigma;
  std::vector<std::pair<Point3, double>> spheres;
  for (std::size_t k = 0; k < params.objects; ++k) {
    const ClassLabel cls = pick_class(rng, params);
    std::uint64_t stream = 2 * k;
    ShapeParams shape = random_shape(cls, mix_seed(seed, stream));
    for (int tries = 0; tries < 20 && surface_area(shape) * params.density < static_cast<double>(params.min_points);
         ++tries) {
      stream += 0x10000;
      shape = random_shape(cls, mix_seed(seed, stream));
    }
    const double radius = bounding_radius(shape);
    for (int attempt = 0; attempt < 200; ++attempt) {
      Point3 c;
      for (int a = 0; a < 3; ++a) c[a] = rng.uniform(std::min(radius, params.extent / 2), std::max(params.extent - radius, params.extent / 2));
      const bool clear = std::all_of(spheres.begin(), spheres.end(), [&](const auto& s) {
        return distance(s.first, c) > s.second + radius + params.min_gap;
      });
      if (!clear) continue;
      Pose pose{c, rng.uniform(0, 2 * kPi), rng.uniform(0, 2 * kPi), rng.uniform(0, 2 * kPi)};
      spec.objects.push_back({shape, pose, params.density});
      spheres.emplace_back(c, radius);
      break;
    }
  }
  return spec;
}

SceneSpec random_assembly_scene(std::uint64_t seed, std::size_t chains, std::size_t pipes, double density) {
  if (chains == 0 || pipes == 0 || !(density > 0.0)) {
    throw Error(ErrorCode::InvalidParams, "assembly scene needs chains, pipes and density > 0");
  }
  Rng rng(mix_seed(seed, 0xA55E));
  SceneSpec spec;
  spec.seed = seed;
  constexpr double kFlangeThickness = 0.02;
  for (std::size_t c = 0; c < chains; ++c) {
    const double r = rng.uniform(0.06, 0.12);
    const double yaw = rng.uniform(0, 2 * kPi);
    const double pitch = kPi / 2 + rng.uniform(-0.1, 0.1);
    // Nearly horizontal runs stacked 1 m apart in height never touch.
    const Point3 start{rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), static_cast<double>(c) * 1.0};
    const Pose frame{start, yaw, pitch, 0.0};
    double z = 0.0;
    for (std::size_t p = 0; p < pipes; ++p) {
      const double length = rng.uniform(0.6, 1.2);
      const Point3 center = frame.apply({0, 0, z + length / 2});
      spec.objects.push_back({CylinderShape{r, length}, Pose{center, yaw, pitch, 0.0}, density});
      z += length;
      if (p + 1 == pipes) break;
      const Point3 flange_center = frame.apply({0, 0, z + kFlangeThickness / 2});
      spec.objects.push_back(
          {FlangeShape{r, r + 0.08, kFlangeThickness}, Pose{flange_center, yaw, pitch, 0.0}, density});
      z += kFlangeThickness;
    }
  }
  return spec;
}

}  // namespace twinseg
