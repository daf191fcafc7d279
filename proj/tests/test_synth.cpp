#include <doctest.h>

#include <cmath>
#include <set>

#include "twinseg/error.hpp"
#include "twinseg/synth.hpp"

using namespace twinseg;

namespace {

ObjectSpec object(ShapeParams shape, Point3 at, double density = 5000.0) {
  ObjectSpec o;
  o.shape = shape;
  o.pose.translation = at;
  o.density = density;
  return o;
}

}  // namespace

TEST_SUITE("synth") {
  TEST_CASE("cylinder sample count and radius") {
    const auto pts = sample_primitive(CylinderShape{0.1, 1.0}, 1e4, 3);
    CHECK(pts.size() == 6283);
    for (const Point3& p : pts) {
      CHECK(std::abs(std::hypot(p.x, p.y) - 0.1) <= 1e-9);
      CHECK(std::abs(p.z) <= 0.5);
    }
    CHECK(sample_primitive(CylinderShape{0.1, 1.0}, 1e4, 3) == pts);
    CHECK(sample_primitive(CylinderShape{0.1, 1.0}, 1e4, 4) != pts);
    CHECK_THROWS_AS((void)sample_primitive(CylinderShape{0.1, 1.0}, 0.0, 3), Error);
    CHECK_THROWS_AS((void)sample_primitive(CylinderShape{-0.1, 1.0}, 10.0, 3), Error);
  }

  TEST_CASE("every shape samples on its surface with the expected count") {
    const std::vector<ShapeParams> shapes{CylinderShape{}, ElbowShape{}, ChannelShape{}, IBeamShape{},
                                          AngleShape{},    FlangeShape{}, ValveShape{},  BoxShape{}};
    for (const ShapeParams& s : shapes) {
      const double density = 3000.0;
      const auto pts = sample_primitive(s, density, 11);
      CAPTURE(class_name(shape_class(s)));
      CHECK(std::abs(static_cast<double>(pts.size()) - density * surface_area(s)) <= 8.0);
      const double r = bounding_radius(s);
      for (const Point3& p : pts) {
        CHECK(surface_distance(s, p) <= 1e-9);
        CHECK(std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z) <= r + 1e-9);
      }
    }
    CHECK(surface_area(CylinderShape{0.2, 2.0}) == doctest::Approx(2 * M_PI * 0.2 * 2.0));
    CHECK(surface_distance(CylinderShape{0.1, 1.0}, {0.3, 0, 0}) == doctest::Approx(0.2));
  }

  TEST_CASE("separated cylinders: two instances, no boundary") {
    SceneSpec spec;
    spec.seed = 1;
    spec.objects = {object(CylinderShape{0.1, 1.0}, {0, 0, 0}), object(CylinderShape{0.1, 1.0}, {0.5, 0, 0})};
    const Scene scene = generate_scene(spec);
    const std::set<InstanceId> ids(scene.labels.instances.begin(), scene.labels.instances.end());
    CHECK(ids == std::set<InstanceId>{1, 2});
    CHECK(std::count(scene.labels.boundary.begin(), scene.labels.boundary.end(), 1) == 0);
  }

  TEST_CASE("cylinder touching a flange has boundary points on both") {
    SceneSpec spec;
    spec.seed = 2;
    spec.objects = {object(CylinderShape{0.1, 1.0}, {0, 0, 0}), object(FlangeShape{0.1, 0.18, 0.02}, {0, 0, 0.51})};
    const Scene scene = generate_scene(spec);
    std::set<InstanceId> flagged;
    for (std::size_t i = 0; i < scene.cloud.size(); ++i) {
      if (scene.labels.boundary[i]) flagged.insert(scene.labels.instances[i]);
    }
    CHECK(flagged == std::set<InstanceId>{1, 2});
  }

  TEST_CASE("K objects give K instances in object order; output is deterministic") {
    RandomSceneParams rp;
    rp.objects = 7;
    rp.clutter_points = 200;
    rp.noise_sigma = 0.003;
    const SceneSpec spec = random_separated_scene(42, rp);
    REQUIRE(spec.objects.size() == 7);
    const Scene a = generate_scene(spec, 1);
    const Scene b = generate_scene(spec, 4);
    CHECK(a.cloud.points().size() == b.cloud.points().size());
    CHECK(std::equal(a.cloud.points().begin(), a.cloud.points().end(), b.cloud.points().begin()));
    CHECK(a.labels.instances == b.labels.instances);
    CHECK(a.labels.classes == b.labels.classes);
    std::set<InstanceId> ids(a.labels.instances.begin(), a.labels.instances.end());
    ids.erase(0);
    CHECK(ids.size() == 7);
    CHECK(*ids.rbegin() == 7);
    // Instance k carries the class of object k.
    for (std::size_t i = 0; i < a.cloud.size(); ++i) {
      const InstanceId id = a.labels.instances[i];
      if (id == 0) {
        CHECK(a.labels.classes[i] == ClassLabel::Other);
      } else {
        CHECK(a.labels.classes[i] == shape_class(spec.objects[id - 1].shape));
      }
    }
  }

  TEST_CASE("random separated scenes keep objects apart") {
    RandomSceneParams rp;
    rp.objects = 10;
    const SceneSpec spec = random_separated_scene(9, rp);
    for (std::size_t i = 0; i < spec.objects.size(); ++i) {
      for (std::size_t j = i + 1; j < spec.objects.size(); ++j) {
        const double d = distance(spec.objects[i].pose.translation, spec.objects[j].pose.translation);
        CHECK(d >= bounding_radius(spec.objects[i].shape) + bounding_radius(spec.objects[j].shape) + rp.min_gap - 1e-9);
      }
    }
  }

  TEST_CASE("occlusion cuts and drops remove points") {
    SceneSpec spec;
    spec.seed = 3;
    spec.objects = {object(CylinderShape{0.1, 1.0}, {0, 0, 0})};
    const std::size_t full = generate_scene(spec).cloud.size();
    spec.cuts = {HalfSpaceCut{{0, 0, 1}, 0.0}};
    const Scene cut = generate_scene(spec);
    CHECK(cut.cloud.size() < full);
    for (const Point3& p : cut.cloud.points()) CHECK(p.z <= 0.0);
    spec.cuts = {HalfSpaceCut{{0, 0, 1}, -10.0}};
    CHECK(generate_scene(spec).cloud.size() == 0);
    spec.cuts.clear();
    spec.drop_fraction = 1.5;
    CHECK_THROWS_AS((void)generate_scene(spec), Error);
  }

  TEST_CASE("assembly scenes produce touching objects") {
    const SceneSpec spec = random_assembly_scene(5, 2, 3, 3000.0);
    const Scene scene = generate_scene(spec);
    CHECK(std::count(scene.labels.boundary.begin(), scene.labels.boundary.end(), 1) > 0);
  }
}
