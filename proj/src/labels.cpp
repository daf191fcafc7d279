#include "twinseg/labels.hpp"

#include <string>

#include "twinseg/error.hpp"

namespace twinseg {

namespace {
constexpr std::array<std::string_view, kNumClasses> kNames = {
    "Cylinder", "Elbow", "Channel", "IBeam", "Angle", "Flange", "Valve", "Other"};
}

ClassLabel class_from_code(long code) {
  if (code < 0 || code >= static_cast<long>(kNumClasses)) {
    throw Error(ErrorCode::InvalidParams, "class code " + std::to_string(code) + " outside 0..7");
  }
  return static_cast<ClassLabel>(code);
}

std::string_view class_name(ClassLabel c) noexcept { return kNames[static_cast<std::size_t>(c)]; }

std::optional<ClassLabel> class_from_name(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    if (kNames[i] == name) return static_cast<ClassLabel>(i);
  }
  return std::nullopt;
}

Labeling::Labeling(std::size_t n)
    : classes(n, ClassLabel::Other), instances(n, kNoInstance), confidence(n, 1.0), boundary(n, 0) {}

void Labeling::validate(std::size_t n) const {
  if (classes.size() != n || instances.size() != n || confidence.size() != n || boundary.size() != n) {
    throw Error(ErrorCode::MissingLabels,
                "labeling does not cover the cloud (" + std::to_string(n) + " points)");
  }
  for (double c : confidence) {
    if (!(c >= 0.0 && c <= 1.0)) throw Error(ErrorCode::InvalidParams, "confidence outside [0, 1]");
  }
}

std::vector<PointIndex> class_point_cluster(const Labeling& labeling, ClassLabel c) {
  std::vector<PointIndex> out;
  for (std::size_t i = 0; i < labeling.classes.size(); ++i) {
    if (labeling.classes[i] == c) out.push_back(static_cast<PointIndex>(i));
  }
  return out;
}

std::vector<PointIndex> instance_point_cluster(const Labeling& labeling, InstanceId id) {
  if (id == kNoInstance) throw Error(ErrorCode::ReservedId, "instance id 0 means 'no instance'");
  std::vector<PointIndex> out;
  for (std::size_t i = 0; i < labeling.instances.size(); ++i) {
    if (labeling.instances[i] == id) out.push_back(static_cast<PointIndex>(i));
  }
  return out;
}

std::map<InstanceId, std::vector<PointIndex>> instance_clusters(const Labeling& labeling) {
  std::map<InstanceId, std::vector<PointIndex>> out;
  for (std::size_t i = 0; i < labeling.instances.size(); ++i) {
    if (labeling.instances[i] != kNoInstance) {
      out[labeling.instances[i]].push_back(static_cast<PointIndex>(i));
    }
  }
  return out;
}

ClassLabel majority_class(const Labeling& labeling, const std::vector<PointIndex>& members) {
  std::array<std::size_t, kNumClasses> votes{};
  for (PointIndex i : members) ++votes[static_cast<std::size_t>(labeling.classes[i])];
  std::size_t best = 0;
  for (std::size_t c = 1; c < kNumClasses; ++c) {
    if (votes[c] > votes[best]) best = c;
  }
  return static_cast<ClassLabel>(best);
}

}  // namespace twinseg
