#include "twinseg/class_segmenter.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "twinseg/error.hpp"
#include "twinseg/parallel.hpp"

namespace twinseg {

FeatureVector feature_vector(const EigenFeatures& f) {
  return {f.linearity, f.planarity, f.scattering, f.curvature, std::abs(f.normal.z)};
}

Labeling classify_passthrough(const Labeling& gt) {
  Labeling out(gt.size());
  out.classes = gt.classes;
  return out;
}

void NoiseSpec::validate() const {
  for (std::size_t r = 0; r < kNumClasses; ++r) {
    double sum = 0.0;
    for (double v : confusion[r]) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw Error(ErrorCode::InvalidNoiseSpec, "confusion entries must lie in [0, 1]");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw Error(ErrorCode::InvalidNoiseSpec, "confusion row " + std::to_string(r) + " sums to " +
                                                   std::to_string(sum));
    }
  }
}

NoiseSpec NoiseSpec::identity(std::uint64_t seed) { return uniform(1.0, seed); }

NoiseSpec NoiseSpec::uniform(double diagonal, std::uint64_t seed) {
  NoiseSpec spec;
  spec.seed = seed;
  const double off = (1.0 - diagonal) / static_cast<double>(kNumClasses - 1);
  for (std::size_t r = 0; r < kNumClasses; ++r) {
    for (std::size_t c = 0; c < kNumClasses; ++c) spec.confusion[r][c] = r == c ? diagonal : off;
  }
  return spec;
}

Labeling inject_label_noise(const Labeling& gt, const NoiseSpec& spec) {
  spec.validate();
  Labeling out(gt.size());
  std::mt19937_64 rng(spec.seed);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const auto& row = spec.confusion[static_cast<std::size_t>(gt.classes[i])];
    // 53 random bits -> [0, 1); avoids implementation-defined distributions.
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    double acc = 0.0;
    std::size_t chosen = kNumClasses;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      if (row[c] <= 0.0) continue;
      acc += row[c];
      chosen = c;
      if (u < acc) break;
    }
    out.classes[i] = static_cast<ClassLabel>(chosen);
    out.confidence[i] = row[chosen];
  }
  return out;
}

namespace {

EigenFeatures features_from(const PointCloud& cloud, const std::vector<PointIndex>& nbrs) {
  EigenFeatures f;
  f.neighborhood_size = nbrs.size();
  if (nbrs.size() < 3) return f;

  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (PointIndex j : nbrs) mean += Eigen::Vector3d(cloud[j].x, cloud[j].y, cloud[j].z);
  mean /= static_cast<double>(nbrs.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (PointIndex j : nbrs) {
    const Eigen::Vector3d d = Eigen::Vector3d(cloud[j].x, cloud[j].y, cloud[j].z) - mean;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(nbrs.size());

  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  // Ascending order from Eigen.
  const double l3 = std::max(0.0, solver.eigenvalues()(0));
  const double l2 = std::max(0.0, solver.eigenvalues()(1));
  const double l1 = std::max(0.0, solver.eigenvalues()(2));
  if (!(l1 > 0.0)) return f;

  f.linearity = (l1 - l2) / l1;
  f.planarity = (l2 - l3) / l1;
  f.scattering = l3 / l1;
  f.curvature = l3 / (l1 + l2 + l3);
  Eigen::Vector3d n = solver.eigenvectors().col(0).normalized();
  if (n.z() < 0.0 || (n.z() == 0.0 && (n.y() < 0.0 || (n.y() == 0.0 && n.x() < 0.0)))) n = -n;
  f.normal = {n.x(), n.y(), n.z()};
  f.valid = true;
  return f;
}

}  // namespace

EigenFeatures extract_features(const SpatialIndex& index, PointIndex i, double r) {
  const auto nbrs = index.radius_neighbors(i, r);
  EigenFeatures f = features_from(index.cloud(), nbrs);
  if (!f.valid) {
    throw Error(ErrorCode::DegenerateNeighborhood,
                "point " + std::to_string(i) + " has " + std::to_string(nbrs.size()) +
                    " neighbors without spatial spread at r=" + std::to_string(r));
  }
  return f;
}

std::vector<EigenFeatures> extract_all_features(const SpatialIndex& index, double r, unsigned threads) {
  if (!(r > 0.0)) throw Error(ErrorCode::InvalidRadius, "feature radius must be positive");
  const PointCloud& cloud = index.cloud();
  std::vector<EigenFeatures> out(cloud.size());
  parallel_for(cloud.size(), threads, [&](std::size_t i) {
    std::vector<PointIndex> nbrs;
    index.radius_search(cloud[i], r, nbrs);
    out[i] = features_from(cloud, nbrs);
  });
  return out;
}

std::vector<TrainingSample> make_training_set(const PointCloud& cloud, const Labeling& labels,
                                              double feature_radius, std::size_t per_class_cap,
                                              unsigned threads) {
  labels.validate(cloud.size());
  if (cloud.empty()) return {};
  const SpatialIndex index(cloud);
  std::vector<PointIndex> picked;
  for (ClassLabel c : kAllClasses) {
    const auto members = class_point_cluster(labels, c);
    const std::size_t take = std::min(per_class_cap, members.size());
    for (std::size_t k = 0; k < take; ++k) picked.push_back(members[k * members.size() / take]);
  }
  std::vector<EigenFeatures> feats(picked.size());
  parallel_for(picked.size(), threads, [&](std::size_t k) {
    std::vector<PointIndex> nbrs;
    index.radius_search(cloud[picked[k]], feature_radius, nbrs);
    feats[k] = features_from(cloud, nbrs);
  });
  std::vector<TrainingSample> out;
  for (std::size_t k = 0; k < picked.size(); ++k) {
    if (feats[k].valid) out.push_back({feature_vector(feats[k]), labels.classes[picked[k]]});
  }
  return out;
}

Labeling classify_knn(const std::vector<EigenFeatures>& features, const std::vector<TrainingSample>& training,
                      std::size_t k, unsigned threads) {
  if (training.empty()) throw Error(ErrorCode::NoTrainingData, "k-NN classification needs training samples");
  if (k < 1) throw Error(ErrorCode::InvalidParams, "k must be at least 1");
  const std::size_t k_eff = std::min(k, training.size());

  Labeling out(features.size());
  parallel_for(features.size(), threads, [&](std::size_t i) {
    if (!features[i].valid) {
      out.classes[i] = ClassLabel::Other;
      out.confidence[i] = 0.0;
      return;
    }
    const FeatureVector q = feature_vector(features[i]);
    std::vector<std::pair<double, std::size_t>> dist(training.size());
    for (std::size_t t = 0; t < training.size(); ++t) {
      double d2 = 0.0;
      for (std::size_t a = 0; a < kFeatureDims; ++a) {
        const double d = q[a] - training[t].features[a];
        d2 += d * d;
      }
      dist[t] = {d2, t};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_eff), dist.end());
    std::array<std::size_t, kNumClasses> votes{};
    for (std::size_t n = 0; n < k_eff; ++n) ++votes[static_cast<std::size_t>(training[dist[n].second].label)];
    std::size_t best = 0;
    for (std::size_t c = 1; c < kNumClasses; ++c) {
      if (votes[c] > votes[best]) best = c;
    }
    out.classes[i] = static_cast<ClassLabel>(best);
    out.confidence[i] = static_cast<double>(votes[best]) / static_cast<double>(k_eff);
  });
  return out;
}

Labeling refine_context(const Labeling& labeling, const SpatialIndex& index, const RefineParams& params,
                        unsigned threads) {
  const PointCloud& cloud = index.cloud();
  labeling.validate(cloud.size());
  if (!(params.radius > 0.0)) throw Error(ErrorCode::InvalidRadius, "refinement radius must be positive");

  Labeling current = labeling;
  Labeling next = labeling;
  for (std::size_t pass = 0; pass < params.iterations; ++pass) {
    std::vector<std::uint8_t> changed(cloud.size(), 0);
    parallel_for(cloud.size(), threads, [&](std::size_t i) {
      if (current.confidence[i] >= params.confidence_threshold) return;
      std::vector<PointIndex> nbrs;
      index.radius_search(cloud[i], params.radius, nbrs);
      std::array<double, kNumClasses> weight{};
      double total = 0.0;
      for (PointIndex j : nbrs) {
        if (j == i) continue;
        weight[static_cast<std::size_t>(current.classes[j])] += current.confidence[j];
        total += current.confidence[j];
      }
      if (!(total > 0.0)) return;
      std::size_t best = 0;
      for (std::size_t c = 1; c < kNumClasses; ++c) {
        if (weight[c] > weight[best]) best = c;
      }
      const auto cls = static_cast<ClassLabel>(best);
      const double conf = std::min(1.0, weight[best] / total);
      if (cls != current.classes[i] || conf != current.confidence[i]) changed[i] = 1;
      next.classes[i] = cls;
      next.confidence[i] = conf;
    });
    current = next;
    if (std::none_of(changed.begin(), changed.end(), [](std::uint8_t c) { return c != 0; })) break;
  }
  return current;
}

}  // namespace twinseg
