#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "twinseg/geometry.hpp"
#include "twinseg/labels.hpp"
#include "twinseg/spatial_index.hpp"

namespace twinseg {

/// Covariance eigen-features of a point's r-neighborhood, built from the
/// sorted eigenvalues l1 >= l2 >= l3.
struct EigenFeatures {
  double linearity = 0.0;   ///< (l1 - l2) / l1
  double planarity = 0.0;   ///< (l2 - l3) / l1
  double scattering = 0.0;  ///< l3 / l1
  double curvature = 0.0;   ///< l3 / (l1 + l2 + l3)
  Point3 normal{0.0, 0.0, 1.0};  ///< eigenvector of l3, oriented z >= 0
  std::size_t neighborhood_size = 0;
  bool valid = false;
};

inline constexpr std::size_t kFeatureDims = 5;
using FeatureVector = std::array<double, kFeatureDims>;

/// Linearity, planarity, scattering, curvature and |normal.z| (verticality).
[[nodiscard]] FeatureVector feature_vector(const EigenFeatures& f);

/// Ground-truth classes passed through with confidence 1; instances and
/// boundary flags cleared.
[[nodiscard]] Labeling classify_passthrough(const Labeling& gt);

/// Row-stochastic confusion matrix: row = true class, column = predicted class.
struct NoiseSpec {
  std::array<std::array<double, kNumClasses>, kNumClasses> confusion{};
  std::uint64_t seed = 0;

  /// Throws InvalidNoiseSpec unless entries are in [0,1] and rows sum to 1 +- 1e-9.
  void validate() const;

  [[nodiscard]] static NoiseSpec identity(std::uint64_t seed = 0);
  /// `diagonal` on the diagonal, the remainder spread evenly over the other 7 classes.
  [[nodiscard]] static NoiseSpec uniform(double diagonal, std::uint64_t seed = 0);
};

/// Resamples each point's class from its true-class row with a generator
/// seeded by `spec.seed` (points visited in index order). Confidence becomes
/// the chosen row entry. Instances and boundary flags are cleared.
[[nodiscard]] Labeling inject_label_noise(const Labeling& gt, const NoiseSpec& spec);

/// Features of point `i` over the radius-`r` neighborhood found in `index`.
/// Throws DegenerateNeighborhood with fewer than 3 neighbors or a
/// zero-spread neighborhood.
[[nodiscard]] EigenFeatures extract_features(const SpatialIndex& index, PointIndex i, double r);

/// Features for every point of the index's cloud; degenerate points come back
/// with valid == false.
[[nodiscard]] std::vector<EigenFeatures> extract_all_features(const SpatialIndex& index, double r,
                                                              unsigned threads = 1);

struct TrainingSample {
  FeatureVector features{};
  ClassLabel label = ClassLabel::Other;
};

/// Up to `per_class_cap` samples per class from a labeled cloud, taken at
/// evenly spaced positions of each class cluster so the result is
/// deterministic.
[[nodiscard]] std::vector<TrainingSample> make_training_set(const PointCloud& cloud, const Labeling& labels,
                                                            double feature_radius, std::size_t per_class_cap,
                                                            unsigned threads = 1);

/// Majority vote of the k nearest training samples in feature space (ties to
/// the smaller class code); confidence is the winning vote fraction. When the
/// training set is smaller than k every sample votes. Points with invalid
/// features are labeled Other with confidence 0 so refinement can fix them.
/// Throws NoTrainingData for an empty training set, InvalidParams for k < 1.
[[nodiscard]] Labeling classify_knn(const std::vector<EigenFeatures>& features,
                                    const std::vector<TrainingSample>& training, std::size_t k,
                                    unsigned threads = 1);

struct RefineParams {
  double radius = 0.04;
  std::size_t iterations = 2;
  double confidence_threshold = 0.8;
};

/// Contextual refinement. Each pass, every point with confidence below the
/// threshold takes the confidence-weighted majority class of its other
/// neighbors within `radius` (ties to the smaller class code) and the winning
/// weight share as its new confidence. Updates are synchronous, so the result
/// does not depend on `threads`. Stops early when a pass changes nothing.
/// The index must cover the whole labeled cloud.
[[nodiscard]] Labeling refine_context(const Labeling& labeling, const SpatialIndex& index,
                                      const RefineParams& params, unsigned threads = 1);

}  // namespace twinseg
