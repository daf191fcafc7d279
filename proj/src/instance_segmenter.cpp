#include "twinseg/instance_segmenter.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <limits>

#include "twinseg/error.hpp"
#include "twinseg/parallel.hpp"
#include "twinseg/union_find.hpp"

namespace twinseg {

ClassParams BfsParams::for_class(ClassLabel c) const {
  if (auto it = per_class_overrides.find(c); it != per_class_overrides.end()) return it->second;
  return {epsilon, mu_min_points};
}

double BfsParams::max_epsilon() const {
  double e = 0.0;
  for (ClassLabel c : kAllClasses) e = std::max(e, for_class(c).epsilon);
  return e;
}

void BfsParams::validate() const {
  for (ClassLabel c : kAllClasses) {
    const ClassParams p = for_class(c);
    if (!(p.epsilon > 0.0) || p.mu < 1) {
      throw Error(ErrorCode::InvalidParams,
                  "epsilon must be > 0 and mu >= 1 (class " + std::string(class_name(c)) + ")");
    }
  }
  if (boundary_constraint && !(boundary_radius > 0.0)) {
    throw Error(ErrorCode::InvalidParams, "boundary radius must be > 0");
  }
}

BfsParams BfsParams::gt_preset() {
  BfsParams p;
  p.epsilon = 0.04;
  p.mu_min_points = 20;
  p.per_class_overrides.clear();
  return p;
}

std::vector<std::uint8_t> detect_boundaries(const SpatialIndex& index, const Labeling& labeling, double r,
                                            BoundaryMode mode, unsigned threads) {
  const PointCloud& cloud = index.cloud();
  const std::size_t n = cloud.size();
  if (mode == BoundaryMode::GtInstance && labeling.instances.size() != n) {
    throw Error(ErrorCode::MissingLabels, "boundary detection needs instance labels for every point");
  }
  if (mode == BoundaryMode::PredictedClass && labeling.classes.size() != n) {
    throw Error(ErrorCode::MissingLabels, "boundary detection needs class labels for every point");
  }
  if (!(r > 0.0)) throw Error(ErrorCode::InvalidRadius, "boundary radius must be > 0");

  std::vector<std::uint8_t> flags(n, 0);
  parallel_for(n, threads, [&](std::size_t i) {
    thread_local std::vector<PointIndex> nbrs;
    nbrs.clear();
    index.radius_search(cloud[i], r, nbrs);
    if (mode == BoundaryMode::GtInstance) {
      InstanceId seen = kNoInstance;
      for (PointIndex j : nbrs) {
        const InstanceId id = labeling.instances[j];
        if (id == kNoInstance) continue;
        if (seen == kNoInstance) {
          seen = id;
        } else if (id != seen) {
          flags[i] = 1;
          return;
        }
      }
    } else {
      const ClassLabel own = labeling.classes[i];
      for (PointIndex j : nbrs) {
        if (labeling.classes[j] != own) {
          flags[i] = 1;
          return;
        }
      }
    }
  });
  return flags;
}

namespace {

constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

void check_labels(const PointCloud& cloud, const Labeling& labeling, const BfsParams& params) {
  if (labeling.classes.size() != cloud.size()) {
    throw Error(ErrorCode::MissingLabels, "class labels do not cover the cloud");
  }
  if (params.boundary_constraint && labeling.boundary.size() != cloud.size()) {
    throw Error(ErrorCode::MissingLabels, "boundary constraint needs boundary flags for every point");
  }
}

bool traversable(const Labeling& labeling, const BfsParams& params, PointIndex i) {
  return !params.boundary_constraint || labeling.boundary[i] == 0;
}

/// Component per point (kNone when unassigned) and the class of each component.
struct Assignment {
  std::vector<std::uint32_t> comp;
  std::vector<ClassLabel> comp_class;
};

/// Gives every unassigned point the component of its nearest same-class
/// traversed point within epsilon(class).
void attach_remaining(Assignment& a, const PointCloud& cloud, const Labeling& labeling, const BfsParams& params) {
  std::array<std::vector<PointIndex>, kNumClasses> traversed;
  std::array<std::vector<PointIndex>, kNumClasses> pending;
  for (PointIndex i = 0; i < cloud.size(); ++i) {
    const auto c = static_cast<std::size_t>(labeling.classes[i]);
    (a.comp[i] == kNone ? pending : traversed)[c].push_back(i);
  }
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (pending[c].empty() || traversed[c].empty()) continue;
    const double eps = params.for_class(static_cast<ClassLabel>(c)).epsilon;
    const SpatialIndex index(cloud, std::span<const PointIndex>(traversed[c]));
    std::vector<std::uint32_t> found(pending[c].size(), kNone);
    for (std::size_t k = 0; k < pending[c].size(); ++k) {
      if (auto hit = index.nearest_within(cloud[pending[c][k]], eps)) found[k] = a.comp[*hit];
    }
    // Written afterwards so attached points never serve as anchors.
    for (std::size_t k = 0; k < pending[c].size(); ++k) a.comp[pending[c][k]] = found[k];
  }
}

/// Drops components below `mu_of(class)` and numbers the rest 1..K by
/// smallest member index.
template <typename MuOf>
InstanceResult finalize(const Assignment& a, const Labeling& labeling, MuOf&& mu_of) {
  std::vector<std::size_t> sizes(a.comp_class.size(), 0);
  for (std::uint32_t c : a.comp) {
    if (c != kNone) ++sizes[c];
  }
  InstanceResult res;
  res.labeling = labeling;
  res.labeling.instances.assign(labeling.classes.size(), kNoInstance);
  std::vector<InstanceId> id_of(a.comp_class.size(), kNoInstance);
  InstanceId next = 1;
  for (std::size_t i = 0; i < a.comp.size(); ++i) {
    const std::uint32_t c = a.comp[i];
    if (c == kNone) continue;
    if (sizes[c] < mu_of(a.comp_class[c])) {
      ++res.discarded;
      continue;
    }
    if (id_of[c] == kNoInstance) id_of[c] = next++;
    res.labeling.instances[i] = id_of[c];
  }
  res.component_count = next - 1;
  return res;
}

Assignment union_blocks(std::span<const BlockComponents> blocks, const PointCloud& cloud) {
  std::vector<std::uint32_t> offset(blocks.size() + 1, 0);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    offset[b + 1] = offset[b] + static_cast<std::uint32_t>(blocks[b].component_count);
  }
  std::vector<ClassLabel> node_class(offset.back());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    std::copy(blocks[b].classes.begin(), blocks[b].classes.end(), node_class.begin() + offset[b]);
  }

  DisjointSet ds(offset.back());
  std::vector<std::uint32_t> owner(cloud.size(), kNone);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const BlockComponents& blk = blocks[b];
    for (std::size_t k = 0; k < blk.indices.size(); ++k) {
      const PointIndex g = blk.indices[k];
      if (g >= cloud.size()) throw Error(ErrorCode::InvalidParams, "block references a point outside the cloud");
      const std::uint32_t node = offset[b] + blk.component[k];
      if (owner[g] == kNone) {
        owner[g] = node;
        continue;
      }
      if (node_class[owner[g]] != node_class[node]) {
        throw Error(ErrorCode::LabelConflict, "blocks disagree on the class of point " + std::to_string(g));
      }
      ds.unite(owner[g], node);
    }
  }

  Assignment a;
  a.comp.assign(cloud.size(), kNone);
  std::vector<std::uint32_t> compact(offset.back(), kNone);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (owner[i] == kNone) continue;
    const std::uint32_t root = ds.find(owner[i]);
    if (compact[root] == kNone) {
      compact[root] = static_cast<std::uint32_t>(a.comp_class.size());
      a.comp_class.push_back(node_class[root]);
    }
    a.comp[i] = compact[root];
  }
  return a;
}

Assignment assign_components(std::span<const BlockComponents> blocks, const PointCloud& cloud,
                             const Labeling& labeling, const BfsParams& params) {
  Assignment a = union_blocks(blocks, cloud);
  attach_remaining(a, cloud, labeling, params);
  return a;
}

}  // namespace

BlockComponents bfs_traverse(const PointCloud& cloud, const Labeling& labeling, const BfsParams& params,
                             std::span<const PointIndex> subset) {
  check_labels(cloud, labeling, params);
  std::array<std::vector<PointIndex>, kNumClasses> groups;
  auto take = [&](PointIndex i) {
    if (i >= cloud.size()) throw Error(ErrorCode::InvalidParams, "subset index outside the cloud");
    if (traversable(labeling, params, i)) groups[static_cast<std::size_t>(labeling.classes[i])].push_back(i);
  };
  if (subset.empty()) {
    for (PointIndex i = 0; i < cloud.size(); ++i) take(i);
  } else {
    for (PointIndex i : subset) take(i);
  }

  std::vector<std::pair<PointIndex, std::uint32_t>> labeled;
  BlockComponents out;
  std::vector<PointIndex> nbrs;
  std::deque<std::size_t> queue;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    auto& group = groups[c];
    if (group.empty()) continue;
    std::sort(group.begin(), group.end());
    group.erase(std::unique(group.begin(), group.end()), group.end());
    const double eps = params.for_class(static_cast<ClassLabel>(c)).epsilon;
    const SpatialIndex index(cloud, std::span<const PointIndex>(group));
    std::vector<std::uint32_t> comp(group.size(), kNone);
    auto local = [&](PointIndex g) {
      return static_cast<std::size_t>(std::lower_bound(group.begin(), group.end(), g) - group.begin());
    };
    for (std::size_t seed = 0; seed < group.size(); ++seed) {
      if (comp[seed] != kNone) continue;
      const auto id = static_cast<std::uint32_t>(out.component_count++);
      out.classes.push_back(static_cast<ClassLabel>(c));
      comp[seed] = id;
      queue.push_back(seed);
      while (!queue.empty()) {
        const std::size_t cur = queue.front();
        queue.pop_front();
        nbrs.clear();
        index.radius_search(cloud[group[cur]], eps, nbrs);
        for (PointIndex g : nbrs) {
          const std::size_t l = local(g);
          if (comp[l] == kNone) {
            comp[l] = id;
            queue.push_back(l);
          }
        }
      }
    }
    for (std::size_t k = 0; k < group.size(); ++k) labeled.emplace_back(group[k], comp[k]);
  }
  std::sort(labeled.begin(), labeled.end());
  out.indices.reserve(labeled.size());
  out.component.reserve(labeled.size());
  for (const auto& [g, id] : labeled) {
    out.indices.push_back(g);
    out.component.push_back(id);
  }
  return out;
}

InstanceResult merge_blocks(std::span<const BlockComponents> blocks, const PointCloud& cloud,
                            const Labeling& labeling, const BfsParams& params) {
  params.validate();
  check_labels(cloud, labeling, params);
  const Assignment a = assign_components(blocks, cloud, labeling, params);
  return finalize(a, labeling, [&](ClassLabel c) { return params.for_class(c).mu; });
}

InstanceResult bfs_components(const PointCloud& cloud, const Labeling& labeling, const BfsParams& params) {
  params.validate();
  const BlockComponents whole = bfs_traverse(cloud, labeling, params);
  return merge_blocks(std::span<const BlockComponents>(&whole, 1), cloud, labeling, params);
}

InstanceResult segment_instances(const PointCloud& cloud, const Labeling& labeling, const BfsParams& params,
                                 const BlockGrid& grid, unsigned threads) {
  params.validate();
  check_labels(cloud, labeling, params);
  if (grid.params.block_size - grid.params.block_stride < params.max_epsilon()) {
    throw Error(ErrorCode::InvalidPartition, "block overlap must be at least epsilon");
  }
  std::vector<BlockComponents> per_block(grid.blocks.size());
  parallel_for(grid.blocks.size(), threads, [&](std::size_t b) {
    per_block[b] = bfs_traverse(cloud, labeling, params, grid.blocks[b].indices);
  });
  return merge_blocks(per_block, cloud, labeling, params);
}

InstanceResult canonicalize_ids(InstanceResult result) {
  std::map<InstanceId, InstanceId> remap;
  InstanceId next = 1;
  for (InstanceId& id : result.labeling.instances) {
    if (id == kNoInstance) continue;
    auto [it, inserted] = remap.try_emplace(id, next);
    if (inserted) ++next;
    id = it->second;
  }
  result.component_count = next - 1;
  return result;
}

std::vector<MuSweepPoint> sweep_mu(const PointCloud& cloud, const Labeling& labeling, const BfsParams& params,
                                   std::span<const std::size_t> mu_values, const Labeling& gt, double iou) {
  if (mu_values.empty()) throw Error(ErrorCode::InvalidSweep, "mu sweep is empty");
  for (std::size_t mu : mu_values) {
    if (mu < 1) throw Error(ErrorCode::InvalidSweep, "mu values must be >= 1");
  }
  params.validate();
  check_labels(cloud, labeling, params);
  const BlockComponents whole = bfs_traverse(cloud, labeling, params);
  const Assignment a = assign_components(std::span<const BlockComponents>(&whole, 1), cloud, labeling, params);
  std::vector<MuSweepPoint> out;
  for (std::size_t mu : mu_values) {
    InstanceResult r = finalize(a, labeling, [mu](ClassLabel) { return mu; });
    MuSweepPoint pt;
    pt.mu = mu;
    pt.instances = r.component_count;
    pt.match = match_instances(r.labeling, gt, iou);
    out.push_back(std::move(pt));
  }
  return out;
}

}  // namespace twinseg
