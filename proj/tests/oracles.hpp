#pragma once

// Naive reference implementations (quadratic scans, exhaustive search) used
// only by the tests. They share plain data types with the library, no logic.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "twinseg/geometry.hpp"
#include "twinseg/labels.hpp"

namespace oracle {

using twinseg::ClassLabel;
using twinseg::InstanceId;
using twinseg::Labeling;
using twinseg::Point3;
using twinseg::PointCloud;
using twinseg::PointIndex;

inline double d2(const Point3& a, const Point3& b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return dx * dx + dy * dy + dz * dz;
}

inline std::vector<PointIndex> radius(const PointCloud& cloud, const Point3& c, double r,
                                      const std::vector<PointIndex>* subset = nullptr) {
  std::vector<PointIndex> out;
  auto visit = [&](PointIndex i) {
    if (d2(cloud[i], c) <= r * r) out.push_back(i);
  };
  if (subset) {
    for (PointIndex i : *subset) visit(i);
  } else {
    for (PointIndex i = 0; i < cloud.size(); ++i) visit(i);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Boundary census by full scan; `by_instance` counts ids > 0, else classes.
inline std::vector<std::uint8_t> boundaries(const PointCloud& cloud, const Labeling& l, double r, bool by_instance) {
  std::vector<std::uint8_t> out(cloud.size(), 0);
  for (PointIndex i = 0; i < cloud.size(); ++i) {
    std::set<long> seen;
    for (PointIndex j = 0; j < cloud.size(); ++j) {
      if (d2(cloud[i], cloud[j]) > r * r) continue;
      if (by_instance) {
        if (l.instances[j] != 0) seen.insert(l.instances[j]);
      } else {
        seen.insert(static_cast<long>(l.classes[j]));
      }
    }
    out[i] = seen.size() >= 2 ? 1 : 0;
  }
  return out;
}

struct NaiveUnionFind {
  std::vector<std::size_t> parent;
  explicit NaiveUnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

/// Quadratic reference for the instance segmenter: union of all same-class
/// traversable pairs within eps(class), nearest-neighbor attachment of the
/// rest, size filter, ids ordered by smallest member.
inline std::vector<InstanceId> instances(const PointCloud& cloud, const Labeling& l,
                                         const std::function<double(ClassLabel)>& eps,
                                         const std::function<std::size_t(ClassLabel)>& mu, bool use_boundary) {
  const std::size_t n = cloud.size();
  auto traversable = [&](std::size_t i) { return !use_boundary || l.boundary[i] == 0; };
  NaiveUnionFind uf(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!traversable(i)) continue;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!traversable(j) || l.classes[i] != l.classes[j]) continue;
      const double e = eps(l.classes[i]);
      if (d2(cloud[i], cloud[j]) <= e * e) uf.unite(i, j);
    }
  }
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> root(n, kNone);
  for (std::size_t i = 0; i < n; ++i) {
    if (traversable(i)) root[i] = uf.find(i);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (traversable(i)) continue;
    const double e = eps(l.classes[i]);
    double best = e * e;
    std::size_t pick = kNone;
    for (std::size_t j = 0; j < n; ++j) {
      if (!traversable(j) || l.classes[j] != l.classes[i]) continue;
      const double d = d2(cloud[i], cloud[j]);
      if (d < best || (d == best && pick == kNone)) {
        best = d;
        pick = j;
      }
    }
    if (pick != kNone) root[i] = uf.find(pick);
  }
  std::map<std::size_t, std::size_t> sizes;
  for (std::size_t r : root) {
    if (r != kNone) ++sizes[r];
  }
  std::vector<InstanceId> out(n, 0);
  std::map<std::size_t, InstanceId> ids;
  for (std::size_t i = 0; i < n; ++i) {
    if (root[i] == kNone || sizes[root[i]] < mu(l.classes[i])) continue;
    auto [it, fresh] = ids.try_emplace(root[i], static_cast<InstanceId>(ids.size() + 1));
    out[i] = it->second;
  }
  return out;
}

/// Partition of points into groups, independent of id values.
inline std::set<std::vector<PointIndex>> groups(const std::vector<InstanceId>& ids) {
  std::map<InstanceId, std::vector<PointIndex>> by_id;
  for (PointIndex i = 0; i < ids.size(); ++i) {
    if (ids[i] != 0) by_id[ids[i]].push_back(i);
  }
  std::set<std::vector<PointIndex>> out;
  for (auto& [id, members] : by_id) out.insert(members);
  return out;
}

/// Maximum number of disjoint (pred, gt) pairs by exhaustive search.
inline std::size_t max_assignment(std::size_t num_pred, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::vector<std::vector<std::size_t>> adj(num_pred);
  for (const auto& [p, g] : edges) adj[p].push_back(g);
  std::set<std::size_t> used;
  std::function<std::size_t(std::size_t)> best = [&](std::size_t p) -> std::size_t {
    if (p == num_pred) return 0;
    std::size_t top = best(p + 1);
    for (std::size_t g : adj[p]) {
      if (used.count(g)) continue;
      used.insert(g);
      top = std::max(top, 1 + best(p + 1));
      used.erase(g);
    }
    return top;
  };
  return best(0);
}

/// Random cloud in a box with a few classes; handy for index and BFS checks.
inline std::pair<PointCloud, Labeling> random_cloud(std::mt19937_64& rng, std::size_t n, double side,
                                                    int num_classes) {
  std::uniform_real_distribution<double> u(0.0, side);
  std::uniform_int_distribution<int> c(0, num_classes - 1);
  std::vector<Point3> pts;
  Labeling l(n);
  for (std::size_t i = 0; i < n; ++i) {
    pts.push_back({u(rng), u(rng), u(rng)});
    l.classes[i] = static_cast<ClassLabel>(c(rng));
  }
  return {PointCloud(std::move(pts)), std::move(l)};
}

}  // namespace oracle
