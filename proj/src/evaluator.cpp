#include "twinseg/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>

#include "twinseg/error.hpp"

namespace twinseg {

void EvalParams::validate() const {
  auto ok = [](double t) { return t > 0.0 && t <= 1.0; };
  if (!ok(iou_threshold)) throw Error(ErrorCode::InvalidParams, "IoU threshold must lie in (0, 1]");
  for (double t : threshold_sweep) {
    if (!ok(t)) throw Error(ErrorCode::InvalidParams, "sweep thresholds must lie in (0, 1]");
  }
}

std::vector<double> parse_sweep(const std::string& spec) {
  std::vector<double> parts;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidSweep, "cannot parse sweep '" + spec + "'");
    }
  }
  if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
    throw Error(ErrorCode::InvalidSweep, "sweep must be start:stop:step with step > 0 and stop >= start");
  }
  std::vector<double> out;
  for (std::size_t i = 0;; ++i) {
    const double t = std::round((parts[0] + static_cast<double>(i) * parts[2]) * 1e9) / 1e9;
    if (t > parts[1] + 1e-9) break;
    if (!(t > 0.0) || t > 1.0) throw Error(ErrorCode::InvalidSweep, "sweep thresholds must lie in (0, 1]");
    out.push_back(t);
  }
  return out;
}

double instance_iou(std::span<const PointIndex> a, std::span<const PointIndex> b) {
  if (a.empty() && b.empty()) throw Error(ErrorCode::UndefinedIoU, "IoU of two empty sets");
  std::size_t inter = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++inter;
      ++ia;
      ++ib;
    }
  }
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

namespace {

struct InstanceInfo {
  InstanceId id;
  ClassLabel cls;
  std::size_t size;
};

/// Same-class overlapping (pred, gt) pairs; computed once per labeling pair.
struct Candidates {
  std::vector<InstanceInfo> pred;
  std::vector<InstanceInfo> gt;
  struct Pair {
    std::size_t p;  // position in pred
    std::size_t g;  // position in gt
    double iou;
  };
  std::vector<Pair> pairs;  // IoU descending, then pred id, gt id
};

std::vector<InstanceInfo> instance_infos(const Labeling& labels) {
  std::vector<InstanceInfo> out;
  for (const auto& [id, members] : instance_clusters(labels)) {
    out.push_back({id, majority_class(labels, members), members.size()});
  }
  return out;
}

Candidates build_candidates(const Labeling& pred, const Labeling& gt) {
  if (pred.instances.size() != gt.instances.size() || pred.classes.size() != gt.classes.size()) {
    throw Error(ErrorCode::MissingLabels, "prediction and ground truth cover different point counts");
  }
  Candidates cand;
  cand.pred = instance_infos(pred);
  cand.gt = instance_infos(gt);
  std::unordered_map<InstanceId, std::size_t> pred_pos, gt_pos;
  for (std::size_t k = 0; k < cand.pred.size(); ++k) pred_pos[cand.pred[k].id] = k;
  for (std::size_t k = 0; k < cand.gt.size(); ++k) gt_pos[cand.gt[k].id] = k;

  std::unordered_map<std::uint64_t, std::size_t> inter;
  for (std::size_t i = 0; i < pred.instances.size(); ++i) {
    const InstanceId p = pred.instances[i];
    const InstanceId g = gt.instances[i];
    if (p != kNoInstance && g != kNoInstance) ++inter[(std::uint64_t{p} << 32) | g];
  }
  for (const auto& [key, count] : inter) {
    const std::size_t p = pred_pos.at(static_cast<InstanceId>(key >> 32));
    const std::size_t g = gt_pos.at(static_cast<InstanceId>(key & 0xffffffffu));
    if (cand.pred[p].cls != cand.gt[g].cls) continue;
    const double iou = static_cast<double>(count) /
                       static_cast<double>(cand.pred[p].size + cand.gt[g].size - count);
    cand.pairs.push_back({p, g, iou});
  }
  std::sort(cand.pairs.begin(), cand.pairs.end(), [&](const auto& a, const auto& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    if (a.p != b.p) return cand.pred[a.p].id < cand.pred[b.p].id;
    return cand.gt[a.g].id < cand.gt[b.g].id;
  });
  return cand;
}

constexpr std::size_t kUnmatched = static_cast<std::size_t>(-1);

MatchResult match_candidates(const Candidates& cand, double threshold, MatchStrategy strategy) {
  // Pairs are IoU-descending, so the eligible ones form a prefix.
  std::size_t eligible = 0;
  while (eligible < cand.pairs.size() && cand.pairs[eligible].iou >= threshold) ++eligible;

  std::vector<std::size_t> pred_match(cand.pred.size(), kUnmatched);
  std::vector<std::size_t> gt_match(cand.gt.size(), kUnmatched);
  std::vector<std::size_t> pair_of_pred(cand.pred.size(), kUnmatched);
  for (std::size_t k = 0; k < eligible; ++k) {
    const auto& pr = cand.pairs[k];
    if (pred_match[pr.p] == kUnmatched && gt_match[pr.g] == kUnmatched) {
      pred_match[pr.p] = pr.g;
      gt_match[pr.g] = pr.p;
    }
  }

  if (strategy == MatchStrategy::GreedyMaximal) {
    // Augmenting paths never unmatch a vertex, so greedy matches stay
    // covered and the result reaches maximum cardinality.
    std::vector<std::vector<std::size_t>> adj(cand.pred.size());
    for (std::size_t k = 0; k < eligible; ++k) adj[cand.pairs[k].p].push_back(cand.pairs[k].g);
    std::vector<std::size_t> seen(cand.gt.size(), kUnmatched);
    std::function<bool(std::size_t, std::size_t)> augment = [&](std::size_t p, std::size_t stamp) {
      for (std::size_t g : adj[p]) {
        if (seen[g] == stamp) continue;
        seen[g] = stamp;
        if (gt_match[g] == kUnmatched || augment(gt_match[g], stamp)) {
          pred_match[p] = g;
          gt_match[g] = p;
          return true;
        }
      }
      return false;
    };
    for (std::size_t p = 0; p < cand.pred.size(); ++p) {
      if (pred_match[p] == kUnmatched && !adj[p].empty()) augment(p, p);
    }
  }

  MatchResult res;
  res.threshold = threshold;
  for (const auto& info : cand.pred) ++res.per_class[static_cast<std::size_t>(info.cls)].num_pred;
  for (const auto& info : cand.gt) ++res.per_class[static_cast<std::size_t>(info.cls)].num_gt;
  for (std::size_t k = 0; k < eligible; ++k) {
    const auto& pr = cand.pairs[k];
    if (pred_match[pr.p] != pr.g) continue;
    const ClassLabel cls = cand.pred[pr.p].cls;
    ++res.per_class[static_cast<std::size_t>(cls)].true_positives;
    res.matches.push_back({cand.pred[pr.p].id, cand.gt[pr.g].id, cls, pr.iou});
  }

  double psum = 0.0, rsum = 0.0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    ClassPR& pr = res.per_class[c];
    pr.precision_defined = pr.num_pred > 0;
    pr.recall_defined = pr.num_gt > 0;
    pr.precision = pr.precision_defined ? static_cast<double>(pr.true_positives) / static_cast<double>(pr.num_pred) : 0.0;
    pr.recall = pr.recall_defined ? static_cast<double>(pr.true_positives) / static_cast<double>(pr.num_gt) : 0.0;
    if (c >= kNumShapeClasses) continue;
    if (pr.precision_defined) {
      psum += pr.precision;
      ++res.precision_classes;
    }
    if (pr.recall_defined) {
      rsum += pr.recall;
      ++res.recall_classes;
    }
  }
  if (res.precision_classes > 0) res.mean_precision = psum / static_cast<double>(res.precision_classes);
  if (res.recall_classes > 0) res.mean_recall = rsum / static_cast<double>(res.recall_classes);
  return res;
}

CurvePoint to_curve_point(const MatchResult& m) {
  CurvePoint cp;
  cp.threshold = m.threshold;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    cp.precision[c] = m.per_class[c].precision;
    cp.recall[c] = m.per_class[c].recall;
  }
  cp.mean_precision = m.mean_precision;
  cp.mean_recall = m.mean_recall;
  return cp;
}

}  // namespace

MatchResult match_instances(const Labeling& pred, const Labeling& gt, double threshold, MatchStrategy strategy) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw Error(ErrorCode::InvalidParams, "IoU threshold must lie in (0, 1]");
  return match_candidates(build_candidates(pred, gt), threshold, strategy);
}

std::vector<CurvePoint> pr_vs_iou(const Labeling& pred, const Labeling& gt, std::span<const double> sweep) {
  if (sweep.empty()) throw Error(ErrorCode::InvalidSweep, "threshold sweep is empty");
  const Candidates cand = build_candidates(pred, gt);
  std::vector<CurvePoint> out;
  for (double t : sweep) {
    if (!(t > 0.0 && t <= 1.0)) throw Error(ErrorCode::InvalidSweep, "sweep thresholds must lie in (0, 1]");
    out.push_back(to_curve_point(match_candidates(cand, t, MatchStrategy::GreedyMaximal)));
  }
  return out;
}

ClassMetrics class_metrics(std::span<const ClassLabel> pred, std::span<const ClassLabel> gt) {
  if (pred.size() != gt.size()) throw Error(ErrorCode::InvalidParams, "class label sequences differ in length");
  ClassMetrics m;
  std::array<std::size_t, kNumClasses> tp{}, fp{}, fn{};
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const auto p = static_cast<std::size_t>(pred[i]);
    const auto g = static_cast<std::size_t>(gt[i]);
    if (p == g) {
      ++correct;
      ++tp[p];
    } else {
      ++fp[p];
      ++fn[g];
    }
  }
  m.accuracy = pred.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(pred.size());
  double sum = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const std::size_t denom = tp[c] + fp[c] + fn[c];
    m.present[c] = denom > 0;
    if (m.present[c]) {
      m.iou[c] = static_cast<double>(tp[c]) / static_cast<double>(denom);
      sum += m.iou[c];
      ++present;
    }
  }
  m.miou = present > 0 ? sum / static_cast<double>(present) : 0.0;
  return m;
}

EvalReport evaluate(const Labeling& pred, const Labeling& gt, const EvalParams& params) {
  params.validate();
  EvalReport report;
  report.instances = match_instances(pred, gt, params.iou_threshold);
  report.classes = class_metrics(pred.classes, gt.classes);
  if (!params.threshold_sweep.empty()) report.curve = pr_vs_iou(pred, gt, params.threshold_sweep);
  return report;
}

}  // namespace twinseg
