#pragma once

#include <cmath>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "sgreg/geometry.hpp"
#include "sgreg/matcher.hpp"
#include "sgreg/scene_graph.hpp"

namespace sgreg {

struct SuccessThresholds {
  double rte = 0.2;   // meters
  double rre = 5.0;   // degrees
  double rmse = 0.2;  // meters, registration recall
  double inlier_distance = 0.1;  // meters, a correspondence is a true inlier within this
};

struct FrameEvaluation {
  double rte = 0.0;  // meters
  double rre = 0.0;  // degrees
  bool success = false;
};

/// Errors of the relative transform truth^-1 * estimate; success needs both
/// strictly below their thresholds.
inline FrameEvaluation evaluate_frame(const Transform& estimate, const Transform& truth,
                                      const SuccessThresholds& th = {}) {
  const Transform delta = truth.inverse() * estimate;
  FrameEvaluation e;
  e.rte = delta.translation.norm();
  e.rre = rad2deg(rotation_angle(delta.rotation));
  e.success = e.rte < th.rte && e.rre < th.rre;
  return e;
}

/// RMSE between estimate * p and truth * p over the given source points.
inline double aligned_rmse(const Transform& estimate, const Transform& truth, const Points& source) {
  if (source.empty()) return 0.0;
  double total = 0.0;
  for (const auto& p : source) total += (estimate * p - truth * p).squaredNorm();
  return std::sqrt(total / static_cast<double>(source.size()));
}

/// Source points of A that have a ground-truth point match in B.
inline Points corresponded_source_points(const SceneGraph& a, const GroundTruth& gt) {
  Points out;
  for (const auto& [key, pairs] : gt.point_matches) {
    const auto& node = a.node(key.first);
    for (const auto& [u, v] : pairs) out.push_back(node.points[static_cast<std::size_t>(u)]);
  }
  return out;
}

struct PairOutcome {
  std::optional<Transform> estimate;  // empty when registration produced nothing
  Transform truth;
  Points corresponded_source;
};

/// Fraction of pairs whose aligned RMSE is strictly below the threshold;
/// missing estimates count as failures.
inline double registration_recall(const std::vector<PairOutcome>& pairs, double rmse_threshold = 0.2) {
  if (pairs.empty()) return 0.0;
  std::size_t ok = 0;
  for (const auto& p : pairs)
    if (p.estimate && aligned_rmse(*p.estimate, p.truth, p.corresponded_source) < rmse_threshold) ++ok;
  return static_cast<double>(ok) / static_cast<double>(pairs.size());
}

struct NodeScores {
  double recall = 0.0;
  double precision = 0.0;
  std::size_t true_positives = 0;
};

/// NR over ground-truth pairs and NP over predicted pairs. An empty ground
/// truth gives recall 1; an empty prediction gives precision 1.
inline NodeScores node_scores(const std::vector<NodeMatch>& predicted, const GroundTruth& gt) {
  std::set<std::pair<int, int>> pred;
  for (const auto& m : predicted) pred.emplace(m.source, m.target);
  NodeScores s;
  for (const auto& p : pred) s.true_positives += gt.node_matches.count(p);
  s.recall = gt.node_matches.empty() ? 1.0
                                     : static_cast<double>(s.true_positives) / static_cast<double>(gt.node_matches.size());
  s.precision = pred.empty() ? 1.0 : static_cast<double>(s.true_positives) / static_cast<double>(pred.size());
  return s;
}

inline bool is_true_inlier(const Correspondence& c, const Transform& truth, double distance) {
  return (truth * c.source - c.target).norm() < distance;
}

/// Fraction of true inliers; 0 for an empty set.
inline double inlier_ratio(const CorrespondenceSet& c, const Transform& truth, double distance = 0.1) {
  if (c.empty()) return 0.0;
  std::size_t n = 0;
  for (const auto& x : c) n += is_true_inlier(x, truth, distance) ? 1 : 0;
  return static_cast<double>(n) / static_cast<double>(c.size());
}

/// Fraction of true inliers among the selected (pseudo inlier) indices.
inline double pseudo_inlier_ratio(const CorrespondenceSet& c, const std::vector<std::size_t>& selected,
                                  const Transform& truth, double distance = 0.1) {
  if (selected.empty()) return 0.0;
  std::size_t n = 0;
  for (auto k : selected) n += is_true_inlier(c.at(k), truth, distance) ? 1 : 0;
  return static_cast<double>(n) / static_cast<double>(selected.size());
}

}  // namespace sgreg
