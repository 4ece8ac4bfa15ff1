#pragma once

#include <chrono>
#include <optional>
#include <vector>

#include "sgreg/encoder.hpp"
#include "sgreg/matcher.hpp"
#include "sgreg/pose_estimator.hpp"
#include "sgreg/scene_graph.hpp"

namespace sgreg {

struct PipelineConfig {
  MatcherConfig matcher;
  EstimatorConfig estimator;
  bool verify_with_clouds = true;  // pass both scenes' clouds to the estimator
  double min_overlap = 0.0;        // estimates aligning a smaller source fraction are rejected; 0 disables
  double overlap_radius = 0.1;     // meters
};

struct StageTimings {
  double encode = 0.0;  // seconds
  double node_match = 0.0;
  double point_match = 0.0;
  double estimate = 0.0;
  double total = 0.0;  // wall clock of the whole call, measured separately from the stages
};

struct RegistrationResult {
  std::vector<NodeMatch> node_matches;
  CorrespondenceSet correspondences;
  std::optional<EstimateResult> estimate;  // empty when there was too little to estimate from
  double overlap = 0.0;                    // aligned overlap of the estimate, when checked
  bool rejected = false;                   // an estimate existed but fell below min_overlap
  StageTimings timings;
};

class StageClock {
 public:
  StageClock() : last_(std::chrono::steady_clock::now()) {}
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_;
};

/// Point correspondences of every node match, in (row, col) order.
inline CorrespondenceSet match_all_points(const std::vector<NodeMatch>& matches, const FeatureSet& fa,
                                          const FeatureSet& fb, const MatcherConfig& cfg) {
  std::vector<CorrespondenceSet> per_pair;
  per_pair.reserve(matches.size());
  for (const auto& m : matches) per_pair.push_back(match_points(m, fa, fb, cfg));
  return assemble_correspondences(matches, per_pair);
}

/// Encode both graphs, match nodes, match points inside matched nodes and
/// estimate the transform mapping A into B's frame.
inline RegistrationResult register_graphs(const SceneGraph& a, const SceneGraph& b, const EncoderWeights& w,
                                          const PipelineConfig& cfg = {}) {
  RegistrationResult r;
  const auto start = std::chrono::steady_clock::now();
  StageClock clock;
  const FeatureSet fa = encode(a, w);
  const FeatureSet fb = encode(b, w);
  r.timings.encode = clock.lap();
  r.node_matches = match_nodes(fa, fb, w, cfg.matcher);
  r.timings.node_match = clock.lap();
  r.correspondences = match_all_points(r.node_matches, fa, fb, cfg.matcher);
  r.timings.point_match = clock.lap();
  try {
    if (cfg.verify_with_clouds)
      r.estimate = estimate(r.correspondences, a.all_points(), b.all_points(), cfg.estimator);
    else
      r.estimate = estimate(r.correspondences, {}, {}, cfg.estimator);
  } catch (const InsufficientDataError&) {
    r.estimate.reset();
  }
  if (r.estimate && cfg.min_overlap > 0.0) {
    r.overlap = aligned_overlap(r.estimate->transform, a.all_points(), b.all_points(), cfg.overlap_radius);
    if (r.overlap < cfg.min_overlap) {
      r.estimate.reset();
      r.rejected = true;
    }
  }
  r.timings.estimate = clock.lap();
  r.timings.total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace sgreg
