#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <numeric>

#include "sgreg/metrics.hpp"
#include "sgreg/pose_estimator.hpp"

namespace sgreg {
namespace {

Vec3 random_point(Rng& rng, double half = 4.0) {
  return Vec3(rng.uniform(-half, half), rng.uniform(-half, half), rng.uniform(0.0, 2.5));
}

/// n pairs; the first round(n * inlier_ratio) follow `truth` up to noise, the
/// rest map to uniform random targets.
CorrespondenceSet synthetic_pairs(std::size_t n, double inlier_ratio, const Transform& truth, Rng& rng,
                                  double noise = 0.005) {
  CorrespondenceSet c;
  const auto inliers = static_cast<std::size_t>(std::round(static_cast<double>(n) * inlier_ratio));
  for (std::size_t k = 0; k < n; ++k) {
    Correspondence x;
    x.source = random_point(rng);
    x.target = k < inliers ? Vec3(truth * x.source + Vec3(rng.normal(0, noise), rng.normal(0, noise), rng.normal(0, noise)))
                           : Vec3(truth * random_point(rng));
    x.score = rng.uniform();
    c.push_back(x);
  }
  return c;
}

CompatibilityGraph random_graph(std::size_t n, double density, Rng& rng, std::vector<std::vector<bool>>& adj) {
  CompatibilityGraph g;
  g.adjacency.assign(n, {});
  adj.assign(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.uniform() < density) {
        adj[i][j] = adj[j][i] = true;
        g.adjacency[i].push_back(static_cast<int>(j));
        g.adjacency[j].push_back(static_cast<int>(i));
        ++g.edge_count;
      }
  return g;
}

std::size_t enumerate_max_clique(const std::vector<std::vector<bool>>& adj) {
  const std::size_t n = adj.size();
  std::size_t best = 0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    const auto size = static_cast<std::size_t>(std::popcount(mask));
    if (size <= best) continue;
    bool clique = true;
    for (std::size_t i = 0; i < n && clique; ++i)
      for (std::size_t j = i + 1; j < n && clique; ++j)
        clique = !((mask >> i) & 1u) || !((mask >> j) & 1u) || adj[i][j];
    if (clique) best = size;
  }
  return best;
}

CompatibilityGraph from_edges(std::size_t n, const std::vector<std::pair<int, int>>& edges) {
  CompatibilityGraph g;
  g.adjacency.assign(n, {});
  for (const auto& [a, b] : edges) {
    g.adjacency[static_cast<std::size_t>(a)].push_back(b);
    g.adjacency[static_cast<std::size_t>(b)].push_back(a);
    ++g.edge_count;
  }
  for (auto& l : g.adjacency) std::sort(l.begin(), l.end());
  return g;
}

// --- non-maximum suppression -------------------------------------------------

TEST(Nms, SeparatedSourcesSurvive) {
  CorrespondenceSet c(5);
  for (int k = 0; k < 5; ++k) c[static_cast<std::size_t>(k)].source = Vec3(k * 0.5, 0, 0);
  EXPECT_EQ(nms_correspondences(c, 0.1).size(), 5u);
}

TEST(Nms, HigherScoreWins) {
  CorrespondenceSet c(2);
  c[0].score = 0.4;
  c[0].target = Vec3(1, 0, 0);
  c[1].score = 0.9;
  c[1].target = Vec3(2, 0, 0);
  const auto out = nms_correspondences(c, 0.05);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].score, 0.9);
  EXPECT_EQ(out[0].target, Vec3(2, 0, 0));
}

TEST(Nms, EqualsQuadraticGreedy) {
  Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    CorrespondenceSet c;
    for (int k = 0; k < 200; ++k) {
      Correspondence x;
      x.source = Vec3(rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 0.3));
      x.score = std::round(rng.uniform() * 20) / 20;
      c.push_back(x);
    }
    std::vector<std::size_t> order(c.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return c[a].score > c[b].score; });
    std::vector<std::size_t> kept;
    for (auto i : order) {
      bool free = true;
      for (auto j : kept) free = free && (c[i].source - c[j].source).norm() >= 0.1;
      if (free) kept.push_back(i);
    }
    std::sort(kept.begin(), kept.end());
    const auto got = nms_correspondences(c, 0.1);
    ASSERT_EQ(got.size(), kept.size());
    for (std::size_t k = 0; k < kept.size(); ++k) EXPECT_EQ(got[k].source, c[kept[k]].source);
  }
}

// --- compatibility ------------------------------------------------------------

TEST(Compatibility, RigidPairsAlwaysCompatible) {
  Rng rng(2);
  const Transform t = random_4dof_transform(3, 5.0);
  for (int k = 0; k < 100; ++k) {
    Correspondence a, b;
    a.source = random_point(rng);
    b.source = random_point(rng);
    a.target = t * a.source;
    b.target = t * b.source;
    EXPECT_TRUE(compatible(a, b, 1e-9));
  }
}

TEST(Compatibility, LengthGapBeyondDelta) {
  Correspondence a, b;
  b.source = Vec3(1, 0, 0);
  b.target = Vec3(0, 3, 0);
  EXPECT_FALSE(compatible(a, b, 0.5));
}

TEST(Compatibility, OnlyCorruptedPairFails) {
  Rng rng(4);
  const Transform t = random_4dof_transform(5, 5.0);
  CorrespondenceSet c = synthetic_pairs(100, 1.0, t, rng, 0.0);
  c[37].target += Vec3(2.0, -1.5, 0.5);
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = i + 1; j < c.size(); ++j) {
      const double gap = std::abs((c[i].source - c[j].source).norm() - (c[i].target - c[j].target).norm());
      ASSERT_EQ(compatible(c[i], c[j], 0.1), gap < 0.1);
      if (i != 37 && j != 37) {
        ASSERT_TRUE(compatible(c[i], c[j], 0.1));
      }
    }
}

TEST(Pyramid, MatchesPairwiseRecomputation) {
  Rng rng(6);
  const CorrespondenceSet c = synthetic_pairs(50, 0.5, random_4dof_transform(7, 3.0), rng, 0.02);
  const std::vector<double> levels = {0.05, 0.2, 0.6};
  const auto pyr = build_pyramid(c, levels);
  ASSERT_EQ(pyr.size(), 3u);
  for (std::size_t l = 0; l < 3; ++l) {
    std::size_t edges = 0;
    for (int i = 0; i < 50; ++i)
      for (int j = 0; j < 50; ++j) {
        if (i == j) continue;
        const bool expect = compatible(c[static_cast<std::size_t>(i)], c[static_cast<std::size_t>(j)], levels[l]);
        ASSERT_EQ(pyr[l].has_edge(i, j), expect);
        edges += expect && i < j ? 1 : 0;
      }
    EXPECT_EQ(pyr[l].edge_count, edges);
    if (l > 0) {
      EXPECT_GE(pyr[l].edge_count, pyr[l - 1].edge_count);
    }
  }
}

TEST(Pyramid, RejectsUnorderedLevels) {
  EXPECT_THROW(build_pyramid({}, {0.2, 0.1}), InvalidArgument);
  EXPECT_THROW(build_pyramid({}, {0.0}), InvalidArgument);
}

// --- maximum clique ---------------------------------------------------------------

TEST(Clique, Triangle) { EXPECT_EQ(max_clique(from_edges(3, {{0, 1}, {1, 2}, {0, 2}})).vertices.size(), 3u); }

TEST(Clique, PicksLargerComponent) {
  const auto g = from_edges(7, {{0, 1}, {0, 2}, {1, 2}, {3, 4}, {3, 5}, {3, 6}, {4, 5}, {4, 6}, {5, 6}});
  auto v = max_clique(g).vertices;
  std::sort(v.begin(), v.end());
  EXPECT_EQ(v, (std::vector<int>{3, 4, 5, 6}));
}

TEST(Clique, EqualsSubsetEnumeration) {
  Rng rng(8);
  for (int t = 0; t < 100; ++t) {
    std::vector<std::vector<bool>> adj;
    const auto g = random_graph(1 + rng.below(20), 0.5, rng, adj);
    const auto r = max_clique(g);
    EXPECT_TRUE(r.exact);
    for (std::size_t a = 0; a < r.vertices.size(); ++a)
      for (std::size_t b = a + 1; b < r.vertices.size(); ++b)
        ASSERT_TRUE(adj[static_cast<std::size_t>(r.vertices[a])][static_cast<std::size_t>(r.vertices[b])]);
    EXPECT_EQ(r.vertices.size(), enumerate_max_clique(adj)) << "graph " << t;
  }
}

// --- closed-form alignment ----------------------------------------------------------

TEST(Svd, IdenticalSetsGiveIdentity) {
  Rng rng(9);
  Points p;
  for (int k = 0; k < 20; ++k) p.push_back(random_point(rng));
  const Transform t = svd_align(p, p);
  EXPECT_LT((t.matrix() - Mat4::Identity()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Svd, RecoversKnownMotion) {
  Rng rng(10);
  const Transform truth = Transform::from_yaw(deg2rad(30.0), Vec3(1, 2, 0));
  Points p, q;
  for (int k = 0; k < 10; ++k) {
    p.push_back(random_point(rng));
    q.push_back(truth * p.back());
  }
  const Transform t = svd_align(p, q);
  EXPECT_LT(rotation_angle(t.rotation.transpose() * truth.rotation), 1e-9);
  EXPECT_LT((t.translation - truth.translation).norm(), 1e-9);
}

TEST(Svd, CollinearIsDegenerate) {
  const Points p = {Vec3(0, 0, 0), Vec3(1, 1, 1), Vec3(2, 2, 2)};
  EXPECT_THROW(svd_align(p, p), DegenerateError);
}

// --- GNC-TLS --------------------------------------------------------------------------

TEST(Gnc, OutlierFreeEqualsSvd) {
  Rng rng(11);
  for (int t = 0; t < 10; ++t) {
    const CorrespondenceSet c = synthetic_pairs(60, 1.0, random_4dof_transform(rng.next(), 5.0), rng);
    EXPECT_LT((gnc_tls(c).transform.matrix() - svd_align(c).matrix()).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(Gnc, HalfOutliers) {
  Rng rng(12);
  for (int t = 0; t < 10; ++t) {
    const Transform truth = random_4dof_transform(rng.next(), 5.0);
    const auto e = evaluate_frame(gnc_tls(synthetic_pairs(100, 0.5, truth, rng)).transform, truth);
    EXPECT_LT(e.rte, 0.01);
    EXPECT_LT(e.rre, 0.5);
  }
}

TEST(Gnc, IsotropicCovarianceMatchesEuclidean) {
  Rng rng(13);
  const double sigma = 0.05;
  const Transform truth = random_4dof_transform(14, 5.0);
  CorrespondenceSet plain = synthetic_pairs(80, 0.7, truth, rng, 0.01), tagged = plain;
  for (auto& c : tagged) c.target_cov = Mat3::Identity() * sigma * sigma;
  ResidualModel m;
  m.covariance_threshold = m.inlier_threshold / sigma;
  for (const auto& c : tagged) {
    const double euclid = (c.target - truth * c.source).squaredNorm();
    EXPECT_NEAR(normalized_residual(c, truth, m) * m.covariance_threshold * m.covariance_threshold,
                euclid / (sigma * sigma), 1e-6 * std::max(1.0, euclid / (sigma * sigma)));
  }
  const Transform a = gnc_tls(plain, m).transform, b = gnc_tls(tagged, m).transform;
  EXPECT_LT((a.matrix() - b.matrix()).cwiseAbs().maxCoeff(), 1e-6);
}

// --- verification -----------------------------------------------------------------------

Points object_cloud(Rng& rng) {
  // a 1 m crate: floor plate plus two walls
  Points p;
  for (int k = 0; k < 1500; ++k) {
    const double u = rng.uniform(), v = rng.uniform();
    switch (k % 3) {
      case 0: p.emplace_back(u, v, 0.0); break;
      case 1: p.emplace_back(u, 0.0, v); break;
      default: p.emplace_back(0.0, u, v); break;
    }
  }
  return p;
}

TEST(Verify, TruePoseScoresBelowHalfVoxel) {
  Rng rng(15);
  const Points x = object_cloud(rng);
  const Transform truth = random_4dof_transform(16, 3.0);
  const VerifyConfig cfg;
  EXPECT_LT(verify(truth, x, transform_points(x, truth), cfg), cfg.voxel / 2);
}

TEST(Verify, FarCandidatePaysFullPenalty) {
  Rng rng(17);
  const Points x = object_cloud(rng);
  const VerifyConfig cfg;
  const Transform off = Transform::from_yaw(0.0, Vec3(5, 0, 0));
  EXPECT_NEAR(verify(off, x, x, cfg), cfg.penalty_factor * cfg.voxel, 1e-12);
}

TEST(Verify, TrueCandidateRanksFirst) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    Rng rng(100 + s);
    Points x = object_cloud(rng);
    for (auto& p : x) p += Vec3(rng.normal(0, 0.005), rng.normal(0, 0.005), rng.normal(0, 0.005));
    const Transform truth = random_4dof_transform(s, 3.0);
    const Points y = transform_points(x, truth);
    const Vec3 dir = Vec3(rng.normal(), rng.normal(), rng.normal()).normalized();
    const Transform wrong = Transform::from_yaw(0.0, 0.5 * dir) * truth;
    ASSERT_LT(verify(truth, x, y), verify(wrong, x, y)) << "scene " << s;
  }
}

// --- estimate ---------------------------------------------------------------------------------

TEST(Estimate, HighInlierRatioSkipsCliqueSearch) {
  Rng rng(18);
  const Transform truth = random_4dof_transform(19, 4.0);
  const auto r = estimate(synthetic_pairs(300, 0.9, truth, rng), {}, {});
  EXPECT_EQ(r.strategy, Strategy::GncOnly);
  EXPECT_EQ(r.clique_seconds, 0.0);
  for (const auto& c : r.candidates) EXPECT_EQ(c.level, -1);
}

TEST(Estimate, LowInlierRatioRoom) {
  Rng rng(20);
  const Transform truth = random_4dof_transform(21, 4.0);
  const CorrespondenceSet c = synthetic_pairs(500, 0.1, truth, rng);
  Points x, y;
  for (const auto& p : c) {
    x.push_back(p.source);
    y.push_back(truth * p.source);
  }
  const auto r = estimate(c, x, y);
  EXPECT_EQ(r.strategy, Strategy::MacGnc);
  EXPECT_LT(evaluate_frame(r.transform, truth).rte, 0.05);
}

TEST(Estimate, ConsistentWrongMotionIsExposedByScore) {
  // every pair agrees on a motion 1.5 m and 40 degrees away from the truth
  Rng rng(22);
  Points x = object_cloud(rng);
  for (auto& p : x) p += Vec3(3, 1, 0);
  const Transform truth = random_4dof_transform(23, 3.0);
  const Transform decoy = Transform::from_yaw(deg2rad(40), Vec3(1.5, 0, 0)) * truth;
  const Points y = transform_points(x, truth);
  CorrespondenceSet c;
  for (std::size_t k = 0; k < x.size(); k += 5) {
    Correspondence p;
    p.source = x[k];
    p.target = decoy * x[k];
    c.push_back(p);
  }
  const auto r = estimate(c, x, y);
  EXPECT_LT(evaluate_frame(r.transform, decoy).rte, 1e-6);
  EXPECT_GT(r.score, verify(truth, x, y));
  EXPECT_GT(r.score, 5 * verify(truth, x, y));
}

TEST(Estimate, TooFewPairs) {
  EXPECT_THROW(estimate(CorrespondenceSet(2), {}, {}), InsufficientDataError);
}

TEST(Estimate, DiagnosticReportListsCandidates) {
  Rng rng(24);
  const auto r = estimate(synthetic_pairs(200, 0.15, random_4dof_transform(25, 4.0), rng), {}, {});
  const std::string report = diagnostic_report(r);
  EXPECT_NE(report.find("strategy MAC+GNC"), std::string::npos);
  EXPECT_EQ(static_cast<std::size_t>(std::count(report.begin(), report.end(), '\n')), r.candidates.size() + 1);
}

// --- metrics ------------------------------------------------------------------------------------

TEST(Metrics, ExactEstimate) {
  const Transform t = random_4dof_transform(26, 4.0);
  const auto e = evaluate_frame(t, t);
  EXPECT_NEAR(e.rte, 0.0, 1e-12);
  EXPECT_NEAR(e.rre, 0.0, 1e-6);
  EXPECT_TRUE(e.success);
}

TEST(Metrics, TenDegreeYawFails) {
  const Transform t = random_4dof_transform(27, 4.0);
  const auto e = evaluate_frame(t * Transform::from_yaw(deg2rad(10)), t);
  EXPECT_NEAR(e.rre, 10.0, 1e-9);
  EXPECT_FALSE(e.success);
}

TEST(Metrics, SuccessEqualsThresholdRecomputation) {
  Rng rng(28);
  for (int k = 0; k < 500; ++k) {
    const Transform truth = random_4dof_transform(rng.next(), 5.0);
    const Vec3 axis = Vec3(rng.normal(), rng.normal(), rng.normal()).normalized();
    Transform noise;
    noise.rotation = Eigen::AngleAxisd(deg2rad(rng.uniform(0, 10)), axis).toRotationMatrix();
    noise.translation = Vec3(rng.normal(), rng.normal(), rng.normal()) * 0.15;
    const Transform est = truth * noise;
    const auto e = evaluate_frame(est, truth);
    const double rte = noise.translation.norm();
    const double rre = rad2deg(Eigen::AngleAxisd(noise.rotation).angle());
    EXPECT_NEAR(e.rte, rte, 1e-9);
    EXPECT_NEAR(e.rre, rre, 1e-6);
    EXPECT_EQ(e.success, rte < 0.2 && rre < 5.0);
  }
}

Points spread_points() {
  Points p;
  for (int k = 0; k < 50; ++k) p.emplace_back(k % 5, (k / 5) % 5, k / 25);
  return p;
}

TEST(Recall, PerfectEstimates) {
  std::vector<PairOutcome> pairs(4);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    pairs[k].truth = random_4dof_transform(k, 5.0);
    pairs[k].estimate = pairs[k].truth;
    pairs[k].corresponded_source = spread_points();
  }
  EXPECT_EQ(registration_recall(pairs), 1.0);
}

TEST(Recall, IdentityOnSeparatedPairs) {
  std::vector<PairOutcome> pairs(4);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    pairs[k].truth = Transform::from_yaw(1.0, Vec3(10.0 + k, 0, 0));
    pairs[k].estimate = Transform::identity();
    pairs[k].corresponded_source = spread_points();
  }
  EXPECT_EQ(registration_recall(pairs), 0.0);
}

TEST(Recall, MixedBatch) {
  std::vector<PairOutcome> pairs(7);
  const Points src = spread_points();
  int tally = 0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    pairs[k].truth = random_4dof_transform(k + 40, 5.0);
    pairs[k].corresponded_source = src;
    const double shift = 0.05 * static_cast<double>(k) + 0.01;  // rmse equals the shift
    if (k != 3) pairs[k].estimate = Transform::from_yaw(0.0, Vec3(shift, 0, 0)) * pairs[k].truth;
    tally += k != 3 && shift < 0.2 ? 1 : 0;
  }
  EXPECT_NEAR(registration_recall(pairs), tally / 7.0, 1e-15);
  EXPECT_EQ(tally, 3);
}

TEST(Metrics, NodeScoresAndRatios) {
  GroundTruth gt;
  gt.node_matches = {{1, 10}, {2, 20}, {3, 30}};
  std::vector<NodeMatch> pred(2);
  pred[0].source = 1;
  pred[0].target = 10;
  pred[1].source = 2;
  pred[1].target = 30;
  const auto s = node_scores(pred, gt);
  EXPECT_DOUBLE_EQ(s.recall, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.precision, 0.5);

  const Transform t = random_4dof_transform(50, 3.0);
  CorrespondenceSet c(4);
  for (std::size_t k = 0; k < 4; ++k) {
    c[k].source = Vec3(static_cast<double>(k), 0, 0);
    c[k].target = t * c[k].source + (k == 2 ? Vec3(0.5, 0, 0) : Vec3::Zero());
  }
  EXPECT_DOUBLE_EQ(inlier_ratio(c, t), 0.75);
  EXPECT_DOUBLE_EQ(pseudo_inlier_ratio(c, {1, 2}, t), 0.5);
}

}  // namespace
}  // namespace sgreg
