#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "sgreg/agent_sim.hpp"
#include "sgreg/encoder.hpp"
#include "sgreg/matcher.hpp"
#include "sgreg/pose_estimator.hpp"
#include "sgreg/scene_graph.hpp"

// Quick property checks behind `sgreg verify-invariants`. Each check compares
// the library against a direct restatement of the property it must satisfy.

namespace sgreg {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace invariants {

inline std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

inline double relative_change(const MatrixXd& before, const MatrixXd& after) {
  return (after - before).norm() / std::max(before.norm(), 1e-12);
}

inline Transform roll_90() {
  Transform t;
  t.rotation = Eigen::AngleAxisd(M_PI / 2, Vec3::UnitX()).toRotationMatrix();
  return t;
}

/// x2 is unchanged by yaw + translation and changed by a 90 degree roll.
inline CheckResult encoder_invariance(std::uint64_t seed, int graphs = 5, int transforms = 5) {
  const EncoderWeights w = EncoderWeights::seeded(seed);
  Rng rng(hash_combine(seed, 0x1417));
  double worst = 0.0, roll = kNever;
  for (int g = 0; g < graphs; ++g) {
    GeneratorConfig gc;
    gc.min_nodes = 6;
    gc.max_nodes = 10;
    gc.min_points = 60;
    gc.max_points = 120;
    const SceneGraph base = synthesize_scene_pair(hash_combine(seed, static_cast<std::uint64_t>(g)), gc).a;
    const MatrixXd x2 = encode(base, w).x2;
    for (int t = 0; t < transforms; ++t)
      worst = std::max(worst, relative_change(x2, encode(apply_transform(base, random_4dof_transform(rng.next(), 5.0)), w).x2));
    if (g == 0) roll = relative_change(x2, encode(apply_transform(base, roll_90()), w).x2);
  }
  const bool ok = worst <= 1e-6 && roll > 1e-3;
  return {"encoder 4-DoF invariance", ok,
          "max relative change " + short_number(worst) + ", roll change " + short_number(roll)};
}

/// Rank of a(i,j) within its row under the (value desc, index asc) order.
inline int row_rank(const MatrixXd& a, Eigen::Index i, Eigen::Index j) {
  int r = 0;
  for (Eigen::Index c = 0; c < a.cols(); ++c)
    if (a(i, c) > a(i, j) || (a(i, c) == a(i, j) && c < j)) ++r;
  return r;
}

inline CheckResult node_match_predicate(std::uint64_t seed, int trials = 200) {
  Rng rng(hash_combine(seed, 0x70c));
  int bad = 0;
  for (int t = 0; t < trials; ++t) {
    const auto n = static_cast<Eigen::Index>(1 + rng.below(8)), m = static_cast<Eigen::Index>(1 + rng.below(8));
    MatrixXd a(n, m);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < m; ++j) a(i, j) = std::round(rng.uniform() * 10.0) / 10.0;  // ties on purpose
    const int k = 1 + static_cast<int>(rng.below(3));
    const double thr = rng.uniform(0.0, 0.6);
    std::vector<std::pair<int, int>> expected;
    const MatrixXd at = a.transpose();
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < m; ++j)
        if (a(i, j) >= thr && row_rank(a, i, j) < k && row_rank(at, j, i) < k)
          expected.emplace_back(static_cast<int>(i), static_cast<int>(j));
    std::vector<std::pair<int, int>> got;
    for (const auto& mm : extract_node_matches(a, thr, k)) got.emplace_back(mm.row, mm.col);
    bad += got == expected ? 0 : 1;
  }
  return {"mutual top-k predicate", bad == 0, std::to_string(bad) + " discrepancies in " + std::to_string(trials)};
}

inline CheckResult sinkhorn_marginals(std::uint64_t seed, int trials = 50) {
  Rng rng(hash_combine(seed, 0x5e4));
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const auto n = static_cast<Eigen::Index>(1 + rng.below(10)), m = static_cast<Eigen::Index>(1 + rng.below(10));
    MatrixXd s(n, m);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < m; ++j) s(i, j) = rng.normal(0.0, 2.0);
    const MatrixXd p = sinkhorn(s, 100, 0.5);
    for (Eigen::Index i = 0; i < n; ++i) worst = std::max(worst, std::abs(p.row(i).sum() - 1.0));
    for (Eigen::Index j = 0; j < m; ++j) worst = std::max(worst, std::abs(p.col(j).sum() - 1.0));
  }
  return {"sinkhorn marginals", worst <= 1e-4, "max marginal error " + short_number(worst)};
}

inline std::size_t brute_force_clique(const std::vector<std::vector<bool>>& adj) {
  const std::size_t n = adj.size();
  std::size_t best = 0;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i)
      if (mask >> i & 1u)
        for (std::size_t j = i + 1; j < n && ok; ++j)
          if ((mask >> j & 1u) && !adj[i][j]) ok = false;
    if (ok) best = std::max<std::size_t>(best, static_cast<std::size_t>(__builtin_popcount(mask)));
  }
  return best;
}

inline CheckResult clique_exactness(std::uint64_t seed, int trials = 30) {
  Rng rng(hash_combine(seed, 0xc11));
  int bad = 0;
  for (int t = 0; t < trials; ++t) {
    const std::size_t n = 1 + rng.below(12);
    const double density = rng.uniform(0.2, 0.8);
    std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
    CompatibilityGraph g;
    g.adjacency.assign(n, {});
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (rng.uniform() < density) {
          adj[i][j] = adj[j][i] = true;
          g.adjacency[i].push_back(static_cast<int>(j));
          g.adjacency[j].push_back(static_cast<int>(i));
          ++g.edge_count;
        }
    const auto got = max_clique(g);
    bool is_clique = true;
    for (std::size_t a = 0; a < got.vertices.size(); ++a)
      for (std::size_t b = a + 1; b < got.vertices.size(); ++b)
        is_clique = is_clique && adj[static_cast<std::size_t>(got.vertices[a])][static_cast<std::size_t>(got.vertices[b])];
    bad += is_clique && got.vertices.size() == brute_force_clique(adj) ? 0 : 1;
  }
  return {"maximum clique exactness", bad == 0, std::to_string(bad) + " failures in " + std::to_string(trials)};
}

inline CheckResult gnc_matches_svd(std::uint64_t seed, int trials = 10) {
  Rng rng(hash_combine(seed, 0x9c));
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Transform truth = random_4dof_transform(rng.next(), 5.0);
    CorrespondenceSet c;
    for (int k = 0; k < 50; ++k) {
      Correspondence x;
      x.source = Vec3(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(0, 2));
      x.target = truth * x.source + Vec3(rng.normal(0, 0.005), rng.normal(0, 0.005), rng.normal(0, 0.005));
      c.push_back(x);
    }
    const Transform a = gnc_tls(c).transform, b = svd_align(c);
    worst = std::max(worst, (a.matrix() - b.matrix()).cwiseAbs().maxCoeff());
  }
  return {"outlier-free GNC equals SVD", worst <= 1e-6, "max entry difference " + short_number(worst)};
}

/// Ledger totals against sizes recomputed from each frame's message contents.
inline CheckResult ledger_recount(std::uint64_t seed) {
  SimConfig cfg;
  cfg.frames = 6;
  cfg.dense_interval = 2;
  cfg.scene.min_nodes = 8;
  cfg.scene.max_nodes = 10;
  cfg.scene.min_points = 80;
  cfg.scene.max_points = 150;
  EncoderConfig ec;
  ec.points_per_node = 64;
  const SimResult r = run_simulation(seed, EncoderWeights::seeded(1, ec), cfg);
  std::size_t recount = 0;
  for (const auto& f : r.frames) {
    if (f.bytes_coarse > 0) recount += kHeaderBytes + 4 * f.nodes_sent * (f.feature_dims + 3);
    if (f.bytes_dense > 0)
      recount += kRequestBytes + kHeaderBytes + 4 * f.nodes_sent * (f.feature_dims + 3) + 16 * f.points_sent;
  }
  return {"bandwidth ledger recount", recount == r.ledger.total(),
          "ledger " + std::to_string(r.ledger.total()) + " bytes, recount " + std::to_string(recount)};
}

}  // namespace invariants

inline std::vector<CheckResult> run_invariant_suite(std::uint64_t seed) {
  return {invariants::encoder_invariance(seed),   invariants::node_match_predicate(seed),
          invariants::sinkhorn_marginals(seed),   invariants::clique_exactness(seed),
          invariants::gnc_matches_svd(seed),      invariants::ledger_recount(seed)};
}

}  // namespace sgreg
