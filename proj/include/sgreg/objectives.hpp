#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sgreg/common.hpp"
#include "sgreg/encoder.hpp"
#include "sgreg/matcher.hpp"
#include "sgreg/scene_graph.hpp"

namespace sgreg {

inline constexpr double kLogClamp = 1e-12;

inline double clamped_log(double v) { return std::log(std::max(v, kLogClamp)); }

using IndexPairs = std::vector<std::pair<int, int>>;

/// Ground-truth node matches as (row in A, row in B) of two feature sets.
inline IndexPairs gt_index_pairs(const GroundTruth& gt, const std::vector<int>& ids_a, const std::vector<int>& ids_b) {
  std::map<int, int> row_a, row_b;
  for (std::size_t i = 0; i < ids_a.size(); ++i) row_a[ids_a[i]] = static_cast<int>(i);
  for (std::size_t j = 0; j < ids_b.size(); ++j) row_b[ids_b[j]] = static_cast<int>(j);
  IndexPairs out;
  for (const auto& [a, b] : gt.node_matches) {
    auto ia = row_a.find(a);
    auto ib = row_b.find(b);
    if (ia != row_a.end() && ib != row_b.end()) out.emplace_back(ia->second, ib->second);
  }
  return out;
}

/// -1/2 sum over layers and GT pairs of log A(i, j).
inline double loss_gnn(const std::vector<MatrixXd>& assignments, const IndexPairs& gt) {
  double total = 0.0;
  for (const auto& a : assignments)
    for (const auto& [i, j] : gt) total -= 0.5 * clamped_log(a(i, j));
  return total;
}

/// InfoNCE: -log of the positive's share of exp(f_i . f) over the positive
/// and every negative row.
inline double loss_contrastive(const VectorXd& fi, const VectorXd& fj, const MatrixXd& negatives) {
  if (negatives.rows() == 0) throw InvalidArgument("loss_contrastive: no negatives");
  VectorXd logits(negatives.rows() + 1);
  logits[0] = fi.dot(fj);
  logits.tail(negatives.rows()) = negatives * fi;
  return log_sum_exp(logits) - logits[0];
}

/// Dustbin optimal-transport NLL over matched cells and unmatched points.
/// `a_hat` is (n+1) x (m+1) with the dustbin in the last row and column.
inline double loss_ot(const MatrixXd& a_hat, const IndexPairs& matches, const std::vector<int>& unmatched_a,
                      const std::vector<int>& unmatched_b) {
  const auto n = a_hat.rows() - 1, m = a_hat.cols() - 1;
  double total = 0.0;
  for (const auto& [u, v] : matches) total -= clamped_log(a_hat(u, v));
  for (int u : unmatched_a) total -= clamped_log(a_hat(u, m));
  for (int v : unmatched_b) total -= clamped_log(a_hat(n, v));
  return total;
}

// ---------------------------------------------------------------------------
// Analytic gradients

/// Value and dL/dS of loss_gnn(dual_normalize(S)) for one layer. The clamp is
/// treated as inactive.
inline std::pair<double, MatrixXd> loss_gnn_dual_gradient(const MatrixXd& s, const IndexPairs& gt) {
  const auto n = s.rows(), m = s.cols();
  MatrixXd row_soft(n, m), col_soft(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::RowVectorXd e = (s.row(i).array() - s.row(i).maxCoeff()).exp();
    row_soft.row(i) = e / e.sum();
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    const VectorXd e = (s.col(j).array() - s.col(j).maxCoeff()).exp();
    col_soft.col(j) = e / e.sum();
  }
  // d log A_ij / dS = (e_j - R_i.) on row i plus (e_i - C_.j) on column j
  MatrixXd grad = MatrixXd::Zero(n, m);
  double value = 0.0;
  for (const auto& [i, j] : gt) {
    value -= 0.5 * clamped_log(row_soft(i, j) * col_soft(i, j));
    grad.row(i) += 0.5 * row_soft.row(i);
    grad(i, j) -= 0.5;
    grad.col(j) += 0.5 * col_soft.col(j);
    grad(i, j) -= 0.5;
  }
  return {value, grad};
}

/// Value and dL/dS of loss_ot(sinkhorn(S)), differentiating through every
/// unrolled iteration. The clamp is treated as inactive.
inline std::pair<double, MatrixXd> loss_ot_sinkhorn_gradient(const MatrixXd& s, int iters, double dustbin_score,
                                                             const IndexPairs& matches,
                                                             const std::vector<int>& unmatched_a,
                                                             const std::vector<int>& unmatched_b) {
  if (iters < 1) throw InvalidArgument("sinkhorn: iters must be at least 1");
  const auto n = s.rows(), m = s.cols();
  const MatrixXd z = augment_with_dustbin(s, dustbin_score);
  VectorXd log_mu = VectorXd::Zero(n + 1), log_nu = VectorXd::Zero(m + 1);
  log_mu[n] = std::log(static_cast<double>(std::max<Eigen::Index>(m, 1)));
  log_nu[m] = std::log(static_cast<double>(std::max<Eigen::Index>(n, 1)));

  // forward, keeping every iterate
  std::vector<VectorXd> us, vs;
  VectorXd u = VectorXd::Zero(n + 1), v = VectorXd::Zero(m + 1);
  vs.push_back(v);
  for (int t = 0; t < iters; ++t) {
    for (Eigen::Index a = 0; a <= n; ++a) u[a] = log_mu[a] - log_sum_exp((z.row(a).transpose() + v).eval());
    for (Eigen::Index b = 0; b <= m; ++b) v[b] = log_nu[b] - log_sum_exp((z.col(b) + u).eval());
    us.push_back(u);
    vs.push_back(v);
  }
  MatrixXd log_plan = z;
  log_plan.colwise() += u;
  log_plan.rowwise() += v.transpose();

  // dL/dlog_plan: -1 on every scored cell
  MatrixXd g_plan = MatrixXd::Zero(n + 1, m + 1);
  double value = 0.0;
  auto hit = [&](Eigen::Index a, Eigen::Index b) {
    value -= std::max(log_plan(a, b), std::log(kLogClamp));
    g_plan(a, b) -= 1.0;
  };
  for (const auto& [a, b] : matches) hit(a, b);
  for (int a : unmatched_a) hit(a, m);
  for (int b : unmatched_b) hit(n, b);

  MatrixXd gz = g_plan;
  VectorXd gu = g_plan.rowwise().sum();
  VectorXd gv = g_plan.colwise().sum().transpose();
  for (int t = iters - 1; t >= 0; --t) {
    const VectorXd& ut = us[static_cast<std::size_t>(t)];
    const VectorXd& vprev = vs[static_cast<std::size_t>(t)];
    // v_t[b] = log_nu[b] - LSE_a(z[a,b] + u_t[a])
    for (Eigen::Index b = 0; b <= m; ++b) {
      if (gv[b] == 0.0) continue;
      const VectorXd col = z.col(b) + ut;
      const VectorXd p = (col.array() - log_sum_exp(col)).exp();
      gz.col(b) -= gv[b] * p;
      gu -= gv[b] * p;
    }
    // u_t[a] = log_mu[a] - LSE_b(z[a,b] + v_{t-1}[b])
    VectorXd gv_prev = VectorXd::Zero(m + 1);
    for (Eigen::Index a = 0; a <= n; ++a) {
      if (gu[a] == 0.0) continue;
      const VectorXd row = z.row(a).transpose() + vprev;
      const VectorXd p = (row.array() - log_sum_exp(row)).exp();
      gz.row(a) -= gu[a] * p.transpose();
      gv_prev -= gu[a] * p;
    }
    gu.setZero();
    gv = gv_prev;
  }
  return {value, gz.topLeftCorner(n, m)};
}

/// Max over coordinates of |analytic - numeric| / max(|numeric|_inf, 1e-12),
/// with central differences of step h as the numeric gradient.
inline double finite_difference_check(const std::function<double(const VectorXd&)>& f,
                                      const std::function<VectorXd(const VectorXd&)>& grad, const VectorXd& x,
                                      double h = 1e-5) {
  const VectorXd analytic = grad(x);
  VectorXd numeric(x.size());
  VectorXd probe = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    probe[k] = x[k] + h;
    const double up = f(probe);
    probe[k] = x[k] - h;
    const double down = f(probe);
    probe[k] = x[k];
    numeric[k] = (up - down) / (2.0 * h);
  }
  return (analytic - numeric).lpNorm<Eigen::Infinity>() / std::max(numeric.lpNorm<Eigen::Infinity>(), 1e-12);
}

// ---------------------------------------------------------------------------
// Loss report over an encoded scene pair

struct LossReport {
  double l_gnn = 0.0;
  double l_shape = 0.0;  // contrastive + optimal transport
  double l_total = 0.0;
  std::map<std::string, double> terms;
};

/// Point-level supervision for one node pair: mutual nearest sampled points
/// within `radius` after mapping A into B's frame; everything else is unmatched.
struct PointSupervision {
  IndexPairs matches;
  std::vector<int> unmatched_a, unmatched_b;
};

inline PointSupervision point_supervision(const Points& pa, const std::vector<bool>& mask_a, const Points& pb,
                                          const std::vector<bool>& mask_b, const Transform& a_to_b, double radius) {
  Points ta, vb;
  std::vector<int> rows_a, rows_b;
  for (std::size_t u = 0; u < pa.size(); ++u)
    if (mask_a[u]) {
      ta.push_back(a_to_b * pa[u]);
      rows_a.push_back(static_cast<int>(u));
    }
  for (std::size_t v = 0; v < pb.size(); ++v)
    if (mask_b[v]) {
      vb.push_back(pb[v]);
      rows_b.push_back(static_cast<int>(v));
    }
  PointSupervision sup;
  std::vector<bool> used_a(ta.size(), false), used_b(vb.size(), false);
  if (!ta.empty() && !vb.empty()) {
    PointGrid grid_b(vb, radius), grid_a(ta, radius);
    for (std::size_t u = 0; u < ta.size(); ++u) {
      const long v = grid_b.nearest_within(ta[u], radius);
      if (v < 0) continue;
      if (grid_a.nearest_within(vb[static_cast<std::size_t>(v)], radius) != static_cast<long>(u)) continue;
      sup.matches.emplace_back(rows_a[u], rows_b[static_cast<std::size_t>(v)]);
      used_a[u] = true;
      used_b[static_cast<std::size_t>(v)] = true;
    }
  }
  for (std::size_t u = 0; u < ta.size(); ++u)
    if (!used_a[u]) sup.unmatched_a.push_back(rows_a[u]);
  for (std::size_t v = 0; v < vb.size(); ++v)
    if (!used_b[v]) sup.unmatched_b.push_back(rows_b[v]);
  return sup;
}

/// Row-normalized features times temperature, then dual normalization.
inline MatrixXd cosine_assignment(const MatrixXd& xa, const MatrixXd& xb, double temperature) {
  auto unit = [](MatrixXd x) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double nrm = x.row(i).norm();
      if (nrm > 0) x.row(i) /= nrm;
    }
    return x;
  };
  return dual_normalize(temperature * unit(xa) * unit(xb).transpose());
}

/// Losses of the fixed encoder on one pair: node NLL at the GNN output and the
/// fused output, InfoNCE on shape features, dustbin OT on the points of every
/// ground-truth node pair.
inline LossReport compute_losses(const FeatureSet& fa, const FeatureSet& fb, const EncoderWeights& w,
                                 const GroundTruth& gt, const MatcherConfig& mcfg = {},
                                 double point_match_distance = 0.05) {
  LossReport r;
  const IndexPairs pairs = gt_index_pairs(gt, fa.ids, fb.ids);
  if (fa.x2.rows() > 0 && fb.x2.rows() > 0) {
    std::vector<MatrixXd> layers;
    layers.push_back(cosine_assignment(fa.x1, fb.x1, mcfg.node_temperature));
    layers.push_back(dual_normalize(node_similarity(fa.x2, fb.x2, w.node_linear, mcfg.node_temperature, mcfg.cosine_nodes)));
    r.l_gnn = loss_gnn(layers, pairs);
  }

  std::map<int, int> row_b;
  for (std::size_t j = 0; j < fb.ids.size(); ++j) row_b[fb.ids[j]] = static_cast<int>(j);
  double contrastive = 0.0, ot = 0.0;
  for (const auto& [i, j] : pairs) {
    auto neg = gt.negatives.find(fa.ids[static_cast<std::size_t>(i)]);
    if (neg != gt.negatives.end() && !neg->second.empty()) {
      MatrixXd rows(static_cast<Eigen::Index>(neg->second.size()), fb.shape.cols());
      Eigen::Index k = 0;
      for (int id : neg->second) rows.row(k++) = fb.shape.row(row_b.at(id));
      contrastive += loss_contrastive(fa.shape.row(i).transpose(), fb.shape.row(j).transpose(), rows);
    }
    const auto ia = static_cast<std::size_t>(i), ib = static_cast<std::size_t>(j);
    const auto sup = point_supervision(fa.node_points[ia], fa.point_mask[ia], fb.node_points[ib], fb.point_mask[ib],
                                       gt.true_transform, point_match_distance);
    const MatrixXd s = point_similarity(fa.point_feats[ia], fb.point_feats[ib], fa.point_mask[ia], fb.point_mask[ib]);
    ot += loss_ot(sinkhorn(s, mcfg.sinkhorn_iters, mcfg.dustbin_score), sup.matches, sup.unmatched_a, sup.unmatched_b);
  }
  r.terms["gnn"] = r.l_gnn;
  r.terms["contrastive"] = contrastive;
  r.terms["ot"] = ot;
  r.l_shape = contrastive + ot;
  r.l_total = r.l_gnn + r.l_shape;
  return r;
}

}  // namespace sgreg
