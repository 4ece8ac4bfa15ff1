#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <tuple>
#include <vector>

#include "sgreg/common.hpp"
#include "sgreg/encoder.hpp"
#include "sgreg/geometry.hpp"

namespace sgreg {

struct NodeMatch {
  int row = 0;  // row in A's feature matrix
  int col = 0;  // row in B's feature matrix
  int source = 0;  // node id in A
  int target = 0;  // node id in B
  double confidence = 0.0;
};

/// One point pair p (frame A) <-> q (frame B). Node-center pairs may carry
/// the covariances of their instance clouds.
struct Correspondence {
  Vec3 source = Vec3::Zero();
  Vec3 target = Vec3::Zero();
  double score = 1.0;
  int source_node = -1;
  int target_node = -1;
  std::optional<Mat3> source_cov;
  std::optional<Mat3> target_cov;
};

using CorrespondenceSet = std::vector<Correspondence>;

struct MatcherConfig {
  double node_threshold = 0.05;
  int node_top_k = 3;
  int point_top_k = 3;
  double point_threshold = 0.05;  // minimum point assignment score kept
  int sinkhorn_iters = 100;
  double dustbin_score = 0.5;
  double node_temperature = 10.0;  // scales the shared linear map's inner products
  bool cosine_nodes = true;        // unit-normalize L(x) rows before the inner product
};

/// S_ij = <L x_i, L x_j> with a shared dense map L, scaled by `temperature`.
/// With `cosine`, L x rows are unit-normalized first so that feature norms
/// cannot outvote feature directions.
inline MatrixXd node_similarity(const MatrixXd& xa, const MatrixXd& xb, const DenseLayer& linear,
                                double temperature = 1.0, bool cosine = false) {
  if (xa.cols() != xb.cols()) throw InvalidArgument("node_similarity: feature dimensions differ");
  if (linear.in_dim() != xa.cols()) throw InvalidArgument("node_similarity: linear map does not fit the features");
  MatrixXd la = linear.apply_rows(xa), lb = linear.apply_rows(xb);
  if (cosine) {
    for (auto* m : {&la, &lb})
      for (Eigen::Index i = 0; i < m->rows(); ++i) {
        const double nrm = m->row(i).norm();
        if (nrm > 0) m->row(i) /= nrm;
      }
  }
  return temperature * (la * lb.transpose());
}

/// A_ij = softmax over column j (rows) at i  x  softmax over row i (cols) at j.
inline MatrixXd dual_normalize(const MatrixXd& s) {
  const auto n = s.rows(), m = s.cols();
  MatrixXd row_soft(n, m), col_soft(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double top = s.row(i).maxCoeff();
    const Eigen::RowVectorXd e = (s.row(i).array() - top).exp();
    row_soft.row(i) = e / e.sum();
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    const double top = s.col(j).maxCoeff();
    const VectorXd e = (s.col(j).array() - top).exp();
    col_soft.col(j) = e / e.sum();
  }
  return row_soft.cwiseProduct(col_soft);
}

/// Column indices of the k largest entries of each row; ties go to the smaller index.
inline std::vector<std::vector<int>> row_top_k(const MatrixXd& a, int k) {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(a.rows()));
  std::vector<int> order(static_cast<std::size_t>(a.cols()));
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    std::iota(order.begin(), order.end(), 0);
    const auto keep = std::min<std::size_t>(static_cast<std::size_t>(std::max(k, 0)), order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<long>(keep), order.end(), [&](int x, int y) {
      const double vx = a(i, x), vy = a(i, y);
      return vx > vy || (vx == vy && x < y);
    });
    out[static_cast<std::size_t>(i)].assign(order.begin(), order.begin() + static_cast<long>(keep));
  }
  return out;
}

/// (i, j) pairs with a(i,j) >= threshold that are in the top-k of row i and
/// of column j, ordered by (i, j). `row_valid`/`col_valid` exclude entries.
inline std::vector<std::pair<int, int>> mutual_top_k(const MatrixXd& a, int k, double threshold,
                                                     const std::vector<bool>* row_valid = nullptr,
                                                     const std::vector<bool>* col_valid = nullptr) {
  MatrixXd masked = a;
  const double lowest = -std::numeric_limits<double>::infinity();
  if (row_valid)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (!(*row_valid)[static_cast<std::size_t>(i)]) masked.row(i).setConstant(lowest);
  if (col_valid)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if (!(*col_valid)[static_cast<std::size_t>(j)]) masked.col(j).setConstant(lowest);
  const auto rows = row_top_k(masked, k);
  const auto cols = row_top_k(masked.transpose(), k);
  std::vector<std::pair<int, int>> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::vector<int> sorted = rows[i];
    std::sort(sorted.begin(), sorted.end());
    for (int j : sorted) {
      if (!(masked(static_cast<Eigen::Index>(i), j) >= threshold)) continue;
      const auto& cj = cols[static_cast<std::size_t>(j)];
      if (std::find(cj.begin(), cj.end(), static_cast<int>(i)) != cj.end()) out.emplace_back(static_cast<int>(i), j);
    }
  }
  return out;
}

/// Node matches from the node assignment matrix; ids are looked up in the
/// feature sets' row order when given.
inline std::vector<NodeMatch> extract_node_matches(const MatrixXd& assignment, double threshold, int k,
                                                   const std::vector<int>& ids_a = {},
                                                   const std::vector<int>& ids_b = {}) {
  if (k < 1) throw InvalidArgument("extract_node_matches: k must be at least 1");
  std::vector<NodeMatch> out;
  for (const auto& [i, j] : mutual_top_k(assignment, k, threshold)) {
    NodeMatch m;
    m.row = i;
    m.col = j;
    m.source = ids_a.empty() ? i : ids_a[static_cast<std::size_t>(i)];
    m.target = ids_b.empty() ? j : ids_b[static_cast<std::size_t>(j)];
    m.confidence = assignment(i, j);
    out.push_back(m);
  }
  return out;
}

/// Score used for padded slots; exp() of it underflows to exactly zero.
inline constexpr double kMaskedScore = -1e9;

/// Raw dot products z_a z_b^T; padded rows and columns get kMaskedScore.
inline MatrixXd point_similarity(const MatrixXd& za, const MatrixXd& zb, const std::vector<bool>& mask_a,
                                 const std::vector<bool>& mask_b) {
  if (za.cols() != zb.cols()) throw InvalidArgument("point_similarity: feature dimensions differ");
  MatrixXd s = za * zb.transpose();
  for (Eigen::Index i = 0; i < s.rows(); ++i)
    if (!mask_a[static_cast<std::size_t>(i)]) s.row(i).setConstant(kMaskedScore);
  for (Eigen::Index j = 0; j < s.cols(); ++j)
    if (!mask_b[static_cast<std::size_t>(j)]) s.col(j).setConstant(kMaskedScore);
  return s;
}

inline double log_sum_exp(const Eigen::Ref<const VectorXd>& v) {
  const double top = v.maxCoeff();
  if (!std::isfinite(top)) return top;
  return top + std::log((v.array() - top).exp().sum());
}

/// Augments s (n x m) with a dustbin row and column holding `dustbin_score`.
inline MatrixXd augment_with_dustbin(const MatrixXd& s, double dustbin_score) {
  MatrixXd z = MatrixXd::Constant(s.rows() + 1, s.cols() + 1, dustbin_score);
  z.topLeftCorner(s.rows(), s.cols()) = s;
  return z;
}

/// Log-domain Sinkhorn with dustbins. Real rows and columns carry unit mass;
/// the dustbin row carries m and the dustbin column n, so both sides total n+m.
/// Returns the log of the (n+1) x (m+1) transport plan.
inline MatrixXd sinkhorn_log(const MatrixXd& s, int iters, double dustbin_score) {
  if (iters < 1) throw InvalidArgument("sinkhorn: iters must be at least 1");
  const auto n = s.rows(), m = s.cols();
  const MatrixXd z = augment_with_dustbin(s, dustbin_score);
  VectorXd log_mu = VectorXd::Zero(n + 1), log_nu = VectorXd::Zero(m + 1);
  log_mu[n] = std::log(static_cast<double>(std::max<Eigen::Index>(m, 1)));
  log_nu[m] = std::log(static_cast<double>(std::max<Eigen::Index>(n, 1)));
  if (m == 0) log_mu[n] = -std::numeric_limits<double>::infinity();
  if (n == 0) log_nu[m] = -std::numeric_limits<double>::infinity();
  VectorXd u = VectorXd::Zero(n + 1), v = VectorXd::Zero(m + 1);
  for (int t = 0; t < iters; ++t) {
    for (Eigen::Index a = 0; a <= n; ++a) u[a] = log_mu[a] - log_sum_exp((z.row(a).transpose() + v).eval());
    for (Eigen::Index b = 0; b <= m; ++b) v[b] = log_nu[b] - log_sum_exp((z.col(b) + u).eval());
  }
  MatrixXd out = z;
  out.colwise() += u;
  out.rowwise() += v.transpose();
  return out;
}

inline MatrixXd sinkhorn(const MatrixXd& s, int iters, double dustbin_score) {
  return sinkhorn_log(s, iters, dustbin_score).array().exp().matrix();
}

/// Point correspondences for one matched node pair: Sinkhorn over the point
/// features, then mutual top-k of the non-dustbin block above the score
/// threshold. Padded points never match.
inline CorrespondenceSet match_points(const NodeMatch& match, const FeatureSet& fa, const FeatureSet& fb,
                                      const MatcherConfig& cfg = {}) {
  const auto ia = static_cast<std::size_t>(match.row), ib = static_cast<std::size_t>(match.col);
  const auto& mask_a = fa.point_mask.at(ia);
  const auto& mask_b = fb.point_mask.at(ib);
  const MatrixXd s = point_similarity(fa.point_feats.at(ia), fb.point_feats.at(ib), mask_a, mask_b);
  const MatrixXd plan = sinkhorn(s, cfg.sinkhorn_iters, cfg.dustbin_score);
  const MatrixXd inner = plan.topLeftCorner(s.rows(), s.cols());
  CorrespondenceSet out;
  for (const auto& [u, v] : mutual_top_k(inner, cfg.point_top_k, cfg.point_threshold, &mask_a, &mask_b)) {
    Correspondence c;
    c.source = fa.node_points[ia][static_cast<std::size_t>(u)];
    c.target = fb.node_points[ib][static_cast<std::size_t>(v)];
    c.score = std::clamp(inner(u, v), 0.0, 1.0);
    c.source_node = match.source;
    c.target_node = match.target;
    out.push_back(std::move(c));
  }
  return out;
}

/// Concatenation of per-pair sets, ordered by the (row, col) of their node match.
inline CorrespondenceSet assemble_correspondences(const std::vector<NodeMatch>& matches,
                                                  const std::vector<CorrespondenceSet>& per_pair) {
  if (matches.size() != per_pair.size()) throw InvalidArgument("assemble_correspondences: size mismatch");
  std::vector<std::size_t> order(matches.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return std::tie(matches[x].row, matches[x].col) < std::tie(matches[y].row, matches[y].col);
  });
  CorrespondenceSet out;
  for (auto k : order) out.insert(out.end(), per_pair[k].begin(), per_pair[k].end());
  return out;
}

/// Node matching between two encoded graphs.
inline std::vector<NodeMatch> match_nodes(const FeatureSet& fa, const FeatureSet& fb, const EncoderWeights& w,
                                          const MatcherConfig& cfg = {}, MatrixXd* assignment_out = nullptr) {
  if (fa.x2.rows() == 0 || fb.x2.rows() == 0) return {};
  const MatrixXd s = node_similarity(fa.x2, fb.x2, w.node_linear, cfg.node_temperature, cfg.cosine_nodes);
  MatrixXd a = dual_normalize(s);
  auto matches = extract_node_matches(a, cfg.node_threshold, cfg.node_top_k, fa.ids, fb.ids);
  if (assignment_out) *assignment_out = std::move(a);
  return matches;
}

}  // namespace sgreg
