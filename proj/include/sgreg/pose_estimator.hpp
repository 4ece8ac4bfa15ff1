#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "sgreg/common.hpp"
#include "sgreg/geometry.hpp"
#include "sgreg/matcher.hpp"

namespace sgreg {

// ---------------------------------------------------------------------------
// Non-maximum suppression

/// Greedy by descending score (ties by index): a correspondence survives when
/// no survivor's source lies within `radius` of its source. Output keeps the
/// input order.
inline CorrespondenceSet nms_correspondences(const CorrespondenceSet& c, double radius) {
  if (!(radius > 0)) throw InvalidArgument("nms radius must be positive");
  std::vector<std::size_t> order(c.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return c[a].score > c[b].score; });
  std::unordered_map<VoxelKey, std::vector<std::size_t>, VoxelKeyHash> kept_cells;
  std::vector<bool> keep(c.size(), false);
  const double r2 = radius * radius;
  for (std::size_t idx : order) {
    const VoxelKey k = voxel_of(c[idx].source, radius);
    bool suppressed = false;
    for (std::int64_t dx = -1; dx <= 1 && !suppressed; ++dx)
      for (std::int64_t dy = -1; dy <= 1 && !suppressed; ++dy)
        for (std::int64_t dz = -1; dz <= 1 && !suppressed; ++dz) {
          auto it = kept_cells.find({k.x + dx, k.y + dy, k.z + dz});
          if (it == kept_cells.end()) continue;
          for (std::size_t other : it->second)
            if ((c[other].source - c[idx].source).squaredNorm() < r2) {
              suppressed = true;
              break;
            }
        }
    if (!suppressed) {
      keep[idx] = true;
      kept_cells[k].push_back(idx);
    }
  }
  CorrespondenceSet out;
  for (std::size_t i = 0; i < c.size(); ++i)
    if (keep[i]) out.push_back(c[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Compatibility graphs

/// Rigid-motion consistency of two correspondences.
inline bool compatible(const Correspondence& a, const Correspondence& b, double delta) {
  return std::abs((a.source - b.source).norm() - (a.target - b.target).norm()) < delta;
}

struct CompatibilityGraph {
  int level = 0;
  double threshold = 0.0;  // delta, meters
  std::vector<std::vector<int>> adjacency;  // sorted neighbor lists
  std::size_t edge_count = 0;

  std::size_t size() const { return adjacency.size(); }
  bool has_edge(int a, int b) const {
    const auto& l = adjacency[static_cast<std::size_t>(a)];
    return std::binary_search(l.begin(), l.end(), b);
  }
};

/// One graph per delta (strictly increasing), so edge sets are nested.
inline std::vector<CompatibilityGraph> build_pyramid(const CorrespondenceSet& c, const std::vector<double>& levels) {
  for (std::size_t l = 0; l < levels.size(); ++l) {
    if (!(levels[l] > 0)) throw InvalidArgument("compatibility thresholds must be positive");
    if (l > 0 && !(levels[l] > levels[l - 1])) throw InvalidArgument("compatibility thresholds must increase");
  }
  std::vector<CompatibilityGraph> out(levels.size());
  for (std::size_t l = 0; l < levels.size(); ++l) {
    out[l].level = static_cast<int>(l);
    out[l].threshold = levels[l];
    out[l].adjacency.resize(c.size());
  }
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = i + 1; j < c.size(); ++j) {
      const double gap = std::abs((c[i].source - c[j].source).norm() - (c[i].target - c[j].target).norm());
      for (auto& g : out)
        if (gap < g.threshold) {
          g.adjacency[i].push_back(static_cast<int>(j));
          g.adjacency[j].push_back(static_cast<int>(i));
          ++g.edge_count;
        }
    }
  return out;
}

// ---------------------------------------------------------------------------
// Maximum clique: bitset branch and bound with greedy coloring bounds.

struct CliqueResult {
  std::vector<int> vertices;  // sorted
  bool exact = true;          // false when the time budget ran out
  std::uint64_t nodes_explored = 0;
};

namespace detail {

class CliqueSolver {
 public:
  CliqueSolver(const CompatibilityGraph& g, double budget_seconds)
      : n_(static_cast<int>(g.size())), words_((n_ + 63) / 64), budget_(budget_seconds) {
    const auto n = static_cast<std::size_t>(n_);
    // core decomposition by bin-sorted minimum-degree removal
    std::vector<int> deg(n), pos(n), removal(n);
    int max_deg = 0;
    for (std::size_t v = 0; v < n; ++v) {
      deg[v] = static_cast<int>(g.adjacency[v].size());
      max_deg = std::max(max_deg, deg[v]);
    }
    std::vector<int> bin(static_cast<std::size_t>(max_deg) + 1, 0);
    for (std::size_t v = 0; v < n; ++v) ++bin[static_cast<std::size_t>(deg[v])];
    for (int d = 0, start = 0; d <= max_deg; ++d) {
      const int count = bin[static_cast<std::size_t>(d)];
      bin[static_cast<std::size_t>(d)] = start;
      start += count;
    }
    for (std::size_t v = 0; v < n; ++v) {
      pos[v] = bin[static_cast<std::size_t>(deg[v])]++;
      removal[static_cast<std::size_t>(pos[v])] = static_cast<int>(v);
    }
    for (int d = max_deg; d > 0; --d) bin[static_cast<std::size_t>(d)] = bin[static_cast<std::size_t>(d - 1)];
    bin[0] = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto v = static_cast<std::size_t>(removal[i]);
      for (int u : g.adjacency[v]) {
        const auto us = static_cast<std::size_t>(u);
        if (deg[us] <= deg[v]) continue;
        const auto du = static_cast<std::size_t>(deg[us]);
        const int pu = pos[us], pw = bin[du];
        const int w = removal[static_cast<std::size_t>(pw)];
        if (u != w) {
          pos[us] = pw;
          removal[static_cast<std::size_t>(pu)] = w;
          pos[static_cast<std::size_t>(w)] = pu;
          removal[static_cast<std::size_t>(pw)] = u;
        }
        ++bin[du];
        --deg[us];
      }
    }
    const std::vector<int>& core = deg;  // degrees at removal are the core numbers
    // renumber so index 0 is the last vertex removed (highest core)
    order_.assign(removal.rbegin(), removal.rend());
    std::vector<int> rank(n);
    for (std::size_t r = 0; r < n; ++r) rank[static_cast<std::size_t>(order_[r])] = static_cast<int>(r);
    core_.resize(n);
    for (std::size_t r = 0; r < n; ++r) core_[r] = core[static_cast<std::size_t>(order_[r])];
    adj_.assign(n * words_, 0);
    for (std::size_t v = 0; v < n; ++v)
      for (int u : g.adjacency[v]) set_bit(row(rank[v]), rank[static_cast<std::size_t>(u)]);
  }

  CliqueResult solve() {
    start_ = std::chrono::steady_clock::now();
    CliqueResult res;
    if (n_ == 0) return res;
    greedy_seed();
    // a vertex of core number c lies in no clique larger than c + 1
    std::vector<std::uint64_t> p(words_, 0);
    bool any = false;
    for (int v = 0; v < n_; ++v)
      if (static_cast<std::size_t>(core_[static_cast<std::size_t>(v)]) + 1 > best_.size()) {
        set_bit(p.data(), v);
        any = true;
      }
    std::vector<int> current;
    if (any) expand(current, p);
    for (int v : best_) res.vertices.push_back(order_[static_cast<std::size_t>(v)]);
    std::sort(res.vertices.begin(), res.vertices.end());
    res.exact = !timed_out_;
    res.nodes_explored = explored_;
    return res;
  }

 private:
  std::uint64_t* row(int v) { return adj_.data() + static_cast<std::size_t>(v) * words_; }
  const std::uint64_t* row(int v) const { return adj_.data() + static_cast<std::size_t>(v) * words_; }
  static void set_bit(std::uint64_t* b, int v) { b[v >> 6] |= (std::uint64_t{1} << (v & 63)); }
  static void clear_bit(std::uint64_t* b, int v) { b[v >> 6] &= ~(std::uint64_t{1} << (v & 63)); }

  bool out_of_time() {
    if (timed_out_) return true;
    if ((++explored_ & 1023) == 0) {
      const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
      if (elapsed > budget_) timed_out_ = true;
    }
    return timed_out_;
  }

  // Greedy cliques seeded at vertices in decreasing core order, each step
  // adding the candidate of highest core; stops once no seed can improve.
  void greedy_seed() {
    std::vector<std::uint64_t> cand(words_);
    for (int s = 0; s < n_; ++s) {
      if (static_cast<std::size_t>(core_[static_cast<std::size_t>(s)]) + 1 <= best_.size()) break;
      std::vector<int> clique{s};
      std::copy(row(s), row(s) + words_, cand.begin());
      for (;;) {
        int pick = -1;
        for (std::size_t w = 0; w < words_ && pick < 0; ++w)
          if (cand[w]) pick = static_cast<int>(w * 64 + static_cast<std::size_t>(std::countr_zero(cand[w])));
        if (pick < 0) break;
        clique.push_back(pick);
        const auto* r = row(pick);
        for (std::size_t w = 0; w < words_; ++w) cand[w] &= r[w];
      }
      if (clique.size() > best_.size()) best_ = clique;
    }
  }

  void expand(std::vector<int>& current, std::vector<std::uint64_t>& p) {
    if (out_of_time()) return;
    // sequential greedy coloring of p; vertices listed by increasing color
    std::vector<int> verts, colors;
    std::vector<std::uint64_t> uncolored = p, q(words_);
    int color = 0;
    bool any = true;
    while (any) {
      any = false;
      ++color;
      q = uncolored;
      for (std::size_t w = 0; w < words_; ++w) {
        while (q[w]) {
          const int v = static_cast<int>(w * 64 + static_cast<std::size_t>(std::countr_zero(q[w])));
          any = true;
          clear_bit(q.data(), v);
          clear_bit(uncolored.data(), v);
          const auto* r = row(v);
          for (std::size_t x = w; x < words_; ++x) q[x] &= ~r[x];
          verts.push_back(v);
          colors.push_back(color);
        }
      }
    }
    std::vector<std::uint64_t> next(words_);
    for (std::size_t k = verts.size(); k-- > 0;) {
      if (current.size() + static_cast<std::size_t>(colors[k]) <= best_.size()) return;
      const int v = verts[k];
      current.push_back(v);
      const auto* r = row(v);
      bool empty = true;
      for (std::size_t w = 0; w < words_; ++w) {
        next[w] = p[w] & r[w];
        empty = empty && next[w] == 0;
      }
      if (empty) {
        if (current.size() > best_.size()) best_ = current;
      } else {
        std::vector<std::uint64_t> sub = next;
        expand(current, sub);
      }
      current.pop_back();
      clear_bit(p.data(), v);
      if (timed_out_) return;
    }
  }

  int n_;
  std::size_t words_;
  double budget_;
  std::vector<int> order_;  // solver index -> graph vertex
  std::vector<int> core_;   // core number per solver index
  std::vector<std::uint64_t> adj_;
  std::vector<int> best_;
  std::chrono::steady_clock::time_point start_;
  std::uint64_t explored_ = 0;
  bool timed_out_ = false;
};

}  // namespace detail

/// Maximum clique; exact unless `time_budget_seconds` runs out, in which case
/// the best clique found so far is returned with exact == false.
inline CliqueResult max_clique(const CompatibilityGraph& g, double time_budget_seconds = 10.0) {
  return detail::CliqueSolver(g, time_budget_seconds).solve();
}

// ---------------------------------------------------------------------------
// Closed-form alignment

/// Weighted least-squares rigid transform mapping `src` onto `dst`
/// (Kabsch/Umeyama without scale, reflection corrected).
inline Transform svd_align(const Points& src, const Points& dst, const std::vector<double>& weights = {}) {
  if (src.size() != dst.size()) throw InvalidArgument("svd_align: point counts differ");
  if (!weights.empty() && weights.size() != src.size()) throw InvalidArgument("svd_align: weight count differs");
  double total = 0.0;
  std::size_t active = 0;
  Vec3 mu_s = Vec3::Zero(), mu_d = Vec3::Zero();
  for (std::size_t k = 0; k < src.size(); ++k) {
    const double w = weights.empty() ? 1.0 : weights[k];
    if (w < 0) throw InvalidArgument("svd_align: negative weight");
    if (w > 0) ++active;
    total += w;
    mu_s += w * src[k];
    mu_d += w * dst[k];
  }
  if (active < 3 || !(total > 0)) throw DegenerateError("svd_align: fewer than 3 weighted pairs");
  mu_s /= total;
  mu_d /= total;
  Mat3 h = Mat3::Zero(), spread = Mat3::Zero();
  for (std::size_t k = 0; k < src.size(); ++k) {
    const double w = weights.empty() ? 1.0 : weights[k];
    if (w == 0) continue;
    const Vec3 ds = src[k] - mu_s;
    h += w * ds * (dst[k] - mu_d).transpose();
    spread += w * ds * ds.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eig(spread);
  const Vec3 ev = eig.eigenvalues();  // ascending
  if (!(ev[2] > 0) || ev[1] <= 1e-10 * ev[2]) throw DegenerateError("svd_align: source points are collinear");
  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0 ? -1.0 : 1.0;
  Transform t;
  t.rotation = svd.matrixV() * d * svd.matrixU().transpose();
  t.translation = mu_d - t.rotation * mu_s;
  return t;
}

inline Transform svd_align(const CorrespondenceSet& c, const std::vector<double>& weights = {}) {
  Points s, d;
  for (const auto& x : c) {
    s.push_back(x.source);
    d.push_back(x.target);
  }
  return svd_align(s, d, weights);
}

// ---------------------------------------------------------------------------
// GNC-TLS

struct GncSchedule {
  double factor = 1.4;   // control parameter growth per iteration
  int max_iters = 64;
  double tolerance = 1e-9;  // stop once sum w (1 - w) falls below this
};

struct ResidualModel {
  double inlier_threshold = 0.1;       // c-bar for Euclidean residuals, meters
  double covariance_threshold = 3.0;   // c-bar for Mahalanobis residuals, in sigmas
  bool use_covariance = true;          // Mahalanobis form for pairs carrying covariances
};

inline bool has_covariance(const Correspondence& c) { return c.source_cov.has_value() || c.target_cov.has_value(); }

/// Residual of one pair divided by its squared threshold; <= 1 means inlier.
inline double normalized_residual(const Correspondence& c, const Transform& t, const ResidualModel& m) {
  const Vec3 d = c.target - t * c.source;
  if (m.use_covariance && has_covariance(c)) {
    Mat3 sigma = c.target_cov.value_or(Mat3::Zero());
    if (c.source_cov) sigma += t.rotation * *c.source_cov * t.rotation.transpose();
    sigma += Mat3::Identity() * 1e-12;
    return d.dot(sigma.ldlt().solve(d)) / (m.covariance_threshold * m.covariance_threshold);
  }
  return d.squaredNorm() / (m.inlier_threshold * m.inlier_threshold);
}

namespace detail {

inline Mat3 information(const Correspondence& c, const Mat3& rotation) {
  Mat3 sigma = c.target_cov.value_or(Mat3::Zero());
  if (c.source_cov) sigma += rotation * *c.source_cov * rotation.transpose();
  return (sigma + Mat3::Identity() * 1e-12).inverse();
}

/// Minimizes sum w_k r_k with r_k the normalized residual. Closed form when
/// every active pair is Euclidean; otherwise Gauss-Newton on SE(3) started
/// from the closed form.
inline Transform weighted_solve(const CorrespondenceSet& c, const std::vector<double>& w, const ResidualModel& m) {
  bool any_cov = false;
  for (std::size_t k = 0; k < c.size(); ++k) any_cov = any_cov || (w[k] > 0 && m.use_covariance && has_covariance(c[k]));
  if (!any_cov) return svd_align(c, w);

  // start from an isotropic approximation of each information matrix
  std::vector<double> iso(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (m.use_covariance && has_covariance(c[k]))
      iso[k] = w[k] * information(c[k], Mat3::Identity()).trace() / 3.0 / (m.covariance_threshold * m.covariance_threshold);
    else
      iso[k] = w[k] / (m.inlier_threshold * m.inlier_threshold);
  }
  Transform t = svd_align(c, iso);
  for (int it = 0; it < 30; ++it) {
    Eigen::Matrix<double, 6, 6> h = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> g = Eigen::Matrix<double, 6, 1>::Zero();
    for (std::size_t k = 0; k < c.size(); ++k) {
      if (w[k] <= 0) continue;
      Mat3 omega;
      if (m.use_covariance && has_covariance(c[k]))
        omega = information(c[k], t.rotation) / (m.covariance_threshold * m.covariance_threshold);
      else
        omega = Mat3::Identity() / (m.inlier_threshold * m.inlier_threshold);
      const Vec3 rp = t.rotation * c[k].source;
      const Vec3 d = c[k].target - rp - t.translation;
      Eigen::Matrix<double, 3, 6> j;
      j.leftCols<3>() = skew(rp);
      j.rightCols<3>() = -Mat3::Identity();
      h += w[k] * j.transpose() * omega * j;
      g += w[k] * j.transpose() * omega * d;
    }
    const Eigen::Matrix<double, 6, 1> step = -h.ldlt().solve(g);
    if (!step.allFinite()) throw DegenerateError("weighted_solve: singular normal equations");
    const Vec3 phi = step.head<3>();
    if (phi.norm() > 0) t.rotation = Eigen::AngleAxisd(phi.norm(), phi.normalized()).toRotationMatrix() * t.rotation;
    t.rotation = project_to_so3(t.rotation);
    t.translation += step.tail<3>();
    if (step.norm() < 1e-13) break;
  }
  return t;
}

}  // namespace detail

struct GncResult {
  Transform transform;
  std::vector<double> weights;
  std::vector<bool> inliers;  // weight > 0.5
  int iterations = 0;

  std::size_t inlier_count() const { return static_cast<std::size_t>(std::count(inliers.begin(), inliers.end(), true)); }
};

/// Graduated non-convexity over the truncated least squares cost
/// sum min(r_k, c_k^2). The surrogate starts convex and the control parameter
/// grows by `schedule.factor` until the weights are binary.
inline GncResult gnc_tls(const CorrespondenceSet& c, const ResidualModel& model = {}, const GncSchedule& schedule = {}) {
  if (c.size() < 3) throw DegenerateError("gnc_tls: fewer than 3 pairs");
  GncResult res;
  res.weights.assign(c.size(), 1.0);
  res.transform = detail::weighted_solve(c, res.weights, model);
  std::vector<double> r(c.size());
  auto residuals = [&] {
    for (std::size_t k = 0; k < c.size(); ++k) r[k] = normalized_residual(c[k], res.transform, model);
  };
  residuals();
  const double r_max = *std::max_element(r.begin(), r.end());
  if (r_max > 1.0) {
    double mu = 1.0 / (2.0 * r_max - 1.0);
    for (int it = 0; it < schedule.max_iters; ++it) {
      res.iterations = it + 1;
      const double lo = mu / (mu + 1.0), hi = (mu + 1.0) / mu;
      for (std::size_t k = 0; k < c.size(); ++k) {
        if (r[k] >= hi) res.weights[k] = 0.0;
        else if (r[k] <= lo) res.weights[k] = 1.0;
        else res.weights[k] = std::sqrt(mu * (mu + 1.0) / r[k]) - mu;
      }
      try {
        res.transform = detail::weighted_solve(c, res.weights, model);
      } catch (const DegenerateError&) {
        break;  // keep the last well-posed estimate
      }
      residuals();
      double binary_gap = 0.0;
      for (double w : res.weights) binary_gap += w * (1.0 - w);
      if (binary_gap < schedule.tolerance) break;
      mu *= schedule.factor;
    }
  }
  res.inliers.resize(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) res.inliers[k] = r[k] <= 1.0 && res.weights[k] > 0.5;
  if (res.inlier_count() < 3) throw DegenerateError("gnc_tls: fewer than 3 inliers survived");
  return res;
}

// ---------------------------------------------------------------------------
// Geometric verification

struct VerifyConfig {
  double voxel = 0.2;
  double plane_ratio = 0.01;  // smallest / largest scatter eigenvalue for a valid plane
  int plane_min_points = 5;
  double penalty_factor = 3.0;  // distance charged for a point in an empty voxel, in voxels
  int max_samples = 2000;
};

/// Per-voxel centroid and (when planar) normal of the target cloud.
class VerificationMap {
 public:
  VerificationMap(const Points& y, const VerifyConfig& cfg) : cfg_(cfg) {
    struct Acc {
      Vec3 sum = Vec3::Zero();
      Mat3 outer = Mat3::Zero();
      int n = 0;
    };
    std::unordered_map<VoxelKey, Acc, VoxelKeyHash> acc;
    for (const auto& p : y) {
      auto& a = acc[voxel_of(p, cfg.voxel)];
      a.sum += p;
      a.outer += p * p.transpose();
      ++a.n;
    }
    for (const auto& [key, a] : acc) {
      Cell cell;
      cell.centroid = a.sum / a.n;
      if (a.n >= cfg.plane_min_points) {
        const Mat3 scatter = a.outer / a.n - cell.centroid * cell.centroid.transpose();
        Eigen::SelfAdjointEigenSolver<Mat3> eig(scatter);
        const Vec3 ev = eig.eigenvalues();
        if (ev[2] > 0 && ev[0] <= cfg.plane_ratio * ev[2]) {
          cell.planar = true;
          cell.normal = eig.eigenvectors().col(0);
        }
      }
      cells_.emplace(key, cell);
    }
  }

  double penalty() const { return cfg_.penalty_factor * cfg_.voxel; }

  /// Point-to-plane distance in a planar voxel, point-to-centroid otherwise,
  /// the penalty in an empty voxel.
  double distance(const Vec3& p) const {
    auto it = cells_.find(voxel_of(p, cfg_.voxel));
    if (it == cells_.end()) return penalty();
    const Cell& c = it->second;
    return c.planar ? std::abs(c.normal.dot(p - c.centroid)) : (p - c.centroid).norm();
  }

  const VerifyConfig& config() const { return cfg_; }
  bool empty() const { return cells_.empty(); }

 private:
  struct Cell {
    Vec3 centroid = Vec3::Zero();
    Vec3 normal = Vec3::UnitZ();
    bool planar = false;
  };
  VerifyConfig cfg_;
  std::unordered_map<VoxelKey, Cell, VoxelKeyHash> cells_;
};

/// Mean distance of the (strided) transformed source cloud to the target map.
/// Lower is better.
inline double verify(const Transform& candidate, const Points& x, const VerificationMap& map) {
  if (x.empty() || map.empty()) throw InvalidArgument("verify: clouds must be non-empty");
  const std::size_t cap = static_cast<std::size_t>(std::max(map.config().max_samples, 1));
  const std::size_t stride = (x.size() + cap - 1) / cap;
  double total = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < x.size(); i += stride, ++n) total += map.distance(candidate * x[i]);
  return total / static_cast<double>(n);
}

inline double verify(const Transform& candidate, const Points& x, const Points& y, const VerifyConfig& cfg = {}) {
  if (y.empty()) throw InvalidArgument("verify: clouds must be non-empty");
  return verify(candidate, x, VerificationMap(y, cfg));
}

/// Fraction of (strided) source points with a target point within `radius`
/// after applying the transform.
inline double aligned_overlap(const Transform& t, const Points& x, const Points& y, double radius = 0.1,
                              std::size_t max_samples = 4000) {
  if (x.empty() || y.empty()) return 0.0;
  const PointGrid grid(y, radius);
  const std::size_t stride = std::max<std::size_t>(1, x.size() / max_samples);
  std::size_t hit = 0, seen = 0;
  for (std::size_t k = 0; k < x.size(); k += stride, ++seen) hit += grid.count_within(t * x[k], radius) > 0 ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(seen);
}

// ---------------------------------------------------------------------------
// Hybrid estimator

struct EstimatorConfig {
  std::vector<double> levels = {0.1, 0.2, 0.3};  // compatibility thresholds, meters
  ResidualModel residual;                         // c-bar = 0.1 m
  GncSchedule gnc;
  double mac_trigger = 0.3;     // clique search runs when the GNC inlier ratio is below this
  double nms_radius = 0.05;     // meters
  VerifyConfig verify;          // voxel 0.2 m
  double clique_time_budget = 10.0;  // seconds per level
  bool refine = true;           // adaptive re-threshold of the chosen transform
  double refine_factor = 3.0;   // inlier distance bound, in medians of the inlier distances
  double refine_floor = 0.01;   // lower bound of that distance, as a fraction of c-bar
  int refine_iters = 10;
};

enum class Strategy { GncOnly, MacGnc };

inline const char* to_string(Strategy s) { return s == Strategy::GncOnly ? "GNC" : "MAC+GNC"; }

struct Candidate {
  Transform transform;
  int level = -1;  // pyramid level, -1 for the plain GNC candidate
  std::size_t clique_size = 0;
  std::size_t inlier_count = 0;
  double score = 0.0;  // verification score, lower is better
};

struct EstimateResult {
  Transform transform;
  CorrespondenceSet pruned;          // after NMS; indices below refer to it
  std::vector<std::size_t> inliers;
  double inlier_ratio = 0.0;         // |inliers| / |pruned|
  double gnc_inlier_ratio = 0.0;
  std::vector<Candidate> candidates;
  std::size_t chosen = 0;
  Strategy strategy = Strategy::GncOnly;
  bool clique_exact = true;
  double score = 0.0;                // verification score of the chosen candidate
  double clique_seconds = 0.0;
};

inline std::vector<std::size_t> inliers_of(const CorrespondenceSet& c, const Transform& t, const ResidualModel& m) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < c.size(); ++k)
    if (normalized_residual(c[k], t, m) <= 1.0) out.push_back(k);
  return out;
}

/// Truncated cost sum min(r_k, 1) over normalized residuals.
inline double truncated_cost(const CorrespondenceSet& c, const Transform& t, const ResidualModel& m) {
  double total = 0.0;
  for (const auto& x : c) total += std::min(normalized_residual(x, t, m), 1.0);
  return total;
}

/// Refits on inliers whose distance is within `factor` medians of the current
/// inlier distances (never above c-bar, never below floor * c-bar) until the
/// set is stable. Distances are in c-bar units, so Mahalanobis pairs use the
/// same rule.
inline Transform refine_transform(const CorrespondenceSet& c, const Transform& start, const ResidualModel& m,
                                  double factor, double floor, int iters) {
  Transform t = start;
  std::vector<std::size_t> prev;
  double bound = 1.0;  // on normalized residuals, i.e. squared c-bar units
  for (int it = 0; it < iters; ++it) {
    std::vector<double> r(c.size());
    for (std::size_t k = 0; k < c.size(); ++k) r[k] = normalized_residual(c[k], t, m);
    std::vector<double> inl;
    for (double x : r)
      if (x <= bound) inl.push_back(x);
    if (inl.size() < 3) break;
    std::nth_element(inl.begin(), inl.begin() + static_cast<long>(inl.size() / 2), inl.end());
    const double med = inl[inl.size() / 2];
    bound = std::clamp(factor * factor * med, floor * floor, 1.0);
    std::vector<std::size_t> keep;
    for (std::size_t k = 0; k < c.size(); ++k)
      if (r[k] <= bound) keep.push_back(k);
    if (keep.size() < 3) break;
    if (keep == prev) break;
    CorrespondenceSet subset;
    for (auto k : keep) subset.push_back(c[k]);
    try {
      t = detail::weighted_solve(subset, std::vector<double>(subset.size(), 1.0), m);
    } catch (const DegenerateError&) {
      break;
    }
    prev = std::move(keep);
  }
  return t;
}

/// NMS, then GNC on everything; when GNC's inlier ratio is below the trigger,
/// one maximum clique per pyramid level seeds a GNC candidate each. The
/// candidate with the lowest verification score wins. Without clouds the
/// truncated cost ranks the candidates instead.
inline EstimateResult estimate(const CorrespondenceSet& c, const Points& x_cloud, const Points& y_cloud,
                               const EstimatorConfig& cfg = {}) {
  EstimateResult res;
  res.pruned = nms_correspondences(c, cfg.nms_radius);
  const auto& pc = res.pruned;
  if (pc.size() < 3) throw InsufficientDataError("fewer than 3 correspondences after NMS");

  std::optional<GncResult> gnc;
  try {
    gnc = gnc_tls(pc, cfg.residual, cfg.gnc);
    res.gnc_inlier_ratio = static_cast<double>(gnc->inlier_count()) / static_cast<double>(pc.size());
  } catch (const DegenerateError&) {
    res.gnc_inlier_ratio = 0.0;
  }

  if (gnc && res.gnc_inlier_ratio >= cfg.mac_trigger) {
    res.strategy = Strategy::GncOnly;
    Candidate cand;
    cand.transform = gnc->transform;
    res.candidates.push_back(cand);
  } else {
    res.strategy = Strategy::MacGnc;
    const auto t0 = std::chrono::steady_clock::now();
    const auto pyramid = build_pyramid(pc, cfg.levels);
    for (const auto& g : pyramid) {
      const auto clique = max_clique(g, cfg.clique_time_budget);
      res.clique_exact = res.clique_exact && clique.exact;
      if (clique.vertices.size() < 3) continue;
      CorrespondenceSet subset;
      for (int v : clique.vertices) subset.push_back(pc[static_cast<std::size_t>(v)]);
      Candidate cand;
      cand.level = g.level;
      cand.clique_size = clique.vertices.size();
      try {
        cand.transform = gnc_tls(subset, cfg.residual, cfg.gnc).transform;
      } catch (const DegenerateError&) {
        try {
          cand.transform = detail::weighted_solve(subset, std::vector<double>(subset.size(), 1.0), cfg.residual);
        } catch (const DegenerateError&) {
          continue;
        }
      }
      res.candidates.push_back(cand);
    }
    res.clique_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (res.candidates.empty() && gnc) {
      Candidate cand;
      cand.transform = gnc->transform;
      res.candidates.push_back(cand);
    }
  }
  if (res.candidates.empty()) throw InsufficientDataError("no well-posed candidate transformation");

  const bool have_clouds = !x_cloud.empty() && !y_cloud.empty();
  std::optional<VerificationMap> map;
  if (have_clouds) map.emplace(y_cloud, cfg.verify);
  for (auto& cand : res.candidates) {
    cand.inlier_count = inliers_of(pc, cand.transform, cfg.residual).size();
    cand.score = have_clouds ? verify(cand.transform, x_cloud, *map) : truncated_cost(pc, cand.transform, cfg.residual);
  }
  res.chosen = 0;
  for (std::size_t k = 1; k < res.candidates.size(); ++k)
    if (res.candidates[k].score < res.candidates[res.chosen].score) res.chosen = k;
  const auto& best = res.candidates[res.chosen];
  res.transform = cfg.refine ? refine_transform(pc, best.transform, cfg.residual, cfg.refine_factor,
                                                cfg.refine_floor, cfg.refine_iters)
                             : best.transform;
  res.score = best.score;
  res.inliers = inliers_of(pc, res.transform, cfg.residual);
  res.inlier_ratio = static_cast<double>(res.inliers.size()) / static_cast<double>(pc.size());
  return res;
}

/// Line-oriented diagnostic report: one line per candidate with its
/// row-major 4x4 matrix.
inline std::string diagnostic_report(const EstimateResult& r) {
  std::ostringstream out;
  out << std::setprecision(9);
  out << "strategy " << to_string(r.strategy) << " correspondences " << r.pruned.size() << " inliers "
      << r.inliers.size() << " gnc_inlier_ratio " << r.gnc_inlier_ratio << " chosen " << r.chosen << '\n';
  for (std::size_t k = 0; k < r.candidates.size(); ++k) {
    const auto& c = r.candidates[k];
    out << "candidate " << k << " level " << c.level << " strategy " << to_string(r.strategy) << " inliers "
        << c.inlier_count << " score " << c.score << " matrix";
    const Mat4 m = c.transform.matrix();
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) out << ' ' << m(i, j);
    out << '\n';
  }
  return out.str();
}

}  // namespace sgreg
