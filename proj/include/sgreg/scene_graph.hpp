#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sgreg/common.hpp"
#include "sgreg/geometry.hpp"

namespace sgreg {

/// One object instance: open-set label, extents, center and its point cloud.
struct SemanticNode {
  int id = 0;
  std::string label;
  Vec3 box = Vec3::Ones();  // extents in meters (length, width, height)
  Vec3 center = Vec3::Zero();
  Points points;

  bool operator==(const SemanticNode&) const = default;
};

/// Smallest extent stored for a flat or single-point cloud.
inline constexpr double kMinBoxExtent = 1e-3;

/// Extents of a gravity-aligned box: the footprint is measured along the
/// principal axes of the xy scatter (major first), the height along z. Unlike
/// an axis-aligned box these extents do not change under yaw.
inline Vec3 gravity_aligned_extents(const Points& pts) {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& p : pts) mean += p.head<2>();
  mean /= static_cast<double>(pts.size());
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& p : pts) {
    const Eigen::Vector2d d = p.head<2>() - mean;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
  const Eigen::Vector2d major = eig.eigenvectors().col(1), minor = eig.eigenvectors().col(0);
  double lo[3] = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                  std::numeric_limits<double>::infinity()};
  double hi[3] = {-lo[0], -lo[0], -lo[0]};
  for (const auto& p : pts) {
    const double v[3] = {major.dot(p.head<2>()), minor.dot(p.head<2>()), p.z()};
    for (int k = 0; k < 3; ++k) {
      lo[k] = std::min(lo[k], v[k]);
      hi[k] = std::max(hi[k], v[k]);
    }
  }
  Vec3 ext(hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]);
  if (ext.x() < ext.y()) std::swap(ext.x(), ext.y());
  return ext.cwiseMax(Vec3::Constant(kMinBoxExtent));
}

/// Builds a node from its points; center is the centroid, box the
/// gravity-aligned extents.
inline SemanticNode make_node(int id, std::string label, Points points) {
  if (points.empty()) throw InvalidArgument("node " + std::to_string(id) + " has no points");
  SemanticNode n;
  n.id = id;
  n.label = std::move(label);
  n.box = gravity_aligned_extents(points);
  n.center = centroid(points);
  n.points = std::move(points);
  return n;
}

using Edge = std::pair<int, int>;  // (smaller id, larger id)

struct SceneGraph {
  std::vector<SemanticNode> nodes;
  std::vector<Edge> edges;  // sorted, unique

  bool operator==(const SceneGraph&) const = default;

  std::size_t size() const { return nodes.size(); }

  /// Row index of a node id; -1 when absent.
  long index_of(int id) const {
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].id == id) return static_cast<long>(i);
    return -1;
  }

  const SemanticNode& node(int id) const {
    const long i = index_of(id);
    if (i < 0) throw InvalidArgument("no node with id " + std::to_string(id));
    return nodes[static_cast<std::size_t>(i)];
  }

  /// Neighbor ids per node id, each list sorted ascending.
  std::map<int, std::vector<int>> adjacency() const {
    std::map<int, std::vector<int>> adj;
    for (const auto& n : nodes) adj[n.id];
    for (const auto& [a, b] : edges) {
      adj[a].push_back(b);
      adj[b].push_back(a);
    }
    for (auto& [id, list] : adj) std::sort(list.begin(), list.end());
    return adj;
  }

  /// Every point of every node, stacked in node order.
  Points all_points() const {
    Points out;
    for (const auto& n : nodes) out.insert(out.end(), n.points.begin(), n.points.end());
    return out;
  }
};

/// Throws InvalidArgument when a graph breaks a type invariant.
inline void validate(const SceneGraph& g) {
  std::set<int> ids;
  for (const auto& n : g.nodes) {
    const std::string who = "node " + std::to_string(n.id);
    if (!ids.insert(n.id).second) throw InvalidArgument("duplicate " + who);
    if (n.points.empty()) throw InvalidArgument(who + " has no points");
    if (!(n.box.array() > 0).all()) throw InvalidArgument(who + " has a non-positive box extent");
    const Vec3 c = centroid(n.points);
    if ((c - n.center).norm() > 1e-6 * std::max(1.0, c.norm()))
      throw InvalidArgument(who + " center does not match the centroid of its points");
  }
  std::set<Edge> seen;
  for (const auto& [a, b] : g.edges) {
    if (a == b) throw InvalidArgument("self edge on node " + std::to_string(a));
    if (!ids.count(a) || !ids.count(b))
      throw InvalidArgument("edge (" + std::to_string(a) + "," + std::to_string(b) + ") refers to a missing node");
    if (!seen.insert(std::minmax(a, b)).second)
      throw InvalidArgument("duplicate edge (" + std::to_string(a) + "," + std::to_string(b) + ")");
  }
}

struct EdgeConfig {
  double min_threshold = 2.0;  // meters
  double scale = 1.0;          // multiplies the mean box diagonal
};

inline double edge_threshold(const SemanticNode& a, const SemanticNode& b, const EdgeConfig& cfg) {
  return std::max(cfg.min_threshold, cfg.scale * 0.5 * (a.box.norm() + b.box.norm()));
}

/// Proximity edges: (i, j) iff |o_i - o_j| < max(min_threshold, scale * mean diagonal).
inline std::vector<Edge> build_edges(const std::vector<SemanticNode>& nodes, const EdgeConfig& cfg = {}) {
  std::vector<Edge> edges;
  if (nodes.size() < 2) return edges;
  double max_diag = 0.0;
  for (const auto& n : nodes) max_diag = std::max(max_diag, n.box.norm());
  const double reach = std::max(cfg.min_threshold, cfg.scale * max_diag);

  // sweep along x; pairs further apart than the largest threshold are skipped
  std::vector<std::size_t> order(nodes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return nodes[a].center.x() < nodes[b].center.x(); });
  for (std::size_t u = 0; u < order.size(); ++u) {
    const auto& a = nodes[order[u]];
    for (std::size_t v = u + 1; v < order.size(); ++v) {
      const auto& b = nodes[order[v]];
      if (b.center.x() - a.center.x() >= reach) break;
      if ((a.center - b.center).norm() < edge_threshold(a, b, cfg)) edges.emplace_back(std::minmax(a.id, b.id));
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

inline SceneGraph make_graph(std::vector<SemanticNode> nodes, const EdgeConfig& cfg = {}) {
  SceneGraph g;
  g.edges = build_edges(nodes, cfg);
  g.nodes = std::move(nodes);
  return g;
}

/// Maps centers and points; boxes, labels and edges are kept.
inline SceneGraph apply_transform(const SceneGraph& g, const Transform& t) {
  SceneGraph out = g;
  for (auto& n : out.nodes) {
    n.center = t * n.center;
    for (auto& p : n.points) p = t * p;
  }
  return out;
}

/// Yaw uniform in [-max_yaw, max_yaw], translation components uniform in
/// [-max_translation, max_translation]; roll and pitch are zero.
inline Transform random_4dof_transform(std::uint64_t seed, double max_translation, double max_yaw = M_PI) {
  if (max_translation < 0) throw InvalidArgument("max_translation must be non-negative");
  Rng rng(hash_combine(seed, 0x4d0f));
  const double yaw = max_yaw > 0 ? rng.uniform(-max_yaw, max_yaw) : 0.0;
  Vec3 t = Vec3::Zero();
  if (max_translation > 0)
    for (int k = 0; k < 3; ++k) t[k] = rng.uniform(-max_translation, max_translation);
  return Transform::from_yaw(yaw, t);
}

inline double voxel_iou(const VoxelSet& a, const VoxelSet& b) {
  if (a.empty() && b.empty()) return 1.0;
  const VoxelSet& small = a.size() <= b.size() ? a : b;
  const VoxelSet& large = a.size() <= b.size() ? b : a;
  std::size_t inter = 0;
  for (const auto& k : small) inter += large.count(k);
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

/// Voxel IoU of two point clouds.
inline double point_cloud_iou(const Points& a, const Points& b, double voxel) {
  if (!(voxel > 0)) throw InvalidArgument("voxel size must be positive");
  return voxel_iou(voxelize(a, voxel), voxelize(b, voxel));
}

inline double point_cloud_iou(const SemanticNode& a, const SemanticNode& b, double voxel) {
  return point_cloud_iou(a.points, b.points, voxel);
}

struct GroundTruthConfig {
  double iou_threshold = 0.3;          // node pair is a true match at or above this IoU
  double point_match_distance = 0.05;  // meters
  double voxel = 0.05;                 // IoU voxel size, meters
};

struct GroundTruth {
  std::set<std::pair<int, int>> node_matches;               // (id in A, id in B)
  std::map<int, std::vector<int>> negatives;                 // id in A -> ids in B below threshold
  std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> point_matches;  // point index pairs
  Transform true_transform;
};

/// Nearest-neighbor point pairs (u in a, v in b) closer than `radius`;
/// `a` is expected to be already expressed in b's frame.
inline std::vector<std::pair<int, int>> match_points_within(const Points& a, const Points& b, double radius) {
  std::vector<std::pair<int, int>> out;
  if (a.empty() || b.empty()) return out;
  PointGrid grid(b, radius);
  for (std::size_t u = 0; u < a.size(); ++u) {
    const long v = grid.nearest_within(a[u], radius);
    if (v >= 0) out.emplace_back(static_cast<int>(u), static_cast<int>(v));
  }
  return out;
}

/// Ground-truth node pairs by voxel IoU under t_true (A -> B), negatives and
/// per-pair point matches.
inline GroundTruth generate_ground_truth(const SceneGraph& ga, const SceneGraph& gb, const Transform& t_true,
                                         const GroundTruthConfig& cfg = {}) {
  GroundTruth gt;
  gt.true_transform = t_true;
  std::vector<Points> moved;
  std::vector<VoxelSet> va, vb;
  for (const auto& n : ga.nodes) {
    moved.push_back(transform_points(n.points, t_true));
    va.push_back(voxelize(moved.back(), cfg.voxel));
  }
  for (const auto& n : gb.nodes) vb.push_back(voxelize(n.points, cfg.voxel));

  for (std::size_t i = 0; i < ga.nodes.size(); ++i) {
    auto& neg = gt.negatives[ga.nodes[i].id];
    for (std::size_t j = 0; j < gb.nodes.size(); ++j) {
      const double iou = voxel_iou(va[i], vb[j]);
      const std::pair<int, int> key{ga.nodes[i].id, gb.nodes[j].id};
      if (iou >= cfg.iou_threshold) {
        gt.node_matches.insert(key);
        gt.point_matches[key] = match_points_within(moved[i], gb.nodes[j].points, cfg.point_match_distance);
      } else {
        neg.push_back(gb.nodes[j].id);
      }
    }
  }
  return gt;
}

// ---------------------------------------------------------------------------
// Synthetic scene pairs

enum class ShapeKind { Box, Cylinder, Sphere };

struct ObjectClass {
  std::string label;
  ShapeKind shape;
  Vec3 min_size;  // box: extents, cylinder: (2r, 2r, h), sphere: diameter
  Vec3 max_size;
};

inline const std::vector<ObjectClass>& default_vocabulary() {
  static const std::vector<ObjectClass> vocab = {
      {"chair", ShapeKind::Box, {0.4, 0.4, 0.8}, {0.6, 0.6, 1.0}},
      {"table", ShapeKind::Box, {1.0, 0.6, 0.7}, {1.8, 1.0, 0.8}},
      {"sofa", ShapeKind::Box, {1.6, 0.8, 0.7}, {2.4, 1.0, 0.9}},
      {"bed", ShapeKind::Box, {1.8, 1.4, 0.5}, {2.2, 2.0, 0.7}},
      {"cabinet", ShapeKind::Box, {0.6, 0.4, 0.9}, {1.2, 0.6, 2.0}},
      {"desk", ShapeKind::Box, {1.0, 0.6, 0.72}, {1.6, 0.8, 0.78}},
      {"bookshelf", ShapeKind::Box, {0.8, 0.3, 1.6}, {1.2, 0.4, 2.2}},
      {"refrigerator", ShapeKind::Box, {0.6, 0.6, 1.6}, {0.8, 0.7, 1.9}},
      {"tv", ShapeKind::Box, {0.9, 0.08, 0.5}, {1.4, 0.12, 0.8}},
      {"monitor", ShapeKind::Box, {0.5, 0.1, 0.3}, {0.7, 0.2, 0.45}},
      {"box", ShapeKind::Box, {0.3, 0.3, 0.3}, {0.6, 0.6, 0.6}},
      {"door", ShapeKind::Box, {0.8, 0.05, 2.0}, {1.0, 0.1, 2.1}},
      {"sink", ShapeKind::Box, {0.5, 0.4, 0.2}, {0.8, 0.5, 0.3}},
      {"toilet", ShapeKind::Cylinder, {0.4, 0.4, 0.4}, {0.5, 0.5, 0.5}},
      {"trash can", ShapeKind::Cylinder, {0.25, 0.25, 0.4}, {0.4, 0.4, 0.7}},
      {"lamp", ShapeKind::Cylinder, {0.2, 0.2, 1.2}, {0.35, 0.35, 1.7}},
      {"plant", ShapeKind::Sphere, {0.4, 0.4, 0.4}, {0.8, 0.8, 0.8}},
      {"ball", ShapeKind::Sphere, {0.2, 0.2, 0.2}, {0.35, 0.35, 0.35}},
      {"stool", ShapeKind::Cylinder, {0.3, 0.3, 0.45}, {0.4, 0.4, 0.6}},
      {"pillow", ShapeKind::Box, {0.4, 0.3, 0.12}, {0.6, 0.4, 0.2}},
      {"washing machine", ShapeKind::Box, {0.6, 0.6, 0.85}, {0.6, 0.6, 0.9}},
      {"piano", ShapeKind::Box, {1.4, 0.6, 1.1}, {1.6, 0.7, 1.3}},
      {"bathtub", ShapeKind::Box, {1.5, 0.7, 0.5}, {1.8, 0.8, 0.6}},
      {"curtain", ShapeKind::Box, {1.2, 0.05, 1.8}, {2.0, 0.1, 2.4}},
  };
  return vocab;
}

struct GeneratorConfig {
  int min_nodes = 10;
  int max_nodes = 20;
  int min_points = 200;  // per node
  int max_points = 800;
  double overlap = 1.0;             // fraction of A's objects also present in B
  double point_noise = 0.0;         // sigma of isotropic noise added to B's points, meters
  double relabel_rate = 0.0;        // B nodes given a wrong label
  double oversegment_rate = 0.0;    // B nodes split in two by a plane through the centroid
  double drop_rate = 0.0;           // shared objects missing from B
  double partial_rate = 0.0;        // B nodes cropped by a vertical plane (partial observation)
  double max_translation = 5.0;     // of the ground-truth transform, meters
  double max_yaw = M_PI;
  double spacing = 2.0;             // room area per object is spacing^2
  bool distinct_labels = false;     // every object gets its own label
  bool shuffle_ids = true;          // B's node ids are a permutation unrelated to A's
  EdgeConfig edges;
};

struct ScenePair {
  SceneGraph a;
  SceneGraph b;
  Transform a_to_b;
};

namespace detail {

inline Points sample_surface(const ObjectClass& cls, const Vec3& size, int count, Rng& rng) {
  Points pts;
  pts.reserve(static_cast<std::size_t>(count));
  const double lx = size.x(), ly = size.y(), lz = size.z();
  switch (cls.shape) {
    case ShapeKind::Box: {
      // five faces (no bottom), picked in proportion to area
      const double areas[5] = {lx * ly, lx * lz, lx * lz, ly * lz, ly * lz};
      const double total = areas[0] + areas[1] + areas[2] + areas[3] + areas[4];
      for (int k = 0; k < count; ++k) {
        double pick = rng.uniform() * total;
        int face = 0;
        while (face < 4 && pick > areas[face]) pick -= areas[face++];
        const double u = rng.uniform(-0.5, 0.5), v = rng.uniform(-0.5, 0.5);
        Vec3 p;
        switch (face) {
          case 0: p = {u * lx, v * ly, 0.5 * lz}; break;
          case 1: p = {u * lx, -0.5 * ly, v * lz}; break;
          case 2: p = {u * lx, 0.5 * ly, v * lz}; break;
          case 3: p = {-0.5 * lx, u * ly, v * lz}; break;
          default: p = {0.5 * lx, u * ly, v * lz}; break;
        }
        pts.push_back(p);
      }
      break;
    }
    case ShapeKind::Cylinder: {
      const double r = 0.25 * (lx + ly);
      const double side = 2 * M_PI * r * lz, top = M_PI * r * r;
      for (int k = 0; k < count; ++k) {
        const double a = rng.uniform(0, 2 * M_PI);
        if (rng.uniform() * (side + top) < side) {
          pts.push_back({r * std::cos(a), r * std::sin(a), rng.uniform(-0.5, 0.5) * lz});
        } else {
          const double rr = r * std::sqrt(rng.uniform());
          pts.push_back({rr * std::cos(a), rr * std::sin(a), 0.5 * lz});
        }
      }
      break;
    }
    case ShapeKind::Sphere: {
      const double r = size.x() * 0.5;
      for (int k = 0; k < count; ++k) {
        Vec3 d(rng.normal(), rng.normal(), rng.normal());
        pts.push_back(r * d.normalized());
      }
      break;
    }
  }
  return pts;
}

struct WorldObject {
  std::string label;
  Points points;  // world frame
};

}  // namespace detail

/// Two graphs of a shared synthetic room, B expressed in a frame related to
/// A's by a random 4-DoF transform. Objects are placed without overlap on a
/// floor plan; B sees `overlap` of A's objects plus its own.
inline ScenePair synthesize_scene_pair(std::uint64_t seed, const GeneratorConfig& cfg = {}) {
  if (!(cfg.overlap >= 0.0 && cfg.overlap <= 1.0)) throw InvalidArgument("overlap must lie in [0, 1]");
  if (cfg.min_nodes < 1 || cfg.max_nodes < cfg.min_nodes) throw InvalidArgument("invalid node count range");
  if (cfg.min_points < 1 || cfg.max_points < cfg.min_points) throw InvalidArgument("invalid point count range");
  for (double r : {cfg.relabel_rate, cfg.oversegment_rate, cfg.drop_rate, cfg.partial_rate})
    if (!(r >= 0.0 && r <= 1.0)) throw InvalidArgument("noise rates must lie in [0, 1]");

  Rng rng(hash_combine(seed, 0x5ce4e));
  const auto& vocab = default_vocabulary();
  const int n_a = cfg.min_nodes + static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.max_nodes - cfg.min_nodes + 1)));
  const int shared = static_cast<int>(std::lround(cfg.overlap * n_a));
  const int n_world = n_a + (n_a - shared);

  // floor plan: jittered cells of a square grid, one object per cell
  const int grid = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_world))));
  std::vector<int> cells(static_cast<std::size_t>(grid * grid));
  std::iota(cells.begin(), cells.end(), 0);
  rng.shuffle(cells);

  std::vector<detail::WorldObject> world;
  for (int k = 0; k < n_world; ++k) {
    const auto& cls = vocab[rng.below(vocab.size())];
    Vec3 size;
    for (int c = 0; c < 3; ++c) size[c] = rng.uniform(cls.min_size[c], cls.max_size[c]);
    if (cls.shape == ShapeKind::Sphere) size = Vec3::Constant(size.x());
    const int count = cfg.min_points + static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.max_points - cfg.min_points + 1)));
    Points local = detail::sample_surface(cls, size, count, rng);

    // keep the footprint inside its cell with a margin
    const double half_foot = 0.5 * std::max(size.x(), size.y());
    const double slack = std::max(0.0, 0.5 * cfg.spacing - half_foot - 0.1);
    const int cell = cells[static_cast<std::size_t>(k)];
    const Vec3 pos((cell % grid + 0.5) * cfg.spacing + rng.uniform(-slack, slack),
                   (cell / grid + 0.5) * cfg.spacing + rng.uniform(-slack, slack), 0.5 * size.z());
    const Transform place = Transform::from_yaw(rng.uniform(-M_PI, M_PI), pos);
    std::string label = cls.label;
    if (cfg.distinct_labels) label += "_" + std::to_string(k);
    world.push_back({std::move(label), transform_points(local, place)});
  }

  // objects [0, n_a) belong to A; B gets [0, shared) plus [n_a, n_world)
  ScenePair out;
  out.a_to_b = random_4dof_transform(hash_combine(seed, 0x7), cfg.max_translation, cfg.max_yaw);

  std::vector<SemanticNode> nodes_a;
  for (int k = 0; k < n_a; ++k) nodes_a.push_back(make_node(k, world[static_cast<std::size_t>(k)].label,
                                                            world[static_cast<std::size_t>(k)].points));

  std::vector<int> seen_b;
  for (int k = 0; k < shared; ++k) seen_b.push_back(k);
  for (int k = n_a; k < n_world; ++k) seen_b.push_back(k);

  std::vector<std::pair<std::string, Points>> parts_b;
  for (int k : seen_b) {
    const auto& obj = world[static_cast<std::size_t>(k)];
    if (k < shared && rng.uniform() < cfg.drop_rate) continue;
    std::string label = obj.label;
    if (rng.uniform() < cfg.relabel_rate) {
      std::string other = label;
      while (other == label) other = vocab[rng.below(vocab.size())].label;
      label = other;
    }
    Points pts = obj.points;
    if (cfg.point_noise > 0)
      for (auto& p : pts) p += Vec3(rng.normal(), rng.normal(), rng.normal()) * cfg.point_noise;
    if (rng.uniform() < cfg.partial_rate) {
      // keep the side of a vertical plane holding 50-85% of the points
      const double ang = rng.uniform(-M_PI, M_PI);
      const Vec3 dir(std::cos(ang), std::sin(ang), 0.0);
      std::vector<double> proj;
      for (const auto& p : pts) proj.push_back(dir.dot(p));
      std::vector<double> sorted = proj;
      std::sort(sorted.begin(), sorted.end());
      const double cut = sorted[static_cast<std::size_t>(rng.uniform(0.15, 0.5) * static_cast<double>(sorted.size()))];
      Points kept;
      for (std::size_t i = 0; i < pts.size(); ++i)
        if (proj[i] >= cut) kept.push_back(pts[i]);
      if (!kept.empty()) pts = std::move(kept);
    }
    if (pts.size() >= 2 && rng.uniform() < cfg.oversegment_rate) {
      Vec3 normal(rng.normal(), rng.normal(), rng.normal());
      normal.normalize();
      const Vec3 c = centroid(pts);
      Points left, right;
      for (const auto& p : pts) (normal.dot(p - c) >= 0 ? left : right).push_back(p);
      if (!left.empty() && !right.empty()) {
        parts_b.emplace_back(label, std::move(left));
        parts_b.emplace_back(label, std::move(right));
        continue;
      }
    }
    parts_b.emplace_back(std::move(label), std::move(pts));
  }

  std::vector<int> ids(parts_b.size());
  std::iota(ids.begin(), ids.end(), 0);
  std::vector<std::size_t> order(parts_b.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (cfg.shuffle_ids) {
    rng.shuffle(ids);
    rng.shuffle(order);
  }
  std::vector<SemanticNode> nodes_b;
  for (std::size_t r = 0; r < order.size(); ++r) {
    auto& [label, pts] = parts_b[order[r]];
    nodes_b.push_back(make_node(ids[r], label, transform_points(pts, out.a_to_b)));
  }

  out.a = make_graph(std::move(nodes_a), cfg.edges);
  out.b = make_graph(std::move(nodes_b), cfg.edges);
  return out;
}

}  // namespace sgreg
