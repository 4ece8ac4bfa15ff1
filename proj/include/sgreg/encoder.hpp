#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sgreg/common.hpp"
#include "sgreg/geometry.hpp"
#include "sgreg/scene_graph.hpp"

namespace sgreg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct EncoderConfig {
  int feature_dim = 64;        // d
  int box_dim = 16;            // d_b
  int shape_dim = 32;          // d_s
  int point_dim = 32;          // d_z
  int points_per_node = 256;   // K_p
  int geo_dims = 16;           // width of each sinusoidal block in a triplet
  int point_embed_dims = 8;    // width of each sinusoidal block per point scalar
  int gnn_layers = 1;
  bool early_fusion = false;   // concatenate shape features before the GNN
  int max_triplets = 16;       // sampled per anchor node
  std::uint64_t sampling_seed = 0;
  double length_unit = 0.2;    // meters per radian of the finest length frequency
  double angle_unit = 0.1;     // cosine units per radian of the finest angle frequency
  double period_base = 100.0;
  double local_radius = 0.1;   // neighborhood for the point density scalar, meters
  double point_unit = 0.05;    // meters per radian for the point distance scalars
  double point_scale = 4.0;    // norm of every point feature
};

/// y = W x + b
struct DenseLayer {
  MatrixXd weight;  // out x in
  VectorXd bias;    // out

  static DenseLayer random(int out, int in, Rng& rng, double gain = 1.0) {
    DenseLayer l;
    l.weight.resize(out, in);
    const double sigma = gain / std::sqrt(static_cast<double>(std::max(in, 1)));
    for (int r = 0; r < out; ++r)
      for (int c = 0; c < in; ++c) l.weight(r, c) = rng.normal() * sigma;
    l.bias = VectorXd::Zero(out);
    return l;
  }

  /// Random orthogonal (out == in) or semi-orthogonal map, times `gain`.
  static DenseLayer orthogonal(int dim, Rng& rng, double gain = 1.0) {
    MatrixXd g(dim, dim);
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c) g(r, c) = rng.normal();
    Eigen::HouseholderQR<MatrixXd> qr(g);
    MatrixXd q = qr.householderQ();
    // sign fix makes the factorization unique
    const MatrixXd rmat = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int c = 0; c < dim; ++c)
      if (rmat(c, c) < 0) q.col(c) = -q.col(c);
    DenseLayer l;
    l.weight = gain * q;
    l.bias = VectorXd::Zero(dim);
    return l;
  }

  int in_dim() const { return static_cast<int>(weight.cols()); }
  int out_dim() const { return static_cast<int>(weight.rows()); }

  VectorXd apply(const VectorXd& x) const { return weight * x + bias; }

  /// Row-wise application: every row of `x` is one input.
  MatrixXd apply_rows(const MatrixXd& x) const {
    MatrixXd y = x * weight.transpose();
    y.rowwise() += bias.transpose();
    return y;
  }
};

inline VectorXd relu(VectorXd v) { return v.cwiseMax(0.0); }

struct GnnLayerWeights {
  DenseLayer query, key, value;           // triplet feature -> gnn dim
  DenseLayer message_hidden, message_out; // [x || m] -> hidden -> gnn dim
};

/// Every parameter of the forward pass. Seeded or loaded from a weight file;
/// immutable once built.
struct EncoderWeights {
  EncoderConfig config;
  DenseLayer box_mlp;                     // 3 -> d_b
  std::vector<GnnLayerWeights> gnn;
  DenseLayer point_embed;                 // point scalars -> d_z
  DenseLayer shape_head;                  // d_z -> d_s
  DenseLayer node_linear;                 // (d + d_s) -> (d + d_s), shared by both graphs
  std::map<std::string, VectorXd> label_table;  // optional exported label vectors

  int semantic_dim() const { return config.feature_dim - config.box_dim; }
  int gnn_dim() const { return config.feature_dim + (config.early_fusion ? config.shape_dim : 0); }
  int triplet_dim() const { return 2 * gnn_dim() + 3 * config.geo_dims; }
  int point_input_dim() const { return 4 * config.point_embed_dims; }
  int fused_dim() const { return config.feature_dim + config.shape_dim; }

  static EncoderWeights seeded(std::uint64_t seed, const EncoderConfig& cfg = {}) {
    if (cfg.box_dim <= 0 || cfg.box_dim >= cfg.feature_dim) throw InvalidArgument("box_dim must lie in (0, d)");
    if (cfg.geo_dims % 2 || cfg.point_embed_dims % 2) throw InvalidArgument("sinusoidal widths must be even");
    if (cfg.points_per_node < 1 || cfg.shape_dim < 1 || cfg.point_dim < 1 || cfg.gnn_layers < 0)
      throw InvalidArgument("invalid encoder dimensions");
    EncoderWeights w;
    w.config = cfg;
    Rng rng(hash_combine(seed, 0xe4c0de));
    w.box_mlp = DenseLayer::random(cfg.box_dim, 3, rng, 0.5);
    const int g = w.gnn_dim();
    for (int l = 0; l < cfg.gnn_layers; ++l) {
      GnnLayerWeights layer;
      layer.query = DenseLayer::random(g, w.triplet_dim(), rng);
      layer.key = DenseLayer::random(g, w.triplet_dim(), rng);
      layer.value = DenseLayer::random(g, w.triplet_dim(), rng);
      layer.message_hidden = DenseLayer::random(2 * g, 2 * g, rng);
      layer.message_out = DenseLayer::random(g, 2 * g, rng, 0.25);
      w.gnn.push_back(std::move(layer));
    }
    w.point_embed = DenseLayer::random(cfg.point_dim, w.point_input_dim(), rng);
    w.shape_head = DenseLayer::random(cfg.shape_dim, cfg.point_dim, rng, 1.0 / cfg.point_scale);
    w.node_linear = DenseLayer::orthogonal(w.fused_dim(), rng);
    return w;
  }
};

// ---------------------------------------------------------------------------
// Node initialization

inline std::string normalize_label(std::string_view label) {
  std::size_t b = 0, e = label.size();
  while (b < e && std::isspace(static_cast<unsigned char>(label[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(label[e - 1]))) --e;
  std::string out(label.substr(b, e - b));
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (out.empty()) out = "none";
  return out;
}

/// Deterministic unit vector for a label: FNV-1a of the normalized label
/// seeds a splitmix64 stream, consumed pairwise by Box-Muller.
inline VectorXd semantic_embedding(std::string_view label, int dims) {
  const std::string key = normalize_label(label);
  Rng rng(fnv1a64(key));
  VectorXd v(dims);
  for (int k = 0; k < dims; ++k) v[k] = rng.normal();
  return v / v.norm();
}

inline VectorXd semantic_embedding(std::string_view label, const EncoderWeights& w) {
  if (!w.label_table.empty()) {
    auto it = w.label_table.find(normalize_label(label));
    if (it != w.label_table.end()) return it->second.normalized();
  }
  return semantic_embedding(label, w.semantic_dim());
}

/// Layer-0 node features: [label embedding || ReLU(box_mlp(box))].
inline MatrixXd init_node_features(const SceneGraph& g, const EncoderWeights& w) {
  const int d = w.config.feature_dim, sem = w.semantic_dim();
  MatrixXd x(static_cast<Eigen::Index>(g.nodes.size()), d);
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const auto& n = g.nodes[i];
    const auto r = static_cast<Eigen::Index>(i);
    x.row(r).head(sem) = semantic_embedding(n.label, w).transpose();
    x.row(r).tail(w.config.box_dim) = relu(w.box_mlp.apply(n.box)).transpose();
  }
  return x;
}

// ---------------------------------------------------------------------------
// Triplets

/// entry 2m = sin(value / base^(2m/dims)), entry 2m+1 = cos(same).
inline VectorXd sinusoidal_embed(double value, int dims, double period_base) {
  if (dims % 2 != 0 || dims <= 0) throw InvalidArgument("sinusoidal_embed: dims must be even and positive");
  if (!(period_base > 0)) throw InvalidArgument("sinusoidal_embed: period_base must be positive");
  VectorXd out(dims);
  for (int m = 0; m < dims / 2; ++m) {
    const double arg = value / std::pow(period_base, 2.0 * m / dims);
    out[2 * m] = std::sin(arg);
    out[2 * m + 1] = std::cos(arg);
  }
  return out;
}

struct TripletDescriptor {
  int anchor = 0;
  int first = 0;   // corner order satisfies (e_anchor,first x e_anchor,second)_z >= 0
  int second = 0;
  VectorXd geometry;  // [psi_L(|e1|) || psi_L(|e2|) || psi_A(cos)]
  VectorXd feature;   // [x_first || x_second || geometry]
};

/// Ordered triplet around anchor `i` with corners `j`, `k` (node ids).
/// `x` holds one feature row per node in graph order.
inline TripletDescriptor triplet_feature(const SceneGraph& g, const MatrixXd& x, int i, int j, int k,
                                         const EncoderConfig& cfg) {
  if (j == k) throw InvalidArgument("triplet corners must differ");
  const long ia = g.index_of(i), ij = g.index_of(j), ik = g.index_of(k);
  if (ia < 0 || ij < 0 || ik < 0) throw InvalidArgument("triplet refers to a missing node");
  const Vec3& o = g.nodes[static_cast<std::size_t>(ia)].center;
  Vec3 e1 = g.nodes[static_cast<std::size_t>(ij)].center - o;
  Vec3 e2 = g.nodes[static_cast<std::size_t>(ik)].center - o;
  if (e1.norm() == 0.0 || e2.norm() == 0.0)
    throw DegenerateError("triplet around node " + std::to_string(i) + " has coincident centers");

  TripletDescriptor t;
  t.anchor = i;
  long first = ij, second = ik;
  t.first = j;
  t.second = k;
  const double cross_z = e1.x() * e2.y() - e1.y() * e2.x();
  if (cross_z < 0) {
    std::swap(e1, e2);
    std::swap(first, second);
    std::swap(t.first, t.second);
  }
  const double l1 = e1.norm(), l2 = e2.norm();
  const double cosine = std::clamp(e1.dot(e2) / (l1 * l2), -1.0, 1.0);
  const int gd = cfg.geo_dims;
  t.geometry.resize(3 * gd);
  t.geometry << sinusoidal_embed(l1 / cfg.length_unit, gd, cfg.period_base),
      sinusoidal_embed(l2 / cfg.length_unit, gd, cfg.period_base),
      sinusoidal_embed(cosine / cfg.angle_unit, gd, cfg.period_base);
  const auto dim = x.cols();
  t.feature.resize(2 * dim + t.geometry.size());
  t.feature << x.row(first).transpose(), x.row(second).transpose(), t.geometry;
  return t;
}

/// Up to `max_triplets` distinct unordered neighbor pairs of node `anchor`,
/// uniform without replacement. The stream is keyed on (seed, node id), never
/// on list position.
inline std::vector<std::pair<int, int>> sample_triplets(const std::vector<int>& neighbors, int anchor,
                                                        int max_triplets, std::uint64_t seed) {
  std::vector<int> nb = neighbors;
  std::sort(nb.begin(), nb.end());
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t a = 0; a < nb.size(); ++a)
    for (std::size_t b = a + 1; b < nb.size(); ++b) pairs.emplace_back(nb[a], nb[b]);
  if (static_cast<int>(pairs.size()) <= max_triplets) return pairs;
  Rng rng(hash_combine(seed, static_cast<std::uint64_t>(static_cast<std::int64_t>(anchor))));
  auto picked = rng.sample_without_replacement(pairs.size(), static_cast<std::size_t>(std::max(max_triplets, 0)));
  std::sort(picked.begin(), picked.end());
  std::vector<std::pair<int, int>> out;
  for (auto p : picked) out.push_back(pairs[p]);
  return out;
}

inline std::vector<std::pair<int, int>> sample_triplets(const SceneGraph& g, int anchor, int max_triplets,
                                                        std::uint64_t seed) {
  const auto adj = g.adjacency();
  auto it = adj.find(anchor);
  if (it == adj.end()) throw InvalidArgument("no node with id " + std::to_string(anchor));
  return sample_triplets(it->second, anchor, max_triplets, seed);
}

struct GnnOutput {
  MatrixXd features;
  std::vector<std::vector<double>> attention;  // per node, one weight per sampled triplet
};

/// Residual triplet message passing: x' = x + MLP([x || m]),
/// m = sum softmax(q(t).k(t)/sqrt(dim)) v(t) over the sampled triplets.
inline GnnOutput gnn_layer(const SceneGraph& g, const MatrixXd& x, const GnnLayerWeights& w,
                           const EncoderConfig& cfg, std::uint64_t seed) {
  const auto n = static_cast<Eigen::Index>(g.nodes.size());
  const auto dim = x.cols();
  if (x.rows() != n) throw InvalidArgument("gnn_layer: feature rows do not match node count");
  const auto adj = g.adjacency();
  GnnOutput out;
  out.features = x;
  out.attention.resize(g.nodes.size());
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(w.query.out_dim()));
  for (Eigen::Index r = 0; r < n; ++r) {
    const int id = g.nodes[static_cast<std::size_t>(r)].id;
    const auto pairs = sample_triplets(adj.at(id), id, cfg.max_triplets, seed);
    VectorXd message = VectorXd::Zero(w.value.out_dim());
    if (!pairs.empty()) {
      std::vector<double> scores;
      std::vector<VectorXd> values;
      for (const auto& [j, k] : pairs) {
        const auto t = triplet_feature(g, x, id, j, k, cfg);
        scores.push_back(w.query.apply(t.feature).dot(w.key.apply(t.feature)) * inv_sqrt);
        values.push_back(w.value.apply(t.feature));
      }
      const double top = *std::max_element(scores.begin(), scores.end());
      double total = 0.0;
      for (auto& s : scores) total += (s = std::exp(s - top));
      for (std::size_t q = 0; q < scores.size(); ++q) {
        scores[q] /= total;
        message += scores[q] * values[q];
      }
      out.attention[static_cast<std::size_t>(r)] = std::move(scores);
    }
    VectorXd joint(dim + message.size());
    joint << x.row(r).transpose(), message;
    out.features.row(r) += w.message_out.apply(relu(w.message_hidden.apply(joint))).transpose();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Shape features

struct ShapeOutput {
  MatrixXd shape;                              // |V| x d_s
  std::vector<Points> node_points;             // |V| x K_p, padded with zeros
  std::vector<MatrixXd> point_feats;           // |V| x (K_p x d_z), padded rows are zero
  std::vector<std::vector<bool>> point_mask;   // |V| x K_p
};

/// Indices of the K_p points kept for one node: a uniform subset when the node
/// has more, all of them otherwise. Keyed on (seed, node id).
inline std::vector<std::size_t> select_node_points(const SemanticNode& n, int k, std::uint64_t seed) {
  std::vector<std::size_t> idx;
  if (static_cast<int>(n.points.size()) > k) {
    Rng rng(hash_combine(hash_combine(seed, 0x5a3e), static_cast<std::uint64_t>(static_cast<std::int64_t>(n.id))));
    idx = rng.sample_without_replacement(n.points.size(), static_cast<std::size_t>(k));
    std::sort(idx.begin(), idx.end());
  } else {
    idx.resize(n.points.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
  }
  return idx;
}

/// Rigid-invariant scalars of one point within its node, embedded:
/// distance to the centroid, horizontal distance to the centroid, height above
/// the node's lowest point and the fraction of node points within local_radius.
inline VectorXd point_descriptor_input(const Vec3& p, const Vec3& center, double base_z, double density,
                                       const EncoderConfig& cfg) {
  const int e = cfg.point_embed_dims;
  const Vec3 d = p - center;
  VectorXd out(4 * e);
  out << sinusoidal_embed(d.norm() / cfg.point_unit, e, cfg.period_base),
      sinusoidal_embed(d.head<2>().norm() / cfg.point_unit, e, cfg.period_base),
      sinusoidal_embed((p.z() - base_z) / cfg.point_unit, e, cfg.period_base),
      sinusoidal_embed(density / 0.02, e, cfg.period_base);
  return out;
}

inline ShapeOutput encode_shape(const SceneGraph& g, const EncoderWeights& w) {
  const auto& cfg = w.config;
  const int kp = cfg.points_per_node;
  ShapeOutput out;
  out.shape = MatrixXd::Zero(static_cast<Eigen::Index>(g.nodes.size()), cfg.shape_dim);
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const auto& n = g.nodes[i];
    if (n.points.empty()) throw InvalidArgument("node " + std::to_string(n.id) + " has no points");
    const auto idx = select_node_points(n, kp, cfg.sampling_seed);
    double base_z = n.points.front().z();
    for (const auto& p : n.points) base_z = std::min(base_z, p.z());
    PointGrid grid(n.points, cfg.local_radius);

    Points pts(static_cast<std::size_t>(kp), Vec3::Zero());
    MatrixXd feats = MatrixXd::Zero(kp, cfg.point_dim);
    std::vector<bool> mask(static_cast<std::size_t>(kp), false);
    VectorXd pooled = VectorXd::Zero(cfg.point_dim);
    for (std::size_t s = 0; s < idx.size(); ++s) {
      const Vec3& p = n.points[idx[s]];
      const double density =
          static_cast<double>(grid.count_within(p, cfg.local_radius)) / static_cast<double>(n.points.size());
      VectorXd z = w.point_embed.apply(point_descriptor_input(p, n.center, base_z, density, cfg));
      const double norm = z.norm();
      if (norm > 0) z *= cfg.point_scale / norm;
      pts[s] = p;
      feats.row(static_cast<Eigen::Index>(s)) = z.transpose();
      mask[s] = true;
      pooled += z;
    }
    pooled /= static_cast<double>(idx.size());
    out.shape.row(static_cast<Eigen::Index>(i)) = w.shape_head.apply(pooled).transpose();
    out.node_points.push_back(std::move(pts));
    out.point_feats.push_back(std::move(feats));
    out.point_mask.push_back(std::move(mask));
  }
  return out;
}

/// Row-wise concatenation [x1 || shape].
inline MatrixXd fuse_features(const MatrixXd& x1, const MatrixXd& shape) {
  if (x1.rows() != shape.rows()) throw InvalidArgument("fuse_features: row counts differ");
  MatrixXd out(x1.rows(), x1.cols() + shape.cols());
  out << x1, shape;
  return out;
}

struct FeatureSet {
  std::vector<int> ids;  // node id per row
  MatrixXd x0, x1, shape, x2;
  std::vector<Points> node_points;
  std::vector<MatrixXd> point_feats;
  std::vector<std::vector<bool>> point_mask;
};

/// Full forward pass: initialization, triplet GNN, shape features and fusion.
inline FeatureSet encode(const SceneGraph& g, const EncoderWeights& w) {
  validate(g);
  FeatureSet f;
  for (const auto& n : g.nodes) f.ids.push_back(n.id);
  f.x0 = init_node_features(g, w);
  auto shape = encode_shape(g, w);
  f.shape = shape.shape;
  MatrixXd x = w.config.early_fusion ? fuse_features(f.x0, f.shape) : f.x0;
  for (std::size_t l = 0; l < w.gnn.size(); ++l)
    x = gnn_layer(g, x, w.gnn[l], w.config, hash_combine(w.config.sampling_seed, l)).features;
  f.x1 = x;
  f.x2 = w.config.early_fusion ? f.x1 : fuse_features(f.x1, f.shape);
  f.node_points = std::move(shape.node_points);
  f.point_feats = std::move(shape.point_feats);
  f.point_mask = std::move(shape.point_mask);
  return f;
}

// ---------------------------------------------------------------------------
// Weight file: little-endian float32 tensors after a fixed header.

inline constexpr std::array<char, 4> kWeightMagic = {'S', 'G', 'R', 'W'};
inline constexpr std::uint32_t kWeightVersion = 1;

namespace detail {

inline void write_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw ParseError("weight file: truncated header");
  return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
         static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}

inline void write_f32(std::ostream& out, double v) {
  const float f = static_cast<float>(v);
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  write_u32(out, bits);
}

inline double read_f32(std::istream& in) {
  const std::uint32_t bits = read_u32(in);
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

inline void write_layer(std::ostream& out, const DenseLayer& l) {
  for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
    for (Eigen::Index c = 0; c < l.weight.cols(); ++c) write_f32(out, l.weight(r, c));
  for (Eigen::Index r = 0; r < l.bias.size(); ++r) write_f32(out, l.bias[r]);
}

inline void read_layer(std::istream& in, DenseLayer& l) {
  for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
    for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = read_f32(in);
  for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias[r] = read_f32(in);
}

template <typename Fn>
void for_each_layer(EncoderWeights& w, Fn&& fn) {
  fn(w.box_mlp);
  for (auto& layer : w.gnn) {
    fn(layer.query);
    fn(layer.key);
    fn(layer.value);
    fn(layer.message_hidden);
    fn(layer.message_out);
  }
  fn(w.point_embed);
  fn(w.shape_head);
  fn(w.node_linear);
}

}  // namespace detail

/// Header: magic "SGRW", version, d, d_b, d_s, d_z, K_p, gnn layers,
/// early-fusion flag, geo width, point width (all u32). Then every dense layer
/// (weight row-major, then bias) in declaration order.
inline void save_weights(const EncoderWeights& w, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(kWeightMagic.data(), 4);
  const auto& c = w.config;
  for (std::uint32_t v : {kWeightVersion, std::uint32_t(c.feature_dim), std::uint32_t(c.box_dim),
                          std::uint32_t(c.shape_dim), std::uint32_t(c.point_dim), std::uint32_t(c.points_per_node),
                          std::uint32_t(c.gnn_layers), std::uint32_t(c.early_fusion ? 1 : 0),
                          std::uint32_t(c.geo_dims), std::uint32_t(c.point_embed_dims)})
    detail::write_u32(out, v);
  auto copy = w;
  detail::for_each_layer(copy, [&](DenseLayer& l) { detail::write_layer(out, l); });
  if (!out) throw Error("write failed: " + path.string());
}

/// Loads a weight file; scalar settings not stored in the header come from `base`.
inline EncoderWeights load_weights(const std::filesystem::path& path, EncoderConfig base = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), 4) || magic != kWeightMagic) throw ParseError("weight file: bad magic");
  if (detail::read_u32(in) != kWeightVersion) throw ParseError("weight file: unsupported version");
  base.feature_dim = static_cast<int>(detail::read_u32(in));
  base.box_dim = static_cast<int>(detail::read_u32(in));
  base.shape_dim = static_cast<int>(detail::read_u32(in));
  base.point_dim = static_cast<int>(detail::read_u32(in));
  base.points_per_node = static_cast<int>(detail::read_u32(in));
  base.gnn_layers = static_cast<int>(detail::read_u32(in));
  base.early_fusion = detail::read_u32(in) != 0;
  base.geo_dims = static_cast<int>(detail::read_u32(in));
  base.point_embed_dims = static_cast<int>(detail::read_u32(in));
  EncoderWeights w = EncoderWeights::seeded(0, base);  // allocates every tensor with the right shape
  detail::for_each_layer(w, [&](DenseLayer& l) { detail::read_layer(in, l); });
  if (in.peek() != std::char_traits<char>::eof()) throw ParseError("weight file: trailing bytes");
  return w;
}

/// Text table of exported label vectors: one "label<TAB>v1 v2 ..." per line.
inline std::map<std::string, VectorXd> load_label_table(const std::filesystem::path& path, int dims) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::map<std::string, VectorXd> table;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(path.string() + ":" + std::to_string(lineno) + ": missing tab");
    std::istringstream vals(line.substr(tab + 1));
    std::vector<double> v;
    for (double x; vals >> x;) v.push_back(x);
    if (static_cast<int>(v.size()) != dims)
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(dims) + " values");
    table[normalize_label(line.substr(0, tab))] = Eigen::Map<VectorXd>(v.data(), dims);
  }
  return table;
}

}  // namespace sgreg
