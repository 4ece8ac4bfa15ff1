#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sgreg/common.hpp"
#include "sgreg/encoder.hpp"
#include "sgreg/geometry.hpp"
#include "sgreg/matcher.hpp"
#include "sgreg/metrics.hpp"
#include "sgreg/pipeline.hpp"
#include "sgreg/pose_estimator.hpp"
#include "sgreg/scene_graph.hpp"

namespace sgreg {

// ---------------------------------------------------------------------------
// Messages and wire format

enum class MessageKind : std::uint8_t { Coarse = 1, Dense = 2, Request = 3 };

inline const char* to_string(MessageKind k) {
  switch (k) {
    case MessageKind::Coarse: return "coarse";
    case MessageKind::Dense: return "dense";
    case MessageKind::Request: return "request";
  }
  return "?";
}

inline constexpr std::array<char, 4> kMessageMagic = {'S', 'G', 'M', 'S'};
/// magic 4 + type 1 + frame 4 + node count 4 + feature dim 2 + point count 4
inline constexpr std::size_t kHeaderBytes = 19;
/// magic 4 + type 1 + frame 4 + requested-from frame 4 + reserved 3
inline constexpr std::size_t kRequestBytes = 16;

struct CoarseMessage {
  std::uint32_t frame = 0;
  double timestamp = 0.0;  // simulated seconds; one tick per frame, not serialized
  MatrixXd features;       // |A| x d_msg
  MatrixXd centers;        // |A| x 3
};

struct DenseMessage {
  CoarseMessage coarse;
  Points points;
  std::vector<std::int32_t> parents;  // row of `coarse` each point belongs to
};

struct RequestMessage {
  std::uint32_t frame = 0;
  std::uint32_t from_frame = 0;  // frame of the coarse message that triggered it
};

inline std::size_t coarse_size(std::size_t nodes, std::size_t dims) { return kHeaderBytes + nodes * (dims + 3) * 4; }

inline std::size_t dense_size(std::size_t nodes, std::size_t dims, std::size_t points) {
  return coarse_size(nodes, dims) + points * 4 * 4;
}

namespace detail {

class ByteWriter {
 public:
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    bytes.insert(bytes.end(), b, b + n);
  }
  void u8(std::uint8_t v) { bytes.push_back(v); }
  void u16(std::uint16_t v) {
    for (int k = 0; k < 2; ++k) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
  }
  void u32(std::uint32_t v) {
    for (int k = 0; k < 4; ++k) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
  }
  void f32(double v) {
    const float f = static_cast<float>(v);
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    u32(u);
  }
  std::vector<std::uint8_t> bytes;
};

class ByteReader {
 public:
  explicit ByteReader(const std::vector<std::uint8_t>& b) : b_(b) {}
  void need(std::size_t n) const {
    if (pos_ + n > b_.size()) throw ParseError("message truncated");
  }
  std::uint8_t u8() {
    need(1);
    return b_[pos_++];
  }
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint16_t>(b_[pos_] | (b_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(b_[pos_ + static_cast<std::size_t>(k)]) << (8 * k);
    pos_ += 4;
    return v;
  }
  double f32() {
    const std::uint32_t u = u32();
    float f;
    std::memcpy(&f, &u, 4);
    return f;
  }
  bool done() const { return pos_ == b_.size(); }

 private:
  const std::vector<std::uint8_t>& b_;
  std::size_t pos_ = 0;
};

inline void write_header(ByteWriter& w, MessageKind kind, std::uint32_t frame, std::size_t nodes, std::size_t dims,
                         std::size_t points) {
  if (dims > 0xffff) throw InvalidArgument("message feature dimension exceeds 16 bits");
  w.raw(kMessageMagic.data(), 4);
  w.u8(static_cast<std::uint8_t>(kind));
  w.u32(frame);
  w.u32(static_cast<std::uint32_t>(nodes));
  w.u16(static_cast<std::uint16_t>(dims));
  w.u32(static_cast<std::uint32_t>(points));
}

inline void write_nodes(ByteWriter& w, const CoarseMessage& m) {
  for (Eigen::Index i = 0; i < m.features.rows(); ++i)
    for (Eigen::Index j = 0; j < m.features.cols(); ++j) w.f32(m.features(i, j));
  for (Eigen::Index i = 0; i < m.centers.rows(); ++i)
    for (Eigen::Index j = 0; j < 3; ++j) w.f32(m.centers(i, j));
}

inline void check_coarse(const CoarseMessage& m) {
  if (m.features.rows() != m.centers.rows()) throw InvalidArgument("message: feature and center row counts differ");
  if (m.centers.rows() > 0 && m.centers.cols() != 3) throw InvalidArgument("message: centers must have 3 columns");
}

}  // namespace detail

inline std::vector<std::uint8_t> serialize(const CoarseMessage& m) {
  detail::check_coarse(m);
  detail::ByteWriter w;
  detail::write_header(w, MessageKind::Coarse, m.frame, static_cast<std::size_t>(m.features.rows()),
                       static_cast<std::size_t>(m.features.cols()), 0);
  detail::write_nodes(w, m);
  return std::move(w.bytes);
}

inline std::vector<std::uint8_t> serialize(const DenseMessage& m) {
  detail::check_coarse(m.coarse);
  if (m.points.size() != m.parents.size()) throw InvalidArgument("dense message: one parent per point required");
  for (auto p : m.parents)
    if (p < 0 || p >= m.coarse.features.rows()) throw InvalidArgument("dense message: parent refers to an unsent node");
  detail::ByteWriter w;
  detail::write_header(w, MessageKind::Dense, m.coarse.frame, static_cast<std::size_t>(m.coarse.features.rows()),
                       static_cast<std::size_t>(m.coarse.features.cols()), m.points.size());
  detail::write_nodes(w, m.coarse);
  for (std::size_t k = 0; k < m.points.size(); ++k) {
    w.f32(m.points[k].x());
    w.f32(m.points[k].y());
    w.f32(m.points[k].z());
    w.u32(static_cast<std::uint32_t>(m.parents[k]));
  }
  return std::move(w.bytes);
}

inline std::vector<std::uint8_t> serialize(const RequestMessage& m) {
  detail::ByteWriter w;
  w.raw(kMessageMagic.data(), 4);
  w.u8(static_cast<std::uint8_t>(MessageKind::Request));
  w.u32(m.frame);
  w.u32(m.from_frame);
  for (int k = 0; k < 3; ++k) w.u8(0);
  return std::move(w.bytes);
}

/// Decodes a coarse or dense message. Coarse bytes yield a DenseMessage
/// without points.
inline DenseMessage deserialize(const std::vector<std::uint8_t>& bytes) {
  detail::ByteReader r(bytes);
  for (char c : kMessageMagic)
    if (r.u8() != static_cast<std::uint8_t>(c)) throw ParseError("message: bad magic");
  const auto kind = r.u8();
  if (kind != static_cast<std::uint8_t>(MessageKind::Coarse) && kind != static_cast<std::uint8_t>(MessageKind::Dense))
    throw ParseError("message: not a coarse or dense message");
  DenseMessage m;
  m.coarse.frame = r.u32();
  m.coarse.timestamp = m.coarse.frame;
  const auto nodes = static_cast<Eigen::Index>(r.u32());
  const auto dims = static_cast<Eigen::Index>(r.u16());
  const auto points = r.u32();
  r.need(static_cast<std::size_t>(nodes) * static_cast<std::size_t>(dims + 3) * 4);
  m.coarse.features.resize(nodes, dims);
  m.coarse.centers.resize(nodes, 3);
  for (Eigen::Index i = 0; i < nodes; ++i)
    for (Eigen::Index j = 0; j < dims; ++j) m.coarse.features(i, j) = r.f32();
  for (Eigen::Index i = 0; i < nodes; ++i)
    for (Eigen::Index j = 0; j < 3; ++j) m.coarse.centers(i, j) = r.f32();
  for (std::uint32_t k = 0; k < points; ++k) {
    Vec3 p;
    p.x() = r.f32();
    p.y() = r.f32();
    p.z() = r.f32();
    m.points.push_back(p);
    m.parents.push_back(static_cast<std::int32_t>(r.u32()));
  }
  if (!r.done()) throw ParseError("message: trailing bytes");
  return m;
}

// ---------------------------------------------------------------------------
// Bandwidth ledger

class BandwidthLedger {
 public:
  void record(int frame, MessageKind kind, std::size_t bytes) {
    per_frame_[frame][kind] += bytes;
    totals_[kind] += bytes;
    ++counts_[kind];
  }
  void count_query_frame() { ++query_frames_; }

  std::size_t total(MessageKind kind) const {
    auto it = totals_.find(kind);
    return it == totals_.end() ? 0 : it->second;
  }
  std::size_t total() const {
    std::size_t t = 0;
    for (const auto& [k, v] : totals_) t += v;
    return t;
  }
  std::size_t messages(MessageKind kind) const {
    auto it = counts_.find(kind);
    return it == counts_.end() ? 0 : it->second;
  }
  std::size_t frame_bytes(int frame, MessageKind kind) const {
    auto it = per_frame_.find(frame);
    if (it == per_frame_.end()) return 0;
    auto jt = it->second.find(kind);
    return jt == it->second.end() ? 0 : jt->second;
  }
  std::size_t query_frames() const { return query_frames_; }
  double average_per_query_frame() const {
    return query_frames_ == 0 ? 0.0 : static_cast<double>(total()) / static_cast<double>(query_frames_);
  }

 private:
  std::map<int, std::map<MessageKind, std::size_t>> per_frame_;
  std::map<MessageKind, std::size_t> totals_, counts_;
  std::size_t query_frames_ = 0;
};

// ---------------------------------------------------------------------------
// Robust pose averaging

struct PoseAverageConfig {
  double translation_threshold = 0.2;  // meters
  double rotation_threshold = 5.0;     // degrees, converted to a chordal distance
  GncSchedule gnc;
};

/// GNC-TLS over the last `window` poses: chordal rotation mean projected to
/// SO(3) plus weighted translation mean, started from the medoid pose.
inline Transform robust_pose_average(const std::vector<Transform>& poses, std::size_t window,
                                     const PoseAverageConfig& cfg = {}) {
  if (poses.empty() || window == 0) throw InvalidArgument("robust_pose_average: empty window");
  const std::size_t n = std::min(window, poses.size());
  const std::vector<Transform> p(poses.end() - static_cast<long>(n), poses.end());
  if (n == 1) return p.front();
  const double ct2 = cfg.translation_threshold * cfg.translation_threshold;
  const double chord = 2.0 * std::sqrt(2.0) * std::sin(deg2rad(cfg.rotation_threshold) / 2.0);
  const double cr2 = chord * chord;
  auto residual = [&](const Transform& a, const Transform& b) {
    return (a.translation - b.translation).squaredNorm() / ct2 + (a.rotation - b.rotation).squaredNorm() / cr2;
  };
  auto weighted_mean = [&](const std::vector<double>& w) {
    Mat3 rs = Mat3::Zero();
    Vec3 ts = Vec3::Zero();
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      rs += w[k] * p[k].rotation;
      ts += w[k] * p[k].translation;
      total += w[k];
    }
    Transform t;
    t.rotation = project_to_so3(rs);
    t.translation = ts / total;
    return t;
  };

  std::size_t medoid = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < n; ++a) {
    double s = 0.0;
    for (std::size_t b = 0; b < n; ++b) s += std::sqrt(residual(p[a], p[b]));
    if (s < best) {
      best = s;
      medoid = a;
    }
  }
  Transform mean = p[medoid];
  std::vector<double> r(n), w(n, 1.0);
  for (std::size_t k = 0; k < n; ++k) r[k] = residual(p[k], mean);
  const double r_max = *std::max_element(r.begin(), r.end());
  if (r_max <= 1.0) return weighted_mean(w);
  double mu = 1.0 / (2.0 * r_max - 1.0);
  for (int it = 0; it < cfg.gnc.max_iters; ++it) {
    for (std::size_t k = 0; k < n; ++k) {
      if (r[k] >= (mu + 1.0) / mu) w[k] = 0.0;
      else if (r[k] <= mu / (mu + 1.0)) w[k] = 1.0;
      else w[k] = std::sqrt(mu * (mu + 1.0) / r[k]) - mu;
    }
    if (std::accumulate(w.begin(), w.end(), 0.0) <= 0.0) break;
    mean = weighted_mean(w);
    for (std::size_t k = 0; k < n; ++k) r[k] = residual(p[k], mean);
    double gap = 0.0;
    for (double x : w) gap += x * (1.0 - x);
    if (gap < cfg.gnc.tolerance) break;
    mu *= cfg.gnc.factor;
  }
  return mean;
}

// ---------------------------------------------------------------------------
// Coarse registration

/// Instance-cloud covariance of a node's points.
inline Mat3 point_covariance(const Points& pts) {
  if (pts.empty()) return Mat3::Zero();
  const Vec3 c = centroid(pts);
  Mat3 s = Mat3::Zero();
  for (const auto& p : pts) s += (p - c) * (p - c).transpose();
  return s / static_cast<double>(pts.size());
}

/// Matched node-center pairs, tagged with the covariances that are known, plus
/// the cached correspondences from the latest dense exchange.
inline CorrespondenceSet coarse_register(const std::vector<NodeMatch>& matches, const MatrixXd& centers_a,
                                         const std::vector<Vec3>& centers_b, const CorrespondenceSet& cache,
                                         const std::vector<Mat3>* covariances_a = nullptr,
                                         const std::vector<Mat3>* covariances_b = nullptr) {
  if (matches.empty() && cache.empty()) throw InsufficientDataError("no node matches and no cached correspondences");
  CorrespondenceSet out;
  for (const auto& m : matches) {
    Correspondence c;
    c.source = centers_a.row(m.row).transpose();
    c.target = centers_b.at(static_cast<std::size_t>(m.col));
    c.score = std::clamp(m.confidence, 0.0, 1.0);
    c.source_node = m.source;
    c.target_node = m.target;
    if (covariances_a) c.source_cov = covariances_a->at(static_cast<std::size_t>(m.row));
    if (covariances_b) c.target_cov = covariances_b->at(static_cast<std::size_t>(m.col));
    out.push_back(std::move(c));
  }
  out.insert(out.end(), cache.begin(), cache.end());
  return out;
}

// ---------------------------------------------------------------------------
// Simulator

inline constexpr double kNever = std::numeric_limits<double>::infinity();

struct SimConfig {
  GeneratorConfig scene;            // the two agents' full scenes
  int frames = 20;                  // ticks; one coarse message per tick
  int coarse_period = 1;            // ticks between coarse messages
  int min_matches = 3;              // matched nodes needed to request a dense message
  double dense_interval = kNever;   // minimum ticks between dense exchanges
  bool dense_enabled = true;
  double initial_reveal = 0.2;      // fraction of each agent's nodes visible at tick 0
  double reveal_per_tick = 0.08;    // additional fraction revealed per tick
  double cloud_voxel = 0.05;        // agents keep and send voxel-downsampled clouds, meters
  int message_dims = 0;             // 0 sends the full fused feature (d + d_s)
  std::size_t pose_window = 1;      // 1 disables averaging
  PipelineConfig pipeline;
  SuccessThresholds thresholds;
};

enum class FrameStrategy { None, Coarse, Dense };

inline const char* to_string(FrameStrategy s) {
  switch (s) {
    case FrameStrategy::None: return "none";
    case FrameStrategy::Coarse: return "coarse";
    case FrameStrategy::Dense: return "dense";
  }
  return "?";
}

struct FrameRecord {
  int frame = 0;
  FrameStrategy strategy = FrameStrategy::None;
  std::size_t bytes_coarse = 0, bytes_dense = 0, bytes_request = 0;
  std::size_t nodes_sent = 0, feature_dims = 0, points_sent = 0;  // of this frame's messages
  std::size_t node_matches = 0, correspondences = 0;
  std::optional<Transform> transform;
  double rte = kNever, rre = kNever;
  bool success = false;
};

struct AgentState {
  SceneGraph full;
  std::vector<int> reveal_order;  // node indices of `full`
  SceneGraph local;               // revealed part
  CorrespondenceSet cache;        // latest dense exchange's inlier correspondences
  double last_dense = -kNever;    // tick of the latest dense exchange
  std::vector<Transform> pose_history;
};

inline AgentState make_agent(const SceneGraph& g, std::uint64_t seed, const SimConfig& cfg) {
  AgentState s;
  std::vector<SemanticNode> nodes;
  for (const auto& n : g.nodes) {
    auto pts = voxel_downsample(n.points, cfg.cloud_voxel);
    nodes.push_back(make_node(n.id, n.label, std::move(pts)));
  }
  s.full = make_graph(std::move(nodes), cfg.scene.edges);
  s.reveal_order.resize(s.full.nodes.size());
  std::iota(s.reveal_order.begin(), s.reveal_order.end(), 0);
  Rng rng(hash_combine(seed, 0x4e7ea1));
  rng.shuffle(s.reveal_order);
  return s;
}

/// Reveals the prefix of the agent's node order due at `tick`.
inline void reveal(AgentState& s, int tick, const SimConfig& cfg) {
  const double frac = std::min(1.0, cfg.initial_reveal + cfg.reveal_per_tick * tick);
  const auto count = static_cast<std::size_t>(std::ceil(frac * static_cast<double>(s.full.nodes.size()) - 1e-9));
  if (count == s.local.nodes.size() && !s.local.nodes.empty()) return;
  std::vector<int> idx(s.reveal_order.begin(), s.reveal_order.begin() + static_cast<long>(count));
  std::sort(idx.begin(), idx.end());
  std::vector<SemanticNode> nodes;
  for (int i : idx) nodes.push_back(s.full.nodes[static_cast<std::size_t>(i)]);
  s.local = make_graph(std::move(nodes), s.full.nodes.empty() ? EdgeConfig{} : cfg.scene.edges);
}

inline CoarseMessage make_coarse_message(const SceneGraph& g, const FeatureSet& f, int frame, int dims) {
  CoarseMessage m;
  m.frame = static_cast<std::uint32_t>(frame);
  m.timestamp = frame;
  const auto d = dims > 0 ? std::min<Eigen::Index>(dims, f.x2.cols()) : f.x2.cols();
  m.features = f.x2.leftCols(d);
  m.centers.resize(static_cast<Eigen::Index>(g.nodes.size()), 3);
  for (std::size_t i = 0; i < g.nodes.size(); ++i) m.centers.row(static_cast<Eigen::Index>(i)) = g.nodes[i].center;
  return m;
}

inline DenseMessage make_dense_message(const SceneGraph& g, const FeatureSet& f, int frame, int dims) {
  DenseMessage m;
  m.coarse = make_coarse_message(g, f, frame, dims);
  for (std::size_t i = 0; i < g.nodes.size(); ++i)
    for (const auto& p : g.nodes[i].points) {
      m.points.push_back(p);
      m.parents.push_back(static_cast<std::int32_t>(i));
    }
  return m;
}

/// The receiver's view of a dense message: one unlabeled node per sent row
/// (id = row), so point features can be recomputed from the received points.
inline SceneGraph graph_from_dense(const DenseMessage& m) {
  std::vector<Points> pts(static_cast<std::size_t>(m.coarse.centers.rows()));
  for (std::size_t k = 0; k < m.points.size(); ++k) pts[static_cast<std::size_t>(m.parents[k])].push_back(m.points[k]);
  SceneGraph g;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    SemanticNode n;
    n.id = static_cast<int>(i);
    n.center = m.coarse.centers.row(static_cast<Eigen::Index>(i)).transpose();
    n.box = gravity_aligned_extents(pts[i]);
    n.points = std::move(pts[i]);
    g.nodes.push_back(std::move(n));
  }
  return g;
}

/// Node matches of received features against the receiver's own (truncated
/// to the message width).
inline std::vector<NodeMatch> match_message(const MatrixXd& received, const FeatureSet& own, const EncoderWeights& w,
                                            const MatcherConfig& cfg) {
  if (received.rows() == 0 || own.x2.rows() == 0) return {};
  const Eigen::Index d = received.cols();
  MatrixXd s;
  if (d == w.node_linear.in_dim()) {
    s = node_similarity(received, own.x2, w.node_linear, cfg.node_temperature, cfg.cosine_nodes);
  } else {
    DenseLayer identity;
    identity.weight = MatrixXd::Identity(d, d);
    identity.bias = VectorXd::Zero(d);
    s = node_similarity(received, own.x2.leftCols(d), identity, cfg.node_temperature, cfg.cosine_nodes);
  }
  std::vector<int> rows(static_cast<std::size_t>(received.rows()));
  std::iota(rows.begin(), rows.end(), 0);
  return extract_node_matches(dual_normalize(s), cfg.node_threshold, cfg.node_top_k, rows, own.ids);
}

/// One tick: A broadcasts a coarse message; B matches, requests a dense
/// message when allowed, then registers by the full pipeline (dense) or by
/// node centers plus its cache (coarse). Agent A is the sender, B the query.
inline FrameRecord step(AgentState& a, AgentState& b, int frame, const EncoderWeights& w, const SimConfig& cfg,
                        BandwidthLedger& ledger) {
  FrameRecord rec;
  rec.frame = frame;
  reveal(a, frame, cfg);
  reveal(b, frame, cfg);
  ledger.count_query_frame();
  if (a.local.nodes.empty() || b.local.nodes.empty()) return rec;
  if (cfg.coarse_period > 1 && frame % cfg.coarse_period != 0) return rec;

  const FeatureSet fa = encode(a.local, w);
  const FeatureSet fb = encode(b.local, w);
  const CoarseMessage coarse = make_coarse_message(a.local, fa, frame, cfg.message_dims);
  const auto coarse_bytes = serialize(coarse);
  ledger.record(frame, MessageKind::Coarse, coarse_bytes.size());
  rec.bytes_coarse = coarse_bytes.size();
  rec.nodes_sent = static_cast<std::size_t>(coarse.features.rows());
  rec.feature_dims = static_cast<std::size_t>(coarse.features.cols());
  const DenseMessage received = deserialize(coarse_bytes);

  const auto matches = match_message(received.coarse.features, fb, w, cfg.pipeline.matcher);
  rec.node_matches = matches.size();

  const bool interval_ok = static_cast<double>(frame) - b.last_dense >= cfg.dense_interval ||
                           b.last_dense == -kNever;
  std::optional<Transform> estimate_t;
  if (cfg.dense_enabled && static_cast<int>(matches.size()) >= cfg.min_matches && interval_ok) {
    const auto req = serialize(RequestMessage{static_cast<std::uint32_t>(frame), coarse.frame});
    ledger.record(frame, MessageKind::Request, req.size());
    rec.bytes_request = req.size();
    const auto dense_bytes = serialize(make_dense_message(a.local, fa, frame, cfg.message_dims));
    ledger.record(frame, MessageKind::Dense, dense_bytes.size());
    rec.bytes_dense = dense_bytes.size();
    const DenseMessage dense = deserialize(dense_bytes);
    rec.points_sent = dense.points.size();
    b.last_dense = frame;

    const SceneGraph ga = graph_from_dense(dense);
    const auto shape = encode_shape(ga, w);
    FeatureSet fa_rx;
    for (const auto& n : ga.nodes) fa_rx.ids.push_back(n.id);
    fa_rx.x2 = dense.coarse.features;
    fa_rx.node_points = shape.node_points;
    fa_rx.point_feats = shape.point_feats;
    fa_rx.point_mask = shape.point_mask;
    const CorrespondenceSet corr = match_all_points(matches, fa_rx, fb, cfg.pipeline.matcher);
    rec.correspondences = corr.size();
    rec.strategy = FrameStrategy::Dense;
    try {
      const auto est = estimate(corr, ga.all_points(), b.local.all_points(), cfg.pipeline.estimator);
      estimate_t = est.transform;
      b.cache.clear();
      for (auto k : est.inliers) b.cache.push_back(est.pruned[k]);
    } catch (const InsufficientDataError&) {
      b.cache.clear();
    }
  } else {
    std::vector<Vec3> centers_b;
    std::vector<Mat3> cov_b;
    for (const auto& n : b.local.nodes) {
      centers_b.push_back(n.center);
      cov_b.push_back(point_covariance(n.points));
    }
    try {
      const auto corr = coarse_register(matches, received.coarse.centers, centers_b, b.cache, nullptr, &cov_b);
      rec.correspondences = corr.size();
      rec.strategy = FrameStrategy::Coarse;
      estimate_t = estimate(corr, {}, {}, cfg.pipeline.estimator).transform;
    } catch (const InsufficientDataError&) {
    }
  }
  if (estimate_t) {
    b.pose_history.push_back(*estimate_t);
    rec.transform = cfg.pose_window > 1 ? robust_pose_average(b.pose_history, cfg.pose_window) : *estimate_t;
  }
  return rec;
}

struct SimResult {
  std::vector<FrameRecord> frames;
  BandwidthLedger ledger;
  double success_rate = 0.0;  // over all query frames
  std::size_t dense_exchanges = 0;
};

/// Full run over a given pair: A's scene is the pair's first graph, B's the
/// second; success is judged against the pair's transform. `seed` fixes the
/// reveal orders.
inline SimResult run_simulation(const ScenePair& pair, std::uint64_t seed, const EncoderWeights& w,
                                const SimConfig& cfg) {
  if (cfg.frames < 1) throw InvalidArgument("simulation needs at least one frame");
  if (!(cfg.dense_interval > 0)) throw InvalidArgument("dense interval must be positive");
  AgentState a = make_agent(pair.a, hash_combine(seed, 1), cfg);
  AgentState b = make_agent(pair.b, hash_combine(seed, 2), cfg);
  SimResult res;
  std::size_t ok = 0;
  for (int t = 0; t < cfg.frames; ++t) {
    FrameRecord rec = step(a, b, t, w, cfg, res.ledger);
    if (rec.transform) {
      const auto e = evaluate_frame(*rec.transform, pair.a_to_b, cfg.thresholds);
      rec.rte = e.rte;
      rec.rre = e.rre;
      rec.success = e.success;
    }
    ok += rec.success ? 1 : 0;
    res.dense_exchanges += rec.bytes_dense > 0 ? 1 : 0;
    res.frames.push_back(std::move(rec));
  }
  res.success_rate = static_cast<double>(ok) / static_cast<double>(cfg.frames);
  return res;
}

/// Full run on the generator's pair for `seed`.
inline SimResult run_simulation(std::uint64_t seed, const EncoderWeights& w, const SimConfig& cfg) {
  return run_simulation(synthesize_scene_pair(seed, cfg.scene), seed, w, cfg);
}

inline void write_run_report(std::ostream& out, const SimResult& r) {
  out << "frame,strategy,bytes_coarse,bytes_dense,rte,rre,success\n";
  for (const auto& f : r.frames) {
    out << f.frame << ',' << to_string(f.strategy) << ',' << f.bytes_coarse << ',' << f.bytes_dense << ',';
    if (f.transform)
      out << f.rte << ',' << f.rre;
    else
      out << "nan,nan";
    out << ',' << (f.success ? 1 : 0) << '\n';
  }
}

}  // namespace sgreg
