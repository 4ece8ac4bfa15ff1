#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "sgreg/agent_sim.hpp"
#include "sgreg/metrics.hpp"
#include "sgreg/pipeline.hpp"
#include "sgreg/scene_graph.hpp"

namespace sgreg {

/// Scene size: node count and points per node.
struct ScalePreset {
  std::string name;
  int min_nodes = 10;
  int max_nodes = 20;
  int min_points = 200;
  int max_points = 800;
};

/// Observation noise applied to the second scene of each pair.
struct NoisePreset {
  std::string name;
  double relabel_rate = 0.0;
  double oversegment_rate = 0.0;
  double point_noise = 0.0;  // meters
  double partial_rate = 0.0;
  bool distinct_labels = false;
  std::optional<double> overlap;  // overrides the suite's overlap when set
};

inline ScalePreset scale_preset(const std::string& name) {
  if (name == "small") return {"small", 10, 20, 200, 800};
  if (name == "medium") return {"medium", 20, 40, 200, 800};
  if (name == "large") return {"large", 40, 80, 200, 800};
  throw InvalidArgument("unknown scale preset '" + name + "' (valid: small, medium, large)");
}

inline NoisePreset noise_preset(const std::string& name) {
  if (name == "zero-noise") return {"zero-noise", 0.0, 0.0, 0.0, 0.0, true, 1.0};  // B is A moved, nothing else
  if (name == "label-noise") return {"label-noise", 0.3, 0.0, 0.0, 0.0, false, std::nullopt};
  if (name == "realistic") return {"realistic", 0.05, 0.1, 0.01, 0.3, false, std::nullopt};
  throw InvalidArgument("unknown noise preset '" + name + "' (valid: zero-noise, label-noise, realistic)");
}

struct BenchSuite {
  std::string name;
  std::vector<std::uint64_t> seeds;
  std::vector<ScalePreset> scales;
  std::vector<NoisePreset> noises;
  double overlap = 0.8;
  std::uint64_t weight_seed = 1;
  EncoderConfig encoder;
  PipelineConfig pipeline;
  SuccessThresholds thresholds;
  std::filesystem::path output_dir = "bench_out";
};

inline std::vector<std::string> suite_names() { return {"smoke", "small", "medium", "large", "noise"}; }

inline std::string joined_suite_names() {
  std::string out;
  for (const auto& n : suite_names()) out += (out.empty() ? "" : ", ") + n;
  return out;
}

inline std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t count) {
  std::vector<std::uint64_t> s(count);
  for (std::size_t k = 0; k < count; ++k) s[k] = first + k;
  return s;
}

/// Named suites. `noise` pairs the zero-noise and label-noise presets on the
/// same seeds for paired comparison.
inline BenchSuite preset_suite(const std::string& name, std::uint64_t seed = 0) {
  BenchSuite s;
  s.name = name;
  if (name == "smoke") {
    s.seeds = seed_range(seed, 2);
    s.scales = {scale_preset("small")};
    s.noises = {noise_preset("zero-noise")};
  } else if (name == "small" || name == "medium" || name == "large") {
    s.seeds = seed_range(seed, name == "large" ? 3 : 5);
    s.scales = {scale_preset(name)};
    s.noises = {noise_preset("zero-noise"), noise_preset("realistic")};
  } else if (name == "noise") {
    s.seeds = seed_range(seed, 10);
    s.scales = {scale_preset("small")};
    s.noises = {noise_preset("zero-noise"), noise_preset("label-noise")};
  } else {
    throw InvalidArgument("unknown suite '" + name + "' (valid: " + joined_suite_names() + ")");
  }
  return s;
}

inline GeneratorConfig generator_for(const ScalePreset& scale, const NoisePreset& noise, double overlap) {
  GeneratorConfig g;
  g.min_nodes = scale.min_nodes;
  g.max_nodes = scale.max_nodes;
  g.min_points = scale.min_points;
  g.max_points = scale.max_points;
  g.overlap = noise.overlap.value_or(overlap);
  g.relabel_rate = noise.relabel_rate;
  g.oversegment_rate = noise.oversegment_rate;
  g.point_noise = noise.point_noise;
  g.partial_rate = noise.partial_rate;
  g.distinct_labels = noise.distinct_labels;
  return g;
}

struct PairRow {
  std::string scale, noise;
  std::uint64_t seed = 0;
  std::size_t nodes_a = 0, nodes_b = 0, gt_matches = 0, predicted_matches = 0;
  double nr = 0.0, np = 0.0;
  std::size_t correspondences = 0;
  double ir = 0.0, pir = 0.0;
  bool estimated = false;
  std::string strategy = "-";
  double rte = kNever, rre = kNever, rmse = kNever;
  bool recall_success = false;  // rmse below the threshold
  StageTimings timings;
};

struct PresetSummary {
  std::string scale, noise;
  std::size_t pairs = 0;
  double nr = 0.0, np = 0.0, ir = 0.0, pir = 0.0, rr = 0.0;
  double mean_total_seconds = 0.0;
};

struct SuiteResult {
  std::vector<PairRow> rows;
  std::vector<PresetSummary> summaries;
};

/// One registration of a generated pair, scored against its ground truth.
inline PairRow evaluate_pair(const ScenePair& pair, const EncoderWeights& w, const PipelineConfig& cfg,
                             const SuccessThresholds& th) {
  const GroundTruth gt = generate_ground_truth(pair.a, pair.b, pair.a_to_b);
  const RegistrationResult r = register_graphs(pair.a, pair.b, w, cfg);
  PairRow row;
  row.nodes_a = pair.a.size();
  row.nodes_b = pair.b.size();
  row.gt_matches = gt.node_matches.size();
  row.predicted_matches = r.node_matches.size();
  const NodeScores ns = node_scores(r.node_matches, gt);
  row.nr = ns.recall;
  row.np = ns.precision;
  row.correspondences = r.correspondences.size();
  row.ir = inlier_ratio(r.correspondences, pair.a_to_b, th.inlier_distance);
  if (r.estimate) {
    row.estimated = true;
    row.strategy = to_string(r.estimate->strategy);
    row.pir = pseudo_inlier_ratio(r.estimate->pruned, r.estimate->inliers, pair.a_to_b, th.inlier_distance);
    const FrameEvaluation e = evaluate_frame(r.estimate->transform, pair.a_to_b, th);
    row.rte = e.rte;
    row.rre = e.rre;
    row.rmse = aligned_rmse(r.estimate->transform, pair.a_to_b, corresponded_source_points(pair.a, gt));
    row.recall_success = row.rmse < th.rmse;
  }
  row.timings = r.timings;
  return row;
}

inline std::vector<PresetSummary> summarize(const std::vector<PairRow>& rows) {
  std::vector<PresetSummary> out;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  for (const auto& r : rows) {
    const auto key = std::make_pair(r.scale, r.noise);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      out.push_back({r.scale, r.noise});
    }
    auto& s = out[it->second];
    ++s.pairs;
    s.nr += r.nr;
    s.np += r.np;
    s.ir += r.ir;
    s.pir += r.pir;
    s.rr += r.recall_success ? 1.0 : 0.0;
    s.mean_total_seconds += r.timings.total;
  }
  for (auto& s : out) {
    const double n = static_cast<double>(s.pairs);
    s.nr /= n;
    s.np /= n;
    s.ir /= n;
    s.pir /= n;
    s.rr /= n;
    s.mean_total_seconds /= n;
  }
  return out;
}

/// Every (scale, noise, seed) combination in suite order.
inline SuiteResult run_suite(const BenchSuite& suite) {
  if (suite.seeds.empty() || suite.scales.empty() || suite.noises.empty())
    throw InvalidArgument("suite needs at least one seed, scale and noise preset");
  const EncoderWeights w = EncoderWeights::seeded(suite.weight_seed, suite.encoder);
  SuiteResult res;
  for (const auto& scale : suite.scales)
    for (const auto& noise : suite.noises)
      for (auto seed : suite.seeds) {
        const ScenePair pair = synthesize_scene_pair(seed, generator_for(scale, noise, suite.overlap));
        PairRow row = evaluate_pair(pair, w, suite.pipeline, suite.thresholds);
        row.scale = scale.name;
        row.noise = noise.name;
        row.seed = seed;
        res.rows.push_back(std::move(row));
      }
  res.summaries = summarize(res.rows);
  return res;
}

// ---------------------------------------------------------------------------
// K_p ablation

struct KpRow {
  int kp = 0;
  double correspondences = 0.0;  // mean per pair, before NMS
  double ir = 0.0, pir = 0.0, rr = 0.0;
  double seconds = 0.0;
};

/// Nodes dense enough that every K_p in the ablation subsamples them.
inline GeneratorConfig kp_ablation_scene() {
  GeneratorConfig g;
  g.min_nodes = 6;
  g.max_nodes = 8;
  g.min_points = 1200;
  g.max_points = 1800;
  g.overlap = 0.8;
  g.point_noise = 0.01;
  g.partial_rate = 0.3;
  return g;
}

inline std::vector<KpRow> kp_ablation(const std::vector<int>& kp_values, const std::vector<std::uint64_t>& seeds,
                                      const GeneratorConfig& scene = kp_ablation_scene(), const BenchSuite& base = {}) {
  if (seeds.empty()) throw InvalidArgument("kp_ablation needs at least one seed");
  for (int kp : kp_values)
    if (kp < 1) throw InvalidArgument("K_p must be positive");
  std::vector<ScenePair> pairs;
  for (auto s : seeds) pairs.push_back(synthesize_scene_pair(s, scene));
  std::vector<KpRow> out;
  for (int kp : kp_values) {
    EncoderConfig ec = base.encoder;
    ec.points_per_node = kp;
    const EncoderWeights w = EncoderWeights::seeded(base.weight_seed, ec);
    KpRow row;
    row.kp = kp;
    const auto t0 = std::chrono::steady_clock::now();
    for (const auto& pair : pairs) {
      const PairRow r = evaluate_pair(pair, w, base.pipeline, base.thresholds);
      row.correspondences += static_cast<double>(r.correspondences);
      row.ir += r.ir;
      row.pir += r.pir;
      row.rr += r.recall_success ? 1.0 : 0.0;
    }
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double n = static_cast<double>(pairs.size());
    row.correspondences /= n;
    row.ir /= n;
    row.pir /= n;
    row.rr /= n;
    out.push_back(row);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Maximum-clique runtime profile

/// Post-NMS correspondences of one registration, split by ground truth.
struct CorrespondencePool {
  CorrespondenceSet inliers, outliers;
  Transform truth;
};

/// A large scene registered with K_p = 512 gives enough of both kinds to
/// draw 1000-correspondence sets at any ratio in [0.05, 0.95]. Points are
/// matched inside the predicted node matches and the true node pairs, so the
/// inlier supply does not hinge on node-matching recall.
inline GeneratorConfig profile_scene() {
  GeneratorConfig g;
  g.min_nodes = 40;
  g.max_nodes = 40;
  g.min_points = 800;
  g.max_points = 1200;
  g.spacing = 2.5;
  g.overlap = 0.8;
  g.point_noise = 0.01;
  g.partial_rate = 0.3;
  return g;
}

inline CorrespondencePool build_pool(std::uint64_t seed, const GeneratorConfig& scene = profile_scene(), int kp = 512,
                                     double inlier_distance = 0.1, double nms_radius = 0.05) {
  EncoderConfig ec;
  ec.points_per_node = kp;
  const EncoderWeights w = EncoderWeights::seeded(1, ec);
  const ScenePair pair = synthesize_scene_pair(seed, scene);
  const FeatureSet fa = encode(pair.a, w), fb = encode(pair.b, w);
  auto matches = match_nodes(fa, fb, w);
  const GroundTruth gt = generate_ground_truth(pair.a, pair.b, pair.a_to_b);
  auto row_of = [](const std::vector<int>& ids, int id) {
    return static_cast<int>(std::find(ids.begin(), ids.end(), id) - ids.begin());
  };
  for (const auto& [ia, ib] : gt.node_matches) {
    NodeMatch m;
    m.row = row_of(fa.ids, ia);
    m.col = row_of(fb.ids, ib);
    m.source = ia;
    m.target = ib;
    const bool known = std::any_of(matches.begin(), matches.end(),
                                   [&](const NodeMatch& x) { return x.row == m.row && x.col == m.col; });
    if (!known) matches.push_back(m);
  }
  std::sort(matches.begin(), matches.end(),
            [](const NodeMatch& x, const NodeMatch& y) { return std::tie(x.row, x.col) < std::tie(y.row, y.col); });
  MatcherConfig mc;
  mc.point_threshold = 0.0;  // a supply of correspondences, not a registration
  const auto corr = nms_correspondences(match_all_points(matches, fa, fb, mc), nms_radius);
  CorrespondencePool pool;
  pool.truth = pair.a_to_b;
  for (const auto& c : corr) (is_true_inlier(c, pair.a_to_b, inlier_distance) ? pool.inliers : pool.outliers).push_back(c);
  return pool;
}

struct ProfileRow {
  double ratio = 0.0;
  std::size_t clique_size = 0;       // of the last repeat
  double build_seconds = 0.0;        // median over repeats
  double solve_seconds = 0.0;        // median over repeats
  double rte = 0.0, rre = 0.0;       // median over repeats, full estimator
};

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

struct ProfileConfig {
  std::size_t correspondences = 1000;
  int repeats = 10;
  double level = 0.2;  // compatibility threshold of the timed graph, meters
  std::uint64_t seed = 0;
  EstimatorConfig estimator;
};

/// Per ratio: draws `correspondences` pairs from the pool at that inlier
/// ratio, times compatibility-graph construction and the exact clique search
/// separately, and records the full estimator's error.
inline std::vector<ProfileRow> mac_runtime_profile(const std::vector<double>& ratios, const CorrespondencePool& pool,
                                                   const ProfileConfig& cfg = {}) {
  for (double r : ratios)
    if (!(r > 0.0 && r < 1.0)) throw InvalidArgument("inlier ratios must lie in (0, 1)");
  if (cfg.repeats < 1) throw InvalidArgument("profile needs at least one repeat");
  std::vector<ProfileRow> out;
  for (double ratio : ratios) {
    const auto n_in = static_cast<std::size_t>(std::lround(ratio * static_cast<double>(cfg.correspondences)));
    const std::size_t n_out = cfg.correspondences - n_in;
    if (n_in > pool.inliers.size() || n_out > pool.outliers.size())
      throw InsufficientDataError("correspondence pool too small for ratio " + std::to_string(ratio));
    ProfileRow row;
    row.ratio = ratio;
    std::vector<double> build, solve, rte, rre;
    for (int rep = 0; rep < cfg.repeats; ++rep) {
      Rng rng(hash_combine(cfg.seed, static_cast<std::uint64_t>(rep)));
      CorrespondenceSet c;
      c.reserve(cfg.correspondences);
      for (auto k : rng.sample_without_replacement(pool.inliers.size(), n_in)) c.push_back(pool.inliers[k]);
      for (auto k : rng.sample_without_replacement(pool.outliers.size(), n_out)) c.push_back(pool.outliers[k]);
      rng.shuffle(c);
      auto t0 = std::chrono::steady_clock::now();
      const auto graphs = build_pyramid(c, {cfg.level});
      auto t1 = std::chrono::steady_clock::now();
      const auto clique = max_clique(graphs.front(), cfg.estimator.clique_time_budget);
      auto t2 = std::chrono::steady_clock::now();
      build.push_back(std::chrono::duration<double>(t1 - t0).count());
      solve.push_back(std::chrono::duration<double>(t2 - t1).count());
      row.clique_size = clique.vertices.size();
      try {
        const auto e = evaluate_frame(estimate(c, {}, {}, cfg.estimator).transform, pool.truth);
        rte.push_back(e.rte);
        rre.push_back(e.rre);
      } catch (const InsufficientDataError&) {
        rte.push_back(kNever);
        rre.push_back(kNever);
      }
    }
    row.build_seconds = median(build);
    row.solve_seconds = median(solve);
    row.rte = median(rte);
    row.rre = median(rre);
    out.push_back(row);
  }
  return out;
}

/// Spearman rank correlation, average ranks for ties.
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("spearman: need two equal-length series");
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = 0.5 * static_cast<double>(i + j);
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n, my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < rx.size(); ++k) {
    sxy += (rx[k] - mx) * (ry[k] - my);
    sxx += (rx[k] - mx) * (rx[k] - mx);
    syy += (ry[k] - my) * (ry[k] - my);
  }
  return sxx > 0.0 && syy > 0.0 ? sxy / std::sqrt(sxx * syy) : 0.0;
}

// ---------------------------------------------------------------------------
// Dense-interval sweep of the two-agent simulation

/// Scene and cadence used by the communication sweep.
inline SimConfig sweep_sim_config() {
  SimConfig c;
  c.scene.partial_rate = 0.5;
  c.scene.point_noise = 0.01;
  c.scene.overlap = 0.8;
  c.scene.min_points = 150;
  c.scene.max_points = 400;
  return c;
}

inline constexpr int kSweepPointsPerNode = 128;

struct SweepRow {
  double interval = kNever;
  double success_rate = 0.0;  // mean over seeds
  std::size_t dense_exchanges = 0;
  std::size_t bytes_total = 0;
};

inline std::vector<SweepRow> dense_interval_sweep(const std::vector<double>& intervals,
                                                  const std::vector<std::uint64_t>& seeds,
                                                  const SimConfig& base = sweep_sim_config(),
                                                  int points_per_node = kSweepPointsPerNode) {
  if (seeds.empty()) throw InvalidArgument("sweep needs at least one seed");
  EncoderConfig ec;
  ec.points_per_node = points_per_node;
  const EncoderWeights w = EncoderWeights::seeded(1, ec);
  std::vector<SweepRow> out;
  for (double interval : intervals) {
    SimConfig cfg = base;
    cfg.dense_interval = interval;
    SweepRow row;
    row.interval = interval;
    for (auto s : seeds) {
      const SimResult r = run_simulation(s, w, cfg);
      row.success_rate += r.success_rate;
      row.dense_exchanges += r.dense_exchanges;
      row.bytes_total += r.ledger.total();
    }
    row.success_rate /= static_cast<double>(seeds.size());
    out.push_back(row);
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV output

inline std::string fmt(double v, int digits = 6) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline constexpr const char* kPairHeader =
    "scale,noise,seed,nodes_a,nodes_b,gt_matches,predicted_matches,nr,np,correspondences,ir,pir,strategy,rte,rre,"
    "rmse,rr_success,t_encode,t_node_match,t_point_match,t_estimate,t_total";
inline constexpr const char* kSummaryHeader = "scale,noise,pairs,nr,np,ir,pir,rr,mean_t_total";
inline constexpr const char* kKpHeader = "kp,correspondences,ir,pir,rr,seconds";
inline constexpr const char* kProfileHeader = "ratio,clique_size,rte,rre,build_seconds,solve_seconds";
inline constexpr const char* kSweepHeader = "interval,success_rate,dense_exchanges,bytes_total";

inline void write_pairs_csv(std::ostream& out, const std::vector<PairRow>& rows) {
  out << kPairHeader << '\n';
  for (const auto& r : rows)
    out << r.scale << ',' << r.noise << ',' << r.seed << ',' << r.nodes_a << ',' << r.nodes_b << ',' << r.gt_matches
        << ',' << r.predicted_matches << ',' << fmt(r.nr) << ',' << fmt(r.np) << ',' << r.correspondences << ','
        << fmt(r.ir) << ',' << fmt(r.pir) << ',' << r.strategy << ',' << fmt(r.rte) << ',' << fmt(r.rre) << ','
        << fmt(r.rmse) << ',' << (r.recall_success ? 1 : 0) << ',' << fmt(r.timings.encode) << ','
        << fmt(r.timings.node_match) << ',' << fmt(r.timings.point_match) << ',' << fmt(r.timings.estimate) << ','
        << fmt(r.timings.total) << '\n';
}

inline void write_summary_csv(std::ostream& out, const std::vector<PresetSummary>& rows) {
  out << kSummaryHeader << '\n';
  for (const auto& s : rows)
    out << s.scale << ',' << s.noise << ',' << s.pairs << ',' << fmt(s.nr) << ',' << fmt(s.np) << ',' << fmt(s.ir)
        << ',' << fmt(s.pir) << ',' << fmt(s.rr) << ',' << fmt(s.mean_total_seconds) << '\n';
}

inline void write_kp_csv(std::ostream& out, const std::vector<KpRow>& rows) {
  out << kKpHeader << '\n';
  for (const auto& r : rows)
    out << r.kp << ',' << fmt(r.correspondences) << ',' << fmt(r.ir) << ',' << fmt(r.pir) << ',' << fmt(r.rr) << ','
        << fmt(r.seconds) << '\n';
}

inline void write_profile_csv(std::ostream& out, const std::vector<ProfileRow>& rows) {
  out << kProfileHeader << '\n';
  for (const auto& r : rows)
    out << fmt(r.ratio, 3) << ',' << r.clique_size << ',' << fmt(r.rte) << ',' << fmt(r.rre) << ','
        << fmt(r.build_seconds, 9) << ',' << fmt(r.solve_seconds, 9) << '\n';
}

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kSweepHeader << '\n';
  for (const auto& r : rows)
    out << fmt(r.interval, 1) << ',' << fmt(r.success_rate) << ',' << r.dense_exchanges << ',' << r.bytes_total << '\n';
}

inline nlohmann::json suite_manifest(const BenchSuite& s) {
  nlohmann::json j;
  j["suite"] = s.name;
  j["seeds"] = s.seeds;
  j["overlap"] = s.overlap;
  j["weight_seed"] = s.weight_seed;
  j["points_per_node"] = s.encoder.points_per_node;
  j["tau_iou"] = GroundTruthConfig{}.iou_threshold;
  j["thresholds"] = {{"rte", s.thresholds.rte},
                     {"rre", s.thresholds.rre},
                     {"rmse", s.thresholds.rmse},
                     {"inlier_distance", s.thresholds.inlier_distance}};
  j["mac_trigger"] = s.pipeline.estimator.mac_trigger;
  j["point_threshold"] = s.pipeline.matcher.point_threshold;
  for (const auto& sc : s.scales)
    j["scales"].push_back({{"name", sc.name},
                           {"nodes", {sc.min_nodes, sc.max_nodes}},
                           {"points_per_node", {sc.min_points, sc.max_points}}});
  for (const auto& n : s.noises)
    j["noises"].push_back({{"name", n.name},
                           {"relabel_rate", n.relabel_rate},
                           {"oversegment_rate", n.oversegment_rate},
                           {"point_noise", n.point_noise},
                           {"partial_rate", n.partial_rate},
                           {"distinct_labels", n.distinct_labels},
                           {"overlap", n.overlap.value_or(s.overlap)}});
  j["files"] = {"pairs.csv", "summary.csv"};
  return j;
}

/// Writes pairs.csv, summary.csv and manifest.json under the suite's output dir.
inline void write_suite_outputs(const BenchSuite& s, const SuiteResult& r) {
  std::filesystem::create_directories(s.output_dir);
  auto open = [&](const char* file) {
    std::ofstream out(s.output_dir / file);
    if (!out) throw Error("cannot write " + (s.output_dir / file).string());
    return out;
  };
  {
    auto out = open("pairs.csv");
    write_pairs_csv(out, r.rows);
  }
  {
    auto out = open("summary.csv");
    write_summary_csv(out, r.summaries);
  }
  auto out = open("manifest.json");
  out << suite_manifest(s).dump(2) << '\n';
}

}  // namespace sgreg
