#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "sgreg/agent_sim.hpp"
#include "sgreg/bench.hpp"
#include "sgreg/invariants.hpp"
#include "sgreg/metrics.hpp"
#include "sgreg/pipeline.hpp"
#include "sgreg/scene_io.hpp"

namespace sgreg::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kInsufficientData = 2 };

/// Everything a subcommand can be configured with. Flags and the config file
/// write into the same fields; flags win.
struct RunConfig {
  std::string subcommand;
  std::uint64_t seed = 0;
  GroundTruthConfig ground_truth;
  SuccessThresholds thresholds;
  EdgeConfig edges;
  EncoderConfig encoder;
  std::uint64_t weight_seed = 1;
  std::string weights_path;
  MatcherConfig matcher;
  EstimatorConfig estimator;

  // gen
  std::string out_dir = "scene_pair";
  GeneratorConfig generator;

  // register
  std::string source, target, truth_path, report_path, correspondences_path;
  bool diagnostics = false;
  double min_overlap = 0.2;

  // simulate
  SimConfig sim = sweep_sim_config();
  int sim_points_per_node = kSweepPointsPerNode;
  std::string dense_interval = "inf";
  std::string sim_report_path, ledger_path;
  bool no_dense = false;

  // bench
  std::string suite;
  std::string ablation;
  std::string profile;
  std::string sweep;
  std::string bench_dir = "bench_out";
  std::vector<int> kp_values = {256, 512, 1024};
  std::vector<double> ratios = {0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.95};
  int repeats = 10;
  int bench_seeds = 3;
};

inline double parse_interval(const std::string& text) {
  if (text == "inf" || text == "never") return kNever;
  double v = 0.0;
  try {
    std::size_t used = 0;
    v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
  } catch (const std::exception&) {
    throw InvalidArgument("dense interval must be a positive number of ticks or 'inf', got '" + text + "'");
  }
  if (!(v > 0)) throw InvalidArgument("dense interval must be positive");
  return v;
}

inline EncoderWeights load_encoder(const RunConfig& cfg, int points_per_node) {
  EncoderConfig ec = cfg.encoder;
  ec.points_per_node = points_per_node;
  return cfg.weights_path.empty() ? EncoderWeights::seeded(cfg.weight_seed, ec) : load_weights(cfg.weights_path, ec);
}

inline void print_transform(std::ostream& out, const Transform& t) {
  const Mat4 m = t.matrix();
  out << std::fixed << std::setprecision(9);
  for (int r = 0; r < 4; ++r) out << "  " << m(r, 0) << ' ' << m(r, 1) << ' ' << m(r, 2) << ' ' << m(r, 3) << '\n';
  out.unsetf(std::ios::floatfield);
  out << std::setprecision(6);
}

// ---------------------------------------------------------------------------

inline int cmd_gen(const RunConfig& cfg, std::ostream& out) {
  GeneratorConfig g = cfg.generator;
  g.edges = cfg.edges;
  const ScenePair pair = synthesize_scene_pair(cfg.seed, g);
  const GroundTruth gt = generate_ground_truth(pair.a, pair.b, pair.a_to_b, cfg.ground_truth);
  const std::filesystem::path dir = cfg.out_dir;
  std::filesystem::create_directories(dir);
  save_scene_graph(pair.a, dir / "a.json");
  save_scene_graph(pair.b, dir / "b.json");
  save_json(to_json(gt), dir / "gt.json");
  out << "wrote " << (dir / "a.json").string() << " (" << pair.a.size() << " nodes), " << (dir / "b.json").string()
      << " (" << pair.b.size() << " nodes), " << (dir / "gt.json").string() << " (" << gt.node_matches.size()
      << " node matches)\n";
  return kOk;
}

inline void write_correspondences_csv(const std::filesystem::path& path, const CorrespondenceSet& c) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path.string());
  f << "src_node,dst_node,px,py,pz,qx,qy,qz,score\n" << std::setprecision(9);
  for (const auto& x : c)
    f << x.source_node << ',' << x.target_node << ',' << x.source.x() << ',' << x.source.y() << ',' << x.source.z()
      << ',' << x.target.x() << ',' << x.target.y() << ',' << x.target.z() << ',' << x.score << '\n';
}

inline int cmd_register(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const SceneGraph a = load_scene_graph(cfg.source, cfg.edges);
  const SceneGraph b = load_scene_graph(cfg.target, cfg.edges);
  const EncoderWeights w = load_encoder(cfg, cfg.encoder.points_per_node);
  PipelineConfig pc;
  pc.matcher = cfg.matcher;
  pc.estimator = cfg.estimator;
  pc.min_overlap = cfg.min_overlap;
  const RegistrationResult r = register_graphs(a, b, w, pc);
  if (!cfg.correspondences_path.empty()) write_correspondences_csv(cfg.correspondences_path, r.correspondences);

  nlohmann::json report;
  report["node_matches"] = nlohmann::json::array();
  for (const auto& m : r.node_matches) report["node_matches"].push_back({m.source, m.target, m.confidence});
  report["correspondences"] = r.correspondences.size();
  report["timings"] = {{"encode", r.timings.encode},
                       {"node_match", r.timings.node_match},
                       {"point_match", r.timings.point_match},
                       {"estimate", r.timings.estimate},
                       {"total", r.timings.total}};
  out << "node matches " << r.node_matches.size() << ", correspondences " << r.correspondences.size() << '\n';

  if (!cfg.truth_path.empty()) {
    const GroundTruth file_gt = ground_truth_from_json(load_json(cfg.truth_path));
    const GroundTruth gt = generate_ground_truth(a, b, file_gt.true_transform, cfg.ground_truth);
    const NodeScores ns = node_scores(r.node_matches, gt);
    const double ir = inlier_ratio(r.correspondences, gt.true_transform, cfg.thresholds.inlier_distance);
    report["metrics"] = {{"nr", ns.recall}, {"np", ns.precision}, {"ir", ir}};
    out << "NR " << ns.recall << " NP " << ns.precision << " IR " << ir << '\n';
    if (r.estimate) {
      const auto e = evaluate_frame(r.estimate->transform, gt.true_transform, cfg.thresholds);
      const double rmse =
          aligned_rmse(r.estimate->transform, gt.true_transform, corresponded_source_points(a, gt));
      const double pir =
          pseudo_inlier_ratio(r.estimate->pruned, r.estimate->inliers, gt.true_transform, cfg.thresholds.inlier_distance);
      report["metrics"].update({{"pir", pir}, {"rte", e.rte}, {"rre", e.rre}, {"rmse", rmse},
                                {"success", e.success}, {"recall_success", rmse < cfg.thresholds.rmse}});
      out << "PIR " << pir << " RTE " << e.rte << " m RRE " << e.rre << " deg RMSE " << rmse << " m "
          << (e.success ? "success" : "failure") << '\n';
    }
  }

  if (!r.estimate) {
    report["status"] = "insufficient-data";
    if (!cfg.report_path.empty()) save_json(report, cfg.report_path);
    err << (r.rejected ? "insufficient data: aligned overlap " + std::to_string(r.overlap) + " below " +
                             std::to_string(cfg.min_overlap)
                       : std::string("insufficient data: too few correspondences for a well-posed estimate"))
        << '\n';
    return kInsufficientData;
  }
  const EstimateResult& e = *r.estimate;
  report["status"] = "ok";
  report["transform"] = to_json(e.transform);
  report["strategy"] = to_string(e.strategy);
  report["inliers"] = e.inliers.size();
  report["inlier_ratio"] = e.inlier_ratio;
  report["gnc_inlier_ratio"] = e.gnc_inlier_ratio;
  report["overlap"] = r.overlap;
  out << "strategy " << to_string(e.strategy) << ", inliers " << e.inliers.size() << " / " << e.pruned.size()
      << ", aligned overlap " << r.overlap << "\ntransform\n";
  print_transform(out, e.transform);
  if (cfg.diagnostics) out << diagnostic_report(e);
  if (!cfg.report_path.empty()) save_json(report, cfg.report_path);
  return kOk;
}

inline nlohmann::json ledger_json(const SimResult& r) {
  nlohmann::json j;
  j["coarse_bytes"] = r.ledger.total(MessageKind::Coarse);
  j["dense_bytes"] = r.ledger.total(MessageKind::Dense);
  j["request_bytes"] = r.ledger.total(MessageKind::Request);
  j["total_bytes"] = r.ledger.total();
  j["messages"] = {{"coarse", r.ledger.messages(MessageKind::Coarse)},
                   {"dense", r.ledger.messages(MessageKind::Dense)},
                   {"request", r.ledger.messages(MessageKind::Request)}};
  j["query_frames"] = r.ledger.query_frames();
  j["average_bytes_per_query_frame"] = r.ledger.average_per_query_frame();
  j["frames"] = nlohmann::json::array();
  for (const auto& f : r.frames)
    j["frames"].push_back({{"frame", f.frame},
                           {"coarse", r.ledger.frame_bytes(f.frame, MessageKind::Coarse)},
                           {"dense", r.ledger.frame_bytes(f.frame, MessageKind::Dense)},
                           {"request", r.ledger.frame_bytes(f.frame, MessageKind::Request)}});
  return j;
}

inline int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  SimConfig sc = cfg.sim;
  sc.dense_interval = parse_interval(cfg.dense_interval);
  sc.dense_enabled = !cfg.no_dense;
  sc.scene.edges = cfg.edges;
  sc.pipeline.matcher = cfg.matcher;
  sc.pipeline.estimator = cfg.estimator;
  sc.thresholds = cfg.thresholds;
  const EncoderWeights w = load_encoder(cfg, cfg.sim_points_per_node);
  SimResult r;
  if (!cfg.source.empty() || !cfg.target.empty() || !cfg.truth_path.empty()) {
    if (cfg.source.empty() || cfg.target.empty() || cfg.truth_path.empty())
      throw InvalidArgument("simulate from files needs --source, --target and --truth together");
    ScenePair pair{load_scene_graph(cfg.source, cfg.edges), load_scene_graph(cfg.target, cfg.edges),
                   ground_truth_from_json(load_json(cfg.truth_path)).true_transform};
    r = run_simulation(pair, cfg.seed, w, sc);
  } else {
    r = run_simulation(cfg.seed, w, sc);
  }
  if (!cfg.sim_report_path.empty()) {
    std::ofstream f(cfg.sim_report_path);
    if (!f) throw Error("cannot write " + cfg.sim_report_path);
    write_run_report(f, r);
  }
  if (!cfg.ledger_path.empty()) save_json(ledger_json(r), cfg.ledger_path);
  out << "frames " << r.frames.size() << ", success rate " << r.success_rate << ", dense exchanges "
      << r.dense_exchanges << "\nbytes coarse " << r.ledger.total(MessageKind::Coarse) << ", dense "
      << r.ledger.total(MessageKind::Dense) << ", request " << r.ledger.total(MessageKind::Request) << ", total "
      << r.ledger.total() << '\n';
  return kOk;
}

inline int cmd_bench(const RunConfig& cfg, std::ostream& out) {
  if (!cfg.ablation.empty() && cfg.ablation != "kp")
    throw InvalidArgument("unknown ablation '" + cfg.ablation + "' (valid: kp)");
  if (!cfg.profile.empty() && cfg.profile != "mac")
    throw InvalidArgument("unknown profile '" + cfg.profile + "' (valid: mac)");
  if (!cfg.sweep.empty() && cfg.sweep != "dense-interval")
    throw InvalidArgument("unknown sweep '" + cfg.sweep + "' (valid: dense-interval)");
  const bool extras = !cfg.ablation.empty() || !cfg.profile.empty() || !cfg.sweep.empty();
  const std::string suite_name = cfg.suite.empty() && !extras ? "smoke" : cfg.suite;
  std::optional<BenchSuite> suite;
  if (!suite_name.empty()) suite = preset_suite(suite_name, cfg.seed);  // validates before any work

  const std::filesystem::path dir = cfg.bench_dir;
  std::filesystem::create_directories(dir);
  const auto seeds = seed_range(cfg.seed, static_cast<std::size_t>(std::max(cfg.bench_seeds, 1)));
  nlohmann::json manifest;
  manifest["seed"] = cfg.seed;
  manifest["files"] = nlohmann::json::array();
  auto open = [&](const std::string& name) {
    std::ofstream f(dir / name);
    if (!f) throw Error("cannot write " + (dir / name).string());
    manifest["files"].push_back(name);
    return f;
  };

  if (suite) {
    suite->encoder = cfg.encoder;
    suite->weight_seed = cfg.weight_seed;
    suite->pipeline.matcher = cfg.matcher;
    suite->pipeline.estimator = cfg.estimator;
    suite->thresholds = cfg.thresholds;
    suite->output_dir = dir;
    const SuiteResult r = run_suite(*suite);
    {
      auto f = open("pairs.csv");
      write_pairs_csv(f, r.rows);
    }
    {
      auto f = open("summary.csv");
      write_summary_csv(f, r.summaries);
    }
    manifest["suite"] = suite_manifest(*suite);
    out << "suite " << suite->name << '\n';
    write_summary_csv(out, r.summaries);
  }
  if (!cfg.ablation.empty()) {
    BenchSuite base;
    base.encoder = cfg.encoder;
    base.weight_seed = cfg.weight_seed;
    base.pipeline.matcher = cfg.matcher;
    base.pipeline.estimator = cfg.estimator;
    base.thresholds = cfg.thresholds;
    const auto rows = kp_ablation(cfg.kp_values, seeds, kp_ablation_scene(), base);
    {
      auto f = open("kp_ablation.csv");
      write_kp_csv(f, rows);
    }
    manifest["kp_ablation"] = {{"kp_values", cfg.kp_values}, {"seeds", seeds}};
    out << "K_p ablation\n";
    write_kp_csv(out, rows);
  }
  if (!cfg.profile.empty()) {
    const CorrespondencePool pool = build_pool(cfg.seed);
    ProfileConfig pc;
    pc.repeats = cfg.repeats;
    pc.seed = cfg.seed;
    pc.estimator = cfg.estimator;
    const auto rows = mac_runtime_profile(cfg.ratios, pool, pc);
    {
      auto f = open("mac_profile.csv");
      write_profile_csv(f, rows);
    }
    manifest["mac_profile"] = {{"ratios", cfg.ratios}, {"repeats", cfg.repeats}, {"correspondences", pc.correspondences},
                               {"level", pc.level}, {"pool_inliers", pool.inliers.size()},
                               {"pool_outliers", pool.outliers.size()}};
    out << "maximum-clique runtime profile\n";
    write_profile_csv(out, rows);
  }
  if (!cfg.sweep.empty()) {
    SimConfig sc = cfg.sim;
    sc.pipeline.matcher = cfg.matcher;
    sc.pipeline.estimator = cfg.estimator;
    sc.thresholds = cfg.thresholds;
    const auto rows = dense_interval_sweep({kNever, 10.0, 5.0, 3.0}, seeds, sc, cfg.sim_points_per_node);
    {
      auto f = open("dense_interval_sweep.csv");
      write_sweep_csv(f, rows);
    }
    manifest["dense_interval_sweep"] = {{"intervals", {"inf", 10, 5, 3}}, {"seeds", seeds}};
    out << "dense-interval sweep\n";
    write_sweep_csv(out, rows);
  }
  std::ofstream f(dir / "manifest.json");
  if (!f) throw Error("cannot write " + (dir / "manifest.json").string());
  f << manifest.dump(2) << '\n';
  return kOk;
}

inline int cmd_verify_invariants(const RunConfig& cfg, std::ostream& out) {
  bool all = true;
  for (const auto& c : run_invariant_suite(cfg.seed)) {
    out << (c.passed ? "PASS " : "FAIL ") << c.name << " (" << c.detail << ")\n";
    all = all && c.passed;
  }
  return all ? kOk : kUsage;
}

// ---------------------------------------------------------------------------

/// Builds the parser over `cfg`. Every default shown by --help is the value
/// the library uses.
inline void configure(CLI::App& app, RunConfig& cfg) {
  app.description("Scene-graph registration toolkit: generate, register, simulate and benchmark.");
  app.option_defaults()->always_capture_default();
  app.set_config("--config", "", "TOML-style key/value file with the same option names; flags override it");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--seed", cfg.seed, "global seed (falls back to SG_REG_SEED)")->envname("SG_REG_SEED");

  const std::string eval = "Evaluation";
  app.add_option("--tau-iou", cfg.ground_truth.iou_threshold, "ground-truth node match IoU threshold")->group(eval);
  app.add_option("--point-match-distance", cfg.ground_truth.point_match_distance,
                 "ground-truth point match distance, meters")->group(eval);
  app.add_option("--iou-voxel", cfg.ground_truth.voxel, "IoU voxel size, meters")->group(eval);
  app.add_option("--rmse-threshold", cfg.thresholds.rmse, "registration recall RMSE threshold, meters")->group(eval);
  app.add_option("--rte-threshold", cfg.thresholds.rte, "success translation error threshold, meters")->group(eval);
  app.add_option("--rre-threshold", cfg.thresholds.rre, "success rotation error threshold, degrees")->group(eval);
  app.add_option("--ir-distance", cfg.thresholds.inlier_distance, "true-inlier distance for IR/PIR, meters")
      ->group(eval);

  const std::string graph = "Scene graph";
  app.add_option("--edge-min", cfg.edges.min_threshold, "minimum edge distance threshold, meters")->group(graph);
  app.add_option("--edge-scale", cfg.edges.scale, "edge threshold per mean box diagonal")->group(graph);

  const std::string enc = "Encoder";
  app.add_option("--feature-dim", cfg.encoder.feature_dim, "node feature width d")->group(enc);
  app.add_option("--box-dim", cfg.encoder.box_dim, "box embedding width d_b")->group(enc);
  app.add_option("--shape-dim", cfg.encoder.shape_dim, "shape feature width d_s")->group(enc);
  app.add_option("--point-dim", cfg.encoder.point_dim, "point feature width d_z")->group(enc);
  app.add_option("--kp", cfg.encoder.points_per_node, "points sampled per node K_p")->group(enc);
  app.add_option("--gnn-layers", cfg.encoder.gnn_layers, "triplet-GNN layers")->group(enc);
  app.add_flag("--early-fusion", cfg.encoder.early_fusion, "fuse shape features before the GNN")->group(enc);
  app.add_option("--weights-seed", cfg.weight_seed, "seed of the deterministic encoder weights")->group(enc);
  app.add_option("--weights", cfg.weights_path, "binary weight file (overrides --weights-seed)")->group(enc);

  const std::string match = "Matcher";
  app.add_option("--node-threshold", cfg.matcher.node_threshold, "node assignment score floor")->group(match);
  app.add_option("--node-top-k", cfg.matcher.node_top_k, "mutual top-k for node matches")->group(match);
  app.add_option("--point-top-k", cfg.matcher.point_top_k, "mutual top-k for point matches")->group(match);
  app.add_option("--point-threshold", cfg.matcher.point_threshold, "point assignment score floor")->group(match);
  app.add_option("--sinkhorn-iters", cfg.matcher.sinkhorn_iters, "Sinkhorn iterations")->group(match);
  app.add_option("--dustbin-score", cfg.matcher.dustbin_score, "Sinkhorn dustbin score")->group(match);

  const std::string est = "Estimator";
  app.add_option("--levels", cfg.estimator.levels, "compatibility pyramid thresholds, meters")
      ->delimiter(',')
      ->group(est);
  app.add_option("--inlier-threshold", cfg.estimator.residual.inlier_threshold, "GNC-TLS inlier cost c-bar, meters")
      ->group(est);
  app.add_option("--mac-trigger", cfg.estimator.mac_trigger, "run clique search below this GNC inlier ratio")
      ->group(est);
  app.add_option("--nms-radius", cfg.estimator.nms_radius, "correspondence NMS radius, meters")->group(est);
  app.add_option("--verify-voxel", cfg.estimator.verify.voxel, "verification voxel size, meters")->group(est);
  app.add_option("--gnc-factor", cfg.estimator.gnc.factor, "GNC control parameter growth per iteration")->group(est);
  app.add_option("--gnc-max-iters", cfg.estimator.gnc.max_iters, "GNC iteration cap")->group(est);

  auto* gen = app.add_subcommand("gen", "generate a scene-graph pair with ground truth");
  gen->add_option("--out-dir", cfg.out_dir, "directory for a.json, b.json and gt.json");
  gen->add_option("--overlap", cfg.generator.overlap, "fraction of A's objects also in B")->check(CLI::Range(0.0, 1.0));
  gen->add_option("--noise", cfg.generator.point_noise, "point noise sigma on B, meters");
  gen->add_option("--relabel", cfg.generator.relabel_rate, "fraction of B nodes relabeled");
  gen->add_option("--oversegment", cfg.generator.oversegment_rate, "fraction of B nodes split in two");
  gen->add_option("--drop", cfg.generator.drop_rate, "fraction of shared objects missing from B");
  gen->add_option("--partial", cfg.generator.partial_rate, "fraction of B nodes cropped");
  gen->add_option("--min-nodes", cfg.generator.min_nodes, "minimum objects per scene");
  gen->add_option("--max-nodes", cfg.generator.max_nodes, "maximum objects per scene");
  gen->add_option("--min-points", cfg.generator.min_points, "minimum points per object");
  gen->add_option("--max-points", cfg.generator.max_points, "maximum points per object");
  gen->add_flag("--distinct-labels", cfg.generator.distinct_labels, "give every object its own label");

  auto* reg = app.add_subcommand("register", "register scene graph A into B's frame");
  reg->add_option("source", cfg.source, "scene graph A (JSON)")->required();
  reg->add_option("target", cfg.target, "scene graph B (JSON)")->required();
  reg->add_option("--gt", cfg.truth_path, "ground-truth file for NR/NP/IR/PIR/RTE/RRE/RMSE");
  reg->add_option("--report", cfg.report_path, "write a JSON report");
  reg->add_option("--correspondences", cfg.correspondences_path, "write the point correspondences as CSV");
  reg->add_option("--min-overlap", cfg.min_overlap, "reject estimates aligning less than this source fraction");
  reg->add_flag("--diagnostics", cfg.diagnostics, "print every candidate transformation");

  auto* sim = app.add_subcommand("simulate", "two-agent coarse-to-fine communication run");
  sim->add_option("--frames", cfg.sim.frames, "ticks to simulate");
  sim->add_option("--dense-interval", cfg.dense_interval, "minimum ticks between dense exchanges, or inf");
  sim->add_flag("--no-dense", cfg.no_dense, "never request dense messages");
  sim->add_option("--min-matches", cfg.sim.min_matches, "matched nodes needed to request a dense message");
  sim->add_option("--message-dims", cfg.sim.message_dims, "feature width sent in messages, 0 for d + d_s");
  sim->add_option("--pose-window", cfg.sim.pose_window, "frames in the robust pose average, 1 disables");
  sim->add_option("--initial-reveal", cfg.sim.initial_reveal, "fraction of nodes visible at tick 0");
  sim->add_option("--reveal-per-tick", cfg.sim.reveal_per_tick, "fraction of nodes revealed per tick");
  sim->add_option("--cloud-voxel", cfg.sim.cloud_voxel, "voxel size of sent clouds, meters");
  sim->add_option("--sim-kp", cfg.sim_points_per_node, "K_p used by the simulated agents");
  sim->add_option("--overlap", cfg.sim.scene.overlap, "generated scenes: shared object fraction");
  sim->add_option("--partial", cfg.sim.scene.partial_rate, "generated scenes: cropped node fraction");
  sim->add_option("--noise", cfg.sim.scene.point_noise, "generated scenes: point noise sigma, meters");
  sim->add_option("--source", cfg.source, "agent A's full scene graph instead of a generated one");
  sim->add_option("--target", cfg.target, "agent B's full scene graph");
  sim->add_option("--truth", cfg.truth_path, "ground-truth file for the given graphs");
  sim->add_option("--report", cfg.sim_report_path, "write the per-frame run report CSV");
  sim->add_option("--ledger", cfg.ledger_path, "write the bandwidth ledger as JSON");

  auto* bench = app.add_subcommand("bench", "benchmark suites, K_p ablation, clique profile, interval sweep");
  bench->add_option("--suite", cfg.suite, "suite preset: " + joined_suite_names() + " (smoke when nothing else is asked)");
  bench->add_option("--ablation", cfg.ablation, "ablation to run: kp");
  bench->add_option("--profile", cfg.profile, "profile to run: mac");
  bench->add_option("--sweep", cfg.sweep, "sweep to run: dense-interval");
  bench->add_option("--out-dir", cfg.bench_dir, "directory for the CSV tables and manifest.json");
  bench->add_option("--kp-values", cfg.kp_values, "K_p values of the ablation")->delimiter(',');
  bench->add_option("--ratios", cfg.ratios, "inlier ratios of the clique profile")->delimiter(',');
  bench->add_option("--repeats", cfg.repeats, "repeats per ratio of the clique profile");
  bench->add_option("--seeds", cfg.bench_seeds, "seeds for the ablation and the sweep");

  app.add_subcommand("verify-invariants", "run the quick property suite");
}

/// Runs the CLI on `args` (without the program name).
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"", "sgreg"};
  configure(app, cfg);
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  try {
    const auto subs = app.get_subcommands();
    cfg.subcommand = subs.front()->get_name();
    if (cfg.subcommand == "gen") return cmd_gen(cfg, out);
    if (cfg.subcommand == "register") return cmd_register(cfg, out, err);
    if (cfg.subcommand == "simulate") return cmd_simulate(cfg, out);
    if (cfg.subcommand == "bench") return cmd_bench(cfg, out);
    return cmd_verify_invariants(cfg, out);
  } catch (const InsufficientDataError& e) {
    err << "insufficient data: " << e.what() << '\n';
    return kInsufficientData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace sgreg::cli
