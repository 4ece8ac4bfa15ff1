// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.
// Every oracle here is written out directly and shares no code with the
// library routine it checks.

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "sgreg/agent_sim.hpp"
#include "sgreg/bench.hpp"
#include "sgreg/cli.hpp"
#include "sgreg/objectives.hpp"

namespace {

using namespace sgreg;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double relative_change(const MatrixXd& a, const MatrixXd& b) { return (b - a).norm() / std::max(a.norm(), 1e-12); }

// --- 1: yaw + translation invariance of the encoder -----------------------------

Outcome invariance() {
  const auto t0 = Clock::now();
  const EncoderWeights w = EncoderWeights::seeded(1);
  GeneratorConfig gc;
  gc.min_nodes = 6;
  gc.max_nodes = 10;
  gc.min_points = 40;
  gc.max_points = 80;
  Rng rng(101);
  double worst = 0.0;
  for (int g = 0; g < 50; ++g) {
    const SceneGraph base = synthesize_scene_pair(1000 + static_cast<std::uint64_t>(g), gc).a;
    const MatrixXd x2 = encode(base, w).x2;
    for (int t = 0; t < 50; ++t) {
      const Transform tf = Transform::from_yaw(rng.uniform(-M_PI, M_PI),
                                               Vec3(rng.uniform(-20, 20), rng.uniform(-20, 20), rng.uniform(-3, 3)));
      worst = std::max(worst, relative_change(x2, encode(apply_transform(base, tf), w).x2));
    }
  }
  const SceneGraph fixture = synthesize_scene_pair(7, gc).a;
  Transform roll;
  roll.rotation = Eigen::AngleAxisd(M_PI / 2, Vec3::UnitX()).toRotationMatrix();
  const double roll_change = relative_change(encode(fixture, w).x2, encode(apply_transform(fixture, roll), w).x2);
  const double elapsed = seconds_since(t0);
  return {worst <= 1e-6 && roll_change > 1e-3 && elapsed < 30.0,
          "max relative change " + num(worst) + ", roll change " + num(roll_change) + ", " + num(elapsed) + " s"};
}

// --- 2: mutual top-k against predicate enumeration ----------------------------

// Entries strictly ahead of a(i, j) in row i under (value desc, column asc),
// counting only valid columns.
int ahead_in_row(const MatrixXd& a, int i, int j, const std::vector<bool>& col_ok) {
  int r = 0;
  for (int c = 0; c < a.cols(); ++c)
    if (col_ok[static_cast<std::size_t>(c)] && (a(i, c) > a(i, j) || (a(i, c) == a(i, j) && c < j))) ++r;
  return r;
}

int ahead_in_col(const MatrixXd& a, int i, int j, const std::vector<bool>& row_ok) {
  int r = 0;
  for (int c = 0; c < a.rows(); ++c)
    if (row_ok[static_cast<std::size_t>(c)] && (a(c, j) > a(i, j) || (a(c, j) == a(i, j) && c < i))) ++r;
  return r;
}

std::vector<std::pair<int, int>> enumerate_matches(const MatrixXd& a, double thr, int k, const std::vector<bool>& row_ok,
                                                   const std::vector<bool>& col_ok) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      if (row_ok[static_cast<std::size_t>(i)] && col_ok[static_cast<std::size_t>(j)] && a(i, j) >= thr &&
          ahead_in_row(a, i, j, col_ok) < k && ahead_in_col(a, i, j, row_ok) < k)
        out.emplace_back(i, j);
  return out;
}

Outcome matching_oracle() {
  Rng rng(202);
  int node_bad = 0, point_bad = 0;
  for (int t = 0; t < 1000; ++t) {
    const int n = 1 + static_cast<int>(rng.below(12)), m = 1 + static_cast<int>(rng.below(12));
    MatrixXd a(n, m);
    const bool coarse = t % 2 == 0;  // coarse values force ties
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) a(i, j) = coarse ? std::round(rng.uniform() * 8.0) / 8.0 : rng.uniform();
    const int k = 1 + static_cast<int>(rng.below(4));
    const double thr = rng.uniform(0.0, 0.7);
    const std::vector<bool> all_rows(static_cast<std::size_t>(n), true), all_cols(static_cast<std::size_t>(m), true);

    std::vector<std::pair<int, int>> got;
    for (const auto& x : extract_node_matches(a, thr, k)) got.emplace_back(x.row, x.col);
    node_bad += got == enumerate_matches(a, thr, k, all_rows, all_cols) ? 0 : 1;

    std::vector<bool> row_ok(static_cast<std::size_t>(n)), col_ok(static_cast<std::size_t>(m));
    for (auto&& v : row_ok) v = rng.uniform() < 0.8;
    for (auto&& v : col_ok) v = rng.uniform() < 0.8;
    point_bad += mutual_top_k(a, k, thr, &row_ok, &col_ok) == enumerate_matches(a, thr, k, row_ok, col_ok) ? 0 : 1;
  }
  return {node_bad == 0 && point_bad == 0,
          std::to_string(node_bad) + " node and " + std::to_string(point_bad) + " point discrepancies in 1000"};
}

// --- 3: Sinkhorn marginals and small assignments -----------------------------

Outcome sinkhorn_contract() {
  Rng rng(303);
  double worst = 0.0;
  for (int t = 0; t < 500; ++t) {
    const int n = 1 + static_cast<int>(rng.below(16)), m = 1 + static_cast<int>(rng.below(16));
    MatrixXd s(n, m);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) s(i, j) = rng.normal(0.0, 2.0);
    const MatrixXd p = sinkhorn(s, 100, rng.uniform(-1.0, 2.0));
    for (int i = 0; i < n; ++i) worst = std::max(worst, std::abs(p.row(i).sum() - 1.0));
    for (int j = 0; j < m; ++j) worst = std::max(worst, std::abs(p.col(j).sum() - 1.0));
  }
  int wrong = 0;
  for (int t = 0; t < 500; ++t) {
    std::array<int, 3> perm = {0, 1, 2};
    for (int k = 2; k > 0; --k) std::swap(perm[static_cast<std::size_t>(k)], perm[rng.below(static_cast<std::uint64_t>(k) + 1)]);
    MatrixXd s(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) s(i, j) = rng.uniform(-1.0, 1.0);
    for (int i = 0; i < 3; ++i) s(i, perm[static_cast<std::size_t>(i)]) += 4.0;
    std::array<int, 3> best{}, cur = {0, 1, 2};
    double best_score = -1e300;
    do {
      const double v = s(0, cur[0]) + s(1, cur[1]) + s(2, cur[2]);
      if (v > best_score) best_score = v, best = cur;
    } while (std::next_permutation(cur.begin(), cur.end()));
    const MatrixXd p = sinkhorn(s, 100, 0.5);
    for (int i = 0; i < 3; ++i) {
      Eigen::Index j = 0;
      p.row(i).head(3).maxCoeff(&j);
      if (j != best[static_cast<std::size_t>(i)]) {
        ++wrong;
        break;
      }
    }
  }
  return {worst <= 1e-4 && wrong == 0,
          "max marginal error " + num(worst) + ", " + std::to_string(wrong) + " of 500 permutations missed"};
}

// --- 4: maximum clique against subset enumeration ---------------------------------

std::size_t largest_clique_by_subsets(const std::vector<std::uint32_t>& adj) {
  const std::size_t n = adj.size();
  std::vector<char> is_clique(std::size_t{1} << n, 0);
  is_clique[0] = 1;
  std::size_t best = 0;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    const int low = __builtin_ctz(mask);
    const std::uint32_t rest = mask & (mask - 1);
    is_clique[mask] = is_clique[rest] && (rest & ~adj[static_cast<std::size_t>(low)]) == 0;
    if (is_clique[mask]) best = std::max<std::size_t>(best, static_cast<std::size_t>(__builtin_popcount(mask)));
  }
  return best;
}

Outcome clique_exactness() {
  const auto t0 = Clock::now();
  Rng rng(404);
  const double densities[] = {0.2, 0.5, 0.8};
  int failures = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = t < 3 ? 20 : 1 + rng.below(20);
    const double density = densities[t % 3];
    std::vector<std::uint32_t> adj(n, 0);
    CompatibilityGraph g;
    g.adjacency.assign(n, {});
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (rng.uniform() < density) {
          adj[i] |= 1u << j;
          adj[j] |= 1u << i;
          g.adjacency[i].push_back(static_cast<int>(j));
          g.adjacency[j].push_back(static_cast<int>(i));
          ++g.edge_count;
        }
    const CliqueResult got = max_clique(g);
    bool valid = got.exact;
    for (std::size_t a = 0; a < got.vertices.size(); ++a)
      for (std::size_t b = a + 1; b < got.vertices.size(); ++b)
        valid = valid && (adj[static_cast<std::size_t>(got.vertices[a])] >> got.vertices[b] & 1u);
    failures += valid && got.vertices.size() == largest_clique_by_subsets(adj) ? 0 : 1;
  }
  const double elapsed = seconds_since(t0);
  return {failures == 0 && elapsed < 60.0, std::to_string(failures) + " failures in 200, " + num(elapsed) + " s"};
}

// --- 5: robust estimation under outliers --------------------------------------------

CorrespondenceSet corrupted_pairs(std::size_t n, double outlier_ratio, const Transform& truth, Rng& rng) {
  const auto outliers = static_cast<std::size_t>(std::lround(static_cast<double>(n) * outlier_ratio));
  auto point = [&] { return Vec3(rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(0, 2.5)); };
  CorrespondenceSet c(n);
  for (std::size_t k = 0; k < n; ++k) {
    c[k].source = point();
    c[k].target = k < outliers ? Vec3(truth * point())
                               : Vec3(truth * c[k].source + Vec3(rng.normal(0, 0.005), rng.normal(0, 0.005),
                                                                 rng.normal(0, 0.005)));
    c[k].score = rng.uniform();
  }
  rng.shuffle(c);
  return c;
}

Outcome robust_estimation() {
  Rng rng(505);
  std::string detail;
  bool ok = true;
  for (const double ratio : {0.2, 0.5, 0.8}) {
    int good = 0;
    for (int t = 0; t < 100; ++t) {
      const Transform truth = random_4dof_transform(rng.next(), 5.0);
      const auto e = evaluate_frame(estimate(corrupted_pairs(500, ratio, truth, rng), {}, {}).transform, truth);
      good += e.rte < 0.05 && e.rre < 0.5 ? 1 : 0;
    }
    ok = ok && good >= 95;
    detail += "outliers " + num(ratio) + ": " + std::to_string(good) + "/100, ";
  }
  double gap = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Transform truth = random_4dof_transform(rng.next(), 5.0);
    const CorrespondenceSet c = corrupted_pairs(200, 0.0, truth, rng);
    gap = std::max(gap, (gnc_tls(c).transform.matrix() - svd_align(c).matrix()).cwiseAbs().maxCoeff());
  }
  return {ok && gap <= 1e-6, detail + "outlier-free GNC vs SVD " + num(gap)};
}

// --- 6: clique-search trigger ---------------------------------------------------

Outcome trigger_audit() {
  Rng rng(606);
  int wrong_high = 0, wrong_low = 0;
  double min_high = 1.0, max_low = 0.0;
  for (int t = 0; t < 50; ++t) {
    const Transform truth = random_4dof_transform(rng.next(), 5.0);
    const auto hi = estimate(corrupted_pairs(300, 0.1, truth, rng), {}, {});
    min_high = std::min(min_high, hi.gnc_inlier_ratio);
    wrong_high += hi.strategy == Strategy::GncOnly && hi.clique_seconds == 0.0 ? 0 : 1;
    const auto lo = estimate(corrupted_pairs(300, 0.9, truth, rng), {}, {});
    max_low = std::max(max_low, lo.gnc_inlier_ratio);
    wrong_low += lo.strategy == Strategy::MacGnc ? 0 : 1;
  }
  const bool ratios_ok = min_high > 0.3 && max_low < 0.3;
  return {wrong_high == 0 && wrong_low == 0 && ratios_ok && EstimatorConfig{}.mac_trigger == 0.3,
          "GNC inlier ratio >= " + num(min_high) + " at 0.9: " + std::to_string(wrong_high) +
              " clique runs; <= " + num(max_low) + " at 0.1: " + std::to_string(wrong_low) + " skipped"};
}

// --- 7: loss gradients -----------------------------------------------------------

double fd_relative_error(const std::function<double(const MatrixXd&)>& f, const MatrixXd& x, const MatrixXd& analytic) {
  const double h = 1e-5;
  MatrixXd numeric(x.rows(), x.cols());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    MatrixXd up = x, down = x;
    up.data()[k] += h;
    down.data()[k] -= h;
    numeric.data()[k] = (f(up) - f(down)) / (2 * h);
  }
  return (analytic - numeric).norm() / std::max(numeric.norm(), 1e-8);
}

Outcome gradients() {
  Rng rng(707);
  double worst_gnn = 0.0, worst_ot = 0.0;
  for (int t = 0; t < 20; ++t) {
    const int n = 2 + static_cast<int>(rng.below(5)), m = 2 + static_cast<int>(rng.below(5));
    MatrixXd s(n, m);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) s(i, j) = rng.normal();
    // a random partial matching, the rest unmatched
    std::vector<int> cols(static_cast<std::size_t>(m));
    std::iota(cols.begin(), cols.end(), 0);
    rng.shuffle(cols);
    IndexPairs pairs;
    std::vector<int> ua, ub;
    std::vector<bool> col_used(static_cast<std::size_t>(m), false);
    for (int i = 0; i < n; ++i) {
      if (i < m && rng.uniform() < 0.7) {
        pairs.emplace_back(i, cols[static_cast<std::size_t>(i)]);
        col_used[static_cast<std::size_t>(cols[static_cast<std::size_t>(i)])] = true;
      } else {
        ua.push_back(i);
      }
    }
    for (int j = 0; j < m; ++j)
      if (!col_used[static_cast<std::size_t>(j)]) ub.push_back(j);
    if (pairs.empty()) {
      pairs.emplace_back(ua.front(), ub.front());
      ua.erase(ua.begin());
      ub.erase(ub.begin());
    }

    worst_gnn = std::max(worst_gnn, fd_relative_error([&](const MatrixXd& x) { return loss_gnn({dual_normalize(x)}, pairs); },
                                                      s, loss_gnn_dual_gradient(s, pairs).second));
    worst_ot = std::max(worst_ot,
                        fd_relative_error([&](const MatrixXd& x) { return loss_ot(sinkhorn(x, 100, 0.5), pairs, ua, ub); },
                                          s, loss_ot_sinkhorn_gradient(s, 100, 0.5, pairs, ua, ub).second));
  }
  return {worst_gnn <= 1e-4 && worst_ot <= 1e-3,
          "max relative error " + num(worst_gnn) + " (node loss), " + num(worst_ot) + " (point loss)"};
}

// --- 8: bandwidth accounting and the dense-interval trend -----------------------------

std::size_t recount(const SimResult& r) {
  std::size_t bytes = 0;
  for (const auto& f : r.frames) {
    const std::size_t nodes = 4 * f.nodes_sent * (f.feature_dims + 3);
    if (f.bytes_coarse) bytes += 19 + nodes;
    if (f.bytes_dense) bytes += 16 + 19 + nodes + 16 * f.points_sent;
  }
  return bytes;
}

Outcome protocol_accounting() {
  EncoderConfig ec;
  ec.points_per_node = kSweepPointsPerNode;
  const EncoderWeights w = EncoderWeights::seeded(1, ec);
  const std::vector<double> intervals = {kNever, 10, 5, 3};
  const auto seeds = seed_range(0, 6);
  int mismatches = 0, runs = 0;
  std::vector<double> rates;
  for (const double interval : intervals) {
    SimConfig cfg = sweep_sim_config();
    cfg.dense_interval = interval;
    double rate = 0.0;
    for (auto seed : seeds) {
      const SimResult r = run_simulation(seed, w, cfg);
      mismatches += r.ledger.total() == recount(r) ? 0 : 1;
      ++runs;
      rate += r.success_rate;
    }
    rates.push_back(rate / static_cast<double>(seeds.size()));
  }
  SimConfig coarse_only = sweep_sim_config();
  coarse_only.dense_enabled = false;
  for (auto seed : seeds) {
    const SimResult r = run_simulation(seed, w, coarse_only);
    mismatches += r.ledger.total() == recount(r) ? 0 : 1;
    ++runs;
  }
  const bool monotone = std::is_sorted(rates.begin(), rates.end());
  std::string trend;
  for (double r : rates) trend += (trend.empty() ? "" : " <= ") + num(r);
  return {mismatches == 0 && monotone,
          std::to_string(mismatches) + " ledger mismatches in " + std::to_string(runs) + " runs; success by interval inf/10/5/3: " + trend};
}

// --- 9: portable thresholds are the defaults -------------------------------------------

Outcome thresholds() {
  std::ostringstream out, err;
  cli::run({"--help"}, out, err);
  const std::string help = out.str();
  bool listed = true;
  std::string missing;
  for (const char* needle : {"--tau-iou FLOAT [0.3]", "--point-match-distance FLOAT [0.05]",
                             "--rmse-threshold FLOAT [0.2]", "--rte-threshold FLOAT [0.2]", "--rre-threshold FLOAT [5]"})
    if (help.find(needle) == std::string::npos) {
      listed = false;
      missing += std::string(" '") + needle + "'";
    }
  const GroundTruthConfig gt;
  const SuccessThresholds th;
  const bool defaults = gt.iou_threshold == 0.3 && gt.point_match_distance == 0.05 && th.rmse == 0.2 && th.rte == 0.2 &&
                        th.rre == 5.0;
  return {listed && defaults, listed ? "all five defaults shown in --help" : "missing from --help:" + missing};
}

// --- 10: K_p ordering ----------------------------------------------------------------

Outcome kp_ordering() {
  const auto t0 = Clock::now();
  const auto rows = kp_ablation({256, 512, 1024}, seed_range(0, 3));
  const double elapsed = seconds_since(t0);
  bool ok = rows.size() == 3;
  std::string detail;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (k > 0) ok = ok && rows[k].correspondences < rows[k - 1].correspondences && rows[k].ir > rows[k - 1].ir;
    detail += "K_p " + std::to_string(rows[k].kp) + ": " + num(rows[k].correspondences) + " pairs, IR " +
              num(rows[k].ir) + "; ";
  }
  return {ok && elapsed < 300.0, detail + num(elapsed) + " s"};
}

// --- 11: clique runtime profile --------------------------------------------------------

Outcome clique_profile() {
  const CorrespondencePool pool = build_pool(0);
  const auto rows = mac_runtime_profile({0.05, 0.4, 0.95}, pool);
  const bool ok = rows.size() == 3 && rows[1].solve_seconds > rows[0].solve_seconds &&
                  rows[1].solve_seconds > rows[2].solve_seconds;
  std::string detail = "median solve seconds";
  for (const auto& r : rows) detail += " " + num(r.ratio) + ":" + num(r.solve_seconds);
  return {ok, detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"C1 4-DoF invariance", invariance},
      {"C2 matching predicate equivalence", matching_oracle},
      {"C3 Sinkhorn contract", sinkhorn_contract},
      {"C4 maximum clique exactness", clique_exactness},
      {"C5 robust estimation", robust_estimation},
      {"C6 clique-search trigger", trigger_audit},
      {"C7 loss gradients", gradients},
      {"C8 protocol accounting", protocol_accounting},
      {"C9 default thresholds", thresholds},
      {"C10 K_p ablation ordering", kp_ordering},
      {"C11 clique runtime profile", clique_profile},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o{false, ""};
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("%s %s (%s)\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
