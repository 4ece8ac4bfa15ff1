// Generates a noisy scene-graph pair, registers A into B's frame and prints
// the node and pose metrics against the generator's ground truth.
//
//   register_pair [seed]

#include <cstdlib>
#include <iomanip>
#include <iostream>

#include "sgreg/metrics.hpp"
#include "sgreg/pipeline.hpp"

int main(int argc, char** argv) {
  using namespace sgreg;
  const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 7;

  GeneratorConfig scene;
  scene.min_nodes = 12;
  scene.max_nodes = 18;
  scene.overlap = 0.7;
  scene.point_noise = 0.01;
  scene.partial_rate = 0.3;
  const ScenePair pair = synthesize_scene_pair(seed, scene);
  const GroundTruth gt = generate_ground_truth(pair.a, pair.b, pair.a_to_b);

  const EncoderWeights weights = EncoderWeights::seeded(1);
  const RegistrationResult r = register_graphs(pair.a, pair.b, weights);
  const NodeScores ns = node_scores(r.node_matches, gt);

  std::cout << std::fixed << std::setprecision(3);
  std::cout << "scene A " << pair.a.size() << " nodes, scene B " << pair.b.size() << " nodes, "
            << gt.node_matches.size() << " true matches\n";
  std::cout << "node matches " << r.node_matches.size() << "  NR " << ns.recall << "  NP " << ns.precision << '\n';
  std::cout << "point correspondences " << r.correspondences.size() << "  IR "
            << inlier_ratio(r.correspondences, pair.a_to_b, 0.1) << '\n';
  if (!r.estimate) {
    std::cout << "no estimate: too few correspondences\n";
    return 2;
  }
  const FrameEvaluation e = evaluate_frame(r.estimate->transform, pair.a_to_b);
  std::cout << "strategy " << to_string(r.estimate->strategy) << "  RTE " << e.rte << " m  RRE " << e.rre << " deg  "
            << (e.success ? "success" : "failure") << '\n';
  std::cout << "timings (s): encode " << r.timings.encode << ", nodes " << r.timings.node_match << ", points "
            << r.timings.point_match << ", estimate " << r.timings.estimate << '\n';
  return e.success ? 0 : 1;
}
