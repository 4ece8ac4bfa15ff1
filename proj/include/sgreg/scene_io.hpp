#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "sgreg/scene_graph.hpp"

namespace sgreg {

namespace detail {

inline Vec3 read_vec3(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) throw ParseError(where + ": expected an array of 3 numbers");
  Vec3 v;
  for (int k = 0; k < 3; ++k) {
    if (!j[static_cast<std::size_t>(k)].is_number()) throw ParseError(where + ": expected an array of 3 numbers");
    v[k] = j[static_cast<std::size_t>(k)].get<double>();
  }
  return v;
}

inline nlohmann::json vec3_json(const Vec3& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); }

}  // namespace detail

inline nlohmann::json to_json(const SceneGraph& g) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : g.nodes) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : n.points) pts.push_back(detail::vec3_json(p));
    nodes.push_back({{"id", n.id},
                     {"label", n.label},
                     {"box", detail::vec3_json(n.box)},
                     {"center", detail::vec3_json(n.center)},
                     {"points", std::move(pts)}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [a, b] : g.edges) edges.push_back({a, b});
  return {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

/// Parses the scene-graph JSON schema. Edges are recomputed with `edge_cfg`
/// when the document has none.
inline SceneGraph scene_graph_from_json(const nlohmann::json& doc, const EdgeConfig& edge_cfg = {}) {
  if (!doc.is_object() || !doc.contains("nodes") || !doc["nodes"].is_array())
    throw ParseError("scene graph: missing \"nodes\" array");
  std::vector<SemanticNode> nodes;
  std::size_t position = 0;
  for (const auto& jn : doc["nodes"]) {
    const std::string where_pos = "node #" + std::to_string(position++);
    if (!jn.is_object()) throw ParseError(where_pos + ": expected an object");
    if (!jn.contains("id") || !jn["id"].is_number_integer()) throw ParseError(where_pos + ": missing field \"id\"");
    SemanticNode n;
    n.id = jn["id"].get<int>();
    const std::string where = "node " + std::to_string(n.id);
    for (const char* field : {"label", "box", "center", "points"})
      if (!jn.contains(field)) throw ParseError(where + ": missing field \"" + field + "\"");
    if (!jn["label"].is_string()) throw ParseError(where + ": field \"label\" must be a string");
    n.label = jn["label"].get<std::string>();
    n.box = detail::read_vec3(jn["box"], where + " field \"box\"");
    n.center = detail::read_vec3(jn["center"], where + " field \"center\"");
    if (!jn["points"].is_array() || jn["points"].empty())
      throw ParseError(where + ": field \"points\" must be a non-empty array");
    for (const auto& jp : jn["points"]) n.points.push_back(detail::read_vec3(jp, where + " field \"points\""));
    nodes.push_back(std::move(n));
  }

  SceneGraph g;
  if (doc.contains("edges")) {
    if (!doc["edges"].is_array()) throw ParseError("scene graph: field \"edges\" must be an array");
    for (const auto& je : doc["edges"]) {
      if (!je.is_array() || je.size() != 2 || !je[0].is_number_integer() || !je[1].is_number_integer())
        throw ParseError("scene graph: each edge must be a pair of node ids");
      const int a = je[0].get<int>(), b = je[1].get<int>();
      g.edges.emplace_back(std::min(a, b), std::max(a, b));
    }
    std::sort(g.edges.begin(), g.edges.end());
  } else {
    g.edges = build_edges(nodes, edge_cfg);
  }
  g.nodes = std::move(nodes);
  try {
    validate(g);
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("scene graph: ") + e.what());
  }
  return g;
}

inline SceneGraph load_scene_graph(const std::filesystem::path& path, const EdgeConfig& edge_cfg = {}) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return scene_graph_from_json(doc, edge_cfg);
}

inline void save_json(const nlohmann::json& doc, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << doc.dump() << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

inline void save_scene_graph(const SceneGraph& g, const std::filesystem::path& path) { save_json(to_json(g), path); }

inline nlohmann::json to_json(const Transform& t) {
  nlohmann::json rows = nlohmann::json::array();
  const Mat4 m = t.matrix();
  for (int r = 0; r < 4; ++r) rows.push_back({m(r, 0), m(r, 1), m(r, 2), m(r, 3)});
  return rows;
}

inline Transform transform_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 4) throw ParseError("transform: expected a 4x4 row-major array");
  Mat4 m;
  for (int r = 0; r < 4; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || row.size() != 4) throw ParseError("transform: expected a 4x4 row-major array");
    for (int c = 0; c < 4; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  Transform t = Transform::from_matrix(m);
  if (!t.is_valid(1e-6)) throw ParseError("transform: rotation block is not a proper rotation");
  return t;
}

/// Ground truth as written by `gen`: node matches, negatives and the transform.
/// Point matches are not stored; they are cheap to regenerate from the graphs.
inline nlohmann::json to_json(const GroundTruth& gt) {
  nlohmann::json matches = nlohmann::json::array();
  for (const auto& [a, b] : gt.node_matches) matches.push_back({a, b});
  nlohmann::json negatives = nlohmann::json::object();
  for (const auto& [a, list] : gt.negatives) negatives[std::to_string(a)] = list;
  return {{"transform", to_json(gt.true_transform)}, {"node_matches", matches}, {"negatives", negatives}};
}

inline GroundTruth ground_truth_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("transform")) throw ParseError("ground truth: missing \"transform\"");
  GroundTruth gt;
  gt.true_transform = transform_from_json(doc["transform"]);
  if (doc.contains("node_matches"))
    for (const auto& m : doc["node_matches"]) gt.node_matches.emplace(m.at(0).get<int>(), m.at(1).get<int>());
  if (doc.contains("negatives"))
    for (const auto& [key, list] : doc["negatives"].items()) gt.negatives[std::stoi(key)] = list.get<std::vector<int>>();
  return gt;
}

inline nlohmann::json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace sgreg
