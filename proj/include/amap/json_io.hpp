#pragma once

#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "amap/grid_function.hpp"
#include "amap/lattice_path.hpp"
#include "amap/mapping.hpp"
#include "amap/montecarlo.hpp"
#include "amap/rtree.hpp"

namespace amap {

using nlohmann::json;

// {"n": 5, "image": [1,1,2,2,3]}   (1-based)
inline json to_json(const Mapping& m) { return json{{"n", m.n}, {"image", m.image}}; }

inline Mapping mapping_from_json(const json& j) {
  Mapping m;
  m.n = j.at("n").get<int>();
  m.image = j.at("image").get<std::vector<int>>();
  validate_mapping(m);
  return m;
}

// {"n": 2, "values": [0,1,0,1,0]}
inline json to_json(const LatticePath& p) {
  return json{{"n", p.n}, {"values", p.values}};
}

inline LatticePath path_from_json(const json& j) {
  LatticePath p;
  p.n = j.at("n").get<int>();
  p.values = j.at("values").get<std::vector<int>>();
  validate_path(p);
  return p;
}

// {"zeta": 1.0, "values": [...]}
inline json to_json(const GridFunction& g) {
  return json{{"zeta", g.zeta}, {"values", g.values}};
}

inline GridFunction grid_from_json(const json& j) {
  return make_grid_function(j.at("zeta").get<double>(),
                            j.at("values").get<std::vector<double>>());
}

// {"parent": [-1,0,...], "edge_length": [0,...], "mass": [...]}
inline json to_json(const RootedWeightedTree& t) {
  return json{{"parent", t.parent}, {"edge_length", t.edge_length}, {"mass", t.mass}};
}

inline RootedWeightedTree tree_from_json(const json& j) {
  RootedWeightedTree t;
  t.parent = j.at("parent").get<std::vector<int>>();
  t.edge_length = j.at("edge_length").get<std::vector<double>>();
  t.mass = j.at("mass").get<std::vector<double>>();
  validate_tree(t);
  return t;
}

template <typename T>
inline T load_json_file(const std::string& path, T (*parse)(const json&)) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return parse(j);
}

inline void write_reports_csv(std::ostream& os, const std::vector<EstimatorReport>& rs) {
  os << "name,estimate,stderr,target,z_score,reps,cutoff\n";
  auto opt = [](const std::optional<double>& v) {
    if (!v) return std::string();
    std::ostringstream ss;
    ss.precision(12);
    ss << *v;
    return ss.str();
  };
  for (const auto& r : rs) {
    std::ostringstream ss;
    ss.precision(12);
    ss << r.name << "," << r.estimate << "," << r.stderr_ << "," << opt(r.target)
       << "," << opt(r.z_score) << "," << r.reps << "," << opt(r.cutoff);
    os << ss.str() << "\n";
  }
}

}  // namespace amap
