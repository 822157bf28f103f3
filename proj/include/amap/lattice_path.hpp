#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "amap/grid_function.hpp"
#include "amap/mapping.hpp"

namespace amap {

// Nonnegative +-1 step path of length 2n from 0 back to 0.
struct LatticePath {
  int n = 0;
  std::vector<int> values;  // size 2n+1
};

inline void validate_path(const LatticePath& p) {
  if (p.n < 1) throw std::invalid_argument("LatticePath: n must be >= 1");
  if (static_cast<int>(p.values.size()) != 2 * p.n + 1)
    throw std::invalid_argument("LatticePath: values length must be 2n+1");
  if (p.values.front() != 0 || p.values.back() != 0)
    throw std::invalid_argument("LatticePath: endpoints must be 0");
  for (std::size_t k = 0; k + 1 < p.values.size(); ++k) {
    if (p.values[k] < 0) throw std::invalid_argument("LatticePath: negative value");
    if (std::abs(p.values[k + 1] - p.values[k]) != 1)
      throw std::invalid_argument("LatticePath: steps must be +-1");
  }
}

// Depth-first encoding of an acyclic mapping. Each tree component with l
// vertices contributes a 2l-step excursion recording depth+1 along the walk.
// Canonical order: components by smallest contained label, children in
// ascending label order; any relabeling of the mapping permutes these and is
// therefore invisible to excursion lengths above all levels.
inline LatticePath encode(const AcyclicMapping& m) {
  Forest f = decompose(m);
  const int n = m.n();

  // order components by their smallest vertex label
  std::vector<std::pair<int, int>> comps;  // (min label, root)
  for (int r : f.roots) {
    int mn = r;
    std::vector<int> stack{r};
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      mn = std::min(mn, u);
      for (int c : f.children[u]) stack.push_back(c);
    }
    comps.push_back({mn, r});
  }
  std::sort(comps.begin(), comps.end());

  LatticePath p;
  p.n = n;
  p.values.reserve(2 * n + 1);
  p.values.push_back(0);
  int h = 0;
  for (auto [mn, r] : comps) {
    // iterative DFS, children ascending
    std::vector<std::pair<int, std::size_t>> stack;  // (vertex, next child idx)
    p.values.push_back(++h);
    stack.push_back({r, 0});
    while (!stack.empty()) {
      auto& [u, ci] = stack.back();
      if (ci < f.children[u].size()) {
        int c = f.children[u][ci++];
        p.values.push_back(++h);
        stack.push_back({c, 0});
      } else {
        p.values.push_back(--h);
        stack.pop_back();
      }
    }
  }
  validate_path(p);
  return p;
}

// Canonical inverse of encode: vertices are labeled in DFS-visit order, so
// encode(decode(p)) == p exactly. decode(encode(m)) is the canonical
// relabeling of m.
inline AcyclicMapping decode(const LatticePath& p) {
  validate_path(p);
  const int n = p.n;
  Mapping m;
  m.n = n;
  m.image.assign(n, 0);
  std::vector<int> stack;
  int next = 0;
  for (int k = 0; k < 2 * n; ++k) {
    if (p.values[k + 1] > p.values[k]) {
      int u = ++next;
      m.image[u - 1] = stack.empty() ? u : stack.back();
      stack.push_back(u);
    } else {
      stack.pop_back();
    }
  }
  return AcyclicMapping::unchecked(std::move(m));
}

// Time rescaled by 2n, space by sqrt(n): a grid function on [0,1].
inline GridFunction rescale(const LatticePath& p) {
  validate_path(p);
  GridFunction g;
  g.zeta = 1.0;
  g.values.reserve(p.values.size());
  const double s = 1.0 / std::sqrt(static_cast<double>(p.n));
  for (int v : p.values) g.values.push_back(v * s);
  return g;
}

// The path as a grid function in its own units (lifetime 2n, integer values).
inline GridFunction to_grid(const LatticePath& p) {
  validate_path(p);
  GridFunction g;
  g.zeta = 2.0 * p.n;
  g.values.assign(p.values.begin(), p.values.end());
  return g;
}

// Exact inverse of to_grid; rejects grids that are not integer lattice paths.
inline LatticePath lattice_from_grid(const GridFunction& g) {
  LatticePath p;
  if (g.values.size() % 2 != 1 || g.values.size() < 3)
    throw std::invalid_argument("lattice_from_grid: grid size must be odd and >= 3");
  p.n = (static_cast<int>(g.values.size()) - 1) / 2;
  p.values.reserve(g.values.size());
  for (double v : g.values) {
    long r = std::llround(v);
    if (std::abs(v - static_cast<double>(r)) > 1e-6)
      throw std::invalid_argument("lattice_from_grid: non-integer value");
    p.values.push_back(static_cast<int>(r));
  }
  validate_path(p);
  return p;
}

// For each level h, the sorted lengths of excursions strictly above h.
// This is exactly the data preserved by vertex relabelings.
using LevelProfile = std::map<int, std::vector<int>>;

inline LevelProfile excursion_length_profile(const LatticePath& p) {
  validate_path(p);
  LevelProfile prof;
  const int maxv = *std::max_element(p.values.begin(), p.values.end());
  for (int h = 0; h < maxv; ++h) {
    std::vector<int> lens;
    int start = -1;
    for (int k = 0; k <= 2 * p.n; ++k) {
      if (p.values[k] == h) {
        if (start >= 0) {
          lens.push_back(k - start);
          start = -1;
        }
        // a new excursion begins here iff the path steps up next
        if (k < 2 * p.n && p.values[k + 1] > h) start = k;
      }
    }
    std::sort(lens.begin(), lens.end());
    prof[h] = std::move(lens);
  }
  return prof;
}

}  // namespace amap
