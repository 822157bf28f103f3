#pragma once

#include <stdexcept>
#include <vector>

#include "amap/excursion.hpp"
#include "amap/lattice_path.hpp"
#include "amap/mapping.hpp"
#include "amap/rng.hpp"

namespace amap {

// The relocation kernel at lattice resolution, with the one-lattice-edge
// duration cutoff folded in.
//
// Levels are snapped to the integer value lattice, which collapses the level
// integral of the excursion-start measure to one unit of mass per vertex
// edge: the excised excursion is the subtree of a uniformly chosen vertex.
// The insertion site is uniform over the distinct admissible attachment
// sites (each remaining vertex plus the root site) rather than uniform in
// time; time-uniform insertion would weight a site by its number of visits
// in the walk, which differs from per-site weighting at finite n.
struct LatticeKappaDraw {
  LatticePath path;
  int moved_vertex = 0;   // DFS label of the relocated subtree's root
  int target_vertex = 0;  // DFS label of the new parent; 0 = new root
};

inline LatticeKappaDraw kappa_plus_lattice_step(const LatticePath& p, RngStream& rng) {
  validate_path(p);
  const int n = p.n;
  const int T = 2 * n;

  // up-step times; the k-th up-step enters the vertex with DFS label k+1
  std::vector<int> entry;
  entry.reserve(n);
  for (int k = 0; k < T; ++k)
    if (p.values[k + 1] > p.values[k]) entry.push_back(k);

  const int i = 1 + static_cast<int>(rng.uniform_int(n));
  const int v = entry[i - 1];
  const int a = p.values[v];
  int del = v + 1;
  while (p.values[del] != a) del++;
  const int sub_count = (del - v) / 2;  // vertices i .. i+sub_count-1 move

  // admissible attachment sites: the root site plus every vertex outside
  // the moved subtree
  const int options = n - sub_count + 1;
  int r = static_cast<int>(rng.uniform_int(options));
  LatticeKappaDraw draw;
  draw.moved_vertex = i;
  if (r == 0) {
    draw.target_vertex = 0;  // detach into a new component
  } else {
    int j = r <= i - 1 ? r : r + sub_count;  // skip DFS labels i..i+sub_count-1
    draw.target_vertex = j;
  }

  // current parent site; relocating there is the identity move
  const int cur_parent_level = a;
  int cur_parent = 0;
  if (cur_parent_level > 0) {
    // the vertex whose plateau the walk sits on at time v
    for (int j = i - 1; j >= 1; --j) {
      if (entry[j - 1] < v && p.values[entry[j - 1]] == a - 1) {
        // j is an open ancestor iff its excursion spans v
        int dj = entry[j - 1] + 1;
        while (p.values[dj] != a - 1) dj++;
        if (dj > v) {
          cur_parent = j;
          break;
        }
      }
    }
  }
  if (draw.target_vertex == cur_parent) {
    draw.path = p;
    return draw;
  }

  // insertion time: a walk state at the target site outside [v, del]
  int w = -1;
  if (draw.target_vertex == 0) {
    if (v > 0)
      w = 0;
    else
      w = T;  // del < T here, else the move was the identity handled above
  } else {
    const int j = draw.target_vertex;
    const int ej = entry[j - 1];
    const int hj = p.values[ej] + 1;
    int dj = ej + 1;
    while (p.values[dj] != hj - 1) dj++;
    for (int t = ej + 1; t <= dj; ++t) {
      if (p.values[t] != hj) continue;
      if (t >= v && t <= del) continue;
      w = t;
      break;
    }
  }
  if (w < 0) throw std::logic_error("kappa_plus_lattice_step: no admissible site time");

  GridFunction moved = relocate(to_grid(p), static_cast<double>(v), static_cast<double>(w));
  draw.path = lattice_from_grid(moved);
  return draw;
}

}  // namespace amap
