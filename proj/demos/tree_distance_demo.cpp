// Encodes two mappings as paths, builds their trees, and compares them.

#include <cstdio>

#include "amap/lattice_path.hpp"
#include "amap/mapping.hpp"
#include "amap/rtree.hpp"

int main() {
  using namespace amap;
  auto a = AcyclicMapping::checked(Mapping{5, {1, 1, 2, 2, 3}});
  auto b = AcyclicMapping::checked(Mapping{5, {1, 1, 1, 2, 2}});
  RootedWeightedTree ta = tree_from_path(rescale(encode(a))).tree;
  RootedWeightedTree tb = tree_from_path(rescale(encode(b))).tree;
  DeltaResult d = delta_ghwr(ta, tb);
  auto [lo, hi] = d_ghwr_bracket(ta, tb);
  std::printf("comparison %s: %.6f\n", d.exact ? "(exact)" : "(bracket)", d.value());
  std::printf("metric bracket: [%.6f, %.6f]\n", lo, hi);
  return 0;
}
