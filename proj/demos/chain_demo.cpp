// Runs the subtree-relocation chain on a modest ground set and prints how
// the fixed-point count and tree height wander.

#include <cstdio>

#include "amap/chain.hpp"
#include "amap/mapping.hpp"

int main() {
  amap::RngStream rng(7);
  amap::AcyclicMapping m = amap::sample_uniform_acyclic(200, rng);
  auto summary = amap::run_chain(
      m, 2000, rng, {amap::fixed_points_observer(), amap::height_observer()}, 200);
  std::printf("%8s %14s %8s\n", "step", "fixed-points", "height");
  for (std::size_t k = 0; k < summary.rows.size(); ++k)
    std::printf("%8ld %14.0f %8.0f\n", summary.recorded_steps[k], summary.rows[k][0],
                summary.rows[k][1]);
  return 0;
}
