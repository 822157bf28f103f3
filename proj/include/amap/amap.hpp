#pragma once

// Umbrella header: acyclic mappings, the subtree-relocation chain, the
// lattice path codec, the excursion calculus, rooted weighted tree metrics,
// and the Monte Carlo verification suites.

#include "amap/chain.hpp"
#include "amap/excursion.hpp"
#include "amap/grid_function.hpp"
#include "amap/json_io.hpp"
#include "amap/lattice_kernel.hpp"
#include "amap/lattice_path.hpp"
#include "amap/mapping.hpp"
#include "amap/montecarlo.hpp"
#include "amap/rational.hpp"
#include "amap/rng.hpp"
#include "amap/rtree.hpp"
