#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace amap {

// Nonnegative function on [0, zeta], sampled at N+1 uniform grid points and
// linearly interpolated in between. values[0] == values[N] == 0. A zeta of 0
// marks the degenerate empty path (the residue of excising a whole path).
struct GridFunction {
  double zeta = 0.0;
  std::vector<double> values;

  bool degenerate() const { return zeta <= 0.0 || values.size() < 2; }
  int intervals() const { return degenerate() ? 0 : static_cast<int>(values.size()) - 1; }
  double spacing() const { return zeta / intervals(); }

  // Linear interpolation; 0 outside [0, zeta]. Exact at grid points.
  double operator()(double t) const {
    if (degenerate()) return 0.0;
    const int N = intervals();
    double x = t * static_cast<double>(N) / zeta;
    if (x <= 0.0) return values.front();
    if (x >= static_cast<double>(N)) return values.back();
    int k = static_cast<int>(x);
    if (k >= N) k = N - 1;
    double frac = x - k;
    if (frac == 0.0) return values[k];
    return values[k] + frac * (values[k + 1] - values[k]);
  }

  // Exact area under the interpolant.
  double area() const {
    if (degenerate()) return 0.0;
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < values.size(); ++k) s += values[k] + values[k + 1];
    return s * 0.5 * spacing();
  }

  double max_value() const {
    if (degenerate()) return 0.0;
    return *std::max_element(values.begin(), values.end());
  }

  // Grid indices k in (0, N) with values[k] == 0 exactly. Paths built from
  // lattice walks carry exact zeros; Gaussian samples almost surely have
  // none and are treated as zero-free.
  std::vector<int> interior_zero_indices() const {
    std::vector<int> z;
    const int N = intervals();
    for (int k = 1; k < N; ++k)
      if (values[k] == 0.0) z.push_back(k);
    return z;
  }
};

inline GridFunction make_grid_function(double zeta, std::vector<double> values) {
  if (zeta <= 0.0) throw std::invalid_argument("GridFunction: zeta must be > 0");
  if (values.size() < 2) throw std::invalid_argument("GridFunction: need at least 2 samples");
  if (values.front() != 0.0 || values.back() != 0.0)
    throw std::invalid_argument("GridFunction: endpoint values must be 0");
  for (double v : values)
    if (v < 0.0 || !std::isfinite(v))
      throw std::invalid_argument("GridFunction: values must be finite and >= 0");
  GridFunction g;
  g.zeta = zeta;
  g.values = std::move(values);
  return g;
}

inline GridFunction empty_grid_function() { return GridFunction{}; }

// Strict interior positivity, the excursion-path subtype.
inline bool is_excursion_like(const GridFunction& f) {
  if (f.degenerate()) return false;
  const int N = f.intervals();
  for (int k = 1; k < N; ++k)
    if (f.values[k] <= 0.0) return false;
  return true;
}

}  // namespace amap
