#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "amap/grid_function.hpp"
#include "amap/rng.hpp"

namespace amap {

// ---------------------------------------------------------------------------
// Straddling excursions
// ---------------------------------------------------------------------------

// The excursion of f above level a that straddles time s: its start
// sup{r < s : f(r) = a} and finish inf{t > s : f(t) = a}, located by linear
// interpolation on the grid.
struct StraddleFrame {
  double s = 0.0;
  double a = 0.0;
  double start = 0.0;
  double finish = 0.0;
  double duration() const { return finish - start; }
};

namespace detail {

// Last time <= s where f crosses level a from below; requires f(s) > a.
inline double crossing_left(const GridFunction& f, double s, double a) {
  const int N = f.intervals();
  const double h = f.spacing();
  double x = s * static_cast<double>(N) / f.zeta;
  int j = static_cast<int>(std::floor(x));
  if (j >= N) j = N - 1;
  if (static_cast<double>(j) == x) j--;  // s on the grid: start with the cell to its left
  for (int k = j; k >= 0; --k) {
    if (f.values[k] <= a) {
      double denom = f.values[k + 1] - f.values[k];
      if (denom <= 0.0) return k * h;  // only possible when values[k] == a exactly
      double t = (k + (a - f.values[k]) / denom) * h;
      return std::min(t, s);
    }
  }
  return 0.0;  // f(0) = 0 <= a always terminates the scan
}

// First time >= s where f crosses level a from above; requires f(s) > a.
inline double crossing_right(const GridFunction& f, double s, double a) {
  const int N = f.intervals();
  const double h = f.spacing();
  double x = s * static_cast<double>(N) / f.zeta;
  int j = static_cast<int>(std::ceil(x));
  if (j <= 0) j = 1;
  for (int k = j; k <= N; ++k) {
    if (f.values[k] <= a) {
      double denom = f.values[k - 1] - f.values[k];
      if (denom <= 0.0) return k * h;
      double t = (k - (a - f.values[k]) / denom) * h;
      return std::max(t, s);
    }
  }
  return f.zeta;
}

}  // namespace detail

inline StraddleFrame straddle(const GridFunction& f, double s, double a) {
  if (f.degenerate()) throw std::domain_error("straddle: degenerate path");
  if (!(s > 0.0 && s < f.zeta))
    throw std::domain_error("straddle: s must lie in (0, zeta)");
  if (!(a >= 0.0 && a < f(s)))
    throw std::domain_error("straddle: need 0 <= a < f(s)");
  StraddleFrame fr;
  fr.s = s;
  fr.a = a;
  fr.start = detail::crossing_left(f, s, a);
  fr.finish = detail::crossing_right(f, s, a);
  return fr;
}

// Straddling frame with the law of the underlying rough path rather than its
// interpolant. Grid crossings miss returns to the level between samples;
// conditionally on the samples, a cell from y0 to y1 with both above `a`
// still dipped below it with the Brownian bridge probability
// exp(-2 (y0-a)(y1-a) / (sigma2 h)). Those hits are sampled, which removes
// the sqrt-spacing overshoot of grid-located excursion endpoints. sigma2 is
// the diffusion variance of the path in its own units (1 for the standard
// bridge and excursion surrogates).
inline StraddleFrame straddle_refined(const GridFunction& f, double s, double a,
                                      RngStream& rng, double sigma2 = 1.0) {
  StraddleFrame fr;
  fr.s = s;
  fr.a = a;
  if (f.degenerate()) throw std::domain_error("straddle: degenerate path");
  if (!(s > 0.0 && s < f.zeta))
    throw std::domain_error("straddle: s must lie in (0, zeta)");
  if (!(a >= 0.0 && a < f(s)))
    throw std::domain_error("straddle: need 0 <= a < f(s)");
  const int N = f.intervals();
  const double h = f.spacing();
  const double x = s * static_cast<double>(N) / f.zeta;

  double tprev = s, yprev = f(s);
  fr.finish = f.zeta;
  for (int k = static_cast<int>(std::floor(x)) + 1; k <= N; ++k) {
    const double tk = k * h, yk = f.values[k];
    if (yk <= a) {
      fr.finish = tprev + (tk - tprev) * (yprev - a) / (yprev - yk);
      break;
    }
    const double p = std::exp(-2.0 * (yprev - a) * (yk - a) / (sigma2 * (tk - tprev)));
    if (rng.uniform() < p) {
      fr.finish = 0.5 * (tprev + tk);
      break;
    }
    tprev = tk;
    yprev = yk;
  }

  tprev = s;
  yprev = f(s);
  fr.start = 0.0;
  for (int k = static_cast<int>(std::ceil(x)) - 1; k >= 0; --k) {
    const double tk = k * h, yk = f.values[k];
    if (yk <= a) {
      fr.start = tprev - (tprev - tk) * (yprev - a) / (yprev - yk);
      break;
    }
    const double p = std::exp(-2.0 * (yprev - a) * (yk - a) / (sigma2 * (tprev - tk)));
    if (rng.uniform() < p) {
      fr.start = 0.5 * (tprev + tk);
      break;
    }
    tprev = tk;
    yprev = yk;
  }
  return fr;
}

// ---------------------------------------------------------------------------
// Excise / relocate
// ---------------------------------------------------------------------------

namespace detail {

// f restricted to [t0, t1], shifted down by `a` and re-gridded onto nn
// intervals. When the window is grid aligned this is an exact copy.
inline GridFunction window_resample(const GridFunction& f, double t0, double t1,
                                    double a, int nn) {
  GridFunction g;
  g.zeta = t1 - t0;
  g.values.assign(nn + 1, 0.0);
  const int N = f.intervals();
  const double x0 = t0 * static_cast<double>(N) / f.zeta;
  const double x1 = t1 * static_cast<double>(N) / f.zeta;
  const long k0 = std::llround(x0);
  const bool aligned = std::abs(x0 - static_cast<double>(k0)) < 1e-9 &&
                       std::abs(x1 - (static_cast<double>(k0) + nn)) < 1e-9 &&
                       k0 >= 0 && k0 + nn <= N;
  if (aligned) {
    for (int j = 0; j <= nn; ++j) g.values[j] = std::max(0.0, f.values[k0 + j] - a);
  } else {
    for (int j = 1; j < nn; ++j) {
      double t = t0 + (t1 - t0) * static_cast<double>(j) / nn;
      g.values[j] = std::max(0.0, f(t) - a);
    }
  }
  g.values.front() = 0.0;
  g.values.back() = 0.0;
  return g;
}

}  // namespace detail

struct ExciseResult {
  GridFunction hat;    // the straddling sub-excursion, based at (0,0)
  GridFunction check;  // f with that stretch removed and the gap closed
  StraddleFrame frame;
};

// Splits f at the excursion above a straddling s. Lifetimes add back to
// zeta(f). check is degenerate (lifetime 0) when the excursion is all of f.
inline ExciseResult excise(const GridFunction& f, double s, double a) {
  ExciseResult r;
  r.frame = straddle(f, s, a);
  const double h = f.spacing();
  const double dh = r.frame.duration();
  const double dc = f.zeta - dh;

  int nh = std::max(2, static_cast<int>(std::llround(dh / h)));
  r.hat = detail::window_resample(f, r.frame.start, r.frame.finish, r.frame.a, nh);

  if (dc <= 0.5 * h) {
    r.check = empty_grid_function();  // flagged degenerate
    r.check.zeta = 0.0;
  } else {
    int nc = std::max(1, static_cast<int>(std::llround(dc / h)));
    GridFunction g;
    g.zeta = dc;
    g.values.assign(nc + 1, 0.0);
    const int N = f.intervals();
    const double xs = r.frame.start * static_cast<double>(N) / f.zeta;
    const double xf = r.frame.finish * static_cast<double>(N) / f.zeta;
    const long ks = std::llround(xs);
    const long kf = std::llround(xf);
    const bool aligned = std::abs(xs - static_cast<double>(ks)) < 1e-9 &&
                         std::abs(xf - static_cast<double>(kf)) < 1e-9 &&
                         nc == N - (kf - ks);
    if (aligned) {
      for (int j = 0; j <= nc; ++j)
        g.values[j] = (j <= ks) ? f.values[j] : f.values[j + (kf - ks)];
    } else {
      for (int j = 1; j < nc; ++j) {
        double t = dc * static_cast<double>(j) / nc;
        g.values[j] = std::max(0.0, t <= r.frame.start ? f(t) : f(t + dh));
      }
    }
    g.values.front() = 0.0;
    g.values.back() = 0.0;
    r.check = std::move(g);
  }
  return r;
}

// Finish time of the excursion of f starting at time v above level f(v).
inline double excursion_finish(const GridFunction& f, double v) {
  if (f.degenerate()) throw std::domain_error("excursion_finish: degenerate path");
  if (!(v >= 0.0 && v < f.zeta))
    throw std::domain_error("excursion_finish: v out of range");
  const double a = f(v);
  const int N = f.intervals();
  const double h = f.spacing();
  // f must rise strictly above a immediately after v
  double x = v * static_cast<double>(N) / f.zeta;
  int j = static_cast<int>(std::floor(x)) + 1;
  if (j > N) j = N;
  double just_after = (static_cast<double>(j) * h + v) * 0.5;
  if (!(f(just_after) > a) && !(f.values[std::min(j, N)] > a))
    throw std::domain_error("relocate: v is not the start of an excursion");
  return detail::crossing_right(f, just_after, a);
}

// Moves the excursion starting at v so that it starts at w (at level f(w))
// and closes the gap it leaves behind. Lifetime is preserved. w must lie
// outside [v, finish]; w == v returns f unchanged.
inline GridFunction relocate(const GridFunction& f, double v, double w) {
  if (f.degenerate()) throw std::domain_error("relocate: degenerate path");
  if (w == v) return f;
  const double a = f(v);
  const double del = excursion_finish(f, v);
  const double d = del - v;
  if (w > v && w <= del)
    throw std::domain_error("relocate: w inside the relocated excursion");
  if (!(w >= 0.0 && w <= f.zeta)) throw std::domain_error("relocate: w out of range");

  const double fw = f(w);
  const int N = f.intervals();
  GridFunction out;
  out.zeta = f.zeta;
  out.values.assign(N + 1, 0.0);
  auto ehat = [&](double t) { return std::max(0.0, f(v + t) - a); };  // the moved excursion

  for (int k = 0; k <= N; ++k) {
    const double t = f.zeta * static_cast<double>(k) / N;
    double y;
    if (w > v) {
      if (t < v)
        y = f(t);
      else if (t < w - d)
        y = f(t + d);
      else if (t < w)
        y = ehat(t - (w - d)) + fw;
      else
        y = f(t);
    } else {
      if (t < w)
        y = f(t);
      else if (t < w + d)
        y = ehat(t - w) + fw;
      else if (t < del)
        y = f(t - d);
      else
        y = f(t);
    }
    out.values[k] = std::max(0.0, y);
  }
  out.values.front() = 0.0;
  out.values.back() = 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Local time, bridge <-> excursion
// ---------------------------------------------------------------------------

// Discrete local time at 0: interior grid zeros counted with a weight that
// matches the zero count of a walk bridge to its limiting local time. Walk
// paths with a common absolute step use that step as the unit (exactly 1 for
// an integer lattice path, so the arithmetic below stays exact); anything
// else falls back to sqrt(spacing), the unit-diffusivity convention. Either
// way the unit scales like the values under Brownian rescaling.
struct LocalTimeSplit {
  GridFunction L;          // nondecreasing, L(0) = 0
  double U = 0.0;          // last time local time is at most half its total
  int zero_count = 0;
  bool degenerate = false;  // no interior zeros
};

inline double local_time_unit(const GridFunction& f) {
  double step = 0.0;
  bool walk_like = true;
  for (std::size_t k = 0; k + 1 < f.values.size() && walk_like; ++k) {
    double d = std::abs(f.values[k + 1] - f.values[k]);
    if (d <= 0.0) continue;
    if (step == 0.0)
      step = d;
    else if (std::abs(d - step) > 1e-9 * std::max(1.0, step))
      walk_like = false;
  }
  if (walk_like && step > 0.0) return step;
  return std::sqrt(f.zeta / f.intervals());
}

inline LocalTimeSplit local_time_and_split(const GridFunction& f) {
  if (f.degenerate()) throw std::domain_error("local_time_and_split: degenerate path");
  LocalTimeSplit out;
  const int N = f.intervals();
  const double unit = local_time_unit(f);
  std::vector<int> zeros = f.interior_zero_indices();
  out.zero_count = static_cast<int>(zeros.size());
  out.L.zeta = f.zeta;
  out.L.values.assign(N + 1, 0.0);
  int z = 0;
  for (int k = 0; k <= N; ++k) {
    if (z < out.zero_count && zeros[z] == k) z++;
    out.L.values[k] = unit * z;
  }
  out.L.values.front() = 0.0;  // keep the container invariant
  if (out.zero_count == 0) {
    out.degenerate = true;
    out.U = f.zeta;
    return out;
  }
  const int m = out.zero_count / 2;  // zeros[m] is the (floor(Z/2)+1)-th zero
  out.U = f.zeta * static_cast<double>(zeros[m]) / N;
  return out;
}

struct BridgeToExcursion {
  GridFunction e;  // strictly positive on interior grid points
  double u = 0.0;  // split time fed back to the inverse transform
  bool degenerate = false;
};

// Adds a tent of local-time values over the zero set of f, producing an
// excursion-like path e with e = K + f, where K rises by one local-time unit
// per zero up to the half-local-time point and descends symmetrically after.
// The plateau between consecutive zeros equals the value at the nearer-to-u
// zero, which is what makes the inverse below exact on the grid.
inline BridgeToExcursion excursion_from_bridge(const GridFunction& f) {
  if (f.degenerate()) throw std::domain_error("excursion_from_bridge: degenerate path");
  BridgeToExcursion out;
  const int N = f.intervals();
  std::vector<int> zeros = f.interior_zero_indices();
  const int Z = static_cast<int>(zeros.size());
  if (Z == 0) {
    out.e = f;
    out.u = f.zeta;
    out.degenerate = true;
    return out;
  }
  const double unit = local_time_unit(f);
  const int m = Z / 2;  // index of the split zero
  out.u = f.zeta * static_cast<double>(zeros[m]) / N;

  // p[i] = K value at the (i+1)-th zero
  std::vector<double> p(Z);
  for (int i = 0; i < Z; ++i) p[i] = unit * std::min(i + 1, Z - i);

  out.e.zeta = f.zeta;
  out.e.values.assign(N + 1, 0.0);
  int below = 0;  // number of zeros with index < k
  for (int k = 1; k < N; ++k) {
    while (below < Z && zeros[below] < k) below++;
    double K;
    if (below < Z && zeros[below] == k) {
      K = p[below];
    } else if (k < zeros[m]) {
      K = p[below];  // next zero to the right
    } else {
      K = p[below - 1];  // previous zero to the left
    }
    out.e.values[k] = K + f.values[k];
  }
  return out;
}

// f(t) = e(t) - min of e over the window between t and u. Total: works for
// any nonnegative e with zero endpoints and any u in [0, zeta]; inverts
// excursion_from_bridge exactly on the grid.
inline GridFunction bridge_from_excursion(const GridFunction& e, double u) {
  if (e.degenerate()) throw std::domain_error("bridge_from_excursion: degenerate path");
  const int N = e.intervals();
  u = std::clamp(u, 0.0, e.zeta);
  const double x = u * static_cast<double>(N) / e.zeta;
  const int ku = std::min(static_cast<int>(std::floor(x)), N);  // last grid index <= u
  const double eu = e(u);

  std::vector<double> K(N + 1, 0.0);
  double run = eu;
  for (int k = ku; k >= 0; --k) {
    run = std::min(run, e.values[k]);
    K[k] = run;
  }
  run = eu;
  for (int k = ku + 1; k <= N; ++k) {
    run = std::min(run, e.values[k]);
    K[k] = run;
  }

  GridFunction f;
  f.zeta = e.zeta;
  f.values.assign(N + 1, 0.0);
  for (int k = 0; k <= N; ++k) f.values[k] = e.values[k] - K[k];
  f.values.front() = 0.0;
  f.values.back() = 0.0;
  return f;
}

// ---------------------------------------------------------------------------
// Scaling and insertion
// ---------------------------------------------------------------------------

// Brownian rescaling: lifetime times c, values times sqrt(c).
inline GridFunction brownian_scale(const GridFunction& f, double c) {
  if (!(c > 0.0)) throw std::domain_error("brownian_scale: c must be > 0");
  GridFunction g;
  g.zeta = c * f.zeta;
  g.values = f.values;
  const double s = std::sqrt(c);
  for (double& v : g.values) v *= s;
  return g;
}

// Splices e1 (rescaled to lifetime r) into e2 (rescaled to lifetime 1-r) at
// the fraction v of the latter's lifetime. The output has lifetime 1.
inline GridFunction insert_excursion(const GridFunction& e1, const GridFunction& e2,
                                     double v, double r) {
  if (std::abs(e1.zeta - 1.0) > 1e-9 || std::abs(e2.zeta - 1.0) > 1e-9)
    throw std::domain_error("insert_excursion: inputs must have lifetime 1");
  if (!(v >= 0.0 && v <= 1.0)) throw std::domain_error("insert_excursion: v in [0,1]");
  if (!(r > 0.0 && r <= 1.0)) throw std::domain_error("insert_excursion: r in (0,1]");
  const int N = std::max(e1.intervals(), e2.intervals());
  GridFunction out;
  out.zeta = 1.0;
  out.values.assign(N + 1, 0.0);
  if (r == 1.0) {
    for (int k = 0; k <= N; ++k) out.values[k] = e1(static_cast<double>(k) / N);
    out.values.front() = out.values.back() = 0.0;
    return out;
  }
  const double q = 1.0 - r;
  const double sq = std::sqrt(q), sr = std::sqrt(r);
  const double cut0 = q * v, cut1 = q * v + r;
  const double base = sq * e2(v);  // value of the host path at the splice point
  for (int k = 1; k < N; ++k) {
    const double t = static_cast<double>(k) / N;
    double y;
    if (t <= cut0)
      y = sq * e2(t / q);
    else if (t <= cut1)
      y = base + sr * e1((t - cut0) / r);
    else
      y = sq * e2((t - r) / q);
    out.values[k] = std::max(0.0, y);
  }
  return out;
}

// Where a mark u on the host path lands once the rescaled insert occupies
// [(1-r)v, (1-r)v + r].
inline double mark_after_insert(double u, double v, double r) {
  return (u <= v) ? (1.0 - r) * u : r + (1.0 - r) * u;
}

// Inverse of mark_after_insert for marks outside the inserted stretch.
inline double mark_before_insert(double w, double v, double r) {
  const double q = 1.0 - r;
  if (w < q * v) return w / q;
  if (w > q * v + r) return (w - r) / q;
  throw std::domain_error("mark_before_insert: mark inside the inserted stretch");
}

// Where a mark u moves when the straddling excursion in `frame` is excised
// and the gap is closed.
inline double mark_after_excise(double u, const StraddleFrame& frame) {
  if (u < frame.start) return u;
  if (u > frame.finish) return u - frame.duration();
  throw std::domain_error("mark_after_excise: mark inside the excised excursion");
}

// ---------------------------------------------------------------------------
// Integration against the excursion-start measure
// ---------------------------------------------------------------------------

// Uniform sampling of points (s, a) strictly under the graph of f.
class AreaSampler {
 public:
  explicit AreaSampler(const GridFunction& f) : f_(&f) {
    const int N = f.intervals();
    cum_.assign(N + 1, 0.0);
    for (int k = 0; k < N; ++k)
      cum_[k + 1] = cum_[k] + 0.5 * (f.values[k] + f.values[k + 1]) * f.spacing();
    if (!(cum_.back() > 0.0)) throw std::domain_error("AreaSampler: path has zero area");
  }

  double total_area() const { return cum_.back(); }

  std::pair<double, double> sample(RngStream& rng) const {
    const GridFunction& f = *f_;
    const int N = f.intervals();
    const double h = f.spacing();
    for (int guard = 0; guard < 1 << 20; ++guard) {
      const double target = rng.uniform() * cum_.back();
      int k = static_cast<int>(std::upper_bound(cum_.begin(), cum_.end(), target) -
                               cum_.begin()) - 1;
      k = std::clamp(k, 0, N - 1);
      const double y0 = f.values[k], y1 = f.values[k + 1];
      double frac;
      const double xi = rng.uniform();
      if (std::abs(y1 - y0) < 1e-14 * (y0 + y1 + 1.0)) {
        frac = xi;
      } else {
        // inverse CDF of the linear density on the cell
        frac = (std::sqrt(y0 * y0 + xi * (y1 * y1 - y0 * y0)) - y0) / (y1 - y0);
      }
      const double s = (static_cast<double>(k) + frac) * h;
      const double fs = y0 + frac * (y1 - y0);
      if (fs <= 0.0 || s <= 0.0 || s >= f.zeta) continue;
      const double a = rng.uniform() * fs;
      if (a < fs) return {s, a};
    }
    throw std::runtime_error("AreaSampler: sampling failed");
  }

 private:
  const GridFunction* f_;
  std::vector<double> cum_;
};

struct MfEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
  long reps = 0;
};

// Unbiased estimator of the integral of g against the excursion-start
// measure of f (the level integral of excursion-start point masses,
// equivalently area measure weighted by 1/duration). g sees the excised
// excursion, the remainder, and the start time; it must be
// duration-controlled for the integral to be finite.
template <typename G>
inline MfEstimate mf_integrate(const GridFunction& f, G&& g, long reps, RngStream& rng) {
  if (reps < 1) throw std::invalid_argument("mf_integrate: reps must be >= 1");
  AreaSampler sampler(f);
  const double area = sampler.total_area();
  double mean = 0.0, m2 = 0.0;
  for (long i = 0; i < reps; ++i) {
    auto [s, a] = sampler.sample(rng);
    ExciseResult ex = excise(f, s, a);
    const double dur = ex.frame.duration();
    const double x = dur > 0.0 ? area * g(ex.hat, ex.check, ex.frame.start) / dur : 0.0;
    const double delta = x - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (x - mean);
  }
  MfEstimate est;
  est.estimate = mean;
  est.reps = reps;
  est.stderr_ = reps > 1 ? std::sqrt(m2 / (static_cast<double>(reps) * (reps - 1))) : 0.0;
  return est;
}

// ---------------------------------------------------------------------------
// The relocation kernel
// ---------------------------------------------------------------------------

struct KappaDraw {
  GridFunction path;
  double v = 0.0;       // excursion start
  double w = 0.0;       // insertion time
  double cutoff = 0.0;  // minimum duration admitted to the draw
  long trials = 0;
};

// One draw from the normalized relocation kernel: an excursion start v is
// drawn proportionally to the excursion-start measure restricted to
// durations >= cutoff (the total mass is infinite without a cutoff), the
// insertion time w is uniform outside the excursion, and the excursion is
// moved to w. Default cutoff: two grid intervals.
inline KappaDraw kappa_plus_sample(const GridFunction& f, RngStream& rng,
                                   double cutoff = -1.0) {
  if (f.degenerate()) throw std::domain_error("kappa_plus_sample: degenerate path");
  AreaSampler sampler(f);
  if (cutoff <= 0.0) cutoff = 2.0 * f.spacing();
  KappaDraw draw;
  draw.cutoff = cutoff;
  for (long trial = 1; trial <= (1l << 26); ++trial) {
    auto [s, a] = sampler.sample(rng);
    StraddleFrame fr = straddle(f, s, a);
    const double dur = fr.duration();
    if (dur < cutoff) continue;
    if (rng.uniform() * dur > cutoff) continue;  // thin with weight cutoff/duration
    draw.trials = trial;
    draw.v = fr.start;
    const double open = f.zeta - dur;
    if (open <= 0.0) {  // the excursion is the whole path; only the identity move exists
      draw.w = fr.start;
      draw.path = f;
      return draw;
    }
    double w;
    do {
      double x = rng.uniform() * open;
      w = x < fr.start ? x : x + dur;
    } while (w >= fr.start && w <= fr.finish);
    draw.w = w;
    draw.path = relocate(f, fr.start, w);
    return draw;
  }
  throw std::runtime_error("kappa_plus_sample: rejection sampling failed");
}

}  // namespace amap
