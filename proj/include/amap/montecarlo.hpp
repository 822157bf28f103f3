#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "amap/excursion.hpp"
#include "amap/grid_function.hpp"
#include "amap/lattice_path.hpp"
#include "amap/mapping.hpp"
#include "amap/rng.hpp"

namespace amap {

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct EstimatorReport {
  std::string name;
  double estimate = 0.0;
  double stderr_ = 0.0;
  long reps = 0;
  std::optional<double> cutoff;
  std::optional<double> target;
  std::optional<double> z_score;

  void set_target(double t) {
    target = t;
    if (stderr_ > 0.0) z_score = (estimate - t) / stderr_;
  }
};

// ---------------------------------------------------------------------------
// Closed forms
// ---------------------------------------------------------------------------

// Tail of the excised-excursion length under the bridge path measure:
// (sqrt(1/t - 1) + arcsin(sqrt t) - pi/2) / sqrt(2 pi).
inline double shifted_excursion_tail(double t) {
  using std::numbers::pi;
  return (std::sqrt(1.0 / t - 1.0) + std::asin(std::sqrt(t)) - pi / 2.0) /
         std::sqrt(2.0 * pi);
}

// Second moment of that length: sqrt(pi) / (16 sqrt 2).
inline double shifted_excursion_zeta_sq() {
  using std::numbers::pi;
  return std::sqrt(pi) / (16.0 * std::sqrt(2.0));
}

// Tail of the excised-excursion maximum: sum_n integral_{2nx}^inf e^{-z^2/2} dz.
inline double shifted_excursion_max_tail(double x) {
  using std::numbers::pi;
  double s = 0.0;
  for (int n = 1; n < 400; ++n) {
    double term = std::sqrt(pi / 2.0) * std::erfc(std::sqrt(2.0) * n * x);
    s += term;
    if (term < 1e-17 * (1.0 + s)) break;
  }
  return s;
}

// Second moment of that maximum: pi^(5/2) / (24 sqrt 2).
inline double shifted_excursion_max_sq() {
  using std::numbers::pi;
  return std::pow(pi, 2.5) / (24.0 * std::sqrt(2.0));
}

// Maximum law of the standard excursion: P(max > y) = 2 sum (4n^2y^2-1) e^{-2n^2y^2}.
inline double excursion_max_tail(double y) {
  double s = 0.0;
  for (int n = 1; n < 400; ++n) {
    double t = (4.0 * n * n * y * y - 1.0) * std::exp(-2.0 * n * n * y * y);
    s += t;
    if (n > 3 && std::abs(t) < 1e-18) break;
  }
  return 2.0 * s;
}

// r-density integrals behind the disintegration identity, as closed forms.
inline double disintegration_main_integral(double t) {  // int_t^1 dr / sqrt((1-r) r^3)
  return 2.0 * std::sqrt((1.0 - t) / t);
}
inline double disintegration_uniform_integral(double t) {  // int_t^1 dr sqrt((1-r)/r^3)
  using std::numbers::pi;
  return 2.0 * std::sqrt((1.0 - t) / t) - pi + 2.0 * std::asin(std::sqrt(t));
}

// Adaptive Simpson; used to cross-check the closed forms above.
template <typename F>
inline double integrate_adaptive(F&& fn, double a, double b, double tol = 1e-11,
                                 int depth = 28) {
  auto simpson = [&](double lo, double hi) {
    return (hi - lo) / 6.0 * (fn(lo) + 4.0 * fn(0.5 * (lo + hi)) + fn(hi));
  };
  auto rec = [&](auto&& self, double lo, double hi, double whole, double eps,
                 int d) -> double {
    double mid = 0.5 * (lo + hi);
    double left = simpson(lo, mid), right = simpson(mid, hi);
    if (d <= 0 || std::abs(left + right - whole) < 15.0 * eps)
      return left + right + (left + right - whole) / 15.0;
    return self(self, lo, mid, left, eps / 2.0, d - 1) +
           self(self, mid, hi, right, eps / 2.0, d - 1);
  };
  return rec(rec, a, b, simpson(a, b), tol, depth);
}

// Asymptotic Kolmogorov-Smirnov critical value at level alpha.
inline double ks_critical(double alpha, long m) {
  // solve 2 sum (-1)^{k-1} exp(-2 k^2 l^2) = alpha
  double lo = 0.3, hi = 3.5;
  auto q = [](double l) {
    double s = 0.0;
    for (int k = 1; k < 200; ++k) {
      double t = std::exp(-2.0 * k * k * l * l);
      s += (k % 2 ? t : -t);
      if (t < 1e-18) break;
    }
    return 2.0 * s;
  };
  for (int it = 0; it < 80; ++it) {
    double mid = 0.5 * (lo + hi);
    (q(mid) > alpha ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi) / std::sqrt(static_cast<double>(m));
}

// CDF of |N(0,1)|.
inline double half_normal_cdf(double x) {
  return x <= 0.0 ? 0.0 : std::erf(x / std::sqrt(2.0));
}

// CDF of twice the standard excursion at time 1/2 (Maxwell with unit scale).
inline double doubled_excursion_mid_cdf(double x) {
  using std::numbers::pi;
  if (x <= 0.0) return 0.0;
  return std::erf(x / std::sqrt(2.0)) - std::sqrt(2.0 / pi) * x * std::exp(-0.5 * x * x);
}

template <typename Cdf>
inline double ks_statistic(std::vector<double> xs, Cdf&& cdf) {
  std::sort(xs.begin(), xs.end());
  const double m = static_cast<double>(xs.size());
  double ks = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double F = cdf(xs[i]);
    ks = std::max(ks, std::max(std::abs((i + 1) / m - F), std::abs(i / m - F)));
  }
  return ks;
}

// First-order deficit of a maximum observed on a spacing-h grid relative to
// the underlying rough path: about 0.5826 sqrt(h) per extreme for a
// unit-diffusivity path.
inline constexpr double kDiscreteExtremeGap = 0.5826;

// ---------------------------------------------------------------------------
// Samplers
// ---------------------------------------------------------------------------

// Brownian bridge on an N-grid over [0,1] (exact in law at the grid points).
inline GridFunction sample_signed_bridge(int N, RngStream& rng) {
  if (N < 2) throw std::invalid_argument("sample bridge: N must be >= 2");
  std::vector<double> w(N + 1, 0.0);
  const double sd = std::sqrt(1.0 / N);
  for (int k = 1; k <= N; ++k) w[k] = w[k - 1] + sd * rng.normal();
  GridFunction g;
  g.zeta = 1.0;
  g.values.assign(N + 1, 0.0);
  for (int k = 1; k < N; ++k)
    g.values[k] = w[k] - w[N] * (static_cast<double>(k) / N);
  return g;  // signed; endpoints exactly 0
}

// Standard reflected Brownian bridge surrogate: |bridge| at the grid points.
inline GridFunction sample_reflected_bridge(int N, RngStream& rng) {
  GridFunction g = sample_signed_bridge(N, rng);
  for (double& v : g.values) v = std::abs(v);
  return g;
}

// Standard excursion surrogate: cyclic shift of a bridge at its minimum.
inline GridFunction sample_excursion(int N, RngStream& rng) {
  GridFunction b = sample_signed_bridge(N, rng);
  int kmin = 0;
  for (int k = 1; k <= N; ++k)
    if (b.values[k] < b.values[kmin]) kmin = k;
  GridFunction e;
  e.zeta = 1.0;
  e.values.assign(N + 1, 0.0);
  const double m = b.values[kmin];
  for (int j = 1; j < N; ++j) {
    int k = kmin + j;
    if (k >= N) k -= N;  // b(0) = b(N), so wrapping is seamless
    e.values[j] = b.values[k] - m;
  }
  return e;
}

// |simple random walk bridge| with 2n steps: the lattice reflected bridge.
inline LatticePath sample_lattice_reflected_bridge(int n, RngStream& rng) {
  if (n < 1) throw std::invalid_argument("lattice bridge: n must be >= 1");
  std::vector<int> steps(2 * n, 1);
  for (int k = 0; k < n; ++k) steps[k] = -1;
  for (int k = 2 * n - 1; k > 0; --k)
    std::swap(steps[k], steps[rng.uniform_int(k + 1)]);
  LatticePath p;
  p.n = n;
  p.values.assign(2 * n + 1, 0);
  int v = 0;
  for (int k = 0; k < 2 * n; ++k) {
    v += steps[k];
    p.values[k + 1] = v;
  }
  for (int& x : p.values) x = std::abs(x);
  return p;
}

// ---------------------------------------------------------------------------
// Deterministic chunked Monte Carlo
// ---------------------------------------------------------------------------

inline int env_threads() {
  if (const char* s = std::getenv("AMAP_THREADS")) {
    int v = std::atoi(s);
    if (v >= 1) return v;
  }
  return 1;
}

// Splits reps over a fixed number of substreams and reduces in stream order,
// so the result is byte-identical for any thread count.
template <typename SampleVec>
inline std::vector<EstimatorReport> chunked_estimate(
    const std::vector<std::string>& names, SampleVec&& sample, long reps,
    const RngStream& base, int threads = env_threads()) {
  const int dim = static_cast<int>(names.size());
  const int chunks = static_cast<int>(std::min<long>(64, std::max<long>(1, reps)));
  std::vector<std::vector<double>> sums(chunks, std::vector<double>(dim, 0.0));
  std::vector<std::vector<double>> sqs(chunks, std::vector<double>(dim, 0.0));
  std::vector<long> counts(chunks, 0);

  std::atomic<int> next{0};
  auto worker = [&]() {
    std::vector<double> x(dim, 0.0);
    while (true) {
      int c = next.fetch_add(1);
      if (c >= chunks) break;
      long cnt = reps / chunks + (c < reps % chunks ? 1 : 0);
      RngStream rs = base.substream(1000 + c);
      for (long i = 0; i < cnt; ++i) {
        sample(rs, x);
        for (int d = 0; d < dim; ++d) {
          sums[c][d] += x[d];
          sqs[c][d] += x[d] * x[d];
        }
      }
      counts[c] = cnt;
    }
  };
  const int nt = std::clamp(threads, 1, chunks);
  if (nt == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<EstimatorReport> out(dim);
  for (int d = 0; d < dim; ++d) {
    double sum = 0.0, sq = 0.0;
    long n = 0;
    for (int c = 0; c < chunks; ++c) {  // fixed order
      sum += sums[c][d];
      sq += sqs[c][d];
      n += counts[c];
    }
    out[d].name = names[d];
    out[d].reps = n;
    out[d].estimate = sum / static_cast<double>(n);
    if (n > 1) {
      double var = (sq - sum * sum / static_cast<double>(n)) / static_cast<double>(n - 1);
      out[d].stderr_ = std::sqrt(std::max(0.0, var) / static_cast<double>(n));
    }
  }
  return out;
}

// Collects one scalar per rep, concatenated in stream order.
template <typename SampleOne>
inline std::vector<double> chunked_collect(SampleOne&& sample, long reps,
                                           const RngStream& base,
                                           int threads = env_threads()) {
  const int chunks = static_cast<int>(std::min<long>(64, std::max<long>(1, reps)));
  std::vector<std::vector<double>> bufs(chunks);
  std::atomic<int> next{0};
  auto worker = [&]() {
    while (true) {
      int c = next.fetch_add(1);
      if (c >= chunks) break;
      long cnt = reps / chunks + (c < reps % chunks ? 1 : 0);
      RngStream rs = base.substream(1000 + c);
      bufs[c].reserve(cnt);
      for (long i = 0; i < cnt; ++i) bufs[c].push_back(sample(rs));
    }
  };
  const int nt = std::clamp(threads, 1, chunks);
  if (nt == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  std::vector<double> out;
  out.reserve(reps);
  for (auto& b : bufs) out.insert(out.end(), b.begin(), b.end());
  return out;
}

// ---------------------------------------------------------------------------
// One importance draw against the excursion-start measure
// ---------------------------------------------------------------------------

struct MfDraw {
  double area = 0.0;
  StraddleFrame frame;
  double exc_max = 0.0;  // maximum of the straddling excursion above its base level
};

namespace detail {
inline MfDraw finish_draw(const GridFunction& f, double area, StraddleFrame fr) {
  MfDraw d;
  d.area = area;
  d.frame = fr;
  const int N = f.intervals();
  const double scale = static_cast<double>(N) / f.zeta;
  int kl = static_cast<int>(std::floor(d.frame.start * scale)) + 1;
  int kr = static_cast<int>(std::ceil(d.frame.finish * scale)) - 1;
  double mx = d.frame.a;
  for (int k = std::max(kl, 0); k <= std::min(kr, N); ++k)
    mx = std::max(mx, f.values[k]);
  d.exc_max = mx - d.frame.a;
  return d;
}
}  // namespace detail

// One importance draw with the interpolant's (deterministic) frame.
inline MfDraw mf_draw(const GridFunction& f, RngStream& rng) {
  AreaSampler sampler(f);
  auto [s, a] = sampler.sample(rng);
  return detail::finish_draw(f, sampler.total_area(), straddle(f, s, a));
}

// One importance draw with crossing-refined endpoints (rough-path law).
inline MfDraw mf_draw_refined(const GridFunction& f, RngStream& rng) {
  AreaSampler sampler(f);
  auto [s, a] = sampler.sample(rng);
  return detail::finish_draw(f, sampler.total_area(), straddle_refined(f, s, a, rng));
}

// ---------------------------------------------------------------------------
// Verification suites
// ---------------------------------------------------------------------------

// Tails and moments of the excursion excised from a reflected bridge,
// against their closed forms.
inline std::vector<EstimatorReport> verify_shifted_excursion(
    long reps, int grid, const RngStream& base, int threads = env_threads()) {
  const std::vector<std::string> names = {
      "shifted-excursion-tail-0.2", "shifted-excursion-tail-0.5",
      "shifted-excursion-tail-0.8", "shifted-excursion-zeta-sq",
      "shifted-excursion-max-tail-0.5", "shifted-excursion-max-tail-1.0",
      "shifted-excursion-max-sq"};
  auto sample = [grid](RngStream& rng, std::vector<double>& x) {
    GridFunction f = sample_reflected_bridge(grid, rng);
    MfDraw d = mf_draw_refined(f, rng);
    const double dur = d.frame.duration();
    const double w = d.area / dur;
    // grid maxima sit below the path maximum by the usual sqrt-spacing gap
    const double mx = d.exc_max + kDiscreteExtremeGap / std::sqrt(static_cast<double>(grid));
    x[0] = w * (dur > 0.2 ? 1.0 : 0.0);
    x[1] = w * (dur > 0.5 ? 1.0 : 0.0);
    x[2] = w * (dur > 0.8 ? 1.0 : 0.0);
    x[3] = d.area * dur;  // weight cancels one 1/dur
    x[4] = w * (mx > 0.5 ? 1.0 : 0.0);
    x[5] = w * (mx > 1.0 ? 1.0 : 0.0);
    x[6] = w * mx * mx;
  };
  auto out = chunked_estimate(names, sample, reps, base, threads);
  out[0].set_target(shifted_excursion_tail(0.2));
  out[1].set_target(shifted_excursion_tail(0.5));
  out[2].set_target(shifted_excursion_tail(0.8));
  out[3].set_target(shifted_excursion_zeta_sq());
  out[4].set_target(shifted_excursion_max_tail(0.5));
  out[5].set_target(shifted_excursion_max_tail(1.0));
  out[6].set_target(shifted_excursion_max_sq());
  return out;
}

// Both sides of the excised-excursion disintegration identity with the
// duration-cutoff functional, and its uniformly marked variant (the marked
// side carries the extra (1-r) factor from closing the gap).
inline std::vector<EstimatorReport> verify_disintegration(
    long reps, int grid, const RngStream& base, double cutoff = 0.2,
    int threads = env_threads()) {
  using std::numbers::pi;
  const std::vector<std::string> names = {"disintegration-main",
                                          "disintegration-uniform-mark"};
  auto sample = [grid, cutoff](RngStream& rng, std::vector<double>& x) {
    GridFunction e = sample_excursion(grid, rng);
    double u = rng.uniform();
    MfDraw d = mf_draw_refined(e, rng);
    const double dur = d.frame.duration();
    const double w = d.area / dur;
    x[0] = w * (dur > cutoff ? 1.0 : 0.0);
    bool outside = u < d.frame.start || u > d.frame.finish;
    x[1] = w * ((dur > cutoff && outside) ? 1.0 : 0.0);
  };
  auto out = chunked_estimate(names, sample, reps, base, threads);
  const double c = 1.0 / (2.0 * std::sqrt(2.0 * pi));
  // quadrature for the r-integrals (substituted to kill the endpoint
  // singularity), cross-checked against the closed forms
  const double ub = std::sqrt(1.0 - cutoff);
  double main_quad =
      integrate_adaptive([](double u) { return 2.0 / std::pow(1.0 - u * u, 1.5); }, 0.0, ub);
  double unif_quad = integrate_adaptive(
      [](double u) { return 2.0 * u * u / std::pow(1.0 - u * u, 1.5); }, 0.0, ub);
  out[0].set_target(c * main_quad);
  out[1].set_target(c * unif_quad);
  out[0].cutoff = cutoff;
  out[1].cutoff = cutoff;
  return out;
}

// Monte Carlo value of the quadratic-comparison bound 8 E[max^2] + 2 E[len^2]
// for the excised excursion, plus its drift under grid doubling.
inline std::vector<EstimatorReport> verify_jump_square(
    long reps, int grid, const RngStream& base, int threads = env_threads()) {
  auto run_at = [&](int N, std::uint64_t salt) {
    auto sample = [N](RngStream& rng, std::vector<double>& x) {
      GridFunction f = sample_reflected_bridge(N, rng);
      MfDraw d = mf_draw_refined(f, rng);
      const double dur = d.frame.duration();
      const double mx = d.exc_max + kDiscreteExtremeGap / std::sqrt(static_cast<double>(N));
      x[0] = 8.0 * d.area * mx * mx / dur + 2.0 * d.area * dur;
    };
    return chunked_estimate({"jump-square-bound"}, sample, reps,
                            base.substream(salt), threads)[0];
  };
  EstimatorReport at_n = run_at(grid, 11);
  EstimatorReport at_2n = run_at(2 * grid, 22);
  at_n.set_target(8.0 * shifted_excursion_max_sq() + 2.0 * shifted_excursion_zeta_sq());

  EstimatorReport drift;
  drift.name = "jump-square-grid-drift";
  drift.estimate = at_2n.estimate - at_n.estimate;
  drift.stderr_ = std::sqrt(at_n.stderr_ * at_n.stderr_ + at_2n.stderr_ * at_2n.stderr_);
  drift.reps = reps;
  drift.set_target(0.0);
  return {at_n, drift};
}

// Kolmogorov-Smirnov distances for the midpoint marginal of rescaled
// encodings of uniform acyclic mappings.
//
// The first row tests the half-normal marginal of twice a reflected bridge.
// A uniform acyclic mapping is, however, one giant tree plus O(1) small
// components (the adjoined root of the tree bijection has expected degree 2),
// so the encoded path actually approaches twice a standard excursion and the
// half-normal test statistic converges to a positive constant (about 0.484).
// The second row tests the doubled-excursion marginal, which the sampler
// does satisfy; it is reported alongside as the matched-law diagnostic.
inline std::vector<EstimatorReport> chain_convergence(int n, long samples,
                                                      const RngStream& base,
                                                      int threads = env_threads()) {
  if (n < 2) throw std::invalid_argument("chain_convergence: n must be >= 2");
  auto one = [n](RngStream& rng) {
    AcyclicMapping m = sample_uniform_acyclic(n, rng);
    LatticePath p = encode(m);
    return static_cast<double>(p.values[n]) / std::sqrt(static_cast<double>(n));
  };
  std::vector<double> xs = chunked_collect(one, samples, base, threads);
  const double crit = ks_critical(0.001, samples);

  EstimatorReport bridge;
  bridge.name = "chain-convergence-ks-half-normal";
  bridge.reps = samples;
  bridge.estimate = ks_statistic(xs, half_normal_cdf);
  bridge.stderr_ = 1.0 / std::sqrt(static_cast<double>(samples));
  bridge.target = crit;
  bridge.z_score = bridge.estimate / crit;

  EstimatorReport excursion;
  excursion.name = "chain-convergence-ks-doubled-excursion";
  excursion.reps = samples;
  excursion.estimate = ks_statistic(xs, doubled_excursion_mid_cdf);
  excursion.stderr_ = 1.0 / std::sqrt(static_cast<double>(samples));
  excursion.target = crit;
  excursion.z_score = excursion.estimate / crit;
  return {bridge, excursion};
}

}  // namespace amap
