#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "amap/mapping.hpp"
#include "amap/rational.hpp"
#include "amap/rng.hpp"

namespace amap {

// Vertices whose forward orbit passes through x: { w : phi^k(w) = x }.
// Always contains x itself.
inline std::vector<int> subtree_of(const AcyclicMapping& m, int x) {
  if (x < 1 || x > m.n()) throw std::invalid_argument("subtree_of: vertex out of range");
  std::vector<std::vector<int>> children(m.n() + 1);
  for (int v = 1; v <= m.n(); ++v)
    if (m(v) != v) children[m(v)].push_back(v);
  std::vector<int> out, stack{x};
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    out.push_back(u);
    for (int c : children[u]) stack.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Deterministic single move: re-point phi(i) at j. The caller must pick j
// from {i} union ([n] \ subtree_of(m, i)); anything else would create a
// cycle and is rejected.
inline AcyclicMapping step_to(const AcyclicMapping& m, int i, int j) {
  Mapping next = m.mapping();
  next.image[i - 1] = j;
  return AcyclicMapping::checked(std::move(next));
}

// One step of the chain: a uniform vertex i has its image resampled
// uniformly over {i} union ([n] \ subtree_of(m, i)). The subtree rooted at i
// is detached and either becomes its own component (j = i) or hangs below j.
inline AcyclicMapping chain_step(const AcyclicMapping& m, RngStream& rng) {
  const int n = m.n();
  const int i = 1 + static_cast<int>(rng.uniform_int(n));
  std::vector<int> sub = subtree_of(m, i);
  std::vector<char> in_sub(n + 1, 0);
  for (int v : sub) in_sub[v] = 1;
  const int options = n - static_cast<int>(sub.size()) + 1;
  int r = static_cast<int>(rng.uniform_int(options));
  int j = i;  // r == 0: self-loop
  if (r > 0) {
    for (int v = 1; v <= n; ++v) {
      if (in_sub[v]) continue;
      if (--r == 0) {
        j = v;
        break;
      }
    }
  }
  Mapping next = m.mapping();
  next.image[i - 1] = j;
  return AcyclicMapping::unchecked(std::move(next));
}

// Exact one-step kernel over enumerate_acyclic(n), in exact rationals.
// Row-stochastic by construction; symmetry is equivalent to reversibility
// with respect to the uniform law.
struct TransitionMatrix {
  std::vector<AcyclicMapping> states;        // lexicographic
  std::vector<std::vector<Rational>> probs;  // probs[a][b] = P(a -> b)

  int index_of(const AcyclicMapping& m) const {
    for (std::size_t k = 0; k < states.size(); ++k)
      if (states[k] == m) return static_cast<int>(k);
    return -1;
  }

  bool symmetric() const {
    for (std::size_t a = 0; a < states.size(); ++a)
      for (std::size_t b = a + 1; b < states.size(); ++b)
        if (probs[a][b] != probs[b][a]) return false;
    return true;
  }
};

inline TransitionMatrix transition_matrix(int n) {
  if (n < 1 || n > 5)
    throw std::invalid_argument("transition_matrix: n must be in [1,5]");
  TransitionMatrix tm;
  tm.states = enumerate_acyclic(n);
  const std::size_t S = tm.states.size();
  std::map<std::vector<int>, int> index;
  for (std::size_t k = 0; k < S; ++k) index[tm.states[k].image()] = static_cast<int>(k);
  tm.probs.assign(S, std::vector<Rational>(S, Rational(0)));

  for (std::size_t a = 0; a < S; ++a) {
    const AcyclicMapping& m = tm.states[a];
    for (int i = 1; i <= n; ++i) {
      std::vector<int> sub = subtree_of(m, i);
      std::vector<char> in_sub(n + 1, 0);
      for (int v : sub) in_sub[v] = 1;
      const int options = n - static_cast<int>(sub.size()) + 1;
      const Rational p(1, static_cast<std::int64_t>(n) * options);
      for (int j = 1; j <= n; ++j) {
        if (j != i && in_sub[j]) continue;
        std::vector<int> img = m.image();
        img[i - 1] = j;
        tm.probs[a][index.at(img)] += p;
      }
    }
  }
  return tm;
}

// Named scalar observable of the current state.
struct Observer {
  std::string name;
  std::function<double(const AcyclicMapping&)> fn;
};

inline Observer fixed_points_observer() {
  return {"fixed-points", [](const AcyclicMapping& m) {
            return static_cast<double>(fixed_point_count(m));
          }};
}

inline Observer height_observer() {
  return {"height", [](const AcyclicMapping& m) {
            const int n = m.n();
            std::vector<int> depth(n + 1, -1);
            int best = 0;
            for (int v = 1; v <= n; ++v) {
              // walk to the root, then unwind
              std::vector<int> path;
              int x = v;
              while (depth[x] < 0 && m(x) != x) {
                path.push_back(x);
                x = m(x);
              }
              int d = depth[x] >= 0 ? depth[x] : 0;
              depth[x] = d;
              for (auto it = path.rbegin(); it != path.rend(); ++it) depth[*it] = ++d;
              best = std::max(best, d);
            }
            return static_cast<double>(best);
          }};
}

struct RunSummary {
  long steps = 0;
  long stride = 1;
  std::vector<std::string> names;
  std::vector<long> recorded_steps;
  std::vector<std::vector<double>> rows;  // rows[k][o] = observer o at recorded step k
  AcyclicMapping final_state;
};

// Applies chain_step repeatedly. Observations are taken at step 0 and then
// after every `stride` steps, so the series has steps/stride + 1 entries.
// Deterministic given the stream.
inline RunSummary run_chain(const AcyclicMapping& m0, long steps, RngStream& rng,
                            const std::vector<Observer>& observers, long stride = 1) {
  if (steps < 0) throw std::invalid_argument("run_chain: steps must be >= 0");
  if (stride < 1) throw std::invalid_argument("run_chain: stride must be >= 1");
  RunSummary s{steps, stride, {}, {}, {}, m0};
  for (const auto& o : observers) s.names.push_back(o.name);
  AcyclicMapping cur = m0;
  auto record = [&](long step) {
    std::vector<double> row;
    row.reserve(observers.size());
    for (const auto& o : observers) row.push_back(o.fn(cur));
    s.recorded_steps.push_back(step);
    s.rows.push_back(std::move(row));
  };
  record(0);
  for (long t = 1; t <= steps; ++t) {
    cur = chain_step(cur, rng);
    if (t % stride == 0) record(t);
  }
  s.final_state = cur;
  return s;
}

}  // namespace amap
