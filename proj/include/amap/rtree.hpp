#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "amap/grid_function.hpp"

namespace amap {

// Finite rooted tree with positive edge lengths and a probability mass per
// vertex. Vertex 0 is the root; parent[0] == -1.
struct RootedWeightedTree {
  std::vector<int> parent;
  std::vector<double> edge_length;  // edge_length[v] = length of (v, parent[v]); [0] unused
  std::vector<double> mass;

  int size() const { return static_cast<int>(parent.size()); }

  std::vector<std::vector<int>> children() const {
    std::vector<std::vector<int>> ch(size());
    for (int v = 1; v < size(); ++v) ch[parent[v]].push_back(v);
    return ch;
  }
};

inline void validate_tree(const RootedWeightedTree& t) {
  const int V = t.size();
  if (V < 1) throw std::invalid_argument("tree: empty");
  if (t.parent[0] != -1) throw std::invalid_argument("tree: vertex 0 must be the root");
  if (static_cast<int>(t.edge_length.size()) != V ||
      static_cast<int>(t.mass.size()) != V)
    throw std::invalid_argument("tree: field lengths disagree");
  double total = 0.0;
  for (int v = 0; v < V; ++v) {
    if (v > 0) {
      if (t.parent[v] < 0 || t.parent[v] >= V || t.parent[v] == v)
        throw std::invalid_argument("tree: bad parent index");
      if (!(t.edge_length[v] > 0.0))
        throw std::invalid_argument("tree: edge lengths must be > 0");
    }
    if (t.mass[v] < 0.0) throw std::invalid_argument("tree: masses must be >= 0");
    total += t.mass[v];
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("tree: masses must sum to 1");
  std::vector<char> seen(V, 0);
  seen[0] = 1;
  auto ch = t.children();
  std::vector<int> stack{0};
  int cnt = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int c : ch[u])
      if (!seen[c]) {
        seen[c] = 1;
        cnt++;
        stack.push_back(c);
      }
  }
  if (cnt != V) throw std::invalid_argument("tree: not connected");
}

inline std::vector<double> depths_of(const RootedWeightedTree& t) {
  const int V = t.size();
  std::vector<double> d(V, 0.0);
  auto ch = t.children();
  std::vector<int> stack{0};
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int c : ch[u]) {
      d[c] = d[u] + t.edge_length[c];
      stack.push_back(c);
    }
  }
  return d;
}

inline std::vector<std::vector<double>> distance_matrix(const RootedWeightedTree& t) {
  const int V = t.size();
  std::vector<double> depth = depths_of(t);
  std::vector<int> level(V, 0);
  for (int v = 1; v < V; ++v) {
    int x = v, l = 0;
    while (x != 0) {
      x = t.parent[x];
      l++;
    }
    level[v] = l;
  }
  std::vector<std::vector<double>> D(V, std::vector<double>(V, 0.0));
  for (int a = 0; a < V; ++a)
    for (int b = a + 1; b < V; ++b) {
      int x = a, y = b;
      while (level[x] > level[y]) x = t.parent[x];
      while (level[y] > level[x]) y = t.parent[y];
      while (x != y) {
        x = t.parent[x];
        y = t.parent[y];
      }
      D[a][b] = D[b][a] = depth[a] + depth[b] - 2.0 * depth[x];
    }
  return D;
}

// Sum of all edge lengths: the total mass of the skeleton length measure.
inline double length_measure_total(const RootedWeightedTree& t) {
  double s = 0.0;
  for (int v = 1; v < t.size(); ++v) s += t.edge_length[v];
  return s;
}

// Height of the tree above the root.
inline double tree_height(const RootedWeightedTree& t) {
  auto d = depths_of(t);
  return *std::max_element(d.begin(), d.end());
}

// ---------------------------------------------------------------------------
// Quotient tree of a path
// ---------------------------------------------------------------------------

struct PathTree {
  RootedWeightedTree tree;
  std::vector<int> grid_class;  // vertex class of each grid point
};

// Quotient of the grid points of f under "equal value with no smaller value
// in between", carrying the path metric f(u1) - 2 min + f(u2). The root is
// the class of time 0 and vertex masses push forward the normalized time
// measure. For an encoded lattice path this is exactly the mapping's forest
// joined at an adjoined root.
inline PathTree tree_from_path(const GridFunction& f) {
  PathTree out;
  auto& T = out.tree;
  if (f.degenerate()) {
    T.parent = {-1};
    T.edge_length = {0.0};
    T.mass = {1.0};
    out.grid_class = {0};
    return out;
  }
  const int N = f.intervals();
  T.parent.push_back(-1);
  T.edge_length.push_back(0.0);
  T.mass.push_back(0.0);
  out.grid_class.assign(N + 1, 0);

  struct Open {
    double value;
    int vertex;
  };
  std::vector<Open> stack{{0.0, 0}};

  for (int k = 0; k <= N; ++k) {
    const double val = f.values[k];
    int last_popped = -1;
    double last_value = 0.0;
    while (stack.back().value > val) {
      last_popped = stack.back().vertex;
      last_value = stack.back().value;
      stack.pop_back();
    }
    int cur;
    if (stack.back().value == val) {
      cur = stack.back().vertex;
    } else {
      cur = T.size();
      T.parent.push_back(stack.back().vertex);
      T.edge_length.push_back(val - stack.back().value);
      T.mass.push_back(0.0);
      stack.push_back({val, cur});
    }
    if (last_popped >= 0 && last_popped != cur) {
      T.parent[last_popped] = cur;
      T.edge_length[last_popped] = last_value - val;
    }
    out.grid_class[k] = cur;
    T.mass[cur] += ((k == 0 || k == N) ? 0.5 : 1.0) / static_cast<double>(N);
  }
  double total = std::accumulate(T.mass.begin(), T.mass.end(), 0.0);
  for (double& m : T.mass) m /= total;
  return out;
}

// ---------------------------------------------------------------------------
// Trimming
// ---------------------------------------------------------------------------

namespace detail {

struct TrimDepths {
  std::vector<double> down;  // deepest descent below each vertex
  std::vector<double> away;  // for v>0: deepest direction from parent(v) away from v
};

inline TrimDepths trim_depths(const RootedWeightedTree& t) {
  const int V = t.size();
  TrimDepths d;
  d.down.assign(V, 0.0);
  d.away.assign(V, 0.0);
  auto ch = t.children();
  std::vector<double> depth = depths_of(t);
  std::vector<int> order(V);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return depth[a] > depth[b]; });
  for (int v : order)
    for (int c : ch[v]) d.down[v] = std::max(d.down[v], t.edge_length[c] + d.down[c]);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return depth[a] < depth[b]; });
  std::vector<double> up(V, 0.0);  // deepest direction from v through its parent
  for (int p : order) {
    double b1 = -1.0, b2 = -1.0;
    for (int c : ch[p]) {
      double x = t.edge_length[c] + d.down[c];
      if (x > b1) {
        b2 = b1;
        b1 = x;
      } else if (x > b2) {
        b2 = x;
      }
    }
    for (int c : ch[p]) {
      double x = t.edge_length[c] + d.down[c];
      double other = (x == b1) ? b2 : b1;
      d.away[c] = std::max(up[p], std::max(other, 0.0));
      up[c] = t.edge_length[c] + d.away[c];
    }
  }
  return d;
}

// Retained sub-interval [lo, hi] of each edge, measured from the parent end.
inline void trim_intervals(const RootedWeightedTree& t, double eta,
                           std::vector<double>& lo, std::vector<double>& hi) {
  auto d = trim_depths(t);
  const int V = t.size();
  lo.assign(V, 0.0);
  hi.assign(V, -1.0);
  for (int v = 1; v < V; ++v) {
    const double L = t.edge_length[v];
    lo[v] = std::max(0.0, eta - d.away[v]);
    hi[v] = L - std::max(0.0, eta - d.down[v]);
  }
}

}  // namespace detail

// Total length of the eta-trimmed tree (points with two directions of depth
// at least eta along some segment). Nonincreasing in eta.
inline double trimmed_length(const RootedWeightedTree& t, double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("trim: eta must be > 0");
  std::vector<double> lo, hi;
  detail::trim_intervals(t, eta, lo, hi);
  double total = 0.0;
  for (int v = 1; v < t.size(); ++v) total += std::max(0.0, hi[v] - lo[v]);
  return total;
}

// The eta-trimmed tree, rerooted at the retained point nearest the original
// root. The trim is metric-only: masses are not carried over, the root holds
// everything as a placeholder. A fully trimmed tree collapses to one point.
inline RootedWeightedTree trim(const RootedWeightedTree& t, double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("trim: eta must be > 0");
  const int V = t.size();
  std::vector<double> lo, hi;
  detail::trim_intervals(t, eta, lo, hi);
  auto d = detail::trim_depths(t);
  auto ch = t.children();

  auto vertex_retained = [&](int v) {
    // two directions of depth >= eta
    std::vector<double> dirs;
    for (int c : ch[v]) dirs.push_back(t.edge_length[c] + d.down[c]);
    if (v != 0) dirs.push_back(t.edge_length[v] + d.away[v]);
    std::sort(dirs.rbegin(), dirs.rend());
    return dirs.size() >= 2 && dirs[1] >= eta - 1e-12;
  };

  const double tol = 1e-12;
  std::vector<int> parent_new;
  std::vector<double> len_new;
  std::vector<double> root_dist;  // to the original root, for rerooting
  auto add = [&](int par, double len, double dist) {
    parent_new.push_back(par);
    len_new.push_back(len);
    root_dist.push_back(dist);
    return static_cast<int>(parent_new.size()) - 1;
  };

  std::vector<double> depth = depths_of(t);

  // retained original vertices first; parent links come from edge segments
  std::vector<int> rep(V, -1);
  for (int v = 0; v < V; ++v)
    if (vertex_retained(v)) rep[v] = add(-1, 0.0, depth[v]);

  for (int v = 1; v < V; ++v) {
    const int p = t.parent[v];
    const double L = t.edge_length[v];
    if (hi[v] < lo[v] - tol) continue;
    const double seg = std::max(0.0, hi[v] - lo[v]);
    if (seg <= tol) continue;  // a single point, already represented if a vertex
    int upper;
    if (lo[v] <= tol && rep[p] >= 0)
      upper = rep[p];
    else
      upper = add(-1, 0.0, depth[p] + lo[v]);  // cut point toward the root
    int lower;
    if (hi[v] >= L - tol && rep[v] >= 0)
      lower = rep[v];
    else
      lower = add(-1, 0.0, depth[p] + hi[v]);  // cut point toward the leaves
    parent_new[lower] = upper;
    len_new[lower] = seg;
  }

  RootedWeightedTree out;
  if (parent_new.empty()) {  // fully trimmed
    out.parent = {-1};
    out.edge_length = {0.0};
    out.mass = {1.0};
    return out;
  }

  // The trimmed set is connected, so exactly one created vertex has no
  // parent; it is the retained point nearest the original root. Relabel so
  // it becomes vertex 0.
  int root = -1;
  for (std::size_t v = 0; v < parent_new.size(); ++v)
    if (parent_new[v] < 0 && (root < 0 || root_dist[v] < root_dist[root]))
      root = static_cast<int>(v);
  const int M = static_cast<int>(parent_new.size());
  std::vector<int> relabel(M, -1);
  relabel[root] = 0;
  int next = 1;
  for (int pass = 0; next < M && pass < M; ++pass)
    for (int v = 0; v < M; ++v)
      if (relabel[v] < 0 && parent_new[v] >= 0 && relabel[parent_new[v]] >= 0)
        relabel[v] = next++;
  if (next != M) throw std::logic_error("trim: produced a disconnected remainder");
  out.parent.assign(M, -1);
  out.edge_length.assign(M, 0.0);
  out.mass.assign(M, 0.0);
  for (int v = 0; v < M; ++v) {
    int nv = relabel[v];
    if (nv != 0) {
      out.parent[nv] = relabel[parent_new[v]];
      out.edge_length[nv] = len_new[v];
    }
  }
  out.mass[0] = 1.0;
  return out;
}

// ---------------------------------------------------------------------------
// Prohorov distance on a finite metric space
// ---------------------------------------------------------------------------

namespace detail {

// Exact Prohorov by closed-set enumeration: for each C, the least eps with
// alpha(C) <= beta(C^eps) + eps, taking the strict-inequality halo into
// account; the distance is the max over C.
inline double prohorov_exact(const std::vector<double>& alpha,
                             const std::vector<double>& beta,
                             const std::vector<std::vector<double>>& dist) {
  const int m = static_cast<int>(alpha.size());
  double best = 0.0;
  for (unsigned mask = 1; mask < (1u << m); ++mask) {
    double ac = 0.0;
    for (int i = 0; i < m; ++i)
      if (mask & (1u << i)) ac += alpha[i];
    // distances from each point to C and the beta mass sorted by them
    std::vector<std::pair<double, double>> dm;  // (dist to C, beta mass)
    for (int j = 0; j < m; ++j) {
      double dj = std::numeric_limits<double>::max();
      for (int i = 0; i < m; ++i)
        if (mask & (1u << i)) dj = std::min(dj, dist[i][j]);
      dm.push_back({dj, beta[j]});
    }
    std::sort(dm.begin(), dm.end());
    // thresholds: on eps in (delta_k, delta_{k+1}], beta(C^eps) = B_k
    double g = std::numeric_limits<double>::max();
    double B = 0.0;
    std::size_t i = 0;
    double delta = 0.0;
    while (true) {
      while (i < dm.size() && dm[i].first <= delta) B += dm[i++].second;
      double deficit = ac - B;
      if (std::abs(deficit) < 1e-13) deficit = 0.0;  // summation-order dust
      g = std::min(g, std::max(delta, deficit));
      if (i >= dm.size()) break;
      delta = dm[i].first;
    }
    best = std::max(best, g);
  }
  return best;
}

// Max-flow feasibility: mass 1 - eps can be coupled through pairs with
// d(x,y) < eps iff alpha(C) <= beta(C^eps) + eps for all C.
inline bool prohorov_feasible(const std::vector<double>& alpha,
                              const std::vector<double>& beta,
                              const std::vector<std::vector<double>>& dist,
                              double eps) {
  const int m = static_cast<int>(alpha.size());
  const int S = 2 * m, T = 2 * m + 1, V = 2 * m + 2;
  std::vector<std::vector<double>> cap(V, std::vector<double>(V, 0.0));
  for (int i = 0; i < m; ++i) {
    cap[S][i] = alpha[i];
    cap[m + i][T] = beta[i];
    for (int j = 0; j < m; ++j)
      if (dist[i][j] < eps) cap[i][m + j] = 2.0;  // effectively infinite
  }
  double flow = 0.0;
  while (true) {
    // BFS augmenting path
    std::vector<int> pre(V, -1);
    std::vector<int> q{S};
    pre[S] = S;
    for (std::size_t qi = 0; qi < q.size() && pre[T] < 0; ++qi) {
      int u = q[qi];
      for (int v = 0; v < V; ++v)
        if (pre[v] < 0 && cap[u][v] > 1e-15) {
          pre[v] = u;
          q.push_back(v);
        }
    }
    if (pre[T] < 0) break;
    double push = std::numeric_limits<double>::max();
    for (int v = T; v != S; v = pre[v]) push = std::min(push, cap[pre[v]][v]);
    for (int v = T; v != S; v = pre[v]) {
      cap[pre[v]][v] -= push;
      cap[v][pre[v]] += push;
    }
    flow += push;
  }
  return flow >= 1.0 - eps - 1e-12;
}

}  // namespace detail

// Prohorov distance between two probability vectors on a shared finite
// metric space. Exact closed-set enumeration up to 12 support points,
// bisection with a coupling feasibility check beyond.
inline double prohorov(const std::vector<double>& alpha, const std::vector<double>& beta,
                       const std::vector<std::vector<double>>& dist) {
  if (alpha.size() != beta.size() || alpha.size() != dist.size())
    throw std::invalid_argument("prohorov: size mismatch");
  double sa = std::accumulate(alpha.begin(), alpha.end(), 0.0);
  double sb = std::accumulate(beta.begin(), beta.end(), 0.0);
  if (std::abs(sa - sb) > 1e-9)
    throw std::invalid_argument("prohorov: masses must be equal");
  const int m = static_cast<int>(alpha.size());
  if (m <= 12) return detail::prohorov_exact(alpha, beta, dist);
  double lo = 0.0, hi = 1.0;
  for (const auto& row : dist)
    for (double d : row) hi = std::max(hi, d);
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    if (detail::prohorov_feasible(alpha, beta, dist, mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi < 1e-9 ? 0.0 : hi;
}

// ---------------------------------------------------------------------------
// Weighted rooted Gromov-Hausdorff comparison
// ---------------------------------------------------------------------------

namespace detail {

// Prohorov term for a vertex map X -> Y: distance between the pushforward of
// X's mass and Y's mass, measured in Y.
inline double pushforward_prohorov(const RootedWeightedTree& X,
                                   const RootedWeightedTree& Y,
                                   const std::vector<std::vector<double>>& DY,
                                   const std::vector<int>& f) {
  std::vector<double> push(Y.size(), 0.0);
  for (int x = 0; x < X.size(); ++x) push[f[x]] += X.mass[x];
  return prohorov(push, Y.mass, DY);
}

// Root-preserving map X -> Y matching walk-around (Euler tour) fractions;
// a cheap feasible map used for upper bounds and as a branch-and-bound seed.
inline std::vector<int> euler_alignment(const RootedWeightedTree& X,
                                        const RootedWeightedTree& Y) {
  auto tour = [](const RootedWeightedTree& T) {
    std::vector<std::pair<double, int>> events;  // (arc length position, vertex)
    auto ch = T.children();
    double pos = 0.0;
    auto rec = [&](auto&& self, int v) -> void {
      events.push_back({pos, v});
      for (int c : ch[v]) {
        pos += T.edge_length[c];
        self(self, c);
        pos += T.edge_length[c];
        events.push_back({pos, v});
      }
    };
    rec(rec, 0);
    double total = std::max(pos, 1e-300);
    for (auto& e : events) e.first /= total;
    return events;
  };
  auto ex = tour(X), ey = tour(Y);
  std::vector<double> first(X.size(), -1.0);
  for (auto& [p, v] : ex)
    if (first[v] < 0.0) first[v] = p;
  std::vector<int> f(X.size(), 0);
  for (int v = 0; v < X.size(); ++v) {
    double bestd = std::numeric_limits<double>::max();
    for (auto& [p, y] : ey) {
      double d = std::abs(p - first[v]);
      if (d < bestd) {
        bestd = d;
        f[v] = y;
      }
    }
  }
  f[0] = 0;
  return f;
}

inline double map_cost(const RootedWeightedTree& X, const RootedWeightedTree& Y,
                       const std::vector<std::vector<double>>& DX,
                       const std::vector<std::vector<double>>& DY,
                       const std::vector<int>& f) {
  double dis = 0.0;
  for (int a = 0; a < X.size(); ++a)
    for (int b = a + 1; b < X.size(); ++b)
      dis = std::max(dis, std::abs(DX[a][b] - DY[f[a]][f[b]]));
  return std::max(dis, pushforward_prohorov(X, Y, DY, f));
}

// Least worst-case over root-preserving vertex maps X -> Y of
// max(distortion, Prohorov(f* nu_X, nu_Y)), by branch and bound.
inline double one_sided_delta(const RootedWeightedTree& X, const RootedWeightedTree& Y,
                              const std::vector<std::vector<double>>& DX,
                              const std::vector<std::vector<double>>& DY) {
  const int n = X.size(), m = Y.size();
  std::vector<int> f(n, -1);
  f[0] = 0;
  double best = map_cost(X, Y, DX, DY, euler_alignment(X, Y));

  auto rec = [&](auto&& self, int v, double dis) -> void {
    if (dis >= best) return;
    if (v == n) {
      double cand = std::max(dis, pushforward_prohorov(X, Y, DY, f));
      best = std::min(best, cand);
      return;
    }
    for (int y = 0; y < m; ++y) {
      double d2 = dis;
      for (int u = 0; u < v && d2 < best; ++u)
        d2 = std::max(d2, std::abs(DX[u][v] - DY[f[u]][y]));
      if (d2 >= best) continue;
      f[v] = y;
      self(self, v + 1, d2);
      f[v] = -1;
    }
  };
  rec(rec, 1, 0.0);
  return best;
}

// One-dimensional Levy distance between the root-distance laws; a lower
// bound device (Levy <= Prohorov on the line).
inline double root_law_levy(const RootedWeightedTree& X, const RootedWeightedTree& Y) {
  auto law = [](const RootedWeightedTree& T) {
    auto d = depths_of(T);
    std::vector<std::pair<double, double>> pts;
    for (int v = 0; v < T.size(); ++v) pts.push_back({d[v], T.mass[v]});
    std::sort(pts.begin(), pts.end());
    return pts;
  };
  auto px = law(X), py = law(Y);
  auto cdf = [](const std::vector<std::pair<double, double>>& p, double x) {
    double c = 0.0;
    for (auto& [v, m] : p)
      if (v <= x) c += m;
    return c;
  };
  double lev = 0.0;
  auto consider = [&](double x) {
    // smallest e with F(x-e)-e <= G(x) <= F(x+e)+e fails below lev?
    // bisection per evaluation point
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 40; ++it) {
      double e = 0.5 * (lo + hi);
      bool ok = cdf(px, x - e) - e <= cdf(py, x) + 1e-12 &&
                cdf(py, x) <= cdf(px, x + e) + e + 1e-12;
      (ok ? hi : lo) = e;
    }
    lev = std::max(lev, hi);
  };
  for (auto& [v, m] : px) consider(v);
  for (auto& [v, m] : py) consider(v);
  return lev < 1e-9 ? 0.0 : lev;
}

}  // namespace detail

struct DeltaResult {
  double lower = 0.0;
  double upper = 0.0;
  bool exact = false;
  double value() const { return upper; }
};

// The weighted rooted Gromov-Hausdorff comparison: the least eps admitting
// root-preserving maps both ways with distortion and mass transport error at
// most eps. Exact over vertex maps for trees with at most `exact_limit`
// vertices (every map between finite trees is realized there); otherwise a
// bracket from invariants (lower) and explicit feasible maps (upper).
inline DeltaResult delta_ghwr(const RootedWeightedTree& X, const RootedWeightedTree& Y,
                              int exact_limit = 8) {
  DeltaResult r;
  auto DX = distance_matrix(X);
  auto DY = distance_matrix(Y);
  if (X.size() <= exact_limit && Y.size() <= exact_limit) {
    double a = detail::one_sided_delta(X, Y, DX, DY);
    double b = detail::one_sided_delta(Y, X, DY, DX);
    r.lower = r.upper = std::max(a, b);
    r.exact = true;
    return r;
  }
  r.exact = false;
  r.lower = std::max(std::abs(tree_height(X) - tree_height(Y)),
                     0.5 * detail::root_law_levy(X, Y));
  auto f = detail::euler_alignment(X, Y);
  auto g = detail::euler_alignment(Y, X);
  r.upper = std::max(detail::map_cost(X, Y, DX, DY, f),
                     detail::map_cost(Y, X, DY, DX, g));
  r.lower = std::min(r.lower, r.upper);
  return r;
}

// Bracket for the chain-infimum metric built from the comparison above:
// [Delta^(1/4) / 2, Delta^(1/4)]. The chain infimum itself is not computed.
inline std::pair<double, double> d_ghwr_bracket(const RootedWeightedTree& X,
                                                const RootedWeightedTree& Y) {
  DeltaResult d = delta_ghwr(X, Y);
  return {0.5 * std::pow(d.lower, 0.25), std::pow(d.upper, 0.25)};
}

// ---------------------------------------------------------------------------
// Subtree reattachment
// ---------------------------------------------------------------------------

// Vertices strictly above v (the subtree hanging below v, v excluded).
inline std::vector<int> subtree_above(const RootedWeightedTree& t, int v) {
  auto ch = t.children();
  std::vector<int> out;
  std::vector<int> stack(ch[v].begin(), ch[v].end());
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    out.push_back(u);
    for (int c : ch[u]) stack.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Prunes the subtree strictly above v and reattaches it at w: children of v
// become children of w with their edge lengths kept, so cross distances
// become d(x,v) + d(w,y). Root, masses, and total edge length are unchanged.
inline RootedWeightedTree reattach(const RootedWeightedTree& t, int v, int w) {
  if (v < 0 || v >= t.size() || w < 0 || w >= t.size())
    throw std::invalid_argument("reattach: vertex out of range");
  if (w == v) return t;
  std::vector<int> sub = subtree_above(t, v);
  if (std::binary_search(sub.begin(), sub.end(), w))
    throw std::domain_error("reattach: w lies inside the moved subtree");
  RootedWeightedTree out = t;
  for (int c = 1; c < t.size(); ++c)
    if (t.parent[c] == v) out.parent[c] = w;
  return out;
}

// ---------------------------------------------------------------------------
// Canonical form
// ---------------------------------------------------------------------------

namespace detail {

inline std::string canonical_code(const RootedWeightedTree& t, int v, bool with_mass) {
  auto ch = t.children();
  auto rec = [&](auto&& self, int u) -> std::string {
    std::vector<std::string> parts;
    for (int c : ch[u]) {
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.17g", t.edge_length[c]);
      parts.push_back(std::string("(") + buf + ":" + self(self, c) + ")");
    }
    std::sort(parts.begin(), parts.end());
    std::string s;
    if (with_mass) {
      char buf[40];
      std::snprintf(buf, sizeof(buf), "[%.12g]", t.mass[u]);
      s += buf;
    }
    for (auto& p : parts) s += p;
    return s;
  };
  return rec(rec, v);
}

}  // namespace detail

// Root-preserving isometry test via canonical codes; exact when edge lengths
// are exactly representable (integers, halves, ...).
inline bool root_isometric(const RootedWeightedTree& a, const RootedWeightedTree& b,
                           bool compare_masses = false) {
  return detail::canonical_code(a, 0, compare_masses) ==
         detail::canonical_code(b, 0, compare_masses);
}

// Four-point condition over all vertex quadruples; a finite-tree substitute
// for the real-tree axioms.
inline bool four_point_ok(const RootedWeightedTree& t, double tol = 1e-9) {
  auto D = distance_matrix(t);
  const int V = t.size();
  for (int a = 0; a < V; ++a)
    for (int b = a; b < V; ++b)
      for (int c = b; c < V; ++c)
        for (int e = c; e < V; ++e) {
          double s1 = D[a][b] + D[c][e];
          double s2 = D[a][c] + D[b][e];
          double s3 = D[a][e] + D[b][c];
          double mx = std::max({s1, s2, s3});
          double mid = s1 + s2 + s3 - mx - std::min({s1, s2, s3});
          if (mx > mid + tol) return false;
        }
  return true;
}

}  // namespace amap
