#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "amap/rng.hpp"

namespace amap {

// A self-map of [n] = {1,...,n}, stored as its image table: image[i-1] = phi(i).
struct Mapping {
  int n = 0;
  std::vector<int> image;  // 1-based values in [1, n]

  int operator()(int v) const { return image[v - 1]; }
};

inline void validate_mapping(const Mapping& m) {
  if (m.n < 1) throw std::invalid_argument("Mapping: n must be >= 1");
  if (static_cast<int>(m.image.size()) != m.n)
    throw std::invalid_argument("Mapping: image length must equal n");
  for (int v : m.image)
    if (v < 1 || v > m.n)
      throw std::invalid_argument("Mapping: image entry out of [1,n]");
}

// Returns a directed cycle of length >= 2 if one exists, otherwise nullopt.
// Self-loops do not count as cycles.
inline std::optional<std::vector<int>> find_cycle(const Mapping& m) {
  validate_mapping(m);
  // 0 = unseen, 1 = on current walk, 2 = known to reach a fixed point
  std::vector<int> state(m.n + 1, 0);
  std::vector<int> walk;
  for (int start = 1; start <= m.n; ++start) {
    if (state[start] != 0) continue;
    walk.clear();
    int x = start;
    while (true) {
      if (state[x] == 2) break;
      if (state[x] == 1) {
        // closed a loop inside the current walk
        auto it = std::find(walk.begin(), walk.end(), x);
        std::vector<int> cycle(it, walk.end());
        if (cycle.size() >= 2) return cycle;
        break;  // self-loop, fine
      }
      state[x] = 1;
      walk.push_back(x);
      x = m(x);
    }
    for (int v : walk) state[v] = 2;
  }
  return std::nullopt;
}

// True iff every forward orbit terminates at a fixed point, i.e. the only
// directed cycles in the functional graph are self-loops.
inline bool validate_acyclic(const Mapping& m) { return !find_cycle(m).has_value(); }

// A Mapping whose functional graph has self-loops as its only cycles.
class AcyclicMapping {
 public:
  static AcyclicMapping checked(Mapping m) {
    if (auto cyc = find_cycle(m)) {
      std::string msg = "AcyclicMapping: mapping has cycle";
      for (int v : *cyc) msg += " " + std::to_string(v);
      throw std::invalid_argument(msg);
    }
    return AcyclicMapping(std::move(m));
  }

  // For internal construction when acyclicity is guaranteed by the producer.
  static AcyclicMapping unchecked(Mapping m) { return AcyclicMapping(std::move(m)); }

  const Mapping& mapping() const { return m_; }
  int n() const { return m_.n; }
  int operator()(int v) const { return m_(v); }
  const std::vector<int>& image() const { return m_.image; }

  friend bool operator==(const AcyclicMapping& a, const AcyclicMapping& b) {
    return a.m_.n == b.m_.n && a.m_.image == b.m_.image;
  }

 private:
  explicit AcyclicMapping(Mapping m) : m_(std::move(m)) {}
  Mapping m_;
};

// Forest view of an acyclic mapping: the fixed points are roots and each
// non-root hangs below its image.
struct Forest {
  int n = 0;
  std::vector<int> roots;                  // ascending
  std::vector<int> parent;                 // [0..n]; parent[r] = 0 for roots
  std::vector<std::vector<int>> children;  // [0..n], each list ascending
};

inline Forest decompose(const AcyclicMapping& m) {
  Forest f;
  f.n = m.n();
  f.parent.assign(f.n + 1, 0);
  f.children.assign(f.n + 1, {});
  for (int v = 1; v <= f.n; ++v) {
    int p = m(v);
    if (p == v) {
      f.roots.push_back(v);
    } else {
      f.parent[v] = p;
      f.children[p].push_back(v);
    }
  }
  // ascending order comes for free from the scan order
  return f;
}

inline Mapping forest_to_mapping(const Forest& f) {
  Mapping m;
  m.n = f.n;
  m.image.assign(f.n, 0);
  for (int r : f.roots) m.image[r - 1] = r;
  for (int v = 1; v <= f.n; ++v)
    if (f.parent[v] != 0) m.image[v - 1] = f.parent[v];
  validate_mapping(m);
  return m;
}

// All acyclic mappings of [n] in lexicographic order of their image tables.
// There are (n+1)^(n-1) of them; n is capped so the result stays small.
inline std::vector<AcyclicMapping> enumerate_acyclic(int n) {
  if (n < 1 || n > 7)
    throw std::invalid_argument("enumerate_acyclic: n must be in [1,7]");
  std::vector<AcyclicMapping> out;
  std::vector<int> image(n + 1, 0);  // 0 = unassigned

  // Setting phi(i)=j closes a forbidden cycle iff the assigned-images walk
  // from j reaches i before hitting a fixed point or an unassigned vertex.
  auto creates_cycle = [&](int i, int j) {
    int x = j;
    while (true) {
      if (x == i) return j != i;  // i==j is a self-loop
      if (image[x] == 0 || image[x] == x) return false;
      x = image[x];
    }
  };

  auto rec = [&](auto&& self, int i) -> void {
    if (i > n) {
      Mapping m;
      m.n = n;
      m.image.assign(image.begin() + 1, image.end());
      out.push_back(AcyclicMapping::unchecked(std::move(m)));
      return;
    }
    for (int j = 1; j <= n; ++j) {
      if (creates_cycle(i, j)) continue;
      image[i] = j;
      self(self, i + 1);
      image[i] = 0;
    }
  };
  rec(rec, 1);
  return out;
}

// Exactly uniform sample over the (n+1)^(n-1) acyclic mappings of [n].
//
// Sampling goes through the bijection with labeled trees on n+1 vertices:
// draw a uniform Prufer sequence, decode it, root the tree at the extra
// vertex n+1, and read parents; children of the extra vertex become
// self-loop roots.
inline AcyclicMapping sample_uniform_acyclic(int n, RngStream& rng) {
  if (n < 1) throw std::invalid_argument("sample_uniform_acyclic: n must be >= 1");
  Mapping m;
  m.n = n;
  m.image.assign(n, 0);
  if (n == 1) {
    m.image[0] = 1;
    return AcyclicMapping::unchecked(std::move(m));
  }

  const int nv = n + 1;
  std::vector<int> pruefer(nv - 2);
  for (int& a : pruefer) a = 1 + static_cast<int>(rng.uniform_int(nv));

  std::vector<int> degree(nv + 1, 1);
  for (int a : pruefer) degree[a]++;

  std::vector<std::vector<int>> adj(nv + 1);
  auto join = [&](int a, int b) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  };

  int ptr = 1;
  while (degree[ptr] != 1) ptr++;
  int leaf = ptr;
  for (int a : pruefer) {
    join(leaf, a);
    if (--degree[a] == 1 && a < ptr) {
      leaf = a;
    } else {
      ptr++;
      while (degree[ptr] != 1) ptr++;
      leaf = ptr;
    }
  }
  join(leaf, nv);

  // orient toward the adjoined root nv
  std::vector<int> parent(nv + 1, 0), stack{nv};
  std::vector<char> seen(nv + 1, 0);
  seen[nv] = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int w : adj[u])
      if (!seen[w]) {
        seen[w] = 1;
        parent[w] = u;
        stack.push_back(w);
      }
  }
  for (int v = 1; v <= n; ++v) m.image[v - 1] = (parent[v] == nv) ? v : parent[v];
  return AcyclicMapping::unchecked(std::move(m));
}

inline int fixed_point_count(const AcyclicMapping& m) {
  int c = 0;
  for (int v = 1; v <= m.n(); ++v)
    if (m(v) == v) c++;
  return c;
}

// Canonical representative of the relabeling class of m: component trees are
// ordered by a label-free structure code (children recursively likewise) and
// vertices renamed in the resulting visit order. Two mappings are conjugate
// by a permutation iff their canonical representatives coincide.
inline AcyclicMapping canonical_class(const AcyclicMapping& m) {
  Forest f = decompose(m);
  const int n = m.n();

  std::vector<std::string> code(n + 1);
  auto build = [&](auto&& self, int v) -> const std::string& {
    std::vector<std::string> parts;
    for (int c : f.children[v]) parts.push_back(self(self, c));
    std::sort(parts.begin(), parts.end());
    code[v] = "(";
    for (auto& p : parts) code[v] += p;
    code[v] += ")";
    // revisit children in code order for the canonical walk below
    std::sort(f.children[v].begin(), f.children[v].end(),
              [&](int a, int b) { return code[a] < code[b]; });
    return code[v];
  };
  for (int r : f.roots) build(build, r);
  std::vector<int> roots = f.roots;
  std::sort(roots.begin(), roots.end(),
            [&](int a, int b) { return code[a] < code[b]; });

  Mapping out;
  out.n = n;
  out.image.assign(n, 0);
  int next = 0;
  for (int r : roots) {
    std::vector<std::pair<int, int>> stack{{r, -1}};  // (old vertex, new parent)
    while (!stack.empty()) {
      auto [v, np] = stack.back();
      stack.pop_back();
      int nv = ++next;
      out.image[nv - 1] = np < 0 ? nv : np;
      for (auto it = f.children[v].rbegin(); it != f.children[v].rend(); ++it)
        stack.push_back({*it, nv});
    }
  }
  return AcyclicMapping::unchecked(std::move(out));
}

}  // namespace amap
