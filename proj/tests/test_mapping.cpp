#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "amap/chain.hpp"
#include "amap/mapping.hpp"
#include "catch_amalgamated.hpp"

using namespace amap;

namespace {

Mapping make(int n, std::vector<int> image) { return Mapping{n, std::move(image)}; }

// Brute force over all n^n image tables, independent of the library's
// enumeration order and pruning.
std::vector<std::vector<int>> brute_force_acyclic(int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> image(n, 1);
  while (true) {
    Mapping m{n, image};
    if (validate_acyclic(m)) out.push_back(image);
    int k = n - 1;
    while (k >= 0 && image[k] == n) image[k--] = 1;
    if (k < 0) break;
    image[k]++;
  }
  return out;
}

}  // namespace

TEST_CASE("validate_acyclic flags the 18-vertex example's cycles") {
  Mapping m = make(18, {10, 3, 18, 10, 9, 2, 8, 4, 3, 7, 9, 2, 1, 9, 15, 1, 1, 9});
  REQUIRE_FALSE(validate_acyclic(m));
  // 3 -> 18 -> 9 -> 3 really is a cycle of this mapping
  REQUIRE(m(3) == 18);
  REQUIRE(m(18) == 9);
  REQUIRE(m(9) == 3);
  // the reported witness is a genuine directed cycle (10 -> 7 -> 8 -> 4 also
  // qualifies; either is acceptable)
  auto cyc = find_cycle(m);
  REQUIRE(cyc.has_value());
  REQUIRE(cyc->size() >= 2);
  for (std::size_t k = 0; k < cyc->size(); ++k)
    REQUIRE(m((*cyc)[k]) == (*cyc)[(k + 1) % cyc->size()]);
}

TEST_CASE("identity mappings are acyclic") {
  for (int n : {1, 2, 5, 9}) {
    std::vector<int> img(n);
    for (int v = 1; v <= n; ++v) img[v - 1] = v;
    REQUIRE(validate_acyclic(make(n, img)));
  }
}

TEST_CASE("a 2-cycle is rejected") {
  REQUIRE_FALSE(validate_acyclic(make(2, {2, 1})));
  REQUIRE_THROWS_AS(AcyclicMapping::checked(make(2, {2, 1})), std::invalid_argument);
}

TEST_CASE("malformed image entries are input errors") {
  REQUIRE_THROWS_AS(validate_acyclic(make(3, {1, 4, 2})), std::invalid_argument);
  REQUIRE_THROWS_AS(validate_acyclic(make(3, {0, 1, 2})), std::invalid_argument);
  REQUIRE_THROWS_AS(validate_acyclic(make(3, {1, 2})), std::invalid_argument);
}

TEST_CASE("decompose splits into rooted trees") {
  auto m = AcyclicMapping::checked(make(5, {1, 1, 2, 2, 3}));
  Forest f = decompose(m);
  REQUIRE(f.roots == std::vector<int>{1});
  REQUIRE(f.children[1] == std::vector<int>{2});
  REQUIRE(f.children[2] == std::vector<int>{3, 4});
  REQUIRE(f.children[3] == std::vector<int>{5});
  REQUIRE(f.children[5].empty());

  auto id3 = AcyclicMapping::checked(make(3, {1, 2, 3}));
  Forest g = decompose(id3);
  REQUIRE(g.roots == std::vector<int>{1, 2, 3});
  for (int v = 1; v <= 3; ++v) REQUIRE(g.children[v].empty());

  auto two = AcyclicMapping::checked(make(2, {1, 1}));
  Forest h = decompose(two);
  REQUIRE(h.roots == std::vector<int>{1});
  REQUIRE(h.children[1] == std::vector<int>{2});
}

TEST_CASE("decompose then reconstruct is the identity") {
  RngStream rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    int n = 1 + static_cast<int>(rng.uniform_int(40));
    AcyclicMapping m = sample_uniform_acyclic(n, rng);
    Mapping back = forest_to_mapping(decompose(m));
    REQUIRE(back.image == m.image());
  }
}

TEST_CASE("enumerate_acyclic small cases") {
  REQUIRE(enumerate_acyclic(1).size() == 1);
  auto e2 = enumerate_acyclic(2);
  REQUIRE(e2.size() == 3);
  REQUIRE(e2[0].image() == std::vector<int>{1, 1});
  REQUIRE(e2[1].image() == std::vector<int>{1, 2});
  REQUIRE(e2[2].image() == std::vector<int>{2, 2});
  REQUIRE(enumerate_acyclic(3).size() == 16);
  REQUIRE_THROWS_AS(enumerate_acyclic(0), std::invalid_argument);
  REQUIRE_THROWS_AS(enumerate_acyclic(8), std::invalid_argument);
}

TEST_CASE("enumerate_acyclic matches the brute-force census") {
  for (int n = 1; n <= 5; ++n) {
    auto lib = enumerate_acyclic(n);
    auto ref = brute_force_acyclic(n);
    REQUIRE(lib.size() == ref.size());
    for (std::size_t k = 0; k < lib.size(); ++k) REQUIRE(lib[k].image() == ref[k]);
  }
}

TEST_CASE("enumerate_acyclic counts are (n+1)^(n-1)") {
  for (int n = 1; n <= 7; ++n) {
    std::size_t expect = 1;
    for (int k = 0; k < n - 1; ++k) expect *= static_cast<std::size_t>(n + 1);
    REQUIRE(enumerate_acyclic(n).size() == expect);
  }
}

TEST_CASE("uniform sampler: n=1 and n=2 frequencies") {
  RngStream rng(7);
  REQUIRE(sample_uniform_acyclic(1, rng).image() == std::vector<int>{1});

  const long reps = 30000;
  std::map<std::vector<int>, long> freq;
  for (long k = 0; k < reps; ++k) freq[sample_uniform_acyclic(2, rng).image()]++;
  REQUIRE(freq.size() == 3);
  const double p = 1.0 / 3.0;
  const double sigma = std::sqrt(p * (1 - p) * reps);
  for (auto& [img, cnt] : freq)
    REQUIRE(std::abs(cnt - reps * p) < 3.0 * sigma);
}

TEST_CASE("uniform sampler: fixed-point counts match enumeration at n=4") {
  auto all = enumerate_acyclic(4);
  double exact_mean = 0.0;
  for (const auto& m : all) exact_mean += fixed_point_count(m);
  exact_mean /= static_cast<double>(all.size());

  RngStream rng(11);
  const long reps = 40000;
  double sum = 0.0, sumsq = 0.0;
  for (long k = 0; k < reps; ++k) {
    double x = fixed_point_count(sample_uniform_acyclic(4, rng));
    sum += x;
    sumsq += x * x;
  }
  double mean = sum / reps;
  double sd = std::sqrt((sumsq - sum * sum / reps) / (reps - 1));
  REQUIRE(std::abs(mean - exact_mean) < 3.0 * sd / std::sqrt(static_cast<double>(reps)));
}

TEST_CASE("uniform sampler passes a chi-square check against enumeration") {
  // 0.001-level chi-square; degrees of freedom = #states - 1
  const std::map<int, double> crit = {{2, 13.816}, {15, 37.697}, {124, 186.054}};
  RngStream rng(13);
  for (int n = 2; n <= 4; ++n) {
    auto all = enumerate_acyclic(n);
    std::map<std::vector<int>, long> freq;
    const long reps = 25000;
    for (long k = 0; k < reps; ++k) freq[sample_uniform_acyclic(n, rng).image()]++;
    const double expect = static_cast<double>(reps) / all.size();
    double chi2 = 0.0;
    for (const auto& m : all) {
      auto it = freq.find(m.image());
      double cnt = it == freq.end() ? 0.0 : static_cast<double>(it->second);
      chi2 += (cnt - expect) * (cnt - expect) / expect;
    }
    REQUIRE(chi2 < crit.at(static_cast<int>(all.size()) - 1));
  }
}
