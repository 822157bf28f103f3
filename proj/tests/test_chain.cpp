#include <cmath>
#include <map>
#include <vector>

#include "amap/chain.hpp"
#include "amap/mapping.hpp"
#include "catch_amalgamated.hpp"

using namespace amap;

namespace {
AcyclicMapping am(int n, std::vector<int> image) {
  return AcyclicMapping::checked(Mapping{n, std::move(image)});
}
}  // namespace

TEST_CASE("subtree_of examples") {
  auto m = am(5, {1, 1, 2, 2, 3});
  REQUIRE(subtree_of(m, 3) == std::vector<int>{3, 5});
  REQUIRE(subtree_of(m, 5) == std::vector<int>{5});            // leaf
  REQUIRE(subtree_of(m, 1) == std::vector<int>{1, 2, 3, 4, 5});  // root of everything
}

TEST_CASE("step law on two points") {
  // from (1,1), re-pointing vertex 1 must stay put: its subtree is everything
  auto m11 = am(2, {1, 1});
  REQUIRE(subtree_of(m11, 1) == std::vector<int>{1, 2});
  REQUIRE(step_to(m11, 1, 1).image() == std::vector<int>{1, 1});

  // exact one-step law out of (1,2) from the transition matrix
  TransitionMatrix tm = transition_matrix(2);
  REQUIRE(tm.states.size() == 3);
  int a = tm.index_of(am(2, {1, 2}));
  REQUIRE(tm.probs[a][tm.index_of(am(2, {1, 2}))] == Rational(1, 2));
  REQUIRE(tm.probs[a][tm.index_of(am(2, {1, 1}))] == Rational(1, 4));
  REQUIRE(tm.probs[a][tm.index_of(am(2, {2, 2}))] == Rational(1, 4));

  int b = tm.index_of(am(2, {1, 1}));
  REQUIRE(tm.probs[b][b] == Rational(3, 4));
  REQUIRE(tm.probs[b][tm.index_of(am(2, {2, 2}))] == Rational(0));
  REQUIRE(tm.probs[b][a] == Rational(1, 4));
}

TEST_CASE("one-vertex chain is frozen") {
  RngStream rng(5);
  auto m = am(1, {1});
  for (int k = 0; k < 10; ++k) {
    m = chain_step(m, rng);
    REQUIRE(m.image() == std::vector<int>{1});
  }
}

TEST_CASE("transition matrices are row-stochastic and symmetric") {
  for (int n = 1; n <= 5; ++n) {
    TransitionMatrix tm = transition_matrix(n);
    for (std::size_t a = 0; a < tm.states.size(); ++a) {
      Rational row(0);
      for (const auto& p : tm.probs[a]) row += p;
      REQUIRE(row == Rational(1));
    }
    REQUIRE(tm.symmetric());
  }
  REQUIRE(transition_matrix(1).probs[0][0] == Rational(1));
  REQUIRE_THROWS_AS(transition_matrix(6), std::invalid_argument);
}

TEST_CASE("chain_step agrees with the exact kernel at n=3") {
  TransitionMatrix tm = transition_matrix(3);
  auto start = am(3, {1, 1, 1});
  int a = tm.index_of(start);
  RngStream rng(99);
  const long reps = 60000;
  std::map<std::vector<int>, long> freq;
  for (long k = 0; k < reps; ++k) freq[chain_step(start, rng).image()]++;
  for (std::size_t b = 0; b < tm.states.size(); ++b) {
    double p = tm.probs[a][b].to_double();
    auto it = freq.find(tm.states[b].image());
    double cnt = it == freq.end() ? 0.0 : static_cast<double>(it->second);
    if (p == 0.0) {
      REQUIRE(cnt == 0.0);
    } else {
      double sigma = std::sqrt(reps * p * (1 - p));
      REQUIRE(std::abs(cnt - reps * p) < 4.0 * sigma);
    }
  }
}

TEST_CASE("chain steps never leave the acyclic set") {
  RngStream rng(123);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 2 + static_cast<int>(rng.uniform_int(30));
    AcyclicMapping m = sample_uniform_acyclic(n, rng);
    for (int k = 0; k < 50; ++k) {
      m = chain_step(m, rng);
      REQUIRE(validate_acyclic(m.mapping()));
    }
  }
}

TEST_CASE("long run visits states uniformly at n=3") {
  auto states = enumerate_acyclic(3);
  std::map<std::vector<int>, long> freq;
  RngStream rng(2024);
  AcyclicMapping m = states[0];
  const long steps = 1000000;
  for (long k = 0; k < steps; ++k) {
    m = chain_step(m, rng);
    freq[m.image()]++;
  }
  const double p = 1.0 / 16.0;
  // adjacent samples are correlated; allow a generous mixing factor
  const double sigma = std::sqrt(steps * p * (1 - p)) * 6.0;
  for (const auto& s : states) {
    auto it = freq.find(s.image());
    REQUIRE(it != freq.end());
    REQUIRE(std::abs(it->second - steps * p) < 6.0 * sigma);
  }
}

TEST_CASE("run_chain records step zero and strides") {
  RngStream rng(3);
  auto m = sample_uniform_acyclic(100, rng);
  auto sum = run_chain(m, 1000, rng, {fixed_points_observer(), height_observer()}, 100);
  REQUIRE(sum.rows.size() == 11);  // steps/stride + 1 including step 0
  REQUIRE(sum.names == std::vector<std::string>{"fixed-points", "height"});
  REQUIRE(sum.recorded_steps.front() == 0);
  REQUIRE(sum.recorded_steps.back() == 1000);

  auto only0 = run_chain(m, 0, rng, {fixed_points_observer()});
  REQUIRE(only0.rows.size() == 1);
  REQUIRE(only0.rows[0][0] == fixed_point_count(m));
}
