#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace amap {

// Deterministic random stream with cheap substream derivation.
//
// A stream is identified by its base seed. substream(id) derives an
// independent stream from (base, id) only, so parallel workers can be handed
// reproducible streams that do not depend on scheduling order.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed)
      : base_(seed), engine_(mix64(seed ^ kSalt)) {}

  RngStream substream(std::uint64_t id) const {
    return RngStream(mix64(base_ + 0x9e3779b97f4a7c15ull * (id + 1)));
  }

  std::uint64_t seed() const { return base_; }

  std::uint64_t next_u64() { return engine_(); }

  // uniform on [0,1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // uniform on {0,...,n-1}
  std::uint64_t uniform_int(std::uint64_t n) {
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = max - max % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  double normal() { return normal_(engine_); }

 private:
  static std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  static constexpr std::uint64_t kSalt = 0x243f6a8885a308d3ull;

  std::uint64_t base_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace amap
