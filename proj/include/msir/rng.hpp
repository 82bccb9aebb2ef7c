#pragma once

#include <cstdint>
#include <vector>

namespace msir {

// Counter-based generator: the i-th draw of a stream is
// splitmix64_mix(key + i * 0x9E3779B97F4A7C15), i = 1, 2, ...
// A stream key is derived from (seed, stream id), so independent replications
// can be generated in any order or on any thread and still agree.
//
// Derived draws:
//   uniform()      (u >> 11) * 2^-53, in [0, 1)
//   uniform_open() ((u >> 11) + 0.5) * 2^-53, in (0, 1)
//   normal()       Marsaglia polar method on 2 * uniform() - 1 pairs,
//                  the second variate of each accepted pair is cached
//   below(n)       rejection sampling on u so the result is exactly uniform
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  double uniform();
  double uniform_open();
  double normal();
  std::uint64_t below(std::uint64_t n);

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64_mix(std::uint64_t z);

// Fisher-Yates permutation of 0..n-1.
std::vector<std::size_t> random_permutation(std::size_t n, CounterRng& rng);

}  // namespace msir
