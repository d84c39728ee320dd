#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace itas {

// Seeded random source. Draws are produced by std::mt19937_64, whose output
// sequence is fixed by the standard; uniform and normal variates are derived
// here rather than through <random> distributions so that the same seed gives
// the same numbers with every standard library.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed = 0);

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  // Standard normal via Box-Muller.
  double normal();
  // Uniform integer in [0, n); n must be positive.
  std::size_t index(std::size_t n);
  // Uniform integer in [lo, hi].
  long long integer(long long lo, long long hi);

  // Independent stream derived from this source's seed (not its state), so
  // substreams do not depend on how many draws were taken before.
  RandomSource substream(std::string_view name) const;
  RandomSource substream(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const;
  RandomSource substream(std::string_view name, std::uint64_t a, std::uint64_t b = 0) const {
    return substream(name).substream(a, b);
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[index(i)]);
    }
  }

  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace itas
