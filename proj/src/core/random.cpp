#include "itas/core/random.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "itas/core/errors.hpp"

namespace itas {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

RandomSource::RandomSource(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

std::uint64_t RandomSource::next_u64() { return engine_(); }

double RandomSource::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double RandomSource::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double RandomSource::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::size_t RandomSource::index(std::size_t n) {
  if (n == 0) fail(ErrorKind::kDomain, "index() over an empty range");
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  // Rejection keeps the result exactly uniform.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t draw = next_u64();
  while (draw >= limit) draw = next_u64();
  return static_cast<std::size_t>(draw % bound);
}

long long RandomSource::integer(long long lo, long long hi) {
  if (hi < lo) fail(ErrorKind::kDomain, "integer() with hi < lo");
  return lo + static_cast<long long>(index(static_cast<std::size_t>(hi - lo) + 1));
}

RandomSource RandomSource::substream(std::string_view name) const {
  return RandomSource(splitmix64(seed_ ^ fnv1a(name)));
}

RandomSource RandomSource::substream(std::uint64_t a, std::uint64_t b, std::uint64_t c) const {
  std::uint64_t h = splitmix64(seed_ ^ 0x5851f42d4c957f2dULL);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  h = splitmix64(h ^ c);
  return RandomSource(h);
}

std::vector<std::size_t> RandomSource::permutation(std::size_t n) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle(order);
  return order;
}

}  // namespace itas
