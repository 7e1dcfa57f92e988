#pragma once

#include <cstdint>
#include <random>

namespace hgr {

/// SplitMix64 finalizer. Used to derive independent engine seeds from a
/// (root seed, stream index) pair.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(root) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

/// Seeded 64-bit Mersenne Twister with splittable stream derivation.
///
/// Stream `i` of root seed `s` is a function of (s, i) only, so work
/// scheduled across threads draws the same numbers regardless of order.
class Rng {
 public:
  using engine_type = std::mt19937_64;
  using result_type = engine_type::result_type;

  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

  Rng stream(std::uint64_t index) const { return Rng(derive_seed(seed_, index)); }

  std::uint64_t seed() const noexcept { return seed_; }
  engine_type& engine() noexcept { return engine_; }

  static constexpr result_type min() { return engine_type::min(); }
  static constexpr result_type max() { return engine_type::max(); }
  result_type operator()() { return engine_(); }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

 private:
  std::uint64_t seed_;
  engine_type engine_;
};

}  // namespace hgr
