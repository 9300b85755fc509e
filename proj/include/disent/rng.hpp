#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>

namespace disent {

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Seed for an independent stream `stream` derived from `seed`. Used to give
/// each sweep entry, probe, and data split its own generator.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// xoshiro256** seeded through splitmix64. All derived draws (uniform,
/// normal, index) are computed here rather than through <random>
/// distributions so streams are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Standard normal via the Box-Muller transform.
  double normal() noexcept;
  double normal(double mean, double stddev) noexcept { return mean + stddev * normal(); }
  /// Uniform on {0, ..., n-1}; n must be positive.
  std::size_t index(std::size_t n) noexcept;
  bool bernoulli(double p) noexcept { return uniform() < p; }

  template <typename T>
  void shuffle(std::span<T> items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[index(i)]);
    }
  }

  /// A new generator whose stream is independent of this one.
  Rng split() noexcept { return Rng(next_u64()); }

 private:
  std::uint64_t seed_;
  std::uint64_t s_[4];
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace disent
