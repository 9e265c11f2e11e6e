#pragma once

// Portable seeded randomness.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. Bounded draws use rejection sampling implemented here rather than
// std::uniform_int_distribution, whose algorithm is implementation-defined.
//
// Stream splitting: a child stream for (parent seed, label) is seeded with
//   splitmix64(splitmix64(parent) ^ splitmix64(label))
// Labels used by the toolkit are listed in the `stream` namespace below;
// collection streams add the collection index to the kind label.

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace lingobf {

std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t label) noexcept;
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

namespace stream {
inline constexpr std::uint64_t kSets = 0x5e7500000000ULL;
inline constexpr std::uint64_t kTables = 0x7ab1e0000000ULL;
inline constexpr std::uint64_t kFreeTables = 0xf7ee00000000ULL;
inline constexpr std::uint64_t kDistinctAttempt = 0xd157000000000000ULL;
inline constexpr std::uint64_t kBootstrapSet = 0xb0075e7000000000ULL;
}  // namespace stream

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  // Sattolo's algorithm: a uniformly random single cycle over all positions.
  template <typename T>
  void cycle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i - 1));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace lingobf
