#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace winelab {

// Stream tags keep the generators of different pipeline stages independent
// even when they share a base seed.
namespace stream {
inline constexpr std::uint64_t split = 1;
inline constexpr std::uint64_t sampler = 2;
inline constexpr std::uint64_t folds = 3;
inline constexpr std::uint64_t forest = 4;
inline constexpr std::uint64_t importance = 5;
inline constexpr std::uint64_t grid = 6;
inline constexpr std::uint64_t node = 7;
inline constexpr std::uint64_t model = 8;
}  // namespace stream

// Derives an independent 64-bit seed from a base seed and a list of stream
// identifiers (class id, tree index, fold, ...). Parallel tasks seed their
// own generators this way so results do not depend on scheduling.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> stream);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t base, std::initializer_list<std::uint64_t> stream)
      : engine_(derive_seed(base, stream)) {}

  // Uniform integer in [0, n).
  std::size_t index(std::size_t n);
  // Uniform real in the open interval (0, 1).
  double open_unit();

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace winelab
