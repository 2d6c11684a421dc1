#pragma once

// Reproducible random streams.
//
// Algorithm: the 64-bit Mersenne Twister (std::mt19937_64, whose output
// sequence is fixed by the standard) seeded with splitmix64(seed ^
// splitmix64(stream)). Uniform doubles take the top 53 bits of one draw;
// normals use the Box-Muller transform on two uniforms. The std
// distributions are deliberately avoided because their output is
// implementation-defined.

#include "pcp/core.hpp"

#include <cstdint>
#include <numbers>
#include <random>

namespace pcp {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Combines several 64-bit words into one well-mixed key.
template <typename... Words>
constexpr std::uint64_t hash_words(std::uint64_t first, Words... rest) noexcept {
  std::uint64_t h = splitmix64(first);
  ((h = splitmix64(h ^ static_cast<std::uint64_t>(rest))), ...);
  return h;
}

/// Identifies one reproducible draw sequence.
struct RngState {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  /// A distinct substream derived from this one, e.g. per (trial, purpose).
  RngState substream(std::uint64_t purpose) const noexcept { return {seed, hash_words(stream, purpose)}; }

  friend bool operator==(const RngState&, const RngState&) = default;
};

/// Stream purposes used across the library. Fixed numeric values keep
/// recorded seeds replayable.
namespace purpose {
inline constexpr std::uint64_t kFactorX = 1;
inline constexpr std::uint64_t kFactorY = 2;
inline constexpr std::uint64_t kSupport = 3;
inline constexpr std::uint64_t kSigns = 4;
inline constexpr std::uint64_t kObserved = 5;
inline constexpr std::uint64_t kGolfing = 6;
inline constexpr std::uint64_t kEigenStart = 7;
inline constexpr std::uint64_t kLanczosStart = 8;
inline constexpr std::uint64_t kSubspace = 9;
}  // namespace purpose

class Rng {
 public:
  explicit Rng(RngState state) : engine_(splitmix64(state.seed ^ splitmix64(state.stream))) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  /// +1 or -1 with equal probability.
  double sign() { return (engine_() >> 63) != 0 ? 1.0 : -1.0; }

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    // Lemire-style rejection keeps the result unbiased and portable.
    const std::uint64_t limit = (~bound + 1) % bound;
    for (;;) {
      const std::uint64_t x = engine_();
      const unsigned __int128 prod = static_cast<unsigned __int128>(x) * bound;
      if (static_cast<std::uint64_t>(prod) >= limit) return static_cast<std::uint64_t>(prod >> 64);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// i.i.d. N(0, stddev^2) entries, filled row-major.
inline DenseMatrix gen_gaussian(RngState state, Index rows, Index cols, double stddev) {
  require(rows >= 0 && cols >= 0, "gen_gaussian: negative shape");
  require(stddev > 0.0 && std::isfinite(stddev), "gen_gaussian: stddev must be positive");
  Rng rng(state);
  DenseMatrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = stddev * rng.normal();
  return m;
}

/// Each (i, j) included independently with probability rho, visited row-major.
inline SupportMask gen_bernoulli_mask(RngState state, Index rows, Index cols, double rho) {
  require(rho >= 0.0 && rho <= 1.0, "gen_bernoulli_mask: rho must lie in [0, 1]");
  Rng rng(state);
  std::vector<SupportMask::Entry> entries;
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j)
      if (rng.bernoulli(rho)) entries.emplace_back(i, j);
  return SupportMask::from_entries(rows, cols, std::move(entries));
}

/// A support of exactly `count` entries drawn uniformly (partial Fisher-Yates).
inline SupportMask gen_uniform_mask(RngState state, Index rows, Index cols, std::size_t count) {
  const auto total = static_cast<std::uint64_t>(rows * cols);
  require(count <= total, "gen_uniform_mask: count exceeds number of entries");
  Rng rng(state);
  std::vector<std::uint64_t> slots(total);
  for (std::uint64_t k = 0; k < total; ++k) slots[k] = k;
  for (std::uint64_t k = 0; k < count; ++k) {
    const std::uint64_t pick = k + rng.below(total - k);
    std::swap(slots[k], slots[pick]);
  }
  std::vector<SupportMask::Entry> entries;
  entries.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    entries.emplace_back(static_cast<Index>(slots[k] / static_cast<std::uint64_t>(cols)),
                         static_cast<Index>(slots[k] % static_cast<std::uint64_t>(cols)));
  }
  return SupportMask::from_entries(rows, cols, std::move(entries));
}

}  // namespace pcp
