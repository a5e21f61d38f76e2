#pragma once

#include <cstddef>
#include <cstdint>

namespace sagd {

/// Deterministic 64-bit generator: xoshiro256** (Blackman & Vigna), with the
/// four state words filled from the seed by successive splitmix64 outputs.
///
/// The algorithm is frozen. Every derived draw (uniform reals, bounded
/// integers, normals) is computed here with integer arithmetic or a fixed
/// sequence of IEEE operations, so a seed maps to the same stream on every
/// build. Not thread-safe; give each thread its own instance.
class SeededRng {
 public:
  using result_type = std::uint64_t;

  explicit SeededRng(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return UINT64_MAX; }

  result_type operator()() { return next(); }
  result_type next();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  /// Uniform integer in [0, bound). Exact (Lemire's multiply-and-reject).
  std::size_t uniform_index(std::size_t bound);

  /// Standard normal via the Marsaglia polar method; spare value cached.
  double normal();

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// One splitmix64 step; advances `state` and returns the mixed output.
std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace sagd
