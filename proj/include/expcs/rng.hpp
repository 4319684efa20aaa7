#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <vector>

namespace expcs {

/// Counter-based 64-bit generator.
///
/// Output number i of a stream is mix64(key + i * golden), so a stream is
/// fully described by its key. Keys are derived from a user seed plus a list
/// of stream ids (trial index, coordinate, ...), which makes parallel loops
/// reproducible regardless of scheduling: every work item owns its stream.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed);

  /// Stream keyed by (seed, ids...).
  static Rng stream(std::uint64_t seed, std::initializer_list<std::uint64_t> ids);

  /// Child stream; does not advance this generator.
  Rng split(std::uint64_t id) const;

  result_type operator()();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound);

  /// Uniform integer in [lo, hi] inclusive.
  std::int64_t between(std::int64_t lo, std::int64_t hi);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// SplitMix64 finaliser.
std::uint64_t mix64(std::uint64_t z);

/// `count` distinct values from [0, range), sorted ascending (Floyd's algorithm).
std::vector<std::uint32_t> sample_without_replacement(Rng& rng, std::uint32_t range,
                                                      std::uint32_t count);

}  // namespace expcs
