#pragma once

#include <cstdint>

namespace flock {

// Stream-derivation scheme identifier, recorded in report metadata so that
// published numbers can be tied to the exact generator.
inline constexpr const char* kRngVersion = "splitmix64-xoshiro256ss/1";

// xoshiro256** seeded through splitmix64. Small, fast, and fully
// deterministic across platforms; streams are derived from (master seed,
// trial, substream, tag) so concurrent trials never share state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform on the open interval (0, 1).
  double uniform01();

  /// Uniform on [a, b).
  double uniform(double a, double b);

  /// Standard normal draw (Marsaglia polar, one cached spare).
  double normal();

 private:
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Independent stream keyed by (master, a, b, c). Equal keys give
/// bitwise-equal streams; distinct keys give statistically independent ones.
Rng derive_stream(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                  std::uint64_t c = 0);

}  // namespace flock
