#pragma once

#include <cstdint>
#include <random>

namespace groupinv {

/// Seeded random source with a pinned draw algorithm.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// C++ standard, and every distribution here is implemented by hand on top
/// of its raw 64-bit words (never via std:: distributions, which differ
/// across standard libraries):
///   - uniform():     53-bit mantissa construction, (word >> 11) * 2^-53
///   - uniform_int(): rejection sampling on the low bits
///   - normal():      Marsaglia polar method with a cached spare
/// So a given seed replays the same draw sequence on any platform, up to
/// libm rounding of sqrt/log in normal().
class Rng {
  public:
    explicit Rng(uint64_t seed) : seed_(seed), gen_(seed) {}

    uint64_t seed() const { return seed_; }

    uint64_t next_u64() { return gen_(); }

    /// Uniform in [0, 1).
    double uniform();
    /// Uniform in [lo, hi).
    double uniform(double lo, double hi);
    /// Uniform integer in [0, n); n must be positive.
    int uniform_int(int n);
    /// Standard normal draw.
    double normal();
    double normal(double mean, double stddev);

    /// Independent generator derived from (seed, tag). Streams with distinct
    /// tags do not interact, so e.g. sampler draws never perturb init draws.
    Rng substream(uint64_t tag) const;

  private:
    uint64_t seed_;
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// splitmix64 finalizer; used for substream derivation and stable hashing.
uint64_t mix64(uint64_t x);

// Fixed substream tags used across the project.
namespace stream {
inline constexpr uint64_t kContent = 1;
inline constexpr uint64_t kStyle = 2;
inline constexpr uint64_t kGroup = 3;
inline constexpr uint64_t kLabelRule = 4;
inline constexpr uint64_t kMixing = 5;
inline constexpr uint64_t kInit = 6;
inline constexpr uint64_t kSampler = 7;
inline constexpr uint64_t kSplit = 8;
inline constexpr uint64_t kEval = 9;
inline constexpr uint64_t kShift = 10;
}  // namespace stream

}  // namespace groupinv
