#pragma once

#include <cstdint>
#include <random>

namespace semplan {

/// SplitMix64 finalizer. Used to decorrelate seeds before they reach the engine.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives an independent child seed from a parent seed and a stream index.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream) noexcept;

/// Named stream tags so that different consumers of one seed never overlap.
enum class Stream : std::uint64_t {
  kMap = 0x6d6170,
  kNoise = 0x6e6f697365,
  kFading = 0x66616465,
  kPerturb = 0x70657274,
  kSampler = 0x73616d70,
  kOffline = 0x6f66666c,
  kOnline = 0x6f6e6c6e,
  kTrial = 0x747269616c,
  kAllocation = 0x616c6c6f63,
  kScan = 0x7363616e,
};

std::uint64_t derive_seed(std::uint64_t parent, Stream stream) noexcept;

/// Portable random source. The engine (mt19937_64) is fully specified by the
/// standard; the variate transforms are implemented here rather than taken from
/// <random> distributions, whose algorithms differ between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  Rng(std::uint64_t seed, Stream stream);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Standard normal (Box-Muller, second variate cached).
  double normal();

  /// Exponential with unit mean.
  double exponential();

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace semplan
