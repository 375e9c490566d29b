#include "semplan/rng.hpp"

#include <cmath>
#include <numbers>

namespace semplan {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream) noexcept {
  return mix64(mix64(parent) ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

std::uint64_t derive_seed(std::uint64_t parent, Stream stream) noexcept {
  return derive_seed(parent, static_cast<std::uint64_t>(stream));
}

Rng::Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

Rng::Rng(std::uint64_t seed, Stream stream) : engine_(derive_seed(seed, stream)) {}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_normal_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_normal_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

double Rng::exponential() {
  double u = uniform();
  while (u <= 0.0) u = uniform();
  return -std::log(u);
}

std::uint64_t Rng::below(std::uint64_t n) {
  // Reject the top partial block so the modulo is unbiased.
  const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % n);
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % n;
}

}  // namespace semplan
