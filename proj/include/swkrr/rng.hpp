#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace swkrr {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from a path of integers, e.g. (seed, repeat, item).
/// Order matters; the result does not depend on any global state.
constexpr std::uint64_t derive_seed(std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t h = 0x6a09e667f3bcc908ULL;
  for (std::uint64_t v : path) h = mix64(h ^ mix64(v));
  return h;
}

inline Rng make_rng(std::initializer_list<std::uint64_t> path) { return Rng(derive_seed(path)); }

}  // namespace swkrr
