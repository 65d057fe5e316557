#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sea {

// Gate vector: one activity flag per audit-space unit, indexed by unit id.
using GateVector = std::vector<bool>;
using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return mix64(mix64(base) ^ (stream * 0xd1b54a32d192ed03ULL + 0x632be59bd9b4e019ULL));
}

inline Rng make_rng(std::uint64_t base, std::uint64_t stream) {
  return Rng(derive_seed(base, stream));
}

std::string to_bitstring(const GateVector& gates);
GateVector from_bitstring(std::string_view bits);

std::size_t count_active(const GateVector& gates);
std::vector<std::size_t> active_ids(const GateVector& gates);

// Sum of costs over active gates, accumulated in ascending id order so every
// caller sees the same rounding.
double total_cost(const GateVector& gates, std::span<const double> costs);
double total_score(const GateVector& gates, std::span<const double> scores);

}  // namespace sea
