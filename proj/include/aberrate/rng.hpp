#pragma once

// Keyed random streams. Every draw that must be reproducible regardless of scheduling is taken
// from a generator seeded by (master seed, item index, purpose) instead of a shared sequence.

#include <array>
#include <cstdint>
#include <random>

namespace aberrate::rng {

enum class Purpose : std::uint32_t { corrupt_choice = 1, augment = 2, cascade = 3 };

inline std::mt19937_64 keyed(std::uint64_t seed, std::uint64_t index, Purpose purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    static_cast<std::uint32_t>(purpose)};
  return std::mt19937_64(seq);
}

// Uniform integer in [0, n).
inline int choose(std::mt19937_64& gen, int n) { return std::uniform_int_distribution<int>(0, n - 1)(gen); }

// Beta(a, b) as the ratio of two gamma variates.
inline double beta(std::mt19937_64& gen, double a, double b) {
  const double x = std::gamma_distribution<double>(a, 1.0)(gen);
  const double y = std::gamma_distribution<double>(b, 1.0)(gen);
  return x / (x + y);
}

// Flat Dirichlet in four dimensions from normalized Exp(1) variates.
inline std::array<double, 4> flat_dirichlet4(std::mt19937_64& gen) {
  std::exponential_distribution<double> e(1.0);
  std::array<double, 4> p{};
  double sum = 0.0;
  for (auto& v : p) sum += (v = e(gen));
  for (auto& v : p) v /= sum;
  return p;
}

}  // namespace aberrate::rng
