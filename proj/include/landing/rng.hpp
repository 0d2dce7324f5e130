#pragma once

#include "landing/errors.hpp"

#include <cstdint>
#include <random>

namespace landing {

/// Seeded generator with a fixed algorithm: std::mt19937_64 supplies raw
/// 64-bit words, uniforms take the top 53 bits, normals use Box-Muller.
/// Standard-library distributions are avoided because their output is
/// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform();
  double uniform(double lo, double hi);
  double normal();
  // Inclusive range.
  Index uniform_int(Index lo, Index hi);

  Vector normal_vector(Index n);
  Matrix normal_matrix(Index rows, Index cols);
  // B Bᵀ / cols + shift·I
  Matrix random_spd(Index n, double shift = 1.0);
  Matrix random_symmetric(Index n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Derives independent stream seeds from a base seed (splitmix64 step).
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace landing
