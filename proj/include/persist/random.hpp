#ifndef PERSIST_RANDOM_HPP
#define PERSIST_RANDOM_HPP

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <random>

#include "persist/state.hpp"

namespace persist {

using Rng = std::mt19937_64;

inline std::array<double, 3> random_bloch_vector(Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  double x = g(rng), y = g(rng), z = g(rng);
  double n = std::sqrt(x * x + y * y + z * z);
  while (n < 1e-12) {
    x = g(rng);
    y = g(rng);
    z = g(rng);
    n = std::sqrt(x * x + y * y + z * z);
  }
  return {x / n, y / n, z / n};
}

inline Vector random_unit_vector(long dim, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vector v(dim);
  for (long i = 0; i < dim; ++i) v(i) = Complex(g(rng), g(rng));
  return v / v.norm();
}

/// Hilbert-Schmidt random density matrix via a Ginibre matrix.
inline Matrix random_density_matrix(long dim, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix a(dim, dim);
  for (long i = 0; i < dim; ++i)
    for (long j = 0; j < dim; ++j) a(i, j) = Complex(g(rng), g(rng));
  Matrix m = a * a.adjoint();
  return m / m.trace().real();
}

inline Matrix random_hermitian(long dim, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix a(dim, dim);
  for (long i = 0; i < dim; ++i)
    for (long j = 0; j < dim; ++j) a(i, j) = Complex(g(rng), g(rng));
  return 0.5 * (a + a.adjoint().eval());
}

/// Deterministic per-subtask seed derived from a master seed (splitmix64).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace persist

#endif
