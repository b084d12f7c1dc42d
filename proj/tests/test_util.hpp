#pragma once
// Shared test fixtures: a bit-portable RNG and random SPD problems.

#include <Eigen/Dense>

#include <cstdint>
#include <random>

#include "rieszlab/geometry.hpp"

namespace testutil {

// mt19937_64 has a standardized bit stream; mapping to doubles by hand keeps
// fixtures identical across platforms and library versions.
struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}
  double uniform() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }
  double symmetric() { return 2.0 * uniform() - 1.0; }
};

inline rieszlab::Mat random_spd(Rng& rng, Eigen::Index n, double ridge = 0.1) {
  rieszlab::Mat a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = rng.symmetric();
  rieszlab::Mat k = a.transpose() * a;
  k.diagonal().array() += ridge;
  return k;
}

inline rieszlab::Vec random_vec(Rng& rng, Eigen::Index n, double scale = 2.0) {
  rieszlab::Vec b(n);
  for (Eigen::Index i = 0; i < n; ++i) b[i] = scale * rng.symmetric();
  return b;
}

}  // namespace testutil
