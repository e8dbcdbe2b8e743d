#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>

namespace coopht {

// Hand-rolled conversions on top of mt19937_64 so that streams do not depend
// on standard-library distribution internals.

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Index draw from an explicit probability vector.
inline int categorical(std::mt19937_64& rng, const Eigen::VectorXd& probs) {
  double u = uniform01(rng);
  for (Eigen::Index i = 0; i < probs.size() - 1; ++i) {
    u -= probs(i);
    if (u < 0.0) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size() - 1);
}

/// Dirichlet(1) draw: normalized i.i.d. exponentials.
inline Eigen::VectorXd dirichlet1(std::mt19937_64& rng, int k) {
  Eigen::VectorXd v(k);
  for (int i = 0; i < k; ++i) {
    double u = uniform01(rng);
    if (u <= 0.0) u = 0x1.0p-53;
    v(i) = -std::log(u);
  }
  return v / v.sum();
}

}  // namespace coopht
