#ifndef ANISOCRIT_SAMPLING_HPP
#define ANISOCRIT_SAMPLING_HPP

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <random>

namespace anisocrit {

// splitmix64 finalizer
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Engine for sample `index` of a seeded run. Samples are independent of
/// evaluation order, so reports do not depend on how the work is split.
inline std::mt19937_64 sample_engine(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(mix_seed(seed, index));
}

template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> gaussian_vector(std::mt19937_64& engine,
                                                         Eigen::Index dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = static_cast<Scalar>(normal(engine));
  return v;
}

/// Uniform direction on the Euclidean unit sphere.
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> sphere_direction(std::mt19937_64& engine,
                                                          Eigen::Index dim) {
  for (;;) {
    auto v = gaussian_vector<Scalar>(engine, dim);
    const Scalar n = v.norm();
    if (n > Scalar(1e-12)) return v / n;
  }
}

/// Gaussian vector rescaled by a log-uniform factor in [1e-2, 1e2].
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> scaled_sample(std::mt19937_64& engine,
                                                       Eigen::Index dim) {
  std::uniform_real_distribution<double> expo(-2.0, 2.0);
  const double scale = std::pow(10.0, expo(engine));
  return gaussian_vector<Scalar>(engine, dim) * static_cast<Scalar>(scale);
}

}  // namespace anisocrit

#endif  // ANISOCRIT_SAMPLING_HPP
