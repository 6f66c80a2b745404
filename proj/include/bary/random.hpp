#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace bary {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; mixes a (seed, stream) pair into an independent seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Generator for sample `index` of a scan seeded with `seed`. Each sample owns
/// its stream, so results do not depend on scheduling.
inline Rng sample_rng(std::uint64_t seed, std::uint64_t index) {
  return Rng(mix_seed(seed, index));
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline Eigen::VectorXd gaussian_vector(Rng& rng, int n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

inline Eigen::MatrixXd gaussian_matrix(Rng& rng, int rows, int cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

/// Uniform point on the unit sphere S^{n-1} of R^n.
inline Eigen::VectorXd unit_vector(Rng& rng, int n) {
  Eigen::VectorXd v;
  do {
    v = gaussian_vector(rng, n);
  } while (v.norm() < 1e-12);
  return v / v.norm();
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with sign fix).
inline Eigen::MatrixXd random_orthogonal(Rng& rng, int n) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian_matrix(rng, n, n));
  Eigen::MatrixXd q = qr.householderQ();
  Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < n; ++i)
    if (r(i, i) < 0) q.col(i) *= -1.0;
  return q;
}

}  // namespace bary
