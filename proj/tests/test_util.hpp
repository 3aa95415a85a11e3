#pragma once

#include "asap/spd.hpp"

#include <Eigen/Dense>

#include <random>

namespace asap::testing {

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

// G^T G + eps I with G square Gaussian; well away from singular for eps ~ 1e-1.
inline SpdMatrix random_spd(std::mt19937_64& rng, Eigen::Index n, double eps = 0.1) {
  const Matrix g = random_matrix(rng, n, n);
  return validate_spd(g.transpose() * g / static_cast<double>(n) + eps * Matrix::Identity(n, n));
}

// Sample concentrated around `center`: center^{1/2} exp(scale * S) center^{1/2}.
inline SpdMatrix random_spd_near(std::mt19937_64& rng, const SpdMatrix& center, double scale) {
  const Eigen::Index n = center.order();
  Matrix s = random_matrix(rng, n, n);
  s = 0.5 * (s + s.transpose()) * scale;
  const Matrix half = spd::sqrtm(center.matrix());
  Matrix m = half * spd::expm(s) * half;
  return validate_spd(0.5 * (m + m.transpose()));
}

inline Matrix random_invertible(std::mt19937_64& rng, Eigen::Index n) {
  return random_matrix(rng, n, n) + 2.0 * Matrix::Identity(n, n);
}

inline int random_order(std::mt19937_64& rng, int lo = 2, int hi = 8) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

}  // namespace asap::testing
