#pragma once

// Shared fixtures for the unit and acceptance tests: Eigen oracles, seeded
// random instances and a central finite-difference driver.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>

#include "strebm/kernel_gp.hpp"
#include "strebm/matrix.hpp"

namespace strebm::testing {

inline Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  return out;
}

inline Eigen::VectorXd to_eigen(std::span<const double> v) {
  Eigen::VectorXd out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out(i) = v[i];
  return out;
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed,
                            double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(rows, cols);
  for (double& v : m.flat()) v = normal(rng);
  return m;
}

inline Vector random_vector(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  const Matrix m = random_matrix(n, 1, seed, scale);
  return Vector(m.flat().begin(), m.flat().end());
}

// A A^T + T I: comfortably positive definite.
inline Matrix random_spd(std::size_t T, std::uint64_t seed) {
  const Matrix A = random_matrix(T, T, seed);
  Matrix K = matmul_transposed(A, A);
  for (std::size_t i = 0; i < T; ++i) K(i, i) += static_cast<double>(T);
  return K;
}

// Random sorted grid in [0,1] with both endpoints present.
inline IndexGrid random_grid(std::size_t T, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector u(T);
  for (double& v : u) v = unif(rng);
  std::sort(u.begin(), u.end());
  if (T >= 2) {
    u.front() = 0.0;
    u.back() = 1.0;
  }
  return IndexGrid(std::move(u));
}

inline double rel_err(double a, double b, double floor = 1e-12) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// Central differences of f over every entry of x (x is restored afterwards).
inline Vector central_diff(const std::function<double()>& f, std::span<double> x,
                           double h = 1e-5) {
  Vector g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double fp = f();
    x[i] = saved - h;
    const double fm = f();
    x[i] = saved;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

// Max over entries of |a - b| / max(|a|, |b|, floor). The floor keeps entries
// that are zero analytically from dividing round-off by round-off.
inline double max_rel_err(std::span<const double> a, std::span<const double> b,
                          double floor = 1e-6) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, rel_err(a[i], b[i], floor));
  return worst;
}

}  // namespace strebm::testing
