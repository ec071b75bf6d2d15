#pragma once

// RBF covariance over a normalized index and the Cholesky machinery the
// source-wise energies are evaluated with.

#include <cstddef>
#include <span>
#include <utility>

#include "strebm/matrix.hpp"

namespace strebm {

// Normalized sample index in [0,1], non-decreasing.
class IndexGrid {
 public:
  IndexGrid() = default;
  // Validates length >= 1, finiteness and ordering.
  explicit IndexGrid(Vector values);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }

 private:
  Vector values_;
};

// Uniform grid u_i = i / (T - 1); a single point at 0 when T == 1.
IndexGrid normalized_index(std::size_t T);

struct KernelSpec {
  double amplitude = 1.0;     // sigma_f^2, fixed
  double jitter = 1e-5;       // added to the diagonal
  double length_scale = 0.1;  // ell_j

  void validate() const;
};

// Lower-triangular L with L L^T = K. Stored dense row-major; the strict upper
// triangle is zero.
class CholFactor {
 public:
  CholFactor() = default;
  explicit CholFactor(Matrix lower);

  std::size_t size() const noexcept { return lower_.rows(); }
  const Matrix& lower() const noexcept { return lower_; }
  double diagonal(std::size_t i) const noexcept { return lower_(i, i); }

  // x <- L^{-1} x
  void forward_solve(std::span<double> x) const;
  // x <- L^{-T} x
  void backward_solve(std::span<double> x) const;
  // L^{-T}, i.e. row c holds column c of L^{-1}. Upper triangular.
  Matrix inverse_transposed() const;

 private:
  Matrix lower_;
};

// K(i,r) = amplitude * exp(-(u_i - u_r)^2 / (2 ell^2)) + jitter * delta_ir.
// Only the lower triangle is evaluated; the upper one is mirrored from it.
Matrix build_rbf_covariance(const IndexGrid& grid, const KernelSpec& spec);

// dK/d(ell): amplitude * exp(-d^2 / (2 ell^2)) * d^2 / ell^3, zero diagonal.
Matrix kernel_lengthscale_derivative(const IndexGrid& grid, const KernelSpec& spec);

// Throws NotPositiveDefinite on a non-positive (or non-finite) pivot.
CholFactor cholesky(const Matrix& K);

// log|K| = 2 * sum_i log L_ii
double log_determinant(const CholFactor& factor);

struct SolveResult {
  Vector alpha;  // K^{-1} s
  double quad;   // s^T K^{-1} s
};

// Forward then backward triangular solve; no inverse is formed.
SolveResult solve_and_quadform(const CholFactor& factor, std::span<const double> s);

// tr(K^{-1} B) for symmetric B, through the triangular inverse of the factor.
double inverse_trace_product(const CholFactor& factor, const Matrix& B);

}  // namespace strebm
