#include "strebm/kernel_gp.hpp"

#include <cmath>
#include <string>

#include "strebm/simd.hpp"

namespace strebm {
namespace {

// Far off-diagonal factor entries decay toward the subnormal range, where
// arithmetic is orders of magnitude slower. Entries below the cutoff are
// stored as zero; this perturbs L L^T by far less than one ulp of K, and keeps
// every product of two stored entries in the normal range.
constexpr double kFlushBelow = 1e-150;

inline double flush_tiny(double v) noexcept {
  return std::abs(v) < kFlushBelow ? 0.0 : v;
}

}  // namespace

IndexGrid::IndexGrid(Vector values) : values_(std::move(values)) {
  if (values_.empty()) throw InvalidArgument("IndexGrid: empty grid");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double u = values_[i];
    if (!std::isfinite(u) || u < 0.0 || u > 1.0)
      throw InvalidArgument("IndexGrid: entry " + std::to_string(i) + " outside [0,1]");
    if (i > 0 && u < values_[i - 1])
      throw InvalidArgument("IndexGrid: entries must be non-decreasing");
  }
}

IndexGrid normalized_index(std::size_t T) {
  if (T == 0) throw InvalidArgument("normalized_index: T must be >= 1");
  Vector u(T, 0.0);
  if (T >= 2) {
    const double denom = static_cast<double>(T - 1);
    for (std::size_t i = 0; i < T; ++i) u[i] = static_cast<double>(i) / denom;
    u[T - 1] = 1.0;
  }
  return IndexGrid(std::move(u));
}

void KernelSpec::validate() const {
  if (!std::isfinite(amplitude) || amplitude <= 0.0)
    throw InvalidArgument("KernelSpec: amplitude must be finite and > 0");
  if (!std::isfinite(length_scale) || length_scale <= 0.0)
    throw InvalidArgument("KernelSpec: length_scale must be finite and > 0");
  // Zero jitter is accepted for building raw kernels; the trainer insists on > 0.
  if (!std::isfinite(jitter) || jitter < 0.0)
    throw InvalidArgument("KernelSpec: jitter must be finite and >= 0");
}

CholFactor::CholFactor(Matrix lower) : lower_(std::move(lower)) {
  if (lower_.rows() != lower_.cols()) throw InvalidArgument("CholFactor: matrix not square");
  for (std::size_t i = 0; i < lower_.rows(); ++i) {
    if (!(lower_(i, i) > 0.0)) throw InvalidArgument("CholFactor: non-positive diagonal");
    for (std::size_t j = i + 1; j < lower_.cols(); ++j)
      if (lower_(i, j) != 0.0) throw InvalidArgument("CholFactor: not lower triangular");
  }
}

void CholFactor::forward_solve(std::span<double> x) const {
  const std::size_t T = size();
  if (x.size() != T) throw InvalidArgument("forward_solve: dimension mismatch");
  for (std::size_t i = 0; i < T; ++i) {
    const double acc = simd::dot(lower_.row(i).first(i), x.first(i));
    x[i] = (x[i] - acc) / lower_(i, i);
  }
}

void CholFactor::backward_solve(std::span<double> x) const {
  const std::size_t T = size();
  if (x.size() != T) throw InvalidArgument("backward_solve: dimension mismatch");
  for (std::size_t i = T; i-- > 0;) {
    x[i] /= lower_(i, i);
    simd::axpy(-x[i], lower_.row(i).first(i), x.first(i));
  }
}

Matrix CholFactor::inverse_transposed() const {
  const std::size_t T = size();
  Matrix inv_t(T, T);
  // Column c of L^{-1} by forward substitution against e_c. Blocks of four
  // columns are solved two rows at a time so each row of L is streamed once
  // per block; entries above a column's diagonal are zero and drop out of the
  // shared dots.
  std::size_t c = 0;
  double acc[8];
  for (; c + 4 <= T; c += 4) {
    double* cols[4];
    for (std::size_t q = 0; q < 4; ++q) cols[q] = inv_t.row(c + q).data();
    const double* y[4] = {cols[0] + c, cols[1] + c, cols[2] + c, cols[3] + c};
    const auto solve_row = [&](std::size_t i) {
      simd::dot4(lower_.row(i).data() + c, y, i - c, acc);
      for (std::size_t q = 0; q < 4; ++q) {
        if (i == c + q) cols[q][i] = 1.0 / lower_(i, i);
        else if (i > c + q) cols[q][i] = -acc[q] / lower_(i, i);
      }
    };
    std::size_t i = c;
    for (; i < c + 4; ++i) solve_row(i);
    for (; i + 2 <= T; i += 2) {
      const double* x[2] = {lower_.row(i).data() + c, lower_.row(i + 1).data() + c};
      simd::dot2x4(x, y, i - c, acc);
      const double link = lower_(i + 1, i);
      for (std::size_t q = 0; q < 4; ++q) {
        cols[q][i] = -acc[q] / lower_(i, i);
        cols[q][i + 1] = -(acc[4 + q] + link * cols[q][i]) / lower_(i + 1, i + 1);
      }
    }
    if (i < T) solve_row(i);
  }
  for (; c < T; ++c) {
    auto col = inv_t.row(c);
    col[c] = 1.0 / lower_(c, c);
    for (std::size_t i = c + 1; i < T; ++i) {
      const double dot = simd::dot(lower_.row(i).subspan(c, i - c), col.subspan(c, i - c));
      col[i] = -dot / lower_(i, i);
    }
  }
  return inv_t;
}

Matrix build_rbf_covariance(const IndexGrid& grid, const KernelSpec& spec) {
  spec.validate();
  const std::size_t T = grid.size();
  const double inv_two_ell_sq = 1.0 / (2.0 * spec.length_scale * spec.length_scale);
  Matrix K(T, T);
  for (std::size_t i = 0; i < T; ++i) {
    for (std::size_t r = 0; r < i; ++r) {
      const double d = grid[i] - grid[r];
      const double v = spec.amplitude * std::exp(-d * d * inv_two_ell_sq);
      K(i, r) = v;
      K(r, i) = v;
    }
    K(i, i) = spec.amplitude + spec.jitter;
  }
  return K;
}

Matrix kernel_lengthscale_derivative(const IndexGrid& grid, const KernelSpec& spec) {
  spec.validate();
  const std::size_t T = grid.size();
  const double ell = spec.length_scale;
  const double inv_two_ell_sq = 1.0 / (2.0 * ell * ell);
  const double inv_ell_cubed = 1.0 / (ell * ell * ell);
  Matrix dK(T, T);
  for (std::size_t i = 0; i < T; ++i) {
    for (std::size_t r = 0; r < i; ++r) {
      const double d = grid[i] - grid[r];
      const double d2 = d * d;
      const double v = spec.amplitude * std::exp(-d2 * inv_two_ell_sq) * d2 * inv_ell_cubed;
      dK(i, r) = v;
      dK(r, i) = v;
    }
  }
  return dK;
}

CholFactor cholesky(const Matrix& K) {
  if (K.rows() != K.cols()) throw InvalidArgument("cholesky: matrix not square");
  const std::size_t T = K.rows();
  Matrix L(T, T);
  // Left-looking over panels of four columns; reads only the lower triangle
  // of K. Rows below a panel are updated two at a time against the four
  // shared pivot rows, then finished with the short in-panel corrections.
  const auto factor_column = [&](std::size_t c, std::size_t row_end) {
    const auto Lc = L.row(c);
    const double pivot = K(c, c) - simd::dot(Lc.first(c), Lc.first(c));
    if (!(pivot > 0.0) || !std::isfinite(pivot)) throw NotPositiveDefinite(c, pivot);
    Lc[c] = std::sqrt(pivot);
    for (std::size_t i = c + 1; i < row_end; ++i)
      L(i, c) = flush_tiny((K(i, c) - simd::dot(L.row(i).first(c), Lc.first(c))) / Lc[c]);
  };
  std::size_t k = 0;
  double acc[8];
  for (; k + 4 <= T; k += 4) {
    for (std::size_t c = k; c < k + 4; ++c) factor_column(c, k + 4);
    const double* y[4] = {L.row(k).data(), L.row(k + 1).data(), L.row(k + 2).data(),
                          L.row(k + 3).data()};
    const auto finish_row = [&](std::size_t i, const double* partial) {
      for (std::size_t q = 0; q < 4; ++q) {
        const std::size_t c = k + q;
        double v = K(i, c) - partial[q];
        for (std::size_t j = k; j < c; ++j) v -= L(i, j) * L(c, j);
        L(i, c) = flush_tiny(v / L(c, c));
      }
    };
    std::size_t i = k + 4;
    for (; i + 2 <= T; i += 2) {
      const double* x[2] = {L.row(i).data(), L.row(i + 1).data()};
      simd::dot2x4(x, y, k, acc);
      finish_row(i, acc);
      finish_row(i + 1, acc + 4);
    }
    if (i < T) {
      simd::dot4(L.row(i).data(), y, k, acc);
      finish_row(i, acc);
    }
  }
  for (; k < T; ++k) factor_column(k, T);
  return CholFactor(std::move(L));
}

double log_determinant(const CholFactor& factor) {
  double acc = 0.0;
  for (std::size_t i = 0; i < factor.size(); ++i) acc += std::log(factor.diagonal(i));
  return 2.0 * acc;
}

SolveResult solve_and_quadform(const CholFactor& factor, std::span<const double> s) {
  if (s.size() != factor.size())
    throw InvalidArgument("solve_and_quadform: vector length does not match factor");
  SolveResult out{Vector(s.begin(), s.end()), 0.0};
  factor.forward_solve(out.alpha);
  // s^T K^{-1} s = |L^{-1} s|^2, which is non-negative by construction.
  out.quad = simd::dot(out.alpha, out.alpha);
  factor.backward_solve(out.alpha);
  return out;
}

double inverse_trace_product(const CholFactor& factor, const Matrix& B) {
  const std::size_t T = factor.size();
  if (B.rows() != T || B.cols() != T)
    throw InvalidArgument("inverse_trace_product: shape mismatch");
  // K^{-1} = L^{-T} L^{-1} = M M^T with M upper triangular, so
  // (K^{-1})_{ir} = <M_i, M_r> over columns >= max(i, r).
  const Matrix M = factor.inverse_transposed();
  const auto entry = [&](std::size_t i, std::size_t r) {
    return simd::dot(M.row(i).subspan(i), M.row(r).subspan(i));
  };
  double diag = 0.0;
  double off = 0.0;
  double acc[8];
  // Rows are taken in pairs against blocks of four earlier rows; the second
  // row of a pair is zero at column i so both dots can start there.
  std::size_t i = 0;
  for (; i + 2 <= T; i += 2) {
    diag += entry(i, i) * B(i, i) + entry(i + 1, i + 1) * B(i + 1, i + 1);
    off += entry(i + 1, i) * B(i + 1, i);
    const double* x[2] = {M.row(i).data() + i, M.row(i + 1).data() + i};
    std::size_t r = 0;
    for (; r + 4 <= i; r += 4) {
      const double* y[4] = {M.row(r).data() + i, M.row(r + 1).data() + i,
                            M.row(r + 2).data() + i, M.row(r + 3).data() + i};
      simd::dot2x4(x, y, T - i, acc);
      for (std::size_t q = 0; q < 4; ++q)
        off += acc[q] * B(i, r + q) + acc[4 + q] * B(i + 1, r + q);
    }
    for (; r < i; ++r) off += entry(i, r) * B(i, r) + entry(i + 1, r) * B(i + 1, r);
  }
  if (i < T) {
    diag += entry(i, i) * B(i, i);
    for (std::size_t r = 0; r < i; ++r) off += entry(i, r) * B(i, r);
  }
  return diag + 2.0 * off;
}

}  // namespace strebm
