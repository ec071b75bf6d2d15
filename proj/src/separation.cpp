#include "strebm/separation.hpp"

#include <cmath>

#include "strebm/errors.hpp"

namespace strebm {
namespace {

struct Normalized {
  Matrix centered;
  Vector denom;  // sqrt(var_j + eps_s)
  Matrix tilde;
};

Normalized normalize(const Matrix& S, double eps_s) {
  if (S.rows() < 2) throw InvalidArgument("normalize_columns: need at least two rows");
  if (!(eps_s > 0.0) || !std::isfinite(eps_s))
    throw InvalidArgument("normalize_columns: eps_s must be finite and > 0");
  const std::size_t T = S.rows();
  const std::size_t n = S.cols();
  const double invT = 1.0 / static_cast<double>(T);
  Normalized out{S, Vector(n), Matrix(T, n)};
  for (std::size_t j = 0; j < n; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < T; ++i) mean += S(i, j);
    mean *= invT;
    double ss = 0.0;
    for (std::size_t i = 0; i < T; ++i) {
      const double c = S(i, j) - mean;
      out.centered(i, j) = c;
      ss += c * c;
    }
    out.denom[j] = std::sqrt(ss * invT + eps_s);
    for (std::size_t i = 0; i < T; ++i) out.tilde(i, j) = out.centered(i, j) / out.denom[j];
  }
  return out;
}

}  // namespace

Matrix normalize_columns(const Matrix& S, double eps_s) { return normalize(S, eps_s).tilde; }

CorrelationMatrix correlation_matrix(const Matrix& S_tilde) {
  if (S_tilde.rows() == 0) throw InvalidArgument("correlation_matrix: empty input");
  Matrix C = transposed_matmul(S_tilde, S_tilde);
  const double invT = 1.0 / static_cast<double>(S_tilde.rows());
  for (double& v : C.flat()) v *= invT;
  // Mirror so the result is exactly symmetric regardless of summation order.
  for (std::size_t i = 0; i < C.rows(); ++i)
    for (std::size_t j = 0; j < i; ++j) C(j, i) = C(i, j);
  return {std::move(C)};
}

double separation_loss(const CorrelationMatrix& C) {
  double acc = 0.0;
  for (std::size_t i = 0; i < C.C.rows(); ++i) {
    for (std::size_t j = 0; j < C.C.cols(); ++j) {
      const double d = C.C(i, j) - (i == j ? 1.0 : 0.0);
      acc += d * d;
    }
  }
  return acc;
}

SeparationEval separation_value_and_grad(const Matrix& S, double eps_s) {
  const Normalized nz = normalize(S, eps_s);
  const CorrelationMatrix C = correlation_matrix(nz.tilde);
  const std::size_t T = S.rows();
  const std::size_t n = S.cols();
  const double invT = 1.0 / static_cast<double>(T);

  SeparationEval out{separation_loss(C), Matrix(T, n)};

  // dL/dC = 2 (C - I); C = S~^T S~ / T  =>  dL/dS~ = (4/T) S~ (C - I).
  Matrix G = C.C;
  for (std::size_t i = 0; i < n; ++i) G(i, i) -= 1.0;
  Matrix g_tilde = matmul(nz.tilde, G);
  for (double& v : g_tilde.flat()) v *= 4.0 * invT;

  // Through s~ = c / d with d = sqrt(|c|^2 / T + eps), then through centering.
  for (std::size_t j = 0; j < n; ++j) {
    const double d = nz.denom[j];
    double gc = 0.0;
    for (std::size_t i = 0; i < T; ++i) gc += g_tilde(i, j) * nz.centered(i, j);
    const double coef = gc * invT / (d * d * d);
    double mean = 0.0;
    for (std::size_t i = 0; i < T; ++i) {
      const double v = g_tilde(i, j) / d - nz.centered(i, j) * coef;
      out.grad(i, j) = v;
      mean += v;
    }
    mean *= invT;
    for (std::size_t i = 0; i < T; ++i) out.grad(i, j) -= mean;
  }
  if (!std::isfinite(out.loss) || !all_finite(out.grad.flat()))
    throw NumericalInstability("separation_grad: non-finite value");
  return out;
}

Matrix separation_grad(const Matrix& S, double eps_s) {
  return separation_value_and_grad(S, eps_s).grad;
}

}  // namespace strebm
