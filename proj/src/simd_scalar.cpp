#include "strebm/simd.hpp"

namespace strebm::simd::scalar {

double dot(const double* a, const double* b, std::size_t n) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double squared_distance(const double* a, const double* b, std::size_t n) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

void dot4(const double* x, const double* const y[4], std::size_t n, double out[4]) noexcept {
  for (int q = 0; q < 4; ++q) out[q] = dot(x, y[q], n);
}

void dot2x4(const double* const x[2], const double* const y[4], std::size_t n,
            double out[8]) noexcept {
  dot4(x[0], y, n, out);
  dot4(x[1], y, n, out + 4);
}

}  // namespace strebm::simd::scalar
