#pragma once

// Inner-loop kernels used by the Cholesky factorization, triangular solves and
// the dense products in the trainer. Every kernel has a portable scalar
// reference and, on x86-64, an AVX2/FMA variant chosen at runtime.
//
// The selected backend is process-wide. STREBM_SIMD=scalar|avx2 in the
// environment overrides the automatic choice at startup.

#include <cstddef>
#include <span>
#include <string_view>

namespace strebm::simd {

enum class Backend { scalar, avx2 };

bool supported(Backend backend) noexcept;
Backend active() noexcept;
// Throws InvalidArgument if the CPU does not support `backend`.
void select(Backend backend);
std::string_view name(Backend backend) noexcept;

// Sum of a[i] * b[i]; the spans must have equal length.
double dot(std::span<const double> a, std::span<const double> b) noexcept;
// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept;
// Sum of (a[i] - b[i])^2.
double squared_distance(std::span<const double> a, std::span<const double> b) noexcept;
// out[q] = sum_i x[i] * y[q][i] for four vectors sharing x, each of length n.
void dot4(const double* x, const double* const y[4], std::size_t n, double out[4]) noexcept;
// out[4 * p + q] = sum_i x[p][i] * y[q][i]: a 2x4 block of dot products.
void dot2x4(const double* const x[2], const double* const y[4], std::size_t n,
            double out[8]) noexcept;

namespace scalar {
double dot(const double* a, const double* b, std::size_t n) noexcept;
void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept;
double squared_distance(const double* a, const double* b, std::size_t n) noexcept;
void dot4(const double* x, const double* const y[4], std::size_t n, double out[4]) noexcept;
void dot2x4(const double* const x[2], const double* const y[4], std::size_t n,
            double out[8]) noexcept;
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define STREBM_HAVE_AVX2_KERNELS 1
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n) noexcept;
void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept;
double squared_distance(const double* a, const double* b, std::size_t n) noexcept;
void dot4(const double* x, const double* const y[4], std::size_t n, double out[4]) noexcept;
void dot2x4(const double* const x[2], const double* const y[4], std::size_t n,
            double out[8]) noexcept;
}  // namespace avx2
#endif

// Restores the previously active backend on destruction. Used by tests that
// compare the two backends.
class ScopedBackend {
 public:
  explicit ScopedBackend(Backend backend) : previous_(active()) { select(backend); }
  ~ScopedBackend() { select(previous_); }
  ScopedBackend(const ScopedBackend&) = delete;
  ScopedBackend& operator=(const ScopedBackend&) = delete;

 private:
  Backend previous_;
};

}  // namespace strebm::simd
