#include "strebm/simd.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include "strebm/errors.hpp"

namespace strebm::simd {
namespace {

struct Table {
  double (*dot)(const double*, const double*, std::size_t) noexcept;
  void (*axpy)(double, const double*, double*, std::size_t) noexcept;
  double (*squared_distance)(const double*, const double*, std::size_t) noexcept;
  void (*dot4)(const double*, const double* const[4], std::size_t, double[4]) noexcept;
  void (*dot2x4)(const double* const[2], const double* const[4], std::size_t, double[8]) noexcept;
};

constexpr Table kScalar{&scalar::dot, &scalar::axpy, &scalar::squared_distance, &scalar::dot4,
                   &scalar::dot2x4};
#if defined(STREBM_HAVE_AVX2_KERNELS)
constexpr Table kAvx2{&avx2::dot, &avx2::axpy, &avx2::squared_distance, &avx2::dot4,
                 &avx2::dot2x4};
#endif

const Table* table_for(Backend b) noexcept {
#if defined(STREBM_HAVE_AVX2_KERNELS)
  if (b == Backend::avx2) return &kAvx2;
#endif
  (void)b;
  return &kScalar;
}

Backend initial_backend() noexcept {
  if (const char* env = std::getenv("STREBM_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return Backend::scalar;
    if (v == "avx2" && supported(Backend::avx2)) return Backend::avx2;
  }
  return supported(Backend::avx2) ? Backend::avx2 : Backend::scalar;
}

struct State {
  std::atomic<Backend> backend{initial_backend()};
  std::atomic<const Table*> table{table_for(backend.load())};
};

State& state() noexcept {
  static State s;
  return s;
}

}  // namespace

bool supported(Backend backend) noexcept {
  switch (backend) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
#if defined(STREBM_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

Backend active() noexcept { return state().backend.load(std::memory_order_relaxed); }

void select(Backend backend) {
  if (!supported(backend)) {
    throw InvalidArgument("SIMD backend '" + std::string(name(backend)) +
                          "' is not supported on this CPU");
  }
  state().backend.store(backend, std::memory_order_relaxed);
  state().table.store(table_for(backend), std::memory_order_relaxed);
}

std::string_view name(Backend backend) noexcept {
  return backend == Backend::avx2 ? "avx2" : "scalar";
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  return state().table.load(std::memory_order_relaxed)->dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept {
  state().table.load(std::memory_order_relaxed)->axpy(alpha, x.data(), y.data(), x.size());
}

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
  return state().table.load(std::memory_order_relaxed)->squared_distance(a.data(), b.data(),
                                                                         a.size());
}

void dot4(const double* x, const double* const y[4], std::size_t n, double out[4]) noexcept {
  state().table.load(std::memory_order_relaxed)->dot4(x, y, n, out);
}

void dot2x4(const double* const x[2], const double* const y[4], std::size_t n,
            double out[8]) noexcept {
  state().table.load(std::memory_order_relaxed)->dot2x4(x, y, n, out);
}

}  // namespace strebm::simd
