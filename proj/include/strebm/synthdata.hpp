#pragma once

// Synthetic blind-source-separation testbed: three reference waveforms on the
// normalized index, linear or MLP mixing, per-channel standardization, and
// the CSV signal format.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

#include "strebm/kernel_gp.hpp"
#include "strebm/matrix.hpp"
#include "strebm/observation.hpp"

namespace strebm {

enum class MixingKind { linear, nonlinear };
std::string_view to_string(MixingKind kind) noexcept;
MixingKind parse_mixing_kind(std::string_view text);

struct WaveformOptions {
  double sine_frequency = 3.0;
  double square_frequency = 5.0;
  double sawtooth_frequency = 2.0;
  // Moving-average widths as fractions of T (0 disables smoothing).
  double square_smoothing = 0.04;
  double sawtooth_smoothing = 0.0;
};

// Columns: sine, smoothed square wave, smoothed sawtooth; each standardized to
// zero mean and unit population variance. The waveforms are fixed, so equal
// T gives identical output. T >= 2.
Matrix generate_sources(std::size_t T, const WaveformOptions& options = {});

// m x n matrix U diag(sigma) V^T with orthonormal U, V drawn from `seed` and
// singular values evenly spaced in [0.3, 1] (condition number <= 1/0.3).
Matrix default_mixing_matrix(std::size_t m, std::size_t n, std::uint64_t seed);

// Fixed tanh MLP with entries uniform in [-1, 1] (hidden width `hidden`).
GeneratorParams default_mixing_mlp(std::size_t n, std::size_t m, std::size_t hidden,
                                   std::uint64_t seed);

// Y = S A^T + noise_std * N(0, 1)
Matrix mix_linear(const Matrix& S, const Matrix& A, double noise_std, std::uint64_t seed);

// Y = g(S) + noise_std * N(0, 1)
Matrix mix_nonlinear(const Matrix& S, const GeneratorParams& mlp, double noise_std,
                     std::uint64_t seed);

// Per-channel zero mean, unit population variance. Throws on T < 2 or a
// constant channel.
Matrix standardize(const Matrix& Y);

struct ExperimentConfig {
  std::size_t T = 1000;
  std::size_t m = 3;
  MixingKind mixing = MixingKind::linear;
  double noise_std = 0.0;
  std::uint64_t seed = 7;
  std::size_t mixing_hidden = 8;
  WaveformOptions waveforms;
};

struct Experiment {
  ExperimentConfig config;
  IndexGrid grid;
  Matrix sources;         // T x 3 ground truth
  Matrix mixing_matrix;   // m x n, linear mixing only
  GeneratorParams mixing_mlp;  // nonlinear mixing only
  Matrix observations;    // T x m, standardized
};

Experiment make_experiment(const ExperimentConfig& config);

// CSV signal format: header `t,ch_1,...,ch_k`, one row per sample, 17
// significant digits so values round-trip exactly.
struct Signal {
  Vector t;
  Matrix values;
};
void write_signal_csv(std::ostream& out, std::span<const double> t, const Matrix& values);
Signal read_signal_csv(std::istream& in);

std::string format_double(double v);

}  // namespace strebm
