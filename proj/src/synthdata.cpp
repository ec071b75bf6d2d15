#include "strebm/synthdata.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <span>
#include <sstream>

#include "strebm/errors.hpp"
#include "strebm/rng.hpp"

namespace strebm {
namespace {

// Centered moving average with edge replication; `width` is forced odd.
Vector moving_average(const Vector& x, std::size_t width) {
  if (width <= 1) return x;
  if (width % 2 == 0) ++width;
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(width / 2);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
  Vector out(x.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::ptrdiff_t k = -half; k <= half; ++k)
      acc += x[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i + k, 0, n - 1))];
    out[static_cast<std::size_t>(i)] = acc / static_cast<double>(width);
  }
  return out;
}

std::size_t smoothing_width(double fraction, std::size_t T) {
  return static_cast<std::size_t>(std::lround(fraction * static_cast<double>(T)));
}

// Gram-Schmidt on the columns of a rows x cols Gaussian matrix.
Matrix random_orthonormal_columns(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix Q(rows, cols);
  for (double& v : Q.flat()) v = normal(rng);
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t p = 0; p < c; ++p) {
      double proj = 0.0;
      for (std::size_t r = 0; r < rows; ++r) proj += Q(r, c) * Q(r, p);
      for (std::size_t r = 0; r < rows; ++r) Q(r, c) -= proj * Q(r, p);
    }
    double norm = 0.0;
    for (std::size_t r = 0; r < rows; ++r) norm += Q(r, c) * Q(r, c);
    norm = std::sqrt(norm);
    for (std::size_t r = 0; r < rows; ++r) Q(r, c) /= norm;
  }
  return Q;
}

void add_noise(Matrix& Y, double noise_std, std::uint64_t seed) {
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std))
    throw InvalidArgument("noise_std must be finite and >= 0");
  if (noise_std == 0.0) return;
  std::mt19937_64 rng(derive_seed(seed, SeedStream::observation_noise));
  std::normal_distribution<double> normal(0.0, noise_std);
  for (double& v : Y.flat()) v += normal(rng);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view field, std::size_t line_no) {
  while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.remove_suffix(1);
  while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw InvalidArgument("CSV line " + std::to_string(line_no) + ": cannot parse '" +
                          std::string(field) + "'");
  return v;
}

}  // namespace

std::string_view to_string(MixingKind kind) noexcept {
  return kind == MixingKind::linear ? "linear" : "nonlinear";
}

MixingKind parse_mixing_kind(std::string_view text) {
  if (text == "linear") return MixingKind::linear;
  if (text == "nonlinear") return MixingKind::nonlinear;
  throw InvalidArgument("unknown mixing kind '" + std::string(text) + "'");
}

Matrix generate_sources(std::size_t T, const WaveformOptions& options) {
  if (T < 2) throw InvalidArgument("generate_sources: T must be >= 2");
  const IndexGrid grid = normalized_index(T);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  Vector sine(T);
  Vector square(T);
  Vector saw(T);
  for (std::size_t i = 0; i < T; ++i) {
    const double t = grid[i];
    sine[i] = std::sin(two_pi * options.sine_frequency * t);
    const double sq = std::sin(two_pi * options.square_frequency * t);
    square[i] = sq > 0.0 ? 1.0 : (sq < 0.0 ? -1.0 : 0.0);
    const double phase = options.sawtooth_frequency * t;
    saw[i] = 2.0 * (phase - std::floor(phase)) - 1.0;
  }
  square = moving_average(square, smoothing_width(options.square_smoothing, T));
  saw = moving_average(saw, smoothing_width(options.sawtooth_smoothing, T));

  // On very short grids a waveform can land on the same value at every sample
  // (T <= 4 with the default frequencies). Such a column carries no signal and
  // is returned as zeros instead of failing standardization.
  Matrix S(T, 3);
  for (std::size_t c = 0; c < 3; ++c) {
    const Vector& w = c == 0 ? sine : (c == 1 ? square : saw);
    const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
    if (*hi - *lo <= 1e-12) continue;
    Matrix col(T, 1);
    col.set_column(0, w);
    S.set_column(c, standardize(col).column(0));
  }
  return S;
}

Matrix default_mixing_matrix(std::size_t m, std::size_t n, std::uint64_t seed) {
  if (m == 0 || n == 0) throw InvalidArgument("default_mixing_matrix: empty shape");
  std::mt19937_64 rng(derive_seed(seed, SeedStream::mixing));
  const std::size_t k = std::min(m, n);
  const Matrix U = random_orthonormal_columns(m, k, rng);
  const Matrix V = random_orthonormal_columns(n, k, rng);
  Matrix A(m, n);
  for (std::size_t c = 0; c < k; ++c) {
    const double sigma = k == 1 ? 1.0 : 1.0 - 0.7 * static_cast<double>(c) /
                                                  static_cast<double>(k - 1);
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t q = 0; q < n; ++q) A(r, q) += sigma * U(r, c) * V(q, c);
  }
  return A;
}

GeneratorParams default_mixing_mlp(std::size_t n, std::size_t m, std::size_t hidden,
                                   std::uint64_t seed) {
  if (n == 0 || m == 0 || hidden == 0) throw InvalidArgument("default_mixing_mlp: empty shape");
  std::mt19937_64 rng(derive_seed(seed, SeedStream::mixing));
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  auto fill = [&](Matrix& M, double scale) {
    for (double& v : M.flat()) v = scale * uniform(rng);
  };
  MlpParams p;
  p.W1 = Matrix(hidden, n);
  p.W2 = Matrix(hidden, hidden);
  p.W3 = Matrix(m, hidden);
  fill(p.W1, 0.5);
  fill(p.W2, 1.0 / std::sqrt(static_cast<double>(hidden)));
  fill(p.W3, 1.0 / std::sqrt(static_cast<double>(hidden)));
  p.b1.resize(hidden);
  for (double& v : p.b1) v = 0.1 * uniform(rng);
  p.b2.assign(hidden, 0.0);
  p.b3.assign(m, 0.0);
  return GeneratorParams(std::move(p));
}

Matrix mix_linear(const Matrix& S, const Matrix& A, double noise_std, std::uint64_t seed) {
  if (S.cols() != A.cols()) throw InvalidArgument("mix_linear: A must have one column per source");
  Matrix Y = matmul_transposed(S, A);
  add_noise(Y, noise_std, seed);
  return Y;
}

Matrix mix_nonlinear(const Matrix& S, const GeneratorParams& mlp, double noise_std,
                     std::uint64_t seed) {
  Matrix Y = generator_forward(mlp, S);
  add_noise(Y, noise_std, seed);
  return Y;
}

Matrix standardize(const Matrix& Y) {
  const std::size_t T = Y.rows();
  if (T < 2) throw InvalidArgument("standardize: need at least two samples");
  Matrix out(T, Y.cols());
  const double invT = 1.0 / static_cast<double>(T);
  for (std::size_t c = 0; c < Y.cols(); ++c) {
    double mean = 0.0;
    for (std::size_t i = 0; i < T; ++i) mean += Y(i, c);
    mean *= invT;
    double ss = 0.0;
    for (std::size_t i = 0; i < T; ++i) ss += (Y(i, c) - mean) * (Y(i, c) - mean);
    const double sd = std::sqrt(ss * invT);
    if (!(sd > 0.0) || !std::isfinite(sd))
      throw InvalidArgument("standardize: channel " + std::to_string(c + 1) + " is constant");
    for (std::size_t i = 0; i < T; ++i) out(i, c) = (Y(i, c) - mean) / sd;
  }
  return out;
}

Experiment make_experiment(const ExperimentConfig& config) {
  if (config.T < 2) throw InvalidArgument("experiment: T must be >= 2");
  if (config.m == 0) throw InvalidArgument("experiment: need at least one channel");
  Experiment e{config, normalized_index(config.T), generate_sources(config.T, config.waveforms),
               Matrix(), GeneratorParams(), Matrix()};
  Matrix raw;
  if (config.mixing == MixingKind::linear) {
    e.mixing_matrix = default_mixing_matrix(config.m, e.sources.cols(), config.seed);
    raw = mix_linear(e.sources, e.mixing_matrix, config.noise_std, config.seed);
  } else {
    e.mixing_mlp = default_mixing_mlp(e.sources.cols(), config.m, config.mixing_hidden, config.seed);
    raw = mix_nonlinear(e.sources, e.mixing_mlp, config.noise_std, config.seed);
  }
  e.observations = standardize(raw);
  return e;
}

std::string format_double(double v) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(len));
}

void write_signal_csv(std::ostream& out, std::span<const double> t, const Matrix& values) {
  if (t.size() != values.rows()) throw InvalidArgument("write_signal_csv: t length mismatch");
  out << 't';
  for (std::size_t c = 0; c < values.cols(); ++c) out << ",ch_" << (c + 1);
  out << '\n';
  for (std::size_t i = 0; i < values.rows(); ++i) {
    out << format_double(t[i]);
    for (std::size_t c = 0; c < values.cols(); ++c) out << ',' << format_double(values(i, c));
    out << '\n';
  }
}

Signal read_signal_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("CSV: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line, ',');
  if (header.size() < 2 || header[0] != "t") throw InvalidArgument("CSV: header must start with t");
  for (std::size_t c = 1; c < header.size(); ++c) {
    if (header[c] != "ch_" + std::to_string(c))
      throw InvalidArgument("CSV: unexpected column name '" + std::string(header[c]) + "'");
  }
  const std::size_t k = header.size() - 1;
  Vector t;
  std::vector<double> flat;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split(line, ',');
    if (fields.size() != k + 1)
      throw InvalidArgument("CSV line " + std::to_string(line_no) + ": expected " +
                            std::to_string(k + 1) + " fields");
    t.push_back(parse_double(fields[0], line_no));
    for (std::size_t c = 1; c <= k; ++c) flat.push_back(parse_double(fields[c], line_no));
  }
  Signal s{std::move(t), Matrix(flat.size() / k, k)};
  std::copy(flat.begin(), flat.end(), s.values.data());
  return s;
}

}  // namespace strebm
