#pragma once

// Row-wise observation map g_theta: latent rows s(i) in R^n to observation
// rows y(i) in R^m, either a linear mixer or a two-hidden-layer tanh MLP.

#include <cstddef>
#include <random>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "strebm/matrix.hpp"

namespace strebm {

enum class GeneratorKind { linear, mlp };
enum class Activation { tanh };

std::string_view to_string(GeneratorKind kind) noexcept;
GeneratorKind parse_generator_kind(std::string_view text);

struct LinearParams {
  Matrix W;  // m x n
  Vector b;  // m, ignored unless use_bias
  bool use_bias = false;
};

struct MlpParams {
  Matrix W1;  // h x n
  Vector b1;
  Matrix W2;  // h x h
  Vector b2;
  Matrix W3;  // m x h
  Vector b3;
  Activation activation = Activation::tanh;
};

class GeneratorParams {
 public:
  GeneratorParams() = default;
  explicit GeneratorParams(LinearParams p);
  explicit GeneratorParams(MlpParams p);

  GeneratorKind kind() const noexcept {
    return std::holds_alternative<LinearParams>(params_) ? GeneratorKind::linear
                                                         : GeneratorKind::mlp;
  }
  std::size_t input_dim() const noexcept;
  std::size_t output_dim() const noexcept;

  const LinearParams& linear() const { return std::get<LinearParams>(params_); }
  LinearParams& linear() { return std::get<LinearParams>(params_); }
  const MlpParams& mlp() const { return std::get<MlpParams>(params_); }
  MlpParams& mlp() { return std::get<MlpParams>(params_); }

  // Every trainable array, in a fixed order. A linear map without bias does
  // not expose b.
  std::vector<std::span<double>> tensors();
  std::vector<std::span<const double>> tensors() const;
  std::vector<std::string_view> tensor_names() const;

  // Same structure, every entry zero.
  GeneratorParams zeros_like() const;
  bool all_finite() const;

  friend bool operator==(const GeneratorParams& a, const GeneratorParams& b);

 private:
  void validate() const;
  std::variant<LinearParams, MlpParams> params_;
};

struct GeneratorShape {
  GeneratorKind kind = GeneratorKind::linear;
  std::size_t hidden = 32;
  bool use_bias = false;  // linear only; the MLP always carries biases
};

// Weights ~ N(0, 1/fan_in), biases zero.
GeneratorParams init_generator(const GeneratorShape& shape, std::size_t n_in, std::size_t m_out,
                               std::mt19937_64& rng);

Matrix generator_forward(const GeneratorParams& params, const Matrix& S);

// (1 / (2 nu_y)) * |Y - Yhat|_F^2
double observation_loss(const Matrix& Y, const Matrix& Yhat, double nu_y);

struct GeneratorGradient {
  GeneratorParams grad_params;
  Matrix grad_S;
  double loss = 0.0;
};

GeneratorGradient generator_backward(const GeneratorParams& params, const Matrix& S,
                                     const Matrix& Y, double nu_y);

}  // namespace strebm
