#include "strebm/observation.hpp"

#include <cmath>
#include <string>

#include "strebm/errors.hpp"
#include "strebm/simd.hpp"

namespace strebm {
namespace {

// out(i, :) = in(i, :) * W^T + b
Matrix affine_rows(const Matrix& in, const Matrix& W, const Vector* b) {
  Matrix out = matmul_transposed(in, W);
  if (b != nullptr) {
    for (std::size_t i = 0; i < out.rows(); ++i) {
      auto row = out.row(i);
      for (std::size_t k = 0; k < row.size(); ++k) row[k] += (*b)[k];
    }
  }
  return out;
}

void tanh_inplace(Matrix& m) {
  for (double& v : m.flat()) v = std::tanh(v);
}

Vector column_sums(const Matrix& m) {
  Vector out(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) simd::axpy(1.0, m.row(i), out);
  return out;
}

// grad wrt the pre-activation, given grad wrt the tanh output z.
void tanh_backward_inplace(Matrix& grad, const Matrix& z) {
  auto g = grad.flat();
  const auto zz = z.flat();
  for (std::size_t k = 0; k < g.size(); ++k) g[k] *= 1.0 - zz[k] * zz[k];
}

void require_input_width(const GeneratorParams& params, const Matrix& S, const char* what) {
  if (S.cols() != params.input_dim())
    throw InvalidArgument(std::string(what) + ": latent width " + std::to_string(S.cols()) +
                          " does not match generator input " +
                          std::to_string(params.input_dim()));
}

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(cols)));
  Matrix m(rows, cols);
  for (double& v : m.flat()) v = normal(rng);
  return m;
}

}  // namespace

std::string_view to_string(GeneratorKind kind) noexcept {
  return kind == GeneratorKind::linear ? "linear" : "mlp";
}

GeneratorKind parse_generator_kind(std::string_view text) {
  if (text == "linear") return GeneratorKind::linear;
  if (text == "mlp") return GeneratorKind::mlp;
  throw InvalidArgument("unknown generator kind '" + std::string(text) + "'");
}

GeneratorParams::GeneratorParams(LinearParams p) : params_(std::move(p)) { validate(); }
GeneratorParams::GeneratorParams(MlpParams p) : params_(std::move(p)) { validate(); }

void GeneratorParams::validate() const {
  if (const auto* lp = std::get_if<LinearParams>(&params_)) {
    if (lp->use_bias && lp->b.size() != lp->W.rows())
      throw InvalidArgument("linear generator: bias length must equal output width");
  } else {
    const auto& p = std::get<MlpParams>(params_);
    const std::size_t h = p.W1.rows();
    if (p.b1.size() != h || p.W2.rows() != h || p.W2.cols() != h || p.b2.size() != h ||
        p.W3.cols() != h || p.b3.size() != p.W3.rows())
      throw InvalidArgument("mlp generator: inconsistent layer shapes");
  }
}

std::size_t GeneratorParams::input_dim() const noexcept {
  return kind() == GeneratorKind::linear ? linear().W.cols() : mlp().W1.cols();
}

std::size_t GeneratorParams::output_dim() const noexcept {
  return kind() == GeneratorKind::linear ? linear().W.rows() : mlp().W3.rows();
}

std::vector<std::span<double>> GeneratorParams::tensors() {
  if (auto* lp = std::get_if<LinearParams>(&params_)) {
    std::vector<std::span<double>> out{lp->W.flat()};
    if (lp->use_bias) out.emplace_back(lp->b);
    return out;
  }
  auto& p = std::get<MlpParams>(params_);
  return {p.W1.flat(), p.b1, p.W2.flat(), p.b2, p.W3.flat(), p.b3};
}

std::vector<std::span<const double>> GeneratorParams::tensors() const {
  auto spans = const_cast<GeneratorParams*>(this)->tensors();
  return {spans.begin(), spans.end()};
}

std::vector<std::string_view> GeneratorParams::tensor_names() const {
  if (kind() == GeneratorKind::linear) {
    if (linear().use_bias) return {"W", "b"};
    return {"W"};
  }
  return {"W1", "b1", "W2", "b2", "W3", "b3"};
}

GeneratorParams GeneratorParams::zeros_like() const {
  GeneratorParams out = *this;
  for (auto t : out.tensors()) std::fill(t.begin(), t.end(), 0.0);
  return out;
}

bool GeneratorParams::all_finite() const {
  for (auto t : tensors())
    if (!strebm::all_finite(t)) return false;
  return true;
}

bool operator==(const GeneratorParams& a, const GeneratorParams& b) {
  if (a.kind() != b.kind()) return false;
  if (a.kind() == GeneratorKind::linear) {
    const auto& x = a.linear();
    const auto& y = b.linear();
    return x.use_bias == y.use_bias && x.W == y.W && (!x.use_bias || x.b == y.b);
  }
  const auto& x = a.mlp();
  const auto& y = b.mlp();
  return x.W1 == y.W1 && x.b1 == y.b1 && x.W2 == y.W2 && x.b2 == y.b2 && x.W3 == y.W3 &&
         x.b3 == y.b3 && x.activation == y.activation;
}

GeneratorParams init_generator(const GeneratorShape& shape, std::size_t n_in, std::size_t m_out,
                               std::mt19937_64& rng) {
  if (n_in == 0 || m_out == 0) throw InvalidArgument("init_generator: empty dimensions");
  if (shape.kind == GeneratorKind::linear) {
    LinearParams p;
    p.W = gaussian_matrix(m_out, n_in, rng);
    p.use_bias = shape.use_bias;
    if (p.use_bias) p.b.assign(m_out, 0.0);
    return GeneratorParams(std::move(p));
  }
  if (shape.hidden == 0) throw InvalidArgument("init_generator: hidden width must be > 0");
  MlpParams p;
  const std::size_t h = shape.hidden;
  p.W1 = gaussian_matrix(h, n_in, rng);
  p.b1.assign(h, 0.0);
  p.W2 = gaussian_matrix(h, h, rng);
  p.b2.assign(h, 0.0);
  p.W3 = gaussian_matrix(m_out, h, rng);
  p.b3.assign(m_out, 0.0);
  return GeneratorParams(std::move(p));
}

Matrix generator_forward(const GeneratorParams& params, const Matrix& S) {
  require_input_width(params, S, "generator_forward");
  if (params.kind() == GeneratorKind::linear) {
    const auto& p = params.linear();
    return affine_rows(S, p.W, p.use_bias ? &p.b : nullptr);
  }
  const auto& p = params.mlp();
  Matrix z1 = affine_rows(S, p.W1, &p.b1);
  tanh_inplace(z1);
  Matrix z2 = affine_rows(z1, p.W2, &p.b2);
  tanh_inplace(z2);
  return affine_rows(z2, p.W3, &p.b3);
}

double observation_loss(const Matrix& Y, const Matrix& Yhat, double nu_y) {
  require_same_shape(Y, Yhat, "observation_loss");
  if (!(nu_y > 0.0) || !std::isfinite(nu_y))
    throw InvalidArgument("observation_loss: nu_y must be finite and > 0");
  return simd::squared_distance(Y.flat(), Yhat.flat()) / (2.0 * nu_y);
}

GeneratorGradient generator_backward(const GeneratorParams& params, const Matrix& S,
                                     const Matrix& Y, double nu_y) {
  require_input_width(params, S, "generator_backward");
  if (Y.rows() != S.rows() || Y.cols() != params.output_dim())
    throw InvalidArgument("generator_backward: observation shape mismatch");

  GeneratorGradient out;
  out.grad_params = params.zeros_like();

  // Forward pass, keeping the activations the backward pass needs.
  Matrix yhat;
  Matrix z1;
  Matrix z2;
  if (params.kind() == GeneratorKind::linear) {
    const auto& p = params.linear();
    yhat = affine_rows(S, p.W, p.use_bias ? &p.b : nullptr);
  } else {
    const auto& p = params.mlp();
    z1 = affine_rows(S, p.W1, &p.b1);
    tanh_inplace(z1);
    z2 = affine_rows(z1, p.W2, &p.b2);
    tanh_inplace(z2);
    yhat = affine_rows(z2, p.W3, &p.b3);
  }
  out.loss = observation_loss(Y, yhat, nu_y);
  if (!std::isfinite(out.loss)) throw NumericalInstability("generator_backward: non-finite loss");

  // R = dL/dYhat = (Yhat - Y) / nu_y
  Matrix R = std::move(yhat);
  {
    auto r = R.flat();
    const auto y = Y.flat();
    const double inv_nu = 1.0 / nu_y;
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = (r[k] - y[k]) * inv_nu;
  }

  if (params.kind() == GeneratorKind::linear) {
    const auto& p = params.linear();
    auto& g = out.grad_params.linear();
    g.W = transposed_matmul(R, S);
    if (p.use_bias) g.b = column_sums(R);
    out.grad_S = matmul(R, p.W);
  } else {
    const auto& p = params.mlp();
    auto& g = out.grad_params.mlp();
    g.W3 = transposed_matmul(R, z2);
    g.b3 = column_sums(R);
    Matrix d2 = matmul(R, p.W3);
    tanh_backward_inplace(d2, z2);
    g.W2 = transposed_matmul(d2, z1);
    g.b2 = column_sums(d2);
    Matrix d1 = matmul(d2, p.W2);
    tanh_backward_inplace(d1, z1);
    g.W1 = transposed_matmul(d1, S);
    g.b1 = column_sums(d1);
    out.grad_S = matmul(d1, p.W1);
  }
  if (!out.grad_params.all_finite() || !all_finite(out.grad_S.flat()))
    throw NumericalInstability("generator_backward: non-finite gradient");
  return out;
}

}  // namespace strebm
