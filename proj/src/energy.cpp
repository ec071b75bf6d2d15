#include "strebm/energy.hpp"

#include <cmath>

#include "strebm/errors.hpp"

namespace strebm {
namespace {

double half_logdet(const CholFactor& factor) {
  double acc = 0.0;
  for (std::size_t i = 0; i < factor.size(); ++i) acc += std::log(factor.diagonal(i));
  return acc;
}

double quad_form(const Matrix& A, std::span<const double> x) {
  // x^T A x for symmetric A, lower triangle doubled.
  double diag = 0.0;
  double off = 0.0;
  for (std::size_t i = 0; i < A.rows(); ++i) {
    const auto Ai = A.row(i);
    diag += Ai[i] * x[i] * x[i];
    double acc = 0.0;
    for (std::size_t r = 0; r < i; ++r) acc += Ai[r] * x[r];
    off += acc * x[i];
  }
  return diag + 2.0 * off;
}

double logscale_grad(const Matrix& dK, const CholFactor& factor, std::span<const double> alpha,
                     double ell) {
  const double trace = inverse_trace_product(factor, dK);
  const double data_fit = quad_form(dK, alpha);
  const double g = ell * 0.5 * (trace - data_fit);
  if (!std::isfinite(g)) throw NumericalInstability("gp_energy_grad_logscale: non-finite gradient");
  return g;
}

}  // namespace

double gp_energy(std::span<const double> s, const CholFactor& factor) {
  const SolveResult sol = solve_and_quadform(factor, s);
  return 0.5 * sol.quad + half_logdet(factor);
}

Vector gp_energy_grad_latent(const CholFactor& factor, std::span<const double> s) {
  return solve_and_quadform(factor, s).alpha;
}

double gp_energy_grad_logscale(const IndexGrid& grid, const KernelSpec& spec,
                               std::span<const double> s, const CholFactor& factor) {
  if (grid.size() != factor.size() || s.size() != factor.size())
    throw InvalidArgument("gp_energy_grad_logscale: dimension mismatch");
  const SolveResult sol = solve_and_quadform(factor, s);
  const Matrix dK = kernel_lengthscale_derivative(grid, spec);
  return logscale_grad(dK, factor, sol.alpha, spec.length_scale);
}

SourceEnergyReport structural_energy(const Matrix& S, std::span<const CholFactor> factors) {
  if (S.cols() != factors.size())
    throw InvalidArgument("structural_energy: column count differs from number of factors");
  SourceEnergyReport report;
  const std::size_t n = S.cols();
  report.per_source_energy.resize(n);
  report.per_source_quad.resize(n);
  report.per_source_logdet.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const Vector s = S.column(j);
    const SolveResult sol = solve_and_quadform(factors[j], s);
    const double hld = half_logdet(factors[j]);
    report.per_source_quad[j] = sol.quad;
    report.per_source_logdet[j] = 2.0 * hld;
    report.per_source_energy[j] = 0.5 * sol.quad + hld;
  }
  for (double e : report.per_source_energy) report.total += e;
  return report;
}

GpSourceEnergy::GpSourceEnergy(IndexGrid grid, double amplitude, double jitter)
    : grid_(std::move(grid)), amplitude_(amplitude), jitter_(jitter) {
  spec_for(0.0).validate();
  if (!(jitter_ > 0.0)) throw InvalidArgument("GpSourceEnergy: jitter must be > 0");
}

KernelSpec GpSourceEnergy::spec_for(double log_param) const {
  return KernelSpec{amplitude_, jitter_, std::exp(log_param)};
}

SourceEnergyEval GpSourceEnergy::evaluate(std::span<const double> s, double log_param) const {
  if (s.size() != grid_.size()) throw InvalidArgument("GpSourceEnergy: dimension mismatch");
  const KernelSpec spec = spec_for(log_param);
  const CholFactor factor = cholesky(build_rbf_covariance(grid_, spec));
  SolveResult sol = solve_and_quadform(factor, s);
  SourceEnergyEval out;
  const double hld = half_logdet(factor);
  out.quad = sol.quad;
  out.logdet = 2.0 * hld;
  out.energy = 0.5 * sol.quad + hld;
  const Matrix dK = kernel_lengthscale_derivative(grid_, spec);
  out.grad_log_param = logscale_grad(dK, factor, sol.alpha, spec.length_scale);
  out.grad_latent = std::move(sol.alpha);
  return out;
}

}  // namespace strebm
