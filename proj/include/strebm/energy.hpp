#pragma once

// Source-wise structural energies. Only the GP-inspired energy ships; other
// families plug in through SourceEnergy.

#include <memory>
#include <span>
#include <vector>

#include "strebm/kernel_gp.hpp"
#include "strebm/matrix.hpp"

namespace strebm {

struct SourceEnergyReport {
  Vector per_source_energy;  // E_j
  Vector per_source_quad;    // s_j^T K_j^{-1} s_j
  Vector per_source_logdet;  // log|K_j|
  double total = 0.0;        // sum of per_source_energy, in index order
};

// E(s) = 1/2 s^T K^{-1} s + sum_i log L_ii
double gp_energy(std::span<const double> s, const CholFactor& factor);

// dE/ds = K^{-1} s
Vector gp_energy_grad_latent(const CholFactor& factor, std::span<const double> s);

// dE/d(eta) for ell = exp(eta):
//   ell * (1/2 tr(K^{-1} dK/dell) - 1/2 alpha^T (dK/dell) alpha),  alpha = K^{-1} s.
// `spec.length_scale` must be the ell the factor was built with.
double gp_energy_grad_logscale(const IndexGrid& grid, const KernelSpec& spec,
                               std::span<const double> s, const CholFactor& factor);

// Applies gp_energy to every column of S with its own factor.
SourceEnergyReport structural_energy(const Matrix& S, std::span<const CholFactor> factors);

// Value and gradients of one per-source energy at a fixed structural parameter.
struct SourceEnergyEval {
  double energy = 0.0;
  double quad = 0.0;
  double logdet = 0.0;
  Vector grad_latent;     // dE/ds
  double grad_log_param;  // dE/d(log phi)
};

// Extension point for structural energy families. `log_param` is the
// unconstrained per-source parameter (eta for the GP energy).
class SourceEnergy {
 public:
  virtual ~SourceEnergy() = default;
  virtual SourceEnergyEval evaluate(std::span<const double> s, double log_param) const = 0;
};

class GpSourceEnergy final : public SourceEnergy {
 public:
  GpSourceEnergy(IndexGrid grid, double amplitude, double jitter);

  SourceEnergyEval evaluate(std::span<const double> s, double log_param) const override;

  const IndexGrid& grid() const noexcept { return grid_; }
  KernelSpec spec_for(double log_param) const;

 private:
  IndexGrid grid_;
  double amplitude_;
  double jitter_;
};

}  // namespace strebm
