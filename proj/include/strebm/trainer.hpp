#pragma once

// Joint optimization of the latent trajectories S, the observation map theta
// and the log length-scales eta under
//
//   L = 1/(2 nu_y) |Y - g(S)|^2 + lambda_gp * sum_j E_j(s_j; ell_j) + lambda_sep * |C - I|^2
//
// with one full-batch Adam step per epoch and ell_j = exp(eta_j) clamped to
// [ell_min, ell_max] after every step.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "strebm/adam.hpp"
#include "strebm/kernel_gp.hpp"
#include "strebm/matrix.hpp"
#include "strebm/observation.hpp"

namespace strebm {

struct TrainConfig {
  std::size_t n_sources = 3;
  double nu_y = 10.0;
  double lambda_gp = 3e-4;
  double lambda_sep = 1.0;
  double sigma_init = 0.1;
  double sigma_f_sq = 1.0;
  double jitter = 1e-5;
  double eps_s = 1e-8;
  double learning_rate = 1e-2;
  std::size_t epochs = 4000;
  std::uint64_t seed = 0;
  double ell_min = 1e-2;
  double ell_max = 2.0;
  // Empty means log of n values log-spaced over [0.05, 0.5].
  Vector eta_init;
  GeneratorShape generator;
  AdamConfig adam;

  // Throws InvalidArgument on any violated invariant.
  void validate() const;
  Vector resolved_eta_init() const;
};

// Values logged for one epoch. Loss terms and energies are evaluated at the
// parameters the gradient was taken at; length_scales and the monitoring
// correlation describe the state after the update.
struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double loss_total = 0.0;
  double loss_obs = 0.0;
  double loss_gp = 0.0;   // sum_j E_j, unweighted
  double loss_sep = 0.0;  // |C - I|^2, unweighted
  Vector length_scales;
  Vector per_source_gp_energy;
  std::optional<double> monitor_corr;
  Vector monitor_per_pair;  // empty unless monitor_corr is set
};

struct OptimizerState {
  std::size_t step = 0;
  AdamMoments latents;
  AdamMoments eta;
  std::vector<AdamMoments> generator;  // one per GeneratorParams::tensors() entry
};

struct TrainState {
  Matrix S;  // T x n latent trajectories
  GeneratorParams generator;
  Vector eta;
  OptimizerState optimizer;
  std::size_t epoch = 0;
  std::vector<EpochRecord> history;

  Vector length_scales() const;
};

struct LossParts {
  double total = 0.0;
  double obs = 0.0;
  double gp = 0.0;
  double sep = 0.0;
  Vector per_source_gp_energy;
};

struct ObjectiveGradient {
  LossParts loss;
  Matrix grad_S;
  GeneratorParams grad_generator;
  Vector grad_eta;
};

// S = sigma_init * Xi, Xi iid N(0, 1) from a generator seeded with `seed`.
Matrix init_latents(std::size_t T, std::size_t n, double sigma_init, std::uint64_t seed);

// Fresh state for T samples and m observed channels.
TrainState init_state(std::size_t T, std::size_t m, const TrainConfig& config);

LossParts total_loss(const TrainState& state, const Matrix& Y, const TrainConfig& config);

// Loss and its gradient with respect to S, theta and eta.
ObjectiveGradient objective_gradient(const TrainState& state, const Matrix& Y,
                                     const TrainConfig& config);

// One Adam step on all groups followed by the length-scale clamp. Appends an
// EpochRecord (without monitoring) and returns it. Throws TrainingDiverged
// with the failing epoch when the loss or a gradient is not finite; the state
// is left as it was before the call.
const EpochRecord& train_step(TrainState& state, const Matrix& Y, const TrainConfig& config);

struct MonitorOptions {
  const Matrix* truth = nullptr;  // enables monitoring when set
  std::size_t every = 1;          // monitor epochs divisible by this
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Runs config.epochs steps from `state`. The callback sees every record as
// soon as it is complete, so a divergence still leaves the finished epochs
// both in state.history and with the caller.
void train_from(TrainState& state, const Matrix& Y, const TrainConfig& config,
                const MonitorOptions& monitor = {}, const EpochCallback& on_epoch = {});

// init_state followed by train_from.
TrainState train(const Matrix& Y, const TrainConfig& config, const MonitorOptions& monitor = {},
                 const EpochCallback& on_epoch = {});

// First epoch whose monitor_corr reaches `threshold`, if any.
std::optional<std::size_t> epochs_to_threshold(const std::vector<EpochRecord>& history,
                                               double threshold);

}  // namespace strebm
