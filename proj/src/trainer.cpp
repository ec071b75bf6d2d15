#include "strebm/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "strebm/energy.hpp"
#include "strebm/errors.hpp"
#include "strebm/evaluation.hpp"
#include "strebm/rng.hpp"
#include "strebm/separation.hpp"
#include "strebm/simd.hpp"

namespace strebm {
namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw InvalidArgument(std::string("TrainConfig: ") + name + " must be finite and > 0");
}

void require_non_negative(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v))
    throw InvalidArgument(std::string("TrainConfig: ") + name + " must be finite and >= 0");
}

// Clamp eta so that exp(eta) lands inside [lo, hi] exactly, not just up to the
// rounding of exp(log(x)).
double clamp_log_scale(double eta, double lo, double hi) {
  double out = std::clamp(eta, std::log(lo), std::log(hi));
  while (std::exp(out) < lo) out = std::nextafter(out, HUGE_VAL);
  while (std::exp(out) > hi) out = std::nextafter(out, -HUGE_VAL);
  return out;
}

void require_consistent(const TrainState& state, const Matrix& Y, const TrainConfig& config) {
  if (state.S.cols() != config.n_sources || state.eta.size() != config.n_sources)
    throw InvalidArgument("train: state does not match n_sources");
  if (Y.rows() != state.S.rows())
    throw InvalidArgument("train: observation length differs from latent length");
  if (Y.cols() != state.generator.output_dim() || state.generator.input_dim() != config.n_sources)
    throw InvalidArgument("train: generator shape does not match data");
}

bool gradient_finite(const ObjectiveGradient& g) {
  return std::isfinite(g.loss.total) && all_finite(g.grad_S.flat()) && all_finite(g.grad_eta) &&
         g.grad_generator.all_finite();
}

}  // namespace

void TrainConfig::validate() const {
  if (n_sources == 0) throw InvalidArgument("TrainConfig: n_sources must be >= 1");
  require_positive(nu_y, "nu_y");
  require_non_negative(lambda_gp, "lambda_gp");
  require_non_negative(lambda_sep, "lambda_sep");
  require_positive(sigma_init, "sigma_init");
  require_positive(sigma_f_sq, "sigma_f_sq");
  require_positive(jitter, "jitter");
  require_positive(eps_s, "eps_s");
  // A zero learning rate is accepted: it freezes the parameters.
  require_non_negative(learning_rate, "learning_rate");
  require_positive(ell_min, "ell_min");
  require_positive(ell_max, "ell_max");
  if (!(ell_min < ell_max)) throw InvalidArgument("TrainConfig: ell_min must be < ell_max");
  if (!eta_init.empty()) {
    if (eta_init.size() != n_sources)
      throw InvalidArgument("TrainConfig: eta_init needs one entry per source");
    for (double e : eta_init) {
      const double ell = std::exp(e);
      if (!std::isfinite(e) || ell < ell_min || ell > ell_max)
        throw InvalidArgument("TrainConfig: exp(eta_init) must lie in [ell_min, ell_max]");
    }
  }
  if (generator.kind == GeneratorKind::mlp && generator.hidden == 0)
    throw InvalidArgument("TrainConfig: MLP hidden width must be >= 1");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0))
    throw InvalidArgument("TrainConfig: Adam betas must lie in [0, 1)");
  require_positive(adam.epsilon, "adam.epsilon");
}

Vector TrainConfig::resolved_eta_init() const {
  if (!eta_init.empty()) return eta_init;
  constexpr double lo = 0.05;
  constexpr double hi = 0.5;
  Vector eta(n_sources);
  for (std::size_t j = 0; j < n_sources; ++j) {
    const double frac =
        n_sources == 1 ? 0.5 : static_cast<double>(j) / static_cast<double>(n_sources - 1);
    eta[j] = std::log(lo) + frac * (std::log(hi) - std::log(lo));
  }
  return eta;
}

Vector TrainState::length_scales() const {
  Vector out(eta.size());
  for (std::size_t j = 0; j < eta.size(); ++j) out[j] = std::exp(eta[j]);
  return out;
}

Matrix init_latents(std::size_t T, std::size_t n, double sigma_init, std::uint64_t seed) {
  if (T == 0 || n == 0) throw InvalidArgument("init_latents: T and n must be >= 1");
  if (!(sigma_init >= 0.0) || !std::isfinite(sigma_init))
    throw InvalidArgument("init_latents: sigma_init must be finite and >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix S(T, n);
  for (double& v : S.flat()) v = sigma_init * normal(rng);
  return S;
}

TrainState init_state(std::size_t T, std::size_t m, const TrainConfig& config) {
  config.validate();
  TrainState state;
  state.S = init_latents(T, config.n_sources, config.sigma_init,
                         derive_seed(config.seed, SeedStream::latents));
  std::mt19937_64 rng(derive_seed(config.seed, SeedStream::generator));
  state.generator = init_generator(config.generator, config.n_sources, m, rng);
  state.eta = config.resolved_eta_init();
  state.optimizer.generator.resize(state.generator.tensors().size());
  return state;
}

ObjectiveGradient objective_gradient(const TrainState& state, const Matrix& Y,
                                     const TrainConfig& config) {
  require_consistent(state, Y, config);
  const std::size_t T = state.S.rows();
  const std::size_t n = config.n_sources;

  GeneratorGradient obs = generator_backward(state.generator, state.S, Y, config.nu_y);
  ObjectiveGradient out;
  out.loss.obs = obs.loss;
  out.grad_S = std::move(obs.grad_S);
  out.grad_generator = std::move(obs.grad_params);
  out.grad_eta.assign(n, 0.0);
  out.loss.per_source_gp_energy.assign(n, 0.0);

  const GpSourceEnergy energy(normalized_index(T), config.sigma_f_sq, config.jitter);
  for (std::size_t j = 0; j < n; ++j) {
    const Vector s = state.S.column(j);
    const SourceEnergyEval e = energy.evaluate(s, state.eta[j]);
    out.loss.per_source_gp_energy[j] = e.energy;
    for (std::size_t i = 0; i < T; ++i) out.grad_S(i, j) += config.lambda_gp * e.grad_latent[i];
    out.grad_eta[j] = config.lambda_gp * e.grad_log_param;
  }
  for (double e : out.loss.per_source_gp_energy) out.loss.gp += e;

  if (T >= 2) {
    const SeparationEval sep = separation_value_and_grad(state.S, config.eps_s);
    out.loss.sep = sep.loss;
    if (config.lambda_sep > 0.0) simd::axpy(config.lambda_sep, sep.grad.flat(), out.grad_S.flat());
  }

  out.loss.total =
      out.loss.obs + config.lambda_gp * out.loss.gp + config.lambda_sep * out.loss.sep;
  return out;
}

LossParts total_loss(const TrainState& state, const Matrix& Y, const TrainConfig& config) {
  require_consistent(state, Y, config);
  const std::size_t n = config.n_sources;
  LossParts parts;
  parts.obs = observation_loss(Y, generator_forward(state.generator, state.S), config.nu_y);
  const IndexGrid grid = normalized_index(state.S.rows());
  parts.per_source_gp_energy.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const KernelSpec spec{config.sigma_f_sq, config.jitter, std::exp(state.eta[j])};
    const CholFactor factor = cholesky(build_rbf_covariance(grid, spec));
    parts.per_source_gp_energy[j] = gp_energy(state.S.column(j), factor);
  }
  for (double e : parts.per_source_gp_energy) parts.gp += e;
  if (state.S.rows() >= 2)
    parts.sep = separation_loss(correlation_matrix(normalize_columns(state.S, config.eps_s)));
  parts.total = parts.obs + config.lambda_gp * parts.gp + config.lambda_sep * parts.sep;
  return parts;
}

const EpochRecord& train_step(TrainState& state, const Matrix& Y, const TrainConfig& config) {
  const std::size_t epoch = state.epoch + 1;
  ObjectiveGradient g;
  try {
    g = objective_gradient(state, Y, config);
  } catch (const NotPositiveDefinite& e) {
    throw TrainingDiverged(epoch, e.what());
  } catch (const NumericalInstability& e) {
    throw TrainingDiverged(epoch, e.what());
  }
  if (!gradient_finite(g)) throw TrainingDiverged(epoch, "non-finite loss or gradient");

  OptimizerState& opt = state.optimizer;
  const std::size_t step = opt.step + 1;
  const double lr = config.learning_rate;
  adam_update(state.S.flat(), g.grad_S.flat(), opt.latents, config.adam, lr, step);
  adam_update(state.eta, g.grad_eta, opt.eta, config.adam, lr, step);
  auto params = state.generator.tensors();
  const auto grads = std::as_const(g.grad_generator).tensors();
  opt.generator.resize(params.size());
  for (std::size_t k = 0; k < params.size(); ++k)
    adam_update(params[k], grads[k], opt.generator[k], config.adam, lr, step);
  opt.step = step;

  for (double& e : state.eta) e = clamp_log_scale(e, config.ell_min, config.ell_max);
  state.epoch = epoch;

  EpochRecord rec;
  rec.epoch = epoch;
  rec.loss_total = g.loss.total;
  rec.loss_obs = g.loss.obs;
  rec.loss_gp = g.loss.gp;
  rec.loss_sep = g.loss.sep;
  rec.length_scales = state.length_scales();
  rec.per_source_gp_energy = std::move(g.loss.per_source_gp_energy);
  state.history.push_back(std::move(rec));
  return state.history.back();
}

void train_from(TrainState& state, const Matrix& Y, const TrainConfig& config,
                const MonitorOptions& monitor, const EpochCallback& on_epoch) {
  config.validate();
  if (monitor.truth != nullptr && !monitor.truth->same_shape(state.S))
    throw InvalidArgument("train: ground-truth sources must be T x n_sources");
  const std::size_t every = std::max<std::size_t>(monitor.every, 1);
  for (std::size_t k = 0; k < config.epochs; ++k) {
    train_step(state, Y, config);
    EpochRecord& rec = state.history.back();
    if (monitor.truth != nullptr && rec.epoch % every == 0) {
      try {
        const MatchReport report = permutation_match(state.S, *monitor.truth);
        rec.monitor_corr = report.mean_abs_corr;
        rec.monitor_per_pair = report.per_pair_abs_corr;
      } catch (const UndefinedCorrelation&) {
        // A constant latent column has no correlation; leave the epoch unmonitored.
      }
    }
    if (on_epoch) on_epoch(rec);
  }
}

TrainState train(const Matrix& Y, const TrainConfig& config, const MonitorOptions& monitor,
                 const EpochCallback& on_epoch) {
  TrainState state = init_state(Y.rows(), Y.cols(), config);
  train_from(state, Y, config, monitor, on_epoch);
  return state;
}

std::optional<std::size_t> epochs_to_threshold(const std::vector<EpochRecord>& history,
                                               double threshold) {
  for (const EpochRecord& rec : history)
    if (rec.monitor_corr && *rec.monitor_corr >= threshold) return rec.epoch;
  return std::nullopt;
}

}  // namespace strebm
