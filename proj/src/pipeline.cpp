#include "strebm/pipeline.hpp"

#include <sstream>

#include "strebm/errors.hpp"

namespace strebm {

std::vector<ArmSpec> default_arms() {
  return {
      {"linear-nosep", MixingKind::linear, GeneratorKind::linear, 0.0},
      {"linear-sep", MixingKind::linear, GeneratorKind::linear, 1.0},
      {"nonlinear-sep", MixingKind::nonlinear, GeneratorKind::mlp, 1.0},
  };
}

TrainConfig arm_train_config(const ArmSpec& arm, std::size_t epochs, std::uint64_t seed) {
  TrainConfig c;
  c.epochs = epochs;
  c.seed = seed;
  c.lambda_sep = arm.lambda_sep;
  c.generator.kind = arm.generator;
  c.generator.use_bias = false;
  if (arm.generator == GeneratorKind::mlp) c.generator.hidden = kArmMlpHidden;
  return c;
}

ExperimentConfig arm_experiment_config(const ArmSpec& arm, std::size_t T, std::uint64_t seed) {
  ExperimentConfig e;
  e.T = T;
  e.mixing = arm.mixing;
  e.seed = seed;
  return e;
}

ArmResult run_arm(const ArmSpec& arm, const ExperimentConfig& data, const TrainConfig& config,
                  std::size_t monitor_every) {
  ArmResult result{arm, data, config, {}, std::nullopt, std::nullopt, std::nullopt};
  const Experiment exp = make_experiment(data);
  result.state = init_state(exp.observations.rows(), exp.observations.cols(), config);
  try {
    train_from(result.state, exp.observations, config, {&exp.sources, monitor_every});
  } catch (const TrainingDiverged& e) {
    result.divergence = e.what();
  }
  result.final_match = permutation_match(result.state.S, exp.sources);
  result.epochs_to_090 = epochs_to_threshold(result.state.history, 0.9);
  return result;
}

std::string summary_table_csv(const std::vector<ArmResult>& results) {
  std::ostringstream out;
  out << "arm,mixing,generator,lambda_sep,T,epochs_run,epochs_to_0.9,final_mean_abs_corr,"
         "final_ell,diverged\n";
  for (const ArmResult& r : results) {
    out << r.arm.name << ',' << to_string(r.arm.mixing) << ',' << to_string(r.arm.generator)
        << ',' << format_double(r.arm.lambda_sep) << ',' << r.data.T << ',' << r.state.epoch
        << ',';
    if (r.epochs_to_090) out << *r.epochs_to_090;
    else out << "none";
    out << ',' << (r.final_match ? format_double(r.final_match->mean_abs_corr) : "nan") << ',';
    const Vector ell = r.state.length_scales();
    for (std::size_t j = 0; j < ell.size(); ++j) out << (j ? ";" : "") << format_double(ell[j]);
    out << ',' << (r.divergence ? "yes" : "no") << '\n';
  }
  return out.str();
}

}  // namespace strebm
