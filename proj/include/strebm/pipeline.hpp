#pragma once

// The three experimental arms (linear without / with the separation term,
// nonlinear with it) as reusable generate -> train -> evaluate runs.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "strebm/evaluation.hpp"
#include "strebm/synthdata.hpp"
#include "strebm/trainer.hpp"

namespace strebm {

struct ArmSpec {
  std::string name;
  MixingKind mixing = MixingKind::linear;
  GeneratorKind generator = GeneratorKind::linear;
  double lambda_sep = 1.0;
};

// linear-nosep, linear-sep, nonlinear-sep
std::vector<ArmSpec> default_arms();

// Hidden width of the nonlinear arm's MLP generator. Narrower than the
// generator default: at T = 400 the wider net fits the mixture with latents
// that are still partly mixed.
inline constexpr std::size_t kArmMlpHidden = 16;

// Default training config for an arm: linear arms use a bias-free linear
// mixer, the nonlinear arm an MLP generator of width kArmMlpHidden.
TrainConfig arm_train_config(const ArmSpec& arm, std::size_t epochs, std::uint64_t seed);
ExperimentConfig arm_experiment_config(const ArmSpec& arm, std::size_t T, std::uint64_t seed);

struct ArmResult {
  ArmSpec arm;
  ExperimentConfig data;
  TrainConfig config;
  TrainState state;
  std::optional<MatchReport> final_match;
  std::optional<std::size_t> epochs_to_090;
  std::optional<std::string> divergence;  // message when training diverged
};

ArmResult run_arm(const ArmSpec& arm, const ExperimentConfig& data, const TrainConfig& config,
                  std::size_t monitor_every);

// Header plus one row per arm.
std::string summary_table_csv(const std::vector<ArmResult>& results);

}  // namespace strebm
