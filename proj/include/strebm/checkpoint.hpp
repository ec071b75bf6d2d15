#pragma once

// JSON encodings for configs, checkpoints and history records.

#include <string>
#include <string_view>

#include <json.hpp>

#include "strebm/trainer.hpp"

namespace strebm {

nlohmann::json config_to_json(const TrainConfig& config);
// Keys missing from `j` keep the value from `base`; unknown keys are rejected.
TrainConfig config_from_json(const nlohmann::json& j, TrainConfig base = {});

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

nlohmann::json generator_to_json(const GeneratorParams& params);
GeneratorParams generator_from_json(const nlohmann::json& j);

// One line of history.jsonl.
nlohmann::json epoch_record_to_json(const EpochRecord& rec);
EpochRecord epoch_record_from_json(const nlohmann::json& j);

struct Checkpoint {
  TrainConfig config;
  TrainState state;  // history is not stored; it comes back empty
};

// Config, epoch, S, generator parameters, eta and Adam moments. Text written
// from a checkpoint that was read back is byte-identical to the original.
std::string write_checkpoint(const TrainConfig& config, const TrainState& state);
Checkpoint read_checkpoint(std::string_view text);

}  // namespace strebm
