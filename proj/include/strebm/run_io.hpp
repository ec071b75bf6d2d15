#pragma once

// File plumbing shared by the CLI and the acceptance suite: atomic writes,
// history serialization and run identifiers.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "strebm/trainer.hpp"

namespace strebm {

// Writes to `<path>.tmp` and renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

// One JSON object per line for each record with epoch % log_every == 0, plus
// the final record.
std::string history_to_jsonl(const std::vector<EpochRecord>& history, std::size_t log_every = 1);
std::vector<EpochRecord> history_from_jsonl(std::string_view text);

// 16 hex digits of FNV-1a over `text`.
std::string run_id(std::string_view text);

}  // namespace strebm
