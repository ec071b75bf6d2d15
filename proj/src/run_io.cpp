#include "strebm/run_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "strebm/checkpoint.hpp"
#include "strebm/errors.hpp"

namespace strebm {

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("write to " + tmp.string() + " failed");
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string history_to_jsonl(const std::vector<EpochRecord>& history, std::size_t log_every) {
  if (log_every == 0) log_every = 1;
  std::string out;
  for (std::size_t k = 0; k < history.size(); ++k) {
    const EpochRecord& rec = history[k];
    if (rec.epoch % log_every != 0 && k + 1 != history.size()) continue;
    out += epoch_record_to_json(rec).dump();
    out += '\n';
  }
  return out;
}

std::vector<EpochRecord> history_from_jsonl(std::string_view text) {
  std::vector<EpochRecord> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    if (!line.empty()) {
      try {
        out.push_back(epoch_record_from_json(nlohmann::json::parse(line)));
      } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("history: ") + e.what());
      }
    }
    start = end + 1;
  }
  return out;
}

std::string run_id(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace strebm
