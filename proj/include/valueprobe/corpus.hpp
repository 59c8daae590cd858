#pragma once

#include <fstream>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "valueprobe/errors.hpp"
#include "valueprobe/probes.hpp"

namespace valueprobe {

// One generation result. Persisted as a single JSON Lines record; field
// names are part of the corpus file format. Wall-clock data lives in the
// run manifest, keeping corpus files reproducible byte for byte.
struct ResponseRecord {
  ProbeKind kind = ProbeKind::item;
  std::string fine_type_id;
  std::string prompt_text;
  int run_index = 0;

  std::string raw_text;
  std::string cleaned_text;

  std::string model;
  int max_tokens = 0;
  double temperature = 0.0;
  double top_p = 0.0;

  std::string finish_reason;
  long long prompt_tokens = -1;      // -1 when the endpoint reported no usage
  long long completion_tokens = -1;

  bool ok = true;
  std::string error;
};

inline nlohmann::json to_json(const ResponseRecord& r) {
  nlohmann::json j{
      {"kind", std::string(to_string(r.kind))},
      {"fine_type_id", r.fine_type_id},
      {"prompt", r.prompt_text},
      {"run", r.run_index},
      {"raw_text", r.raw_text},
      {"cleaned_text", r.cleaned_text},
      {"model", r.model},
      {"max_tokens", r.max_tokens},
      {"temperature", r.temperature},
      {"top_p", r.top_p},
      {"finish_reason", r.finish_reason},
      {"ok", r.ok},
  };
  if (r.prompt_tokens >= 0) j["prompt_tokens"] = r.prompt_tokens;
  if (r.completion_tokens >= 0) j["completion_tokens"] = r.completion_tokens;
  if (!r.ok) j["error"] = r.error;
  return j;
}

inline ResponseRecord record_from_json(const nlohmann::json& j) {
  ResponseRecord r;
  try {
    r.kind = probe_kind_from_string(j.at("kind").get<std::string>());
    r.fine_type_id = j.at("fine_type_id").get<std::string>();
    r.prompt_text = j.at("prompt").get<std::string>();
    r.run_index = j.at("run").get<int>();
    r.raw_text = j.at("raw_text").get<std::string>();
    r.cleaned_text = j.at("cleaned_text").get<std::string>();
    r.model = j.value("model", std::string());
    r.max_tokens = j.value("max_tokens", 0);
    r.temperature = j.value("temperature", 0.0);
    r.top_p = j.value("top_p", 0.0);
    r.finish_reason = j.value("finish_reason", std::string());
    r.prompt_tokens = j.value("prompt_tokens", -1LL);
    r.completion_tokens = j.value("completion_tokens", -1LL);
    r.ok = j.value("ok", true);
    r.error = j.value("error", std::string());
  } catch (const nlohmann::json::exception& e) {
    throw validation_error(std::string("corpus record: ") + e.what());
  }
  return r;
}

// Each (kind, fine type, prompt, run) may appear once per corpus.
inline void validate_corpus(const std::vector<ResponseRecord>& records) {
  std::set<std::tuple<std::string_view, std::string_view, std::string_view, int>> keys;
  for (const auto& r : records) {
    if (!keys.insert({to_string(r.kind), r.fine_type_id, r.prompt_text, r.run_index}).second)
      throw validation_error("duplicate corpus record: kind=" + std::string(to_string(r.kind)) +
                             " fine_type=" + r.fine_type_id +
                             " run=" + std::to_string(r.run_index));
  }
}

inline std::vector<ResponseRecord> read_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open corpus file: " + path);
  std::vector<ResponseRecord> records;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw validation_error("corpus line " + std::to_string(line_number) + ": " + e.what());
    }
    records.push_back(record_from_json(j));
  }
  return records;
}

// Append-only JSONL writer; records are emitted one per line in the order
// they are handed over. A fresh writer truncates so that re-running a
// generation reproduces the file; pass append=true to extend an existing
// corpus instead.
class CorpusWriter {
 public:
  explicit CorpusWriter(const std::string& path, bool append = false)
      : out_(path, append ? std::ios::app : std::ios::trunc) {
    if (!out_) throw io_error("cannot open corpus file for writing: " + path);
  }

  void write(const ResponseRecord& record) {
    out_ << to_json(record).dump() << '\n';
    if (!out_) throw io_error("corpus write failed");
  }

  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
};

}  // namespace valueprobe
