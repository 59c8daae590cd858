#pragma once

#include <chrono>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "valueprobe/errors.hpp"

namespace valueprobe {

#ifndef VALUEPROBE_VERSION
#define VALUEPROBE_VERSION "0.0.0"
#endif

inline constexpr std::string_view kToolVersion = VALUEPROBE_VERSION;

inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (const unsigned char c : data) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

inline std::string iso8601_utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Provenance for one subcommand run. The manifest is the only output file
// that carries wall-clock timestamps; every other artifact references the
// manifest by name so re-runs stay byte-identical.
struct RunManifest {
  std::string subcommand;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::string config_hash;
  std::string tool_version{kToolVersion};
  std::string started;
  std::string finished;

  static RunManifest begin(std::string subcommand_name, std::vector<std::string> input_paths,
                           std::string_view config_text = {}) {
    RunManifest m;
    m.subcommand = std::move(subcommand_name);
    m.inputs = std::move(input_paths);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(config_text)));
    m.config_hash = buf;
    m.started = iso8601_utc_now();
    return m;
  }

  void finish_and_write(const std::string& path) {
    finished = iso8601_utc_now();
    const nlohmann::json j{{"subcommand", subcommand}, {"inputs", inputs},
                           {"outputs", outputs},       {"config_hash", config_hash},
                           {"tool_version", tool_version}, {"started", started},
                           {"finished", finished}};
    std::ofstream out(path);
    if (!out) throw io_error("cannot write manifest: " + path);
    out << j.dump(2) << '\n';
  }
};

}  // namespace valueprobe
