#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

// httplib pulls in glibc's resolv.h, whose _res macro breaks Eigen when it
// is included later in the same translation unit.
#ifdef _res
#undef _res
#endif

#include <nlohmann/json.hpp>

#include "valueprobe/corpus.hpp"
#include "valueprobe/errors.hpp"
#include "valueprobe/probes.hpp"

namespace valueprobe {

inline constexpr std::string_view kApiKeyEnvVar = "VALUEPROBE_API_KEY";
inline constexpr std::string_view kChatCompletionsPath = "/v1/chat/completions";

struct RetryPolicy {
  int max_attempts = 5;
  int backoff_base_ms = 1000;
};

struct GenerationConfig {
  std::string model = "gpt-3.5-turbo";
  int max_tokens = 300;
  double temperature = 1.0;
  double top_p = 1.0;
  int runs_per_prompt = 5;
  std::string base_url = "https://api.openai.com";
  int max_in_flight = 4;
  RetryPolicy retry;
  int timeout_seconds = 30;

  void validate() const {
    if (model.empty()) throw config_error("generation config: model must not be empty");
    if (max_tokens <= 0) throw config_error("generation config: max_tokens must be positive");
    if (temperature < 0.0) throw config_error("generation config: temperature must be >= 0");
    if (top_p <= 0.0 || top_p > 1.0)
      throw config_error("generation config: top_p must be in (0,1]");
    if (runs_per_prompt <= 0)
      throw config_error("generation config: runs_per_prompt must be positive");
    if (max_in_flight <= 0)
      throw config_error("generation config: max_in_flight must be positive");
    if (retry.max_attempts <= 0)
      throw config_error("generation config: retry.max_attempts must be positive");
  }

  static GenerationConfig from_json(const nlohmann::json& j) {
    GenerationConfig c;
    try {
      c.model = j.value("model", c.model);
      c.max_tokens = j.value("max_tokens", c.max_tokens);
      c.temperature = j.value("temperature", c.temperature);
      c.top_p = j.value("top_p", c.top_p);
      c.runs_per_prompt = j.value("runs_per_prompt", c.runs_per_prompt);
      c.base_url = j.value("base_url", c.base_url);
      c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
      c.timeout_seconds = j.value("timeout_seconds", c.timeout_seconds);
      if (j.contains("retry")) {
        c.retry.max_attempts = j["retry"].value("max_attempts", c.retry.max_attempts);
        c.retry.backoff_base_ms = j["retry"].value("backoff_base_ms", c.retry.backoff_base_ms);
      }
    } catch (const nlohmann::json::exception& e) {
      throw config_error(std::string("generation config: ") + e.what());
    }
    c.validate();
    return c;
  }

  static GenerationConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open generation config: " + path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw config_error("generation config '" + path + "': " + e.what());
    }
    return from_json(j);
  }

  nlohmann::json to_json() const {
    return nlohmann::json{{"model", model},
                          {"max_tokens", max_tokens},
                          {"temperature", temperature},
                          {"top_p", top_p},
                          {"runs_per_prompt", runs_per_prompt},
                          {"base_url", base_url},
                          {"max_in_flight", max_in_flight},
                          {"retry",
                           {{"max_attempts", retry.max_attempts},
                            {"backoff_base_ms", retry.backoff_base_ms}}},
                          {"timeout_seconds", timeout_seconds}};
  }
};

struct RunSummary {
  std::size_t prompts = 0;
  std::size_t requested = 0;
  std::size_t succeeded = 0;
  std::size_t failed = 0;
};

// Receives records in deterministic order (prompt index, then run index).
class RecordSink {
 public:
  virtual ~RecordSink() = default;
  virtual void write(const ResponseRecord& record) = 0;
};

class JsonlRecordSink : public RecordSink {
 public:
  explicit JsonlRecordSink(const std::string& path) : writer_(path) {}
  void write(const ResponseRecord& record) override { writer_.write(record); }

 private:
  CorpusWriter writer_;
};

class VectorRecordSink : public RecordSink {
 public:
  void write(const ResponseRecord& record) override { records.push_back(record); }
  std::vector<ResponseRecord> records;
};

namespace detail {

// Buffers out-of-order completions and releases them to the sink strictly
// by sequence number. The single serialization point between producers.
class ReorderingWriter {
 public:
  explicit ReorderingWriter(RecordSink& sink) : sink_(sink) {}

  void deliver(std::size_t sequence, ResponseRecord record) {
    std::lock_guard<std::mutex> lock(mutex_);
    pending_.emplace(sequence, std::move(record));
    while (!pending_.empty() && pending_.begin()->first == next_) {
      sink_.write(pending_.begin()->second);
      pending_.erase(pending_.begin());
      ++next_;
    }
  }

 private:
  RecordSink& sink_;
  std::mutex mutex_;
  std::map<std::size_t, ResponseRecord> pending_;
  std::size_t next_ = 0;
};

struct AttemptOutcome {
  enum class Kind { success, retry, fail, auth } kind = Kind::fail;
  std::string content;
  std::string finish_reason;
  long long prompt_tokens = -1;
  long long completion_tokens = -1;
  std::string error;
};

inline AttemptOutcome interpret_response(const httplib::Result& res) {
  AttemptOutcome out;
  if (!res) {
    out.kind = AttemptOutcome::Kind::retry;
    out.error = "connection error: " + httplib::to_string(res.error());
    return out;
  }
  if (res->status == 401 || res->status == 403) {
    out.kind = AttemptOutcome::Kind::auth;
    out.error = "authentication rejected (HTTP " + std::to_string(res->status) + ")";
    return out;
  }
  if (res->status == 429 || res->status >= 500) {
    out.kind = AttemptOutcome::Kind::retry;
    out.error = "HTTP " + std::to_string(res->status);
    return out;
  }
  if (res->status != 200) {
    out.kind = AttemptOutcome::Kind::fail;
    out.error = "HTTP " + std::to_string(res->status) + ": " + res->body;
    return out;
  }
  try {
    const nlohmann::json j = nlohmann::json::parse(res->body);
    const auto& choice = j.at("choices").at(0);
    out.content = choice.at("message").at("content").get<std::string>();
    out.finish_reason = choice.value("finish_reason", std::string());
    if (j.contains("usage")) {
      out.prompt_tokens = j["usage"].value("prompt_tokens", -1LL);
      out.completion_tokens = j["usage"].value("completion_tokens", -1LL);
    }
    out.kind = AttemptOutcome::Kind::success;
  } catch (const nlohmann::json::exception& e) {
    out.kind = AttemptOutcome::Kind::fail;
    out.error = std::string("malformed endpoint response: ") + e.what() +
                "; payload: " + res->body;
  }
  return out;
}

}  // namespace detail

// Issues every (prompt, run) request with bounded parallelism, retrying
// transient failures with exponential backoff, and hands records to the
// sink in (prompt index, run index) order regardless of completion order.
// Permanent failures become records marked failed; authentication failures
// abort the whole run.
inline RunSummary run_probes(const ProbeSet& probes, const GenerationConfig& config,
                             const std::string& api_key, RecordSink& sink) {
  config.validate();
  if (api_key.empty())
    throw config_error(std::string("API credential missing: set ") +
                       std::string(kApiKeyEnvVar));

  RunSummary summary;
  summary.prompts = probes.prompts.size();
  const std::size_t runs = static_cast<std::size_t>(config.runs_per_prompt);
  const std::size_t total = summary.prompts * runs;
  summary.requested = total;
  if (total == 0) return summary;

  detail::ReorderingWriter writer(sink);
  std::atomic<std::size_t> next_task{0};
  std::atomic<std::size_t> succeeded{0};
  std::atomic<std::size_t> failed{0};
  std::atomic<bool> auth_failure{false};
  std::mutex error_mutex;
  std::string auth_message;

  const auto worker = [&] {
    httplib::Client client(config.base_url);
    client.set_connection_timeout(config.timeout_seconds, 0);
    client.set_read_timeout(config.timeout_seconds, 0);
    client.set_write_timeout(config.timeout_seconds, 0);
    client.set_default_headers({{"Authorization", "Bearer " + api_key}});

    std::mt19937_64 jitter_rng(std::random_device{}());

    while (true) {
      const std::size_t task = next_task.fetch_add(1);
      if (task >= total || auth_failure.load()) return;
      const std::size_t prompt_index = task / runs;
      const std::size_t run_index = task % runs;
      const Probe& probe = probes.prompts[prompt_index];

      ResponseRecord record;
      record.kind = probes.kind;
      record.fine_type_id = probe.fine_type_id;
      record.prompt_text = probe.prompt_text;
      record.run_index = static_cast<int>(run_index);
      record.model = config.model;
      record.max_tokens = config.max_tokens;
      record.temperature = config.temperature;
      record.top_p = config.top_p;

      const nlohmann::json body{
          {"model", config.model},
          {"max_tokens", config.max_tokens},
          {"temperature", config.temperature},
          {"top_p", config.top_p},
          {"messages", nlohmann::json::array({{{"role", "user"}, {"content", probe.prompt_text}}})}};
      const std::string body_text = body.dump();

      detail::AttemptOutcome outcome;
      for (int attempt = 1; attempt <= config.retry.max_attempts; ++attempt) {
        if (auth_failure.load()) return;
        const httplib::Result res = client.Post(std::string(kChatCompletionsPath), body_text,
                                                "application/json");
        outcome = detail::interpret_response(res);
        if (outcome.kind != detail::AttemptOutcome::Kind::retry) break;
        if (attempt == config.retry.max_attempts) break;
        const long long base = static_cast<long long>(config.retry.backoff_base_ms) << (attempt - 1);
        const long long jitter =
            config.retry.backoff_base_ms > 0
                ? static_cast<long long>(jitter_rng() % (config.retry.backoff_base_ms / 2 + 1))
                : 0;
        std::this_thread::sleep_for(std::chrono::milliseconds(base + jitter));
      }

      switch (outcome.kind) {
        case detail::AttemptOutcome::Kind::auth: {
          std::lock_guard<std::mutex> lock(error_mutex);
          auth_message = outcome.error;
          auth_failure.store(true);
          return;
        }
        case detail::AttemptOutcome::Kind::success:
          record.ok = true;
          record.raw_text = outcome.content;
          record.cleaned_text = clean_response(outcome.content);
          record.finish_reason = outcome.finish_reason;
          record.prompt_tokens = outcome.prompt_tokens;
          record.completion_tokens = outcome.completion_tokens;
          succeeded.fetch_add(1);
          break;
        default:
          record.ok = false;
          record.error = outcome.error;
          failed.fetch_add(1);
          break;
      }
      writer.deliver(task, std::move(record));
    }
  };

  std::vector<std::thread> threads;
  const std::size_t n_threads =
      std::min<std::size_t>(static_cast<std::size_t>(config.max_in_flight), total);
  threads.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  if (auth_failure.load()) throw network_error("generation aborted: " + auth_message);

  summary.succeeded = succeeded.load();
  summary.failed = failed.load();
  return summary;
}

inline std::string api_key_from_env() {
  const char* value = std::getenv(std::string(kApiKeyEnvVar).c_str());
  return value ? std::string(value) : std::string();
}

}  // namespace valueprobe
