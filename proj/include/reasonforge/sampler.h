#pragma once

// Teacher trajectory collection over an OpenAI-style chat-completions API.

#include <chrono>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "reasonforge/dataset.h"

namespace reasonforge::sampler {

inline constexpr const char* kApiKeyEnv = "REASONFORGE_API_KEY";

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  double backoff_multiplier = 2.0;
};

struct SampleConfig {
  std::string endpoint;  // e.g. http://localhost:8000/v1
  std::string model;
  std::string teacher;   // label written to trajectories; defaults to model
  int samples_per_question = 5;
  int max_tokens = 10'000;
  double temperature = 1.0;
  std::int64_t seed_base = 0;
  int min_words = 20;
  int max_in_flight = 4;
  RetryPolicy retry;
  std::chrono::seconds timeout{600};
  std::string api_key;   // empty: read kApiKeyEnv at request time
};

class ConfigError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Transport failure, HTTP status >= 400, or a malformed response body.
class RequestError : public std::runtime_error {
 public:
  RequestError(const std::string& message, int status, bool retryable)
      : std::runtime_error(message), status_(status), retryable_(retryable) {}
  int status() const { return status_; }
  bool retryable() const { return retryable_; }

 private:
  int status_;
  bool retryable_;
};

void validate(const SampleConfig& cfg);

struct ChatReply {
  std::string text;
  std::string finish_reason;
};

/// The JSON body sent for one request.
nlohmann::json request_body(const SampleConfig& cfg, std::string_view question, std::int64_t seed);

/// One request with retries per cfg.retry.
ChatReply chat_complete(const SampleConfig& cfg, std::string_view question, std::int64_t seed);

/// True iff the text has at least `min_words` whitespace-delimited words.
bool filter_short(std::string_view text, int min_words);

/// samples_per_question requests per record with seeds seed_base + index.
/// Output is ordered by (record order, sample index). A request that still
/// fails after retries yields a trajectory with failed = true.
std::vector<dataset::TrajectoryRecord> sample_trajectories(const std::vector<dataset::TaskRecord>& records,
                                                           const SampleConfig& cfg);

struct SampleCounts {
  std::size_t attempted = 0;
  std::size_t kept = 0;
  std::size_t filtered = 0;
  std::size_t failed = 0;
};

SampleCounts count(const std::vector<dataset::TrajectoryRecord>& trajectories);

}  // namespace reasonforge::sampler
