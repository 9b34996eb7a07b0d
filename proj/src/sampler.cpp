#include "reasonforge/sampler.h"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>

#include "httplib.h"

namespace reasonforge::sampler {

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // request path for chat completions
};

Endpoint parse_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("endpoint must start with http://");
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http") throw ConfigError("unsupported endpoint scheme '" + scheme + "' (only http is built in)");
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint ep;
  ep.origin = url.substr(0, path_start);
  std::string prefix = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  ep.path = prefix + "/chat/completions";
  if (ep.origin.size() <= scheme_end + 3) throw ConfigError("endpoint has no host");
  return ep;
}

std::string api_key(const SampleConfig& cfg) {
  if (!cfg.api_key.empty()) return cfg.api_key;
  const char* env = std::getenv(kApiKeyEnv);
  return env ? env : "";
}

ChatReply request_once(const SampleConfig& cfg, const Endpoint& ep, const std::string& body) {
  httplib::Client client(ep.origin);
  client.set_connection_timeout(std::chrono::seconds(10));
  client.set_read_timeout(cfg.timeout);
  client.set_write_timeout(cfg.timeout);
  httplib::Headers headers;
  if (const auto key = api_key(cfg); !key.empty()) headers.emplace("Authorization", "Bearer " + key);

  auto res = client.Post(ep.path, headers, body, "application/json");
  if (!res) throw RequestError("transport error: " + httplib::to_string(res.error()), 0, true);
  if (res->status >= 400) {
    const bool retry = res->status == 429 || res->status >= 500;
    throw RequestError("HTTP " + std::to_string(res->status), res->status, retry);
  }
  try {
    const auto j = nlohmann::json::parse(res->body);
    const auto& choice = j.at("choices").at(0);
    const auto& content = choice.at("message").at("content");
    ChatReply reply;
    reply.text = content.is_null() ? "" : content.get<std::string>();
    if (choice.contains("finish_reason") && choice.at("finish_reason").is_string())
      reply.finish_reason = choice.at("finish_reason").get<std::string>();
    return reply;
  } catch (const nlohmann::json::exception& e) {
    throw RequestError(std::string("malformed response body: ") + e.what(), res->status, false);
  }
}

}  // namespace

void validate(const SampleConfig& cfg) {
  parse_endpoint(cfg.endpoint);
  if (cfg.model.empty()) throw ConfigError("model must be set");
  if (cfg.samples_per_question < 1) throw ConfigError("samples_per_question must be >= 1");
  if (cfg.max_tokens < 1) throw ConfigError("max_tokens must be >= 1");
  if (cfg.min_words < 0) throw ConfigError("min_words must be >= 0");
  if (cfg.max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
  if (cfg.retry.max_attempts < 1) throw ConfigError("retry max_attempts must be >= 1");
}

nlohmann::json request_body(const SampleConfig& cfg, std::string_view question, std::int64_t seed) {
  return {{"model", cfg.model},
          {"messages", nlohmann::json::array({{{"role", "user"}, {"content", std::string(question)}}})},
          {"temperature", cfg.temperature},
          {"seed", seed},
          {"max_tokens", cfg.max_tokens}};
}

ChatReply chat_complete(const SampleConfig& cfg, std::string_view question, std::int64_t seed) {
  const Endpoint ep = parse_endpoint(cfg.endpoint);
  const std::string body = request_body(cfg, question, seed).dump();
  auto backoff = cfg.retry.initial_backoff;
  for (int attempt = 1;; ++attempt) {
    try {
      return request_once(cfg, ep, body);
    } catch (const RequestError& e) {
      if (!e.retryable() || attempt >= cfg.retry.max_attempts) throw;
    }
    std::this_thread::sleep_for(backoff);
    backoff = std::chrono::milliseconds(
        static_cast<std::chrono::milliseconds::rep>(static_cast<double>(backoff.count()) * cfg.retry.backoff_multiplier));
  }
}

bool filter_short(std::string_view text, int min_words) {
  if (min_words <= 0) return true;
  return dataset::whitespace_tokens(text) >= static_cast<std::size_t>(min_words);
}

std::vector<dataset::TrajectoryRecord> sample_trajectories(const std::vector<dataset::TaskRecord>& records,
                                                           const SampleConfig& cfg) {
  validate(cfg);
  const auto per = static_cast<std::size_t>(cfg.samples_per_question);
  const std::size_t total = records.size() * per;
  std::vector<dataset::TrajectoryRecord> out(total);
  const std::string teacher = cfg.teacher.empty() ? cfg.model : cfg.teacher;

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t job = next++; job < total; job = next++) {
      const auto& record = records[job / per];
      auto& t = out[job];
      t.record_id = record.id;
      t.sample_index = static_cast<int>(job % per);
      t.seed = cfg.seed_base + t.sample_index;
      t.teacher = teacher;
      const auto started = std::chrono::steady_clock::now();
      try {
        auto reply = chat_complete(cfg, record.question, t.seed);
        t.text = std::move(reply.text);
        t.finish_reason = std::move(reply.finish_reason);
        t.word_count = static_cast<std::int64_t>(dataset::whitespace_tokens(t.text));
        t.kept = filter_short(t.text, cfg.min_words);
      } catch (const std::exception& e) {
        t.failed = true;
        t.kept = false;
        t.error = e.what();
      }
      t.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started)
                         .count();
    }
  };

  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(cfg.max_in_flight), total);
  {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  return out;
}

SampleCounts count(const std::vector<dataset::TrajectoryRecord>& trajectories) {
  SampleCounts c;
  for (const auto& t : trajectories) {
    ++c.attempted;
    if (t.failed) ++c.failed;
    else if (t.kept) ++c.kept;
    else ++c.filtered;
  }
  return c;
}

}  // namespace reasonforge::sampler
