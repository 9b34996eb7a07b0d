#pragma once

// Task records, prompt rendering, splits, JSONL persistence and statistics.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "reasonforge/abdgen.h"
#include "reasonforge/dedgen.h"
#include "reasonforge/indgen.h"

namespace reasonforge::dataset {

using Json = nlohmann::ordered_json;

enum class Paradigm { Deduction, Induction, Abduction };

std::string paradigm_name(Paradigm p);
Paradigm parse_paradigm(std::string_view name);

inline constexpr std::string_view kTemplateVersion = "1";

struct TaskRecord {
  std::string id;
  Paradigm paradigm = Paradigm::Deduction;
  std::string question;
  std::string gold;
  Json meta = Json::object();

  friend bool operator==(const TaskRecord&, const TaskRecord&) = default;
};

struct TrajectoryRecord {
  std::string record_id;
  int sample_index = 0;
  std::int64_t seed = 0;
  std::string text;
  std::int64_t word_count = 0;
  bool kept = false;
  std::string teacher;
  std::string finish_reason;
  std::int64_t latency_ms = 0;
  bool failed = false;
  std::string error;

  friend bool operator==(const TrajectoryRecord&, const TrajectoryRecord&) = default;
};

std::string render_prompt(const dedgen::DeductionInstance& inst);
std::string render_prompt(const indgen::InductionInstance& inst);
std::string render_prompt(const abdgen::AbductionInstance& inst);

TaskRecord make_record(const dedgen::DeductionInstance& inst, const dedgen::DedGenConfig& cfg);
TaskRecord make_record(const indgen::InductionInstance& inst, const indgen::IndGenConfig& cfg);
TaskRecord make_record(const abdgen::AbductionInstance& inst, const abdgen::AbdGenConfig& cfg);

/// FNV-1a 64 over the compact dump, as 16 hex digits.
std::string config_digest(const nlohmann::json& config);

inline constexpr std::size_t kHeldOutSize = 100;

struct SplitSet {
  std::vector<TaskRecord> train;
  std::vector<TaskRecord> dev;
  std::vector<TaskRecord> test;
  /// Set when there were fewer than 2 * kHeldOutSize records and 10%/10%
  /// held-out fractions were used instead.
  bool proportional_fallback = false;
};

/// Records are ordered by id, shuffled with `split_seed`, then cut into
/// test, dev and train. Each split is returned sorted by id.
SplitSet split(std::vector<TaskRecord> records, std::uint64_t split_seed);

class JsonlError : public std::runtime_error {
 public:
  JsonlError(const std::string& message, std::size_t line);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

Json to_json(const TaskRecord& r);
TaskRecord task_from_json(const Json& j);
Json to_json(const TrajectoryRecord& t);
TrajectoryRecord trajectory_from_json(const Json& j);

void write_jsonl(const std::vector<TaskRecord>& records, const std::filesystem::path& path);
std::vector<TaskRecord> read_jsonl(const std::filesystem::path& path);
void write_trajectories(const std::vector<TrajectoryRecord>& records, const std::filesystem::path& path);
std::vector<TrajectoryRecord> read_trajectories(const std::filesystem::path& path);

using TokenCounter = std::function<std::size_t(std::string_view)>;

/// Number of maximal runs of non-whitespace bytes.
std::size_t whitespace_tokens(std::string_view text);

struct StatsRow {
  std::string teacher;
  Paradigm paradigm = Paradigm::Deduction;
  std::size_t questions = 0;
  std::size_t trajectories = 0;  // kept trajectories
  std::size_t attempted = 0;
  std::size_t filtered = 0;
  std::size_t failed = 0;
  std::uint64_t total_tokens = 0;
  /// total_tokens / trajectories rounded half up; 0 when there are none.
  std::uint64_t average_tokens = 0;
};

struct StatsTable {
  std::vector<StatsRow> rows;

  nlohmann::ordered_json to_json() const;
  std::string to_text() const;
};

class DanglingReference : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

StatsTable compute_stats(const std::vector<TaskRecord>& records, const std::vector<TrajectoryRecord>& trajectories,
                         const TokenCounter& count_tokens = whitespace_tokens);

}  // namespace reasonforge::dataset
