#pragma once

// Answer extraction, per-paradigm verification, LLM flexible-match judging
// and accuracy reports.

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "reasonforge/dataset.h"
#include "reasonforge/sampler.h"

namespace reasonforge::grader {

using dataset::Paradigm;
using dataset::TaskRecord;

enum class Verdict { Correct, Incorrect, Unparseable };
enum class Method { Structured, Judge };

std::string verdict_name(Verdict v);
std::string method_name(Method m);

struct GradeOutcome {
  std::string record_id;
  Paradigm paradigm = Paradigm::Deduction;
  Verdict verdict = Verdict::Unparseable;
  Method method = Method::Structured;
  std::string detail;
};

/// Content of the last non-empty answer span. Both "<answer>x</answer>" and
/// "<answer>x<answer>" delimit a span.
std::optional<std::string> extract_answer(std::string_view output);

/// Deduction answers are accepted when they satisfy the formula, not only
/// when they equal the gold witness.
GradeOutcome grade_record(const TaskRecord& record, std::string_view output);

/// Returns the model's reply to a judge prompt.
using JudgeFn = std::function<std::string(const std::string& prompt)>;

class JudgeError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string judge_prompt(std::string_view output, std::string_view gold);

/// Leading TRUE/FALSE word, case-insensitive. Throws JudgeError otherwise.
bool parse_judge_reply(std::string_view reply);

bool judge_flexible(std::string_view output, std::string_view gold, const JudgeFn& judge);

/// Judge backed by chat_complete against cfg's endpoint.
JudgeFn chat_judge(sampler::SampleConfig cfg);

/// Structured grading; outputs that cannot be parsed are handed to the judge.
GradeOutcome grade_with_judge(const TaskRecord& record, std::string_view output, const JudgeFn& judge);

struct Tally {
  std::size_t correct = 0;
  std::size_t incorrect = 0;
  std::size_t unparseable = 0;

  std::size_t total() const { return correct + incorrect + unparseable; }
  /// Unparseable counts against accuracy. 0 for an empty tally.
  double accuracy() const { return total() == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total()); }
};

struct AccuracyReport {
  std::map<Paradigm, Tally> per_paradigm;
  Tally overall;
  bool empty = true;

  nlohmann::ordered_json to_json() const;
  std::string to_text() const;
};

AccuracyReport aggregate(const std::vector<GradeOutcome>& outcomes);

}  // namespace reasonforge::grader
