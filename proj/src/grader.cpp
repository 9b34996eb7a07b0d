#include "reasonforge/grader.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <iomanip>
#include <set>
#include <sstream>

namespace reasonforge::grader {

using nlohmann::json;

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Correct: return "correct";
    case Verdict::Incorrect: return "incorrect";
    case Verdict::Unparseable: return "unparseable";
  }
  return {};
}

std::string method_name(Method m) { return m == Method::Structured ? "structured" : "judge"; }

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Strips a surrounding Markdown code fence such as ```json ... ```.
std::string_view strip_fence(std::string_view s) {
  s = trim(s);
  if (!s.starts_with("```")) return s;
  s.remove_prefix(3);
  const auto nl = s.find('\n');
  if (nl != std::string_view::npos && s.substr(0, nl).find('{') == std::string_view::npos) s.remove_prefix(nl + 1);
  if (const auto end = s.rfind("```"); end != std::string_view::npos) s = s.substr(0, end);
  return trim(s);
}

std::optional<json> parse_object(std::string_view text) {
  const std::string_view body = strip_fence(text);
  for (const std::string& candidate : {std::string(body), [&] {
         std::string swapped(body);
         std::replace(swapped.begin(), swapped.end(), '\'', '"');
         return swapped;
       }()}) {
    try {
      auto j = json::parse(candidate);
      if (j.is_object()) return j;
    } catch (const json::parse_error&) {
    }
  }
  return std::nullopt;
}

std::optional<bool> as_bool(const json& v) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_string()) {
    const auto s = lower(trim(v.get<std::string>()));
    if (s == "true") return true;
    if (s == "false") return false;
  }
  return std::nullopt;
}

GradeOutcome make(const TaskRecord& r, Verdict v, std::string detail) {
  return GradeOutcome{r.id, r.paradigm, v, Method::Structured, std::move(detail)};
}

GradeOutcome grade_deduction(const TaskRecord& r, const std::string& answer) {
  const auto obj = parse_object(answer);
  if (!obj) return make(r, Verdict::Unparseable, "answer is not a JSON object");
  logic::Assignment a;
  for (const auto& [name, value] : obj->items()) {
    const auto b = as_bool(value);
    if (!b) return make(r, Verdict::Unparseable, "value for '" + name + "' is not a truth value");
    a[name] = *b;
  }
  for (const auto& v : r.meta.at("variables")) {
    if (!a.contains(v.get<std::string>())) return make(r, Verdict::Incorrect, "missing variable " + v.get<std::string>());
  }
  const auto& conjuncts = r.meta.at("conjuncts");
  for (std::size_t i = 0; i < conjuncts.size(); ++i) {
    const auto f = logic::parse_formula(conjuncts[i].get<std::string>(), logic::Dialect::Symbolic);
    if (!logic::evaluate(f, a)) return make(r, Verdict::Incorrect, "conjunct " + std::to_string(i + 1) + " is false");
  }
  return make(r, Verdict::Correct, "all conjuncts satisfied");
}

std::optional<std::int64_t> parse_integer(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && (s.front() == '\'' || s.front() == '"') && s.back() == s.front()) s = trim(s.substr(1, s.size() - 2));
  if (!s.empty() && s.back() == '.') s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return value;
}

GradeOutcome grade_induction(const TaskRecord& r, const std::string& answer) {
  const auto value = parse_integer(answer);
  if (!value) return make(r, Verdict::Unparseable, "answer is not an integer");
  const auto gold = parse_integer(r.gold);
  if (!gold) throw std::invalid_argument("record " + r.id + " has a non-integer gold answer");
  if (*value == *gold) return make(r, Verdict::Correct, "matches " + r.gold);
  return make(r, Verdict::Incorrect, "expected " + r.gold + ", got " + std::to_string(*value));
}

std::optional<abdgen::GoldMap> parse_abduction(std::string_view text) {
  const auto obj = parse_object(text);
  if (!obj) return std::nullopt;
  abdgen::GoldMap out;
  for (const auto& [goal, entry] : obj->items()) {
    if (!entry.is_object() || !entry.contains("reachable")) return std::nullopt;
    const auto reachable = as_bool(entry.at("reachable"));
    if (!reachable) return std::nullopt;
    abdgen::GoalAnswer ans;
    ans.reachable = *reachable;
    if (entry.contains("solutions")) {
      const auto& sols = entry.at("solutions");
      if (!sols.is_array()) return std::nullopt;
      for (const auto& s : sols) {
        if (!s.is_object()) return std::nullopt;
        logic::Assignment a;
        for (const auto& [atom, v] : s.items()) {
          const auto b = as_bool(v);
          if (!b) return std::nullopt;
          a[atom] = *b;
        }
        ans.solutions.push_back(std::move(a));
      }
    }
    std::sort(ans.solutions.begin(), ans.solutions.end());
    ans.solutions.erase(std::unique(ans.solutions.begin(), ans.solutions.end()), ans.solutions.end());
    out[goal] = std::move(ans);
  }
  return out;
}

GradeOutcome grade_abduction(const TaskRecord& r, const std::string& answer) {
  const auto got = parse_abduction(answer);
  if (!got) return make(r, Verdict::Unparseable, "answer is not a goal -> {reachable, solutions} object");
  const auto gold = parse_abduction(r.gold);
  if (!gold) throw std::invalid_argument("record " + r.id + " has a malformed gold answer");
  for (const auto& [goal, expected] : *gold) {
    auto it = got->find(goal);
    if (it == got->end()) return make(r, Verdict::Incorrect, "goal " + goal + " missing");
    if (it->second.reachable != expected.reachable) return make(r, Verdict::Incorrect, "goal " + goal + " reachability");
    if (it->second.solutions != expected.solutions) return make(r, Verdict::Incorrect, "goal " + goal + " solutions");
  }
  for (const auto& [goal, _] : *got) {
    if (!gold->contains(goal)) return make(r, Verdict::Incorrect, "unexpected goal " + goal);
  }
  return make(r, Verdict::Correct, "all goals match");
}

}  // namespace

std::optional<std::string> extract_answer(std::string_view output) {
  static constexpr std::string_view kOpen = "<answer>";
  static constexpr std::string_view kClose = "</answer>";
  std::optional<std::string> last;
  std::size_t pos = output.find(kOpen);
  while (pos != std::string_view::npos) {
    const std::size_t start = pos + kOpen.size();
    const std::size_t close = output.find(kClose, start);
    const std::size_t reopen = output.find(kOpen, start);
    const std::size_t end = std::min(close, reopen);
    if (end == std::string_view::npos) break;
    const auto content = trim(output.substr(start, end - start));
    if (!content.empty()) last = std::string(content);
    const std::size_t after = end + (end == close ? kClose.size() : kOpen.size());
    pos = output.find(kOpen, after);
  }
  return last;
}

GradeOutcome grade_record(const TaskRecord& record, std::string_view output) {
  const auto answer = extract_answer(output);
  if (!answer) return make(record, Verdict::Unparseable, "no answer span");
  switch (record.paradigm) {
    case Paradigm::Deduction: return grade_deduction(record, *answer);
    case Paradigm::Induction: return grade_induction(record, *answer);
    case Paradigm::Abduction: return grade_abduction(record, *answer);
  }
  return make(record, Verdict::Unparseable, "unknown paradigm");
}

// ---------------------------------------------------------------------------
// Flexible match

std::string judge_prompt(std::string_view output, std::string_view gold) {
  std::string p = "Instruction: Please check whether the generation results is consistent with the gold label.\n\n";
  p += "Generation Results:";
  p += output;
  p += "\n\nGold Label:";
  p += gold;
  p += "\n\nPlease output TRUE if they are consistent, otherwise output FALSE.";
  return p;
}

bool parse_judge_reply(std::string_view reply) {
  std::size_t i = 0;
  while (i < reply.size() && !std::isalpha(static_cast<unsigned char>(reply[i]))) ++i;
  std::size_t j = i;
  while (j < reply.size() && std::isalpha(static_cast<unsigned char>(reply[j]))) ++j;
  const auto word = lower(reply.substr(i, j - i));
  if (word == "true") return true;
  if (word == "false") return false;
  throw JudgeError("judge reply does not start with TRUE or FALSE: '" + std::string(reply.substr(0, 80)) + "'");
}

bool judge_flexible(std::string_view output, std::string_view gold, const JudgeFn& judge) {
  return parse_judge_reply(judge(judge_prompt(output, gold)));
}

JudgeFn chat_judge(sampler::SampleConfig cfg) {
  return [cfg = std::move(cfg)](const std::string& prompt) {
    return sampler::chat_complete(cfg, prompt, cfg.seed_base).text;
  };
}

GradeOutcome grade_with_judge(const TaskRecord& record, std::string_view output, const JudgeFn& judge) {
  GradeOutcome structured = grade_record(record, output);
  if (structured.verdict != Verdict::Unparseable) return structured;
  try {
    const bool ok = judge_flexible(output, record.gold, judge);
    return GradeOutcome{record.id, record.paradigm, ok ? Verdict::Correct : Verdict::Incorrect, Method::Judge,
                        ok ? "judge: consistent" : "judge: inconsistent"};
  } catch (const std::exception& e) {
    structured.detail += "; judge failed: ";
    structured.detail += e.what();
    return structured;
  }
}

// ---------------------------------------------------------------------------
// Reports

AccuracyReport aggregate(const std::vector<GradeOutcome>& outcomes) {
  AccuracyReport report;
  report.empty = outcomes.empty();
  for (const auto& o : outcomes) {
    for (Tally* t : {&report.per_paradigm[o.paradigm], &report.overall}) {
      switch (o.verdict) {
        case Verdict::Correct: ++t->correct; break;
        case Verdict::Incorrect: ++t->incorrect; break;
        case Verdict::Unparseable: ++t->unparseable; break;
      }
    }
  }
  return report;
}

namespace {
nlohmann::ordered_json tally_json(const Tally& t) {
  nlohmann::ordered_json j;
  j["correct"] = t.correct;
  j["incorrect"] = t.incorrect;
  j["unparseable"] = t.unparseable;
  j["total"] = t.total();
  j["accuracy"] = t.accuracy();
  return j;
}
}  // namespace

nlohmann::ordered_json AccuracyReport::to_json() const {
  nlohmann::ordered_json j;
  j["empty"] = empty;
  j["overall"] = tally_json(overall);
  nlohmann::ordered_json per = nlohmann::ordered_json::object();
  for (const auto& [p, t] : per_paradigm) per[dataset::paradigm_name(p)] = tally_json(t);
  j["per_paradigm"] = std::move(per);
  return j;
}

std::string AccuracyReport::to_text() const {
  std::ostringstream os;
  auto row = [&](const std::string& name, const Tally& t) {
    os << std::left << std::setw(12) << name << std::right << std::setw(9) << t.correct << std::setw(11)
       << t.incorrect << std::setw(13) << t.unparseable << std::setw(8) << t.total() << std::setw(11) << std::fixed
       << std::setprecision(2) << 100.0 * t.accuracy() << '\n';
  };
  os << std::left << std::setw(12) << "Paradigm" << std::right << std::setw(9) << "Correct" << std::setw(11)
     << "Incorrect" << std::setw(13) << "Unparseable" << std::setw(8) << "Total" << std::setw(11) << "Acc. (%)"
     << '\n';
  for (const auto& [p, t] : per_paradigm) row(dataset::paradigm_name(p), t);
  row("overall", overall);
  return os.str();
}

}  // namespace reasonforge::grader
