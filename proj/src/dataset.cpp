#include "reasonforge/dataset.h"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "reasonforge/rng.h"

namespace reasonforge::dataset {

std::string paradigm_name(Paradigm p) {
  switch (p) {
    case Paradigm::Deduction: return "deduction";
    case Paradigm::Induction: return "induction";
    case Paradigm::Abduction: return "abduction";
  }
  return {};
}

Paradigm parse_paradigm(std::string_view name) {
  if (name == "deduction") return Paradigm::Deduction;
  if (name == "induction") return Paradigm::Induction;
  if (name == "abduction") return Paradigm::Abduction;
  throw std::invalid_argument("unknown paradigm '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Prompts (template version 1)

namespace {

constexpr std::string_view kDeductionHead =
    "This is a <Deductive> reasoning task. Below are some formulas connected by conjunctions:\n";
constexpr std::string_view kDeductionTail =
    "Please list the truth value of each variable to make the whole conjunction true using a JSON dictionary, "
    "which maps variable names to their truth values, then enclose the answer in <answer><answer>. "
    "Please put all the intermediate reasoning steps in <think><think>.";

constexpr std::string_view kInductionHead = "This is a <Inductive> reasoning task. Given the following sequence,\n";
constexpr std::string_view kInductionTail =
    "What is the value at the question mark? Please enclose the answer in <answer><answer>, "
    "and put all the intermediate reasoning steps in <think><think>.";

constexpr std::string_view kAbductionHead = "This is a <Abductive> reasoning task.\n";
constexpr std::string_view kAbductionInstruction =
    "Instruction: For each goal, identify which premises directly lead to the goal. Then, trace back what the true "
    "value of the atoms must be to make each of the goal true. Only the atoms in the 'known atoms' are known but "
    "their values are not shown. Finally, return the reachable goals with the true values of the known atoms that "
    "make it true. Please enclose the final answer with <answer><answer>. All the intermediate thinking steps should "
    "be enclosed in <think><think> tags.";
constexpr std::string_view kAbductionFormat =
    "Write the final answer as a JSON object that maps each goal to {\"reachable\": true or false, \"solutions\": "
    "[...]}, where each solution maps the known atoms relevant to that goal to true or false.";

constexpr std::string_view kAnd = "\xE2\x88\xA7";

std::string quoted_list(const std::vector<std::string>& items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += "'" + items[i] + "'";
  }
  return out + "]";
}

}  // namespace

std::string render_prompt(const dedgen::DeductionInstance& inst) {
  std::string out(kDeductionHead);
  for (std::size_t i = 0; i < inst.conjuncts.size(); ++i) {
    if (i) {
      out += kAnd;
      out += ' ';
    }
    out += logic::render_formula(inst.conjuncts[i], logic::Dialect::Symbolic);
    out += '\n';
  }
  out += kDeductionTail;
  return out;
}

std::string render_prompt(const indgen::InductionInstance& inst) {
  std::vector<std::string> terms;
  for (auto x : inst.sequence) terms.push_back(std::to_string(x));
  terms.push_back("?");
  std::string out(kInductionHead);
  out += quoted_list(terms);
  out += '\n';
  out += kInductionTail;
  return out;
}

std::string render_prompt(const abdgen::AbductionInstance& inst) {
  std::vector<std::string> premises;
  for (const auto& r : inst.rules) premises.push_back(abdgen::rule_to_string(r));
  std::string out(kAbductionHead);
  out += "Premises: " + quoted_list(premises) + "\n";
  out += "Known Atoms: " + quoted_list(inst.known) + "\n";
  out += "Goals: " + quoted_list(inst.goals) + "\n";
  out += kAbductionInstruction;
  out += '\n';
  out += kAbductionFormat;
  return out;
}

// ---------------------------------------------------------------------------
// Records

std::string config_digest(const nlohmann::json& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

Json common_meta(std::uint64_t seed, const nlohmann::json& config) {
  Json meta = Json::object();
  meta["seed"] = seed;
  meta["template_version"] = kTemplateVersion;
  meta["config_digest"] = config_digest(config);
  meta["config"] = Json(config);
  return meta;
}

}  // namespace

TaskRecord make_record(const dedgen::DeductionInstance& inst, const dedgen::DedGenConfig& cfg) {
  TaskRecord r;
  r.id = inst.id;
  r.paradigm = Paradigm::Deduction;
  r.question = render_prompt(inst);
  r.gold = dedgen::gold_json(inst.gold).dump();
  r.meta = common_meta(inst.seed, dedgen::config_json(cfg));
  r.meta["mode"] = dedgen::mode_name(inst.mode);
  r.meta["variables"] = inst.variables;
  Json conjuncts = Json::array();
  for (const auto& c : inst.conjuncts) conjuncts.push_back(logic::render_formula(c, logic::Dialect::Symbolic));
  r.meta["conjuncts"] = std::move(conjuncts);
  Json cnf = Json::array();
  for (const auto& clause : inst.cnf.clauses) {
    Json lits = Json::array();
    for (const auto& lit : clause) lits.push_back((lit.positive ? "" : "-") + lit.variable);
    cnf.push_back(std::move(lits));
  }
  r.meta["cnf"] = std::move(cnf);
  return r;
}

TaskRecord make_record(const indgen::InductionInstance& inst, const indgen::IndGenConfig& cfg) {
  TaskRecord r;
  r.id = inst.id;
  r.paradigm = Paradigm::Induction;
  r.question = render_prompt(inst);
  r.gold = std::to_string(inst.gold);
  r.meta = common_meta(inst.seed, indgen::config_json(cfg));
  r.meta["sequence"] = inst.sequence;
  r.meta["start"] = inst.start;
  r.meta["cycle"] = indgen::to_string(inst.cycle);
  r.meta["bounds"] = Json(indgen::bounds_json(cfg));
  return r;
}

TaskRecord make_record(const abdgen::AbductionInstance& inst, const abdgen::AbdGenConfig& cfg) {
  TaskRecord r;
  r.id = inst.id;
  r.paradigm = Paradigm::Abduction;
  r.question = render_prompt(inst);
  r.gold = abdgen::gold_json(inst.gold).dump();
  r.meta = common_meta(inst.seed, abdgen::config_json(cfg));
  Json rules = Json::array();
  for (const auto& rule : inst.rules) rules.push_back(abdgen::rule_to_string(rule));
  r.meta["rules"] = std::move(rules);
  r.meta["atoms"] = std::vector<std::string>(inst.atoms.begin(), inst.atoms.end());
  r.meta["known"] = inst.known;
  r.meta["goals"] = inst.goals;
  r.meta["known_goal_convention"] = abdgen::kKnownGoalConvention;
  return r;
}

// ---------------------------------------------------------------------------
// Splits

SplitSet split(std::vector<TaskRecord> records, std::uint64_t split_seed) {
  if (!records.empty()) {
    const Paradigm p = records.front().paradigm;
    if (std::any_of(records.begin(), records.end(), [&](const TaskRecord& r) { return r.paradigm != p; }))
      throw std::invalid_argument("split: records must come from a single paradigm");
  }
  auto by_id = [](const TaskRecord& a, const TaskRecord& b) { return a.id < b.id; };
  std::sort(records.begin(), records.end(), by_id);
  Rng rng(split_seed);
  rng.shuffle(records);

  SplitSet out;
  std::size_t held = kHeldOutSize;
  if (records.size() < 2 * kHeldOutSize) {
    held = records.size() / 10;
    out.proportional_fallback = true;
  }
  auto first = std::make_move_iterator(records.begin());
  out.test.assign(first, first + static_cast<std::ptrdiff_t>(held));
  out.dev.assign(first + static_cast<std::ptrdiff_t>(held), first + static_cast<std::ptrdiff_t>(2 * held));
  out.train.assign(first + static_cast<std::ptrdiff_t>(2 * held), std::make_move_iterator(records.end()));
  for (auto* part : {&out.train, &out.dev, &out.test}) std::sort(part->begin(), part->end(), by_id);
  return out;
}

// ---------------------------------------------------------------------------
// JSONL

JsonlError::JsonlError(const std::string& message, std::size_t line)
    : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

Json to_json(const TaskRecord& r) {
  Json j = Json::object();
  j["id"] = r.id;
  j["paradigm"] = paradigm_name(r.paradigm);
  j["question"] = r.question;
  j["gold"] = r.gold;
  j["meta"] = r.meta;
  return j;
}

namespace {

template <typename T>
T field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw std::invalid_argument(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw std::invalid_argument(std::string("field '") + key + "' has the wrong type");
  }
}

template <typename T, typename Parse>
std::vector<T> read_lines(const std::filesystem::path& path, Parse&& parse) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<T> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw JsonlError(std::string("invalid JSON: ") + e.what(), number);
    }
    try {
      out.push_back(parse(j));
    } catch (const std::invalid_argument& e) {
      throw JsonlError(e.what(), number);
    }
  }
  return out;
}

template <typename T>
void write_lines(const std::vector<T>& items, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& item : items) out << to_json(item).dump() << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

TaskRecord task_from_json(const Json& j) {
  TaskRecord r;
  r.id = field<std::string>(j, "id");
  r.paradigm = parse_paradigm(field<std::string>(j, "paradigm"));
  r.question = field<std::string>(j, "question");
  r.gold = field<std::string>(j, "gold");
  r.meta = j.contains("meta") ? j.at("meta") : Json::object();
  if (!r.meta.is_object()) throw std::invalid_argument("field 'meta' must be an object");
  return r;
}

Json to_json(const TrajectoryRecord& t) {
  Json j = Json::object();
  j["record_id"] = t.record_id;
  j["sample_index"] = t.sample_index;
  j["seed"] = t.seed;
  j["text"] = t.text;
  j["word_count"] = t.word_count;
  j["kept"] = t.kept;
  j["teacher"] = t.teacher;
  j["finish_reason"] = t.finish_reason;
  j["latency_ms"] = t.latency_ms;
  j["failed"] = t.failed;
  j["error"] = t.error;
  return j;
}

TrajectoryRecord trajectory_from_json(const Json& j) {
  TrajectoryRecord t;
  t.record_id = field<std::string>(j, "record_id");
  t.sample_index = field<int>(j, "sample_index");
  t.seed = field<std::int64_t>(j, "seed");
  t.text = field<std::string>(j, "text");
  t.word_count = field<std::int64_t>(j, "word_count");
  t.kept = field<bool>(j, "kept");
  t.teacher = field<std::string>(j, "teacher");
  t.finish_reason = j.contains("finish_reason") ? field<std::string>(j, "finish_reason") : "";
  t.latency_ms = j.contains("latency_ms") ? field<std::int64_t>(j, "latency_ms") : 0;
  t.failed = j.contains("failed") ? field<bool>(j, "failed") : false;
  t.error = j.contains("error") ? field<std::string>(j, "error") : "";
  return t;
}

void write_jsonl(const std::vector<TaskRecord>& records, const std::filesystem::path& path) {
  write_lines(records, path);
}

std::vector<TaskRecord> read_jsonl(const std::filesystem::path& path) {
  std::set<std::string> ids;
  std::size_t index = 0;
  return read_lines<TaskRecord>(path, [&](const Json& j) {
    ++index;
    TaskRecord r = task_from_json(j);
    if (!ids.insert(r.id).second) throw std::invalid_argument("duplicate id '" + r.id + "'");
    return r;
  });
}

void write_trajectories(const std::vector<TrajectoryRecord>& records, const std::filesystem::path& path) {
  write_lines(records, path);
}

std::vector<TrajectoryRecord> read_trajectories(const std::filesystem::path& path) {
  std::set<std::pair<std::string, int>> keys;
  return read_lines<TrajectoryRecord>(path, [&](const Json& j) {
    TrajectoryRecord t = trajectory_from_json(j);
    if (!keys.emplace(t.record_id, t.sample_index).second)
      throw std::invalid_argument("duplicate trajectory '" + t.record_id + "' #" + std::to_string(t.sample_index));
    return t;
  });
}

// ---------------------------------------------------------------------------
// Statistics

std::size_t whitespace_tokens(std::string_view text) {
  std::size_t count = 0;
  bool in_token = false;
  for (unsigned char c : text) {
    const bool space = std::isspace(c) != 0;
    if (!space && !in_token) ++count;
    in_token = !space;
  }
  return count;
}

StatsTable compute_stats(const std::vector<TaskRecord>& records, const std::vector<TrajectoryRecord>& trajectories,
                         const TokenCounter& count_tokens) {
  std::map<std::string, Paradigm> paradigm_of;
  std::map<Paradigm, std::size_t> questions;
  for (const auto& r : records) {
    paradigm_of[r.id] = r.paradigm;
    ++questions[r.paradigm];
  }

  std::map<std::pair<std::string, Paradigm>, StatsRow> rows;
  for (const auto& t : trajectories) {
    auto it = paradigm_of.find(t.record_id);
    if (it == paradigm_of.end()) throw DanglingReference("trajectory references unknown record '" + t.record_id + "'");
    auto& row = rows[{t.teacher, it->second}];
    row.teacher = t.teacher;
    row.paradigm = it->second;
    ++row.attempted;
    if (t.failed) {
      ++row.failed;
    } else if (!t.kept) {
      ++row.filtered;
    } else {
      ++row.trajectories;
      row.total_tokens += count_tokens(t.text);
    }
  }
  if (trajectories.empty()) {
    for (const auto& [p, n] : questions) rows[{"", p}] = StatsRow{.teacher = "", .paradigm = p};
  }

  StatsTable table;
  for (auto& [key, row] : rows) {
    row.questions = questions[row.paradigm];
    row.average_tokens = row.trajectories == 0 ? 0 : (row.total_tokens + row.trajectories / 2) / row.trajectories;
    table.rows.push_back(row);
  }
  return table;
}

nlohmann::ordered_json StatsTable::to_json() const {
  Json out = Json::array();
  for (const auto& r : rows) {
    Json j = Json::object();
    j["teacher"] = r.teacher;
    j["paradigm"] = paradigm_name(r.paradigm);
    j["questions"] = r.questions;
    j["trajectories"] = r.trajectories;
    j["attempted"] = r.attempted;
    j["filtered"] = r.filtered;
    j["failed"] = r.failed;
    j["total_tokens"] = r.total_tokens;
    j["average_tokens"] = r.average_tokens;
    out.push_back(std::move(j));
  }
  return out;
}

std::string StatsTable::to_text() const {
  std::ostringstream os;
  auto line = [&](const std::string& teacher, const std::string& type, const std::string& q, const std::string& t,
                  const std::string& tok, const std::string& avg) {
    os << std::left << std::setw(24) << teacher << std::setw(11) << type << std::right << std::setw(10) << q
       << std::setw(12) << t << std::setw(14) << tok << std::setw(12) << avg << '\n';
  };
  line("Teacher", "Type", "# Quest.", "# Traject.", "# Tokens", "Avg. Tokens");
  for (const auto& r : rows) {
    line(r.teacher.empty() ? "-" : r.teacher, paradigm_name(r.paradigm), std::to_string(r.questions),
         std::to_string(r.trajectories), std::to_string(r.total_tokens), std::to_string(r.average_tokens));
  }
  return os.str();
}

}  // namespace reasonforge::dataset
