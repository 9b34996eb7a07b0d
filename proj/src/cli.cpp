#include "reasonforge/cli.h"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "reasonforge/dataset.h"
#include "reasonforge/grader.h"
#include "reasonforge/rng.h"
#include "reasonforge/sampler.h"

#ifndef REASONFORGE_VERSION
#define REASONFORGE_VERSION "dev"
#endif

namespace reasonforge::cli {

namespace fs = std::filesystem;
using dataset::Json;
using dataset::Paradigm;

namespace {

struct CliError : std::runtime_error {
  CliError(std::string kind, const std::string& message) : std::runtime_error(message), kind(std::move(kind)) {}
  std::string kind;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void require_input(const fs::path& p) {
  if (!fs::exists(p)) throw CliError("missing_input", "input file not found: " + p.string());
}

// ---------------------------------------------------------------------------
// Config layering

std::int64_t to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const auto x = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw CliError("config", "key '" + key + "' expects an integer, got '" + v + "'");
  }
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const auto x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw CliError("config", "key '" + key + "' expects a number, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw CliError("config", "key '" + key + "' expects a boolean, got '" + v + "'");
}

using Setter = std::function<void(const std::string& key, const std::string& value)>;

template <typename T>
void apply(const std::map<std::string, std::string>& kv, const std::map<std::string, Setter>& setters) {
  for (const auto& [key, value] : kv) {
    if (key == "count" || key == "seed") continue;
    auto it = setters.find(key);
    if (it == setters.end()) throw CliError("config", "unknown config key '" + key + "'");
    it->second(key, value);
  }
}

dedgen::DedGenConfig deduction_config(const std::map<std::string, std::string>& kv) {
  dedgen::DedGenConfig c;
  auto i = [](int& field) { return [&field](const std::string& k, const std::string& v) { field = static_cast<int>(to_int(k, v)); }; };
  apply<dedgen::DedGenConfig>(kv, {
      {"num_vars", i(c.num_vars)},
      {"conjuncts_min", i(c.num_conjuncts.min)},
      {"conjuncts_max", i(c.num_conjuncts.max)},
      {"max_depth", i(c.max_depth)},
      {"clause_len_min", i(c.clause_len.min)},
      {"clause_len_max", i(c.clause_len.max)},
      {"resample_budget", i(c.resample_budget)},
      {"cnf_clause_cap", [&](const std::string& k, const std::string& v) { c.cnf_clause_cap = static_cast<std::size_t>(to_int(k, v)); }},
      {"mode", [&](const std::string&, const std::string& v) { c.mode = dedgen::parse_mode(v); }},
  });
  return c;
}

indgen::IndGenConfig induction_config(const std::map<std::string, std::string>& kv) {
  indgen::IndGenConfig c;
  auto i = [](int& field) { return [&field](const std::string& k, const std::string& v) { field = static_cast<int>(to_int(k, v)); }; };
  auto l = [](std::int64_t& field) { return [&field](const std::string& k, const std::string& v) { field = to_int(k, v); }; };
  auto b = [](bool& field) { return [&field](const std::string& k, const std::string& v) { field = to_bool(k, v); }; };
  apply<indgen::IndGenConfig>(kv, {
      {"seq_len", i(c.seq_len)},
      {"cycle_len_min", i(c.cycle_len_min)},
      {"cycle_len_max", i(c.cycle_len_max)},
      {"allow_add", b(c.allow_add)},
      {"allow_sub", b(c.allow_sub)},
      {"allow_mul", b(c.allow_mul)},
      {"add_sub_max", l(c.add_sub_max)},
      {"mul_max", l(c.mul_max)},
      {"start_min", l(c.start_min)},
      {"start_max", l(c.start_max)},
      {"magnitude_cap", l(c.magnitude_cap)},
      {"non_negative", b(c.non_negative)},
      {"resample_budget", i(c.resample_budget)},
  });
  return c;
}

abdgen::AbdGenConfig abduction_config(const std::map<std::string, std::string>& kv) {
  abdgen::AbdGenConfig c;
  auto i = [](int& field) { return [&field](const std::string& k, const std::string& v) { field = static_cast<int>(to_int(k, v)); }; };
  auto d = [](double& field) { return [&field](const std::string& k, const std::string& v) { field = to_double(k, v); }; };
  apply<abdgen::AbdGenConfig>(kv, {
      {"num_atoms", i(c.num_atoms)},
      {"num_rules", i(c.num_rules)},
      {"num_known", i(c.num_known)},
      {"self_rules", i(c.self_rules)},
      {"derivable_goals", i(c.derivable_goals)},
      {"known_only_goals", i(c.known_only_goals)},
      {"unreachable_goals", i(c.unreachable_goals)},
      {"two_literal_prob", d(c.two_literal_prob)},
      {"negation_prob", d(c.negation_prob)},
  });
  return c;
}

// ---------------------------------------------------------------------------
// Manifests

struct Manifest {
  std::string command;
  std::vector<std::string> argv;
  Json config = Json::object();
  Json seeds = Json::object();
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  Json extra = Json::object();
  std::string started_at = utc_now();

  void write(const fs::path& path) const {
    Json j;
    j["command"] = command;
    j["tool_version"] = REASONFORGE_VERSION;
    j["argv"] = argv;
    j["config_digest"] = dataset::config_digest(nlohmann::json(config));
    j["config"] = config;
    j["seeds"] = seeds;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    for (const auto& [k, v] : extra.items()) j[k] = v;
    j["started_at"] = started_at;
    j["finished_at"] = utc_now();
    std::ofstream out(path, std::ios::trunc);
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write manifest " + path.string());
  }
};

fs::path manifest_for(const fs::path& output) { return fs::path(output.string() + ".manifest.json"); }

// ---------------------------------------------------------------------------
// Subcommands

struct GenArgs {
  std::string paradigm;
  std::int64_t count = 0;
  std::uint64_t seed = 0;
  std::string config;
  std::vector<std::string> sets;
  std::string out;
};

template <typename Config, typename Gen>
std::vector<dataset::TaskRecord> generate(const Config& cfg, Gen&& gen, const std::string& prefix, std::int64_t count,
                                          std::uint64_t seed) {
  std::vector<dataset::TaskRecord> records;
  records.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    auto inst = gen(cfg, derive_seed(seed, static_cast<std::uint64_t>(i)));
    std::string index = std::to_string(i);
    inst.id = prefix + "-" + std::string(index.size() < 6 ? 6 - index.size() : 0, '0') + index;
    auto r = dataset::make_record(inst, cfg);
    r.meta["index"] = i;
    records.push_back(std::move(r));
  }
  return records;
}

int cmd_gen(const GenArgs& a, bool count_given, bool seed_given, const std::vector<std::string>& argv,
            std::ostream& out) {
  std::map<std::string, std::string> kv;
  if (!a.config.empty()) {
    require_input(a.config);
    std::ifstream in(a.config);
    std::stringstream ss;
    ss << in.rdbuf();
    kv = parse_key_values(ss.str());
  }
  for (const auto& s : a.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw CliError("usage", "--set expects key=value, got '" + s + "'");
    kv[trim(s.substr(0, eq))] = trim(s.substr(eq + 1));
  }
  std::int64_t count = a.count;
  std::uint64_t seed = a.seed;
  if (!count_given && kv.contains("count")) count = to_int("count", kv.at("count"));
  if (!seed_given && kv.contains("seed")) seed = static_cast<std::uint64_t>(to_int("seed", kv.at("seed")));
  if (count < 0) throw CliError("usage", "--count must be >= 0");

  const Paradigm p = dataset::parse_paradigm(a.paradigm);
  std::vector<dataset::TaskRecord> records;
  Json config;
  switch (p) {
    case Paradigm::Deduction: {
      const auto cfg = deduction_config(kv);
      dedgen::validate(cfg);
      config = Json(dedgen::config_json(cfg));
      records = generate(cfg, dedgen::gen_deduction, "deduction", count, seed);
      break;
    }
    case Paradigm::Induction: {
      const auto cfg = induction_config(kv);
      indgen::validate(cfg);
      config = Json(indgen::config_json(cfg));
      records = generate(cfg, indgen::gen_induction, "induction", count, seed);
      break;
    }
    case Paradigm::Abduction: {
      const auto cfg = abduction_config(kv);
      abdgen::validate(cfg);
      config = Json(abdgen::config_json(cfg));
      records = generate(cfg, abdgen::gen_abduction, "abduction", count, seed);
      break;
    }
  }
  dataset::write_jsonl(records, a.out);

  Manifest m;
  m.command = "gen";
  m.argv = argv;
  m.config = config;
  m.config["paradigm"] = a.paradigm;
  m.config["count"] = count;
  m.seeds["seed"] = seed;
  m.outputs = {a.out};
  m.write(manifest_for(a.out));
  out << "wrote " << records.size() << " " << a.paradigm << " records to " << a.out << '\n';
  return 0;
}

int cmd_split(const std::string& in, std::uint64_t seed, const std::string& out_dir,
              const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  require_input(in);
  auto records = dataset::read_jsonl(in);
  const auto splits = dataset::split(std::move(records), seed);
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  dataset::write_jsonl(splits.train, dir / "train.jsonl");
  dataset::write_jsonl(splits.dev, dir / "dev.jsonl");
  dataset::write_jsonl(splits.test, dir / "test.jsonl");

  Manifest m;
  m.command = "split";
  m.argv = argv;
  m.seeds["split_seed"] = seed;
  m.inputs = {in};
  m.outputs = {(dir / "train.jsonl").string(), (dir / "dev.jsonl").string(), (dir / "test.jsonl").string()};
  m.extra["sizes"] = {{"train", splits.train.size()}, {"dev", splits.dev.size()}, {"test", splits.test.size()}};
  m.extra["proportional_fallback"] = splits.proportional_fallback;
  m.write(dir / "manifest.json");
  if (splits.proportional_fallback)
    err << "warning: fewer than " << 2 * dataset::kHeldOutSize << " records; used 10%/10% held-out splits\n";
  out << "train " << splits.train.size() << ", dev " << splits.dev.size() << ", test " << splits.test.size() << '\n';
  return 0;
}

int cmd_sample(const std::string& in, const sampler::SampleConfig& cfg, const std::string& out_path,
               const std::vector<std::string>& argv, std::ostream& out) {
  require_input(in);
  const auto records = dataset::read_jsonl(in);
  sampler::validate(cfg);
  const auto trajectories = sampler::sample_trajectories(records, cfg);
  dataset::write_trajectories(trajectories, out_path);
  const auto c = sampler::count(trajectories);

  Manifest m;
  m.command = "sample";
  m.argv = argv;
  m.config = {{"endpoint", cfg.endpoint},       {"model", cfg.model},
              {"teacher", cfg.teacher},          {"samples_per_question", cfg.samples_per_question},
              {"max_tokens", cfg.max_tokens},    {"temperature", cfg.temperature},
              {"min_words", cfg.min_words},      {"max_in_flight", cfg.max_in_flight},
              {"max_attempts", cfg.retry.max_attempts}};
  m.seeds["seed_base"] = cfg.seed_base;
  m.inputs = {in};
  m.outputs = {out_path};
  m.extra["counts"] = {{"attempted", c.attempted}, {"kept", c.kept}, {"filtered", c.filtered}, {"failed", c.failed}};
  m.write(manifest_for(out_path));
  out << "attempted " << c.attempted << ", kept " << c.kept << ", filtered " << c.filtered << ", failed " << c.failed
      << '\n';
  return 0;
}

struct GradeArgs {
  std::string in;
  std::string outputs;
  std::string report;
  std::string judge_endpoint;
  std::string judge_model = "judge";
};

int cmd_grade(const GradeArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  require_input(a.in);
  require_input(a.outputs);
  const auto records = dataset::read_jsonl(a.in);

  std::map<std::string, std::vector<std::string>> outputs;
  {
    std::ifstream f(a.outputs);
    std::string line;
    std::size_t number = 0;
    while (std::getline(f, line)) {
      ++number;
      if (trim(line).empty()) continue;
      Json j;
      try {
        j = Json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        throw dataset::JsonlError(std::string("invalid JSON: ") + e.what(), number);
      }
      const char* text_key = j.contains("output") ? "output" : "text";
      if (!j.is_object() || !j.contains("record_id") || !j.contains(text_key) || !j.at(text_key).is_string())
        throw dataset::JsonlError("expected {\"record_id\", \"output\"}", number);
      outputs[j.at("record_id").get<std::string>()].push_back(j.at(text_key).get<std::string>());
    }
  }

  std::optional<grader::JudgeFn> judge;
  if (!a.judge_endpoint.empty()) {
    sampler::SampleConfig jc;
    jc.endpoint = a.judge_endpoint;
    jc.model = a.judge_model;
    jc.temperature = 0.0;
    jc.max_tokens = 16;
    sampler::validate(jc);
    judge = grader::chat_judge(jc);
  }

  std::vector<grader::GradeOutcome> outcomes;
  for (const auto& r : records) {
    auto it = outputs.find(r.id);
    if (it == outputs.end()) {
      outcomes.push_back({r.id, r.paradigm, grader::Verdict::Unparseable, grader::Method::Structured, "no output"});
      continue;
    }
    for (const auto& text : it->second)
      outcomes.push_back(judge ? grader::grade_with_judge(r, text, *judge) : grader::grade_record(r, text));
  }
  const auto report = grader::aggregate(outcomes);

  Json j;
  j["report"] = report.to_json();
  Json list = Json::array();
  for (const auto& o : outcomes) {
    Json e;
    e["record_id"] = o.record_id;
    e["paradigm"] = dataset::paradigm_name(o.paradigm);
    e["verdict"] = grader::verdict_name(o.verdict);
    e["method"] = grader::method_name(o.method);
    e["detail"] = o.detail;
    list.push_back(std::move(e));
  }
  j["outcomes"] = std::move(list);
  {
    std::ofstream f(a.report, std::ios::trunc);
    f << j.dump(2) << '\n';
    if (!f) throw std::runtime_error("cannot write report " + a.report);
  }

  Manifest m;
  m.command = "grade";
  m.argv = argv;
  m.config = {{"judge_endpoint", a.judge_endpoint}, {"judge_model", a.judge_model}};
  m.inputs = {a.in, a.outputs};
  m.outputs = {a.report};
  m.write(manifest_for(a.report));
  out << report.to_text();
  return 0;
}

int cmd_stats(const std::string& questions, const std::string& trajectories, bool as_json, std::ostream& out) {
  require_input(questions);
  require_input(trajectories);
  const auto table = dataset::compute_stats(dataset::read_jsonl(questions), dataset::read_trajectories(trajectories));
  if (as_json) out << table.to_json().dump() << '\n';
  else out << table.to_text();
  return 0;
}

void print_error(std::ostream& err, const std::string& kind, const std::string& message) {
  err << nlohmann::json{{"error", kind}, {"message", message}}.dump() << '\n';
}

}  // namespace

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw CliError("config", "config line " + std::to_string(number) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw CliError("config", "config line " + std::to_string(number) + ": empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Symbolic reasoning data engine", "reasonforge"};
  app.require_subcommand(1);
  app.set_version_flag("--version", REASONFORGE_VERSION);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate task records");
  gen_cmd->add_option("--paradigm", gen.paradigm, "deduction | induction | abduction")
      ->required()
      ->check(CLI::IsMember({"deduction", "induction", "abduction"}));
  auto* count_opt = gen_cmd->add_option("--count", gen.count, "Number of records");
  auto* seed_opt = gen_cmd->add_option("--seed", gen.seed, "Base seed");
  gen_cmd->add_option("--config", gen.config, "key = value config file");
  gen_cmd->add_option("--set", gen.sets, "Config override key=value (repeatable)");
  gen_cmd->add_option("--out", gen.out, "Output JSONL")->required();

  std::string split_in, split_dir;
  std::uint64_t split_seed = 0;
  auto* split_cmd = app.add_subcommand("split", "Split records into train/dev/test");
  split_cmd->add_option("--in", split_in)->required();
  split_cmd->add_option("--seed", split_seed);
  split_cmd->add_option("--out-dir", split_dir)->required();

  std::string sample_in, sample_out;
  sampler::SampleConfig scfg;
  int backoff_ms = static_cast<int>(scfg.retry.initial_backoff.count());
  int timeout_s = static_cast<int>(scfg.timeout.count());
  auto* sample_cmd = app.add_subcommand("sample", "Collect teacher trajectories");
  sample_cmd->add_option("--in", sample_in)->required();
  sample_cmd->add_option("--endpoint", scfg.endpoint, "Base URL, e.g. http://localhost:8000/v1")->required();
  sample_cmd->add_option("--model", scfg.model)->required();
  sample_cmd->add_option("--teacher", scfg.teacher, "Teacher label (defaults to the model)");
  sample_cmd->add_option("--samples", scfg.samples_per_question);
  sample_cmd->add_option("--max-tokens", scfg.max_tokens);
  sample_cmd->add_option("--min-words", scfg.min_words);
  sample_cmd->add_option("--temperature", scfg.temperature);
  sample_cmd->add_option("--seed-base", scfg.seed_base);
  sample_cmd->add_option("--max-in-flight", scfg.max_in_flight);
  sample_cmd->add_option("--retries", scfg.retry.max_attempts, "Attempts per request");
  sample_cmd->add_option("--backoff-ms", backoff_ms);
  sample_cmd->add_option("--timeout", timeout_s, "Per-request timeout in seconds");
  sample_cmd->add_option("--out", sample_out)->required();

  GradeArgs grade;
  auto* grade_cmd = app.add_subcommand("grade", "Grade model outputs");
  grade_cmd->add_option("--in", grade.in)->required();
  grade_cmd->add_option("--outputs", grade.outputs, "JSONL of {record_id, output}")->required();
  grade_cmd->add_option("--report", grade.report)->required();
  grade_cmd->add_option("--judge-endpoint", grade.judge_endpoint);
  grade_cmd->add_option("--judge-model", grade.judge_model);

  std::string stats_q, stats_t;
  bool stats_json = false;
  auto* stats_cmd = app.add_subcommand("stats", "Dataset statistics");
  stats_cmd->add_option("--questions", stats_q)->required();
  stats_cmd->add_option("--trajectories", stats_t)->required();
  stats_cmd->add_flag("--json", stats_json);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << REASONFORGE_VERSION << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    print_error(err, "usage", e.what());
    return 2;
  }

  try {
    if (*gen_cmd) return cmd_gen(gen, count_opt->count() > 0, seed_opt->count() > 0, args, out);
    if (*split_cmd) return cmd_split(split_in, split_seed, split_dir, args, out, err);
    if (*sample_cmd) {
      scfg.retry.initial_backoff = std::chrono::milliseconds(backoff_ms);
      scfg.timeout = std::chrono::seconds(timeout_s);
      return cmd_sample(sample_in, scfg, sample_out, args, out);
    }
    if (*grade_cmd) return cmd_grade(grade, args, out);
    if (*stats_cmd) return cmd_stats(stats_q, stats_t, stats_json, out);
  } catch (const CliError& e) {
    print_error(err, e.kind, e.what());
    return e.kind == "usage" ? 2 : 1;
  } catch (const dataset::JsonlError& e) {
    print_error(err, "schema", e.what());
    return 1;
  } catch (const dataset::DanglingReference& e) {
    print_error(err, "schema", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    // Config validation errors derive from invalid_argument.
    print_error(err, "config", e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error(err, "runtime", e.what());
    return 1;
  }
  return 2;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace reasonforge::cli
