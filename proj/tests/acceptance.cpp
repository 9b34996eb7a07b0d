// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <mutex>
#include <optional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "reasonforge/abdgen.h"
#include "reasonforge/cli.h"
#include "reasonforge/dataset.h"
#include "reasonforge/dedgen.h"
#include "reasonforge/grader.h"
#include "reasonforge/indgen.h"
#include "reasonforge/logic.h"
#include "reasonforge/sampler.h"
#include "stub_server.h"
#include "support.h"

namespace {

using namespace reasonforge;
using logic::Assignment;
using logic::Dialect;
using logic::Formula;
namespace fs = std::filesystem;

/// Thrown by `require` to fail a criterion with a message.
struct Failure {
  std::string message;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw Failure{message};
}

struct Criterion {
  int number;
  std::string title;
  double time_limit_s;  // 0: untimed
  std::function<void()> body;
};

// ---------------------------------------------------------------------------

void deduction_soundness() {
  for (auto mode : {dedgen::DedMode::PlantedCnf, dedgen::DedMode::NestedFormula}) {
    dedgen::DedGenConfig cfg;
    cfg.num_vars = 8;
    cfg.mode = mode;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
      const auto inst = dedgen::gen_deduction(cfg, seed);
      const auto f = logic::conjunction(inst.conjuncts);
      require(testsupport::truth(f, inst.gold),
              dedgen::mode_name(mode) + " seed " + std::to_string(seed) + ": gold does not satisfy the formula");
    }
  }
}

void solver_oracle_agreement() {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 1000; ++i) {
    const int n = 1 + static_cast<int>(rng() % 12);
    const int clauses = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(5 * n));
    const auto cnf = testsupport::random_cnf(rng, n, clauses, 3);
    const auto d = dedgen::solve_dpll(cnf);
    const auto b = dedgen::brute_force_sat(cnf);
    require(d.has_value() == b.has_value(), "satisfiability disagreement on " + logic::to_string(cnf));
    if (d) require(testsupport::cnf_truth(cnf, *d), "DPLL model does not satisfy " + logic::to_string(cnf));
    if (b) require(testsupport::cnf_truth(cnf, *b), "brute-force model does not satisfy " + logic::to_string(cnf));
  }
}

// Random formula in which every name in `vars` occurs at least once.
Formula covering_formula(std::mt19937_64& rng, const std::vector<std::string>& vars) {
  static constexpr logic::Op kOps[] = {logic::Op::And, logic::Op::Or, logic::Op::Xor, logic::Op::Implies,
                                       logic::Op::Iff};
  std::vector<Formula> items;
  for (const auto& v : vars) items.push_back(Formula::var(v));
  for (int extra = static_cast<int>(rng() % 3); extra > 0; --extra) items.push_back(Formula::var(vars[rng() % vars.size()]));
  std::shuffle(items.begin(), items.end(), rng);
  while (items.size() > 1) {
    const std::size_t i = rng() % (items.size() - 1);
    Formula joined = Formula::binary(kOps[rng() % 5], items[i], items[i + 1]);
    if (rng() % 10 < 3) joined = Formula::negate(joined);
    items[i] = joined;
    items.erase(items.begin() + static_cast<std::ptrdiff_t>(i) + 1);
  }
  return rng() % 10 < 2 ? Formula::negate(items.front()) : items.front();
}

void cnf_equivalence() {
  std::mt19937_64 rng(77);
  std::size_t widest = 0;
  for (int i = 0; i < 500; ++i) {
    const int n = 1 + i % 10;
    const auto vars = testsupport::names(n);
    const Formula f = covering_formula(rng, vars);
    const auto cnf = logic::to_cnf(f, std::size_t{1} << 20);
    const auto fv = logic::free_vars(f);
    widest = std::max(widest, fv.size());
    for (const auto& a : testsupport::all_assignments({fv.begin(), fv.end()}))
      require(logic::evaluate(f, a) == logic::evaluate(cnf, a),
              "CNF differs from " + logic::render_formula(f, Dialect::Symbolic));
  }
  require(widest == 10, "no formula reached 10 variables");
}

void deduction_exhibit() {
  const std::vector<std::string> parts = {
      "¬(((¬A ∧ A) ∨ ¬(F)))",
      "((¬(¬E) ∨ ¬ (¬B)) ⊕ ((H ∧ F) → (H ↔ F)))",
      "¬ (((H → A) ∨ (¬G ⊕ D)))",
      "(((F ∧ C) ∧ (G ⊕ ¬G)) ↔ ((D ↔ A) ∧ (F ∧ G)))",
      "((¬ (C) ∧ (¬F → D)) ⊕ ¬ ((¬B ↔ ¬F)))",
  };
  const Assignment gold = {{"A", false}, {"B", false}, {"C", true}, {"D", false},
                           {"E", false}, {"F", true},  {"G", true}, {"H", true}};
  std::vector<Formula> fs;
  for (const auto& p : parts) fs.push_back(logic::parse_formula(p, Dialect::Symbolic));
  require(logic::evaluate(logic::conjunction(fs), gold), "exhibit is false under its gold assignment");
}

void induction_exhibits() {
  using indgen::CycleOp;
  using indgen::OpKind;
  struct Exhibit {
    indgen::OpCycle cycle;
    std::int64_t start;
    std::vector<std::int64_t> shown;
    std::int64_t gold;
  };
  const Exhibit exhibits[] = {
      {{{{OpKind::Mul, 2}, {OpKind::Sub, 4}, {OpKind::Mul, 2}, {OpKind::Add, 3}}},
       5,
       {5, 10, 6, 12, 15, 30, 26, 52, 55, 110},
       106},
      {{{{OpKind::Add, 3}, {OpKind::Mul, 4}, {OpKind::Add, 3}}}, 2, {2, 5, 20, 23, 26, 104, 107, 110, 440, 443}, 446},
  };
  for (const auto& e : exhibits) {
    auto expected = e.shown;
    expected.push_back(e.gold);
    require(indgen::apply_cycle(e.cycle, e.start, static_cast<int>(expected.size())) == expected,
            "apply_cycle does not reproduce " + indgen::to_string(e.cycle));
    const auto cycles = indgen::induce_cycles(e.shown, indgen::IndGenConfig{});
    require(!cycles.empty(), "induce_cycles found nothing for sequence ending " + std::to_string(e.shown.back()));
    for (const auto& c : cycles)
      require(indgen::apply_cycle(c, e.shown.front(), static_cast<int>(e.shown.size())) == e.shown,
              "inconsistent cycle " + indgen::to_string(c));
    require(indgen::predictions(cycles, e.shown) == std::vector<std::int64_t>{e.gold},
            "predictions are not exactly {" + std::to_string(e.gold) + "}");
  }
}

void induction_uniqueness() {
  const indgen::IndGenConfig cfg;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    auto inst = indgen::gen_induction(cfg, seed);
    inst.id = "i" + std::to_string(seed);
    const auto record = dataset::make_record(inst, cfg);
    // Rebuild the bounds from the serialized record only.
    const auto& b = record.meta.at("bounds");
    indgen::IndGenConfig bounds;
    bounds.cycle_len_min = b.at("cycle_len_min").get<int>();
    bounds.cycle_len_max = b.at("cycle_len_max").get<int>();
    bounds.allow_add = b.at("allow_add").get<bool>();
    bounds.allow_sub = b.at("allow_sub").get<bool>();
    bounds.allow_mul = b.at("allow_mul").get<bool>();
    bounds.add_sub_max = b.at("add_sub_max").get<std::int64_t>();
    bounds.mul_max = b.at("mul_max").get<std::int64_t>();
    const auto seq = record.meta.at("sequence").get<std::vector<std::int64_t>>();
    const auto preds = indgen::predictions(indgen::induce_cycles(seq, bounds), seq);
    require(preds == std::vector<std::int64_t>{std::stoll(record.gold)},
            "seed " + std::to_string(seed) + ": prediction set is not {gold}");
  }
}

void abduction_oracle() {
  std::size_t max_known = 0;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    abdgen::AbdGenConfig cfg;
    cfg.num_atoms = 12;
    cfg.num_rules = 8;
    cfg.num_known = 3 + static_cast<int>(seed % 8);  // 3..10
    const auto inst = abdgen::gen_abduction(cfg, seed);
    max_known = std::max(max_known, inst.known.size());
    require(inst.known.size() <= 10, "more than 10 known atoms");
    for (const auto& goal : inst.goals) {
      const auto ans = abdgen::solve_goal(inst, goal);
      const auto projection = abdgen::relevant_known(inst.rules, inst.known, goal);
      const auto oracle = testsupport::abduction_oracle(inst.rules, inst.known, goal, projection);
      require(ans.solutions == oracle && ans.reachable == !oracle.empty(),
              "seed " + std::to_string(seed) + " goal " + goal + ": solver and oracle differ");
    }
  }
  require(max_known == 10, "no instance reached 10 known atoms");

  std::vector<abdgen::Rule> rules;
  for (const char* s : {"(L) => L", "(((NOT D) OR (NOT M))) => N", "((M OR M)) => C", "((M OR L)) => B", "(M) => M",
                        "((L OR B)) => G"})
    rules.push_back(abdgen::parse_rule(s));
  const std::vector<std::string> known = {"L", "M", "A", "D", "N"};
  for (const char* goal : {"KM", "NK"}) {
    const auto ans = abdgen::solve_goal(rules, known, goal);
    require(!ans.reachable && ans.solutions.empty(), std::string(goal) + " should be unreachable");
  }
}

std::vector<dataset::TaskRecord> synthetic_records(std::size_t n) {
  std::vector<dataset::TaskRecord> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::ostringstream id;
    id << "q" << std::setw(6) << std::setfill('0') << i;
    out[i].id = id.str();
    out[i].paradigm = dataset::Paradigm::Deduction;
  }
  return out;
}

void split_arithmetic() {
  const std::pair<std::size_t, std::size_t> totals[] = {{3600, 3400}, {4500, 4300}, {9000, 8800}};
  for (const auto& [total, train] : totals) {
    const auto s = dataset::split(synthetic_records(total), 0);
    require(s.train.size() == train && s.dev.size() == 100 && s.test.size() == 100,
            "split of " + std::to_string(total) + " gives " + std::to_string(s.train.size()) + "/" +
                std::to_string(s.dev.size()) + "/" + std::to_string(s.test.size()));
  }
  struct Row {
    std::size_t questions, attempted, filtered, kept;
  };
  for (const Row& row : {Row{3400, 17000, 554, 16446}, Row{4300, 21500, 2430, 19070}, Row{8800, 44000, 19872, 24128}}) {
    const auto records = synthetic_records(row.questions);
    std::vector<dataset::TrajectoryRecord> ts;
    const std::size_t per = row.attempted / row.questions;
    for (std::size_t i = 0; i < row.attempted; ++i) {
      dataset::TrajectoryRecord t;
      t.record_id = records[i / per].id;
      t.sample_index = static_cast<int>(i % per);
      t.teacher = "teacher";
      t.text = "a b";
      t.kept = i >= row.filtered;
      ts.push_back(std::move(t));
    }
    const auto table = dataset::compute_stats(records, ts);
    require(table.rows.size() == 1, "expected a single stats row");
    const auto& r = table.rows[0];
    require(r.attempted == row.attempted && r.filtered == row.filtered && r.trajectories == row.kept,
            std::to_string(row.attempted) + " - " + std::to_string(row.filtered) + " gave " +
                std::to_string(r.trajectories));
  }
}

void sampler_contract() {
  int injected = 0;
  std::mutex mu;
  testsupport::StubServer server([&](const nlohmann::json& body, int) -> std::pair<int, std::string> {
    {
      std::lock_guard lock(mu);
      if (injected < 2) {
        ++injected;
        return {500, ""};
      }
    }
    const auto seed = body.at("seed").get<std::int64_t>();
    const auto q = body.at("messages").at(0).at("content").get<std::string>();
    return {200, q + " " + testsupport::words(seed == 4 ? 3 : 30)};
  });
  std::vector<dataset::TaskRecord> records(3);
  for (int i = 0; i < 3; ++i) {
    records[static_cast<std::size_t>(i)].id = "r" + std::to_string(i);
    records[static_cast<std::size_t>(i)].question = "Q" + std::to_string(i);
  }
  sampler::SampleConfig cfg;
  cfg.endpoint = server.endpoint();
  cfg.model = "stub";
  cfg.samples_per_question = 5;
  cfg.min_words = 20;
  cfg.retry.max_attempts = 3;
  cfg.retry.initial_backoff = std::chrono::milliseconds(10);
  const auto out = sampler::sample_trajectories(records, cfg);
  require(out.size() == 15, "expected 15 trajectories, got " + std::to_string(out.size()));
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& t = out[i];
    const std::string rec = "r" + std::to_string(i / 5);
    require(t.record_id == rec && t.sample_index == static_cast<int>(i % 5), "trajectory " + std::to_string(i) + " out of order");
    require(!t.failed, "trajectory " + std::to_string(i) + " failed: " + t.error);
    require(t.text.rfind("Q" + std::to_string(i / 5) + " ", 0) == 0, "trajectory " + std::to_string(i) + " has the wrong text");
    require(t.kept == (t.sample_index != 4), "trajectory " + std::to_string(i) + " has the wrong kept flag");
  }
  require(injected == 2, "the injected errors were not consumed");
  require(server.calls() == 17, "expected 17 requests, got " + std::to_string(server.calls()));
}

// Wraps an answer the way a model would.
std::string wrap(const std::string& answer) { return "<think>...</think>\n<answer>" + answer + "</answer>"; }

void grader_closure() {
  using grader::Verdict;
  auto expect = [](const grader::GradeOutcome& o, Verdict v, const std::string& what) {
    require(o.verdict == v, what + " on " + o.record_id + " graded " + grader::verdict_name(o.verdict) + " (" + o.detail + ")");
  };

  int deduction = 0;
  dedgen::DedGenConfig dcfg;
  for (std::uint64_t seed = 0; deduction < 100; ++seed) {
    require(seed < 10000, "not enough deduction instances with a falsifying single flip");
    auto inst = dedgen::gen_deduction(dcfg, seed);
    inst.id = "d" + std::to_string(seed);
    const auto f = logic::conjunction(inst.conjuncts);
    std::optional<Assignment> mutated;
    for (const auto& v : inst.variables) {
      auto m = inst.gold;
      m[v] = !m[v];
      if (!testsupport::truth(f, m)) {
        mutated = m;
        break;
      }
    }
    if (!mutated) continue;
    const auto record = dataset::make_record(inst, dcfg);
    expect(grader::grade_record(record, wrap(record.gold)), Verdict::Correct, "gold");
    expect(grader::grade_record(record, wrap(dedgen::gold_json(*mutated).dump())), Verdict::Incorrect, "flipped variable");
    ++deduction;
  }

  const indgen::IndGenConfig icfg;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto inst = indgen::gen_induction(icfg, seed);
    inst.id = "i" + std::to_string(seed);
    const auto record = dataset::make_record(inst, icfg);
    expect(grader::grade_record(record, wrap(record.gold)), Verdict::Correct, "gold");
    expect(grader::grade_record(record, wrap(std::to_string(inst.gold + 1))), Verdict::Incorrect, "+1");
    expect(grader::grade_record(record, wrap(std::to_string(inst.gold - 1))), Verdict::Incorrect, "-1");
  }

  int abduction = 0;
  const abdgen::AbdGenConfig acfg;
  for (std::uint64_t seed = 0; abduction < 100; ++seed) {
    require(seed < 10000, "not enough abduction instances with a solution");
    auto inst = abdgen::gen_abduction(acfg, seed);
    inst.id = "a" + std::to_string(seed);
    auto mutated = inst.gold;
    bool dropped = false;
    for (auto& [goal, ans] : mutated) {
      if (!ans.solutions.empty()) {
        ans.solutions.pop_back();
        dropped = true;
        break;
      }
    }
    if (!dropped) continue;
    const auto record = dataset::make_record(inst, acfg);
    expect(grader::grade_record(record, wrap(record.gold)), Verdict::Correct, "gold");
    expect(grader::grade_record(record, wrap(abdgen::gold_json(mutated).dump())), Verdict::Incorrect, "dropped solution");
    ++abduction;
  }
}

void deduction_model_agnostic() {
  int checked = 0;
  for (auto mode : {dedgen::DedMode::PlantedCnf, dedgen::DedMode::NestedFormula}) {
    dedgen::DedGenConfig cfg;
    cfg.mode = mode;
    for (std::uint64_t seed = 0; seed < 5000 && checked < 100; ++seed) {
      auto inst = dedgen::gen_deduction(cfg, seed);
      inst.id = "d" + std::to_string(seed);
      const auto f = logic::conjunction(inst.conjuncts);
      std::optional<Assignment> other;
      for (const auto& a : testsupport::all_assignments(inst.variables)) {
        if (a != inst.gold && testsupport::truth(f, a)) {
          other = a;
          break;
        }
      }
      if (!other) continue;
      const auto record = dataset::make_record(inst, cfg);
      const auto o = grader::grade_record(record, wrap(dedgen::gold_json(*other).dump()));
      require(o.verdict == grader::Verdict::Correct, inst.id + ": alternative model graded " + grader::verdict_name(o.verdict));
      ++checked;
    }
    if (checked >= 100) break;
  }
  require(checked == 100, "only " + std::to_string(checked) + " instances with two or more models");
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> pipeline(const fs::path& dir) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::map<std::string, std::string> outputs;
  auto cli = [&](std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    require(code == 0, args[0] + " failed: " + err.str());
    return out.str();
  };
  for (const std::string p : {"deduction", "induction", "abduction"}) {
    const auto gen = (dir / (p + ".jsonl")).string();
    cli({"gen", "--paradigm", p, "--count", "250", "--seed", "11", "--out", gen});
    cli({"split", "--in", gen, "--seed", "3", "--out-dir", (dir / p).string()});
    // Synthetic trajectories over the train split.
    std::vector<dataset::TrajectoryRecord> ts;
    for (const auto& r : dataset::read_jsonl(dir / p / "train.jsonl")) {
      for (int k = 0; k < 2; ++k) {
        dataset::TrajectoryRecord t;
        t.record_id = r.id;
        t.sample_index = k;
        t.seed = k;
        t.teacher = "synthetic";
        t.text = r.question;
        t.word_count = static_cast<std::int64_t>(dataset::whitespace_tokens(t.text));
        t.kept = k == 0;
        ts.push_back(std::move(t));
      }
    }
    const auto traj = dir / p / "traj.jsonl";
    dataset::write_trajectories(ts, traj);
    outputs[p + ".stats"] = cli({"stats", "--questions", (dir / p / "train.jsonl").string(), "--trajectories",
                                 traj.string(), "--json"});
    outputs[p + ".jsonl"] = read_file(gen);
    for (const char* s : {"train.jsonl", "dev.jsonl", "test.jsonl", "traj.jsonl"})
      outputs[p + "/" + s] = read_file(dir / p / s);
  }
  return outputs;
}

void end_to_end_determinism() {
  const auto base = fs::temp_directory_path() / "reasonforge_acceptance";
  const auto a = pipeline(base / "run1");
  const auto b = pipeline(base / "run2");
  fs::remove_all(base);
  require(a.size() == b.size(), "different output sets");
  for (const auto& [name, bytes] : a) {
    require(!bytes.empty(), name + " is empty");
    require(b.at(name) == bytes, name + " differs between runs");
  }
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "deduction soundness (1000 seeds, both modes)", 10, deduction_soundness},
      {2, "DPLL agrees with brute force on 1000 CNFs", 30, solver_oracle_agreement},
      {3, "CNF equivalence on 500 formulas", 0, cnf_equivalence},
      {4, "deduction exhibit holds under its gold assignment", 0, deduction_exhibit},
      {5, "induction exhibits 106 and 446", 0, induction_exhibits},
      {6, "induction uniqueness on 1000 instances", 60, induction_uniqueness},
      {7, "abduction solver matches enumeration oracle", 60, abduction_oracle},
      {8, "split and trajectory arithmetic", 0, split_arithmetic},
      {9, "sampler contract against stub server", 5, sampler_contract},
      {10, "grader closure on gold and mutated answers", 0, grader_closure},
      {11, "deduction grading accepts any model", 0, deduction_model_agnostic},
      {12, "gen -> split -> stats is byte-identical across runs", 0, end_to_end_determinism},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string error;
    try {
      c.body();
    } catch (const Failure& f) {
      error = f.message;
    } catch (const std::exception& e) {
      error = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (error.empty() && c.time_limit_s > 0 && secs >= c.time_limit_s)
      error = "took " + std::to_string(secs) + " s, limit " + std::to_string(c.time_limit_s) + " s";
    std::ostringstream line;
    line << (error.empty() ? "PASS" : "FAIL") << " [" << c.number << "] " << c.title << " (" << std::fixed
         << std::setprecision(3) << secs << " s)";
    if (!error.empty()) line << ": " << error;
    std::cout << line.str() << std::endl;
    if (!error.empty()) ++failed;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
