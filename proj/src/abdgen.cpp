#include "reasonforge/abdgen.h"

#include <algorithm>
#include <cctype>

#include "reasonforge/rng.h"

namespace reasonforge::abdgen {

using logic::Formula;

void validate(const AbdGenConfig& cfg) {
  if (cfg.num_atoms < 2 || cfg.num_atoms > 26 + 26 * 26) throw ConfigError("num_atoms must be in [2, 702]");
  if (cfg.num_known < 0 || cfg.num_known > cfg.num_atoms) throw ConfigError("num_known must be in [0, num_atoms]");
  if (cfg.num_rules < 0) throw ConfigError("num_rules must be >= 0");
  if (cfg.self_rules < 0 || cfg.self_rules > cfg.num_rules) throw ConfigError("self_rules must be in [0, num_rules]");
  if (cfg.known_only_goals < 0 || cfg.known_only_goals > cfg.num_known)
    throw ConfigError("known_only_goals must be in [0, num_known]");
  if (cfg.self_rules > cfg.num_known - cfg.known_only_goals)
    throw ConfigError("self_rules exceeds the known atoms available for self-rules");
  if (cfg.derivable_goals < 0 || cfg.derivable_goals > cfg.num_rules - cfg.self_rules)
    throw ConfigError("derivable_goals exceeds the number of non-self rules");
  if (cfg.derivable_goals > cfg.num_atoms - cfg.known_only_goals)
    throw ConfigError("derivable_goals exceeds the atoms available as heads");
  if (cfg.num_rules > cfg.self_rules && cfg.num_atoms <= cfg.known_only_goals)
    throw ConfigError("no atoms left to serve as rule heads");
  if (cfg.unreachable_goals < 0) throw ConfigError("unreachable_goals must be >= 0");
  if (cfg.two_literal_prob < 0 || cfg.two_literal_prob > 1 || cfg.negation_prob < 0 || cfg.negation_prob > 1)
    throw ConfigError("probabilities must be in [0, 1]");
}

std::set<std::string> forward_chain(const std::vector<Rule>& rules, const Assignment& known_assignment) {
  std::set<std::string> facts;
  for (const auto& [atom, value] : known_assignment)
    if (value) facts.insert(atom);

  auto holds = [&](const Literal& lit) {
    if (lit.positive) return facts.contains(lit.variable);
    auto it = known_assignment.find(lit.variable);
    return it != known_assignment.end() && !it->second;
  };

  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& rule : rules) {
      if (facts.contains(rule.head)) continue;
      if (std::any_of(rule.body.begin(), rule.body.end(), holds)) {
        facts.insert(rule.head);
        changed = true;
      }
    }
  }
  return facts;
}

std::set<std::string> cone(const std::vector<Rule>& rules, const std::string& goal) {
  std::set<std::string> out;
  std::vector<std::string> frontier{goal};
  std::set<std::string> expanded;
  while (!frontier.empty()) {
    const std::string atom = frontier.back();
    frontier.pop_back();
    if (!expanded.insert(atom).second) continue;
    for (const auto& rule : rules) {
      if (rule.head != atom) continue;
      for (const auto& lit : rule.body) {
        out.insert(lit.variable);
        frontier.push_back(lit.variable);
      }
    }
  }
  return out;
}

std::vector<std::string> relevant_known(const std::vector<Rule>& rules, const std::vector<std::string>& known,
                                        const std::string& goal) {
  auto domain = cone(rules, goal);
  domain.insert(goal);
  std::vector<std::string> out;
  for (const auto& atom : std::set<std::string>(known.begin(), known.end()))
    if (domain.contains(atom)) out.push_back(atom);
  return out;
}

GoalAnswer solve_goal(const std::vector<Rule>& rules, const std::vector<std::string>& known, const std::string& goal) {
  const auto domain = relevant_known(rules, known, goal);
  if (domain.size() > kEnumerationLimit)
    throw std::invalid_argument("solve_goal: " + std::to_string(domain.size()) +
                                " relevant known atoms exceeds the enumeration limit");
  GoalAnswer answer;
  const std::size_t n = domain.size();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    Assignment sigma;
    for (std::size_t i = 0; i < n; ++i) sigma[domain[i]] = ((mask >> (n - 1 - i)) & 1U) != 0;
    if (forward_chain(rules, sigma).contains(goal)) answer.solutions.push_back(std::move(sigma));
  }
  std::sort(answer.solutions.begin(), answer.solutions.end());
  answer.reachable = !answer.solutions.empty();
  return answer;
}

GoalAnswer solve_goal(const AbductionInstance& inst, const std::string& goal) {
  if (std::find(inst.goals.begin(), inst.goals.end(), goal) == inst.goals.end())
    throw std::invalid_argument("solve_goal: '" + goal + "' is not a goal of instance " + inst.id);
  return solve_goal(inst.rules, inst.known, goal);
}

// ---------------------------------------------------------------------------
// Generation

namespace {

std::string random_name(Rng& rng) {
  auto letter = [&] { return static_cast<char>('A' + rng.uniform(0, 25)); };
  for (;;) {
    std::string name(1, letter());
    if (!rng.chance(0.7)) name += letter();
    if (name != "OR") return name;  // reserved by the worded rule syntax
  }
}

std::vector<std::string> distinct_names(Rng& rng, std::size_t count, const std::set<std::string>& taken) {
  std::set<std::string> used = taken;
  std::vector<std::string> out;
  while (out.size() < count) {
    std::string n = random_name(rng);
    if (used.insert(n).second) out.push_back(std::move(n));
  }
  return out;
}

template <typename T>
std::vector<T> take_random(Rng& rng, std::vector<T> pool, std::size_t count) {
  rng.shuffle(pool);
  pool.resize(std::min(count, pool.size()));
  return pool;
}

}  // namespace

AbductionInstance gen_abduction(const AbdGenConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  Rng rng(seed);

  const auto atoms = distinct_names(rng, static_cast<std::size_t>(cfg.num_atoms), {});
  const auto known = take_random(rng, atoms, static_cast<std::size_t>(cfg.num_known));
  const std::set<std::string> known_set(known.begin(), known.end());

  // Known atoms reserved as ruleless goals; they never appear as a head.
  const auto reserved = take_random(rng, known, static_cast<std::size_t>(cfg.known_only_goals));
  const std::set<std::string> reserved_set(reserved.begin(), reserved.end());

  std::vector<std::string> head_pool;
  for (const auto& a : atoms)
    if (!reserved_set.contains(a)) head_pool.push_back(a);
  std::vector<std::string> self_pool;
  for (const auto& a : known)
    if (!reserved_set.contains(a)) self_pool.push_back(a);

  auto draw_literal = [&](const std::string& head) {
    std::string atom;
    do {
      atom = rng.pick(atoms);
    } while (atom == head);
    const bool negative = known_set.contains(atom) && rng.chance(cfg.negation_prob);
    return Literal{atom, !negative};
  };

  std::vector<Rule> rules;
  const auto distinct_heads = take_random(rng, head_pool, static_cast<std::size_t>(cfg.derivable_goals));
  for (int i = 0; i < cfg.num_rules - cfg.self_rules; ++i) {
    Rule r;
    r.head = static_cast<std::size_t>(i) < distinct_heads.size() ? distinct_heads[static_cast<std::size_t>(i)]
                                                                  : rng.pick(head_pool);
    r.body.push_back(draw_literal(r.head));
    if (rng.chance(cfg.two_literal_prob)) r.body.push_back(draw_literal(r.head));
    rules.push_back(std::move(r));
  }
  for (const auto& a : take_random(rng, self_pool, static_cast<std::size_t>(cfg.self_rules)))
    rules.push_back(Rule{{Literal{a, true}}, a});
  rng.shuffle(rules);

  std::set<std::string> taken(atoms.begin(), atoms.end());
  std::vector<std::string> goals = distinct_heads;
  goals.insert(goals.end(), reserved.begin(), reserved.end());
  for (auto& fresh : distinct_names(rng, static_cast<std::size_t>(cfg.unreachable_goals), taken))
    goals.push_back(std::move(fresh));
  rng.shuffle(goals);

  AbductionInstance inst;
  inst.id = "abd-" + std::to_string(seed);
  inst.atoms = std::move(taken);
  inst.rules = std::move(rules);
  inst.known = known;
  inst.goals = std::move(goals);
  inst.seed = seed;
  for (const auto& g : inst.goals) inst.gold[g] = solve_goal(inst, g);
  return inst;
}

// ---------------------------------------------------------------------------
// Serialization

std::string rule_to_string(const Rule& rule) {
  if (rule.body.empty()) throw std::invalid_argument("rule body must not be empty");
  auto lit = [](const Literal& l) {
    Formula v = Formula::var(l.variable);
    return l.positive ? v : Formula::negate(v);
  };
  Formula body = lit(rule.body.front());
  for (std::size_t i = 1; i < rule.body.size(); ++i) body = Formula::disj(body, lit(rule.body[i]));
  return "(" + logic::render_formula(body, logic::Dialect::Worded) + ") => " + rule.head;
}

namespace {
void collect_disjuncts(const Formula& f, std::vector<Literal>& out, std::size_t offset) {
  switch (f.op()) {
    case logic::Op::Var:
      out.push_back({f.name(), true});
      return;
    case logic::Op::Not:
      if (!f.left().is_var()) throw logic::ParseError("negation must apply to an atom", offset);
      out.push_back({f.left().name(), false});
      return;
    case logic::Op::Or:
      collect_disjuncts(f.left(), out, offset);
      collect_disjuncts(f.right(), out, offset);
      return;
    default:
      throw logic::ParseError("rule body must be a disjunction of literals", offset);
  }
}
}  // namespace

Rule parse_rule(std::string_view text) {
  const auto arrow = text.rfind("=>");
  if (arrow == std::string_view::npos) throw logic::ParseError("expected '=>'", text.size());
  Rule rule;
  const auto body = logic::parse_formula(text.substr(0, arrow), logic::Dialect::Worded);
  collect_disjuncts(body, rule.body, 0);
  auto head = text.substr(arrow + 2);
  while (!head.empty() && head.front() == ' ') head.remove_prefix(1);
  while (!head.empty() && head.back() == ' ') head.remove_suffix(1);
  if (head.empty() || !std::all_of(head.begin(), head.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }))
    throw logic::ParseError("rule head must be a single atom", arrow + 2);
  rule.head = std::string(head);
  return rule;
}

nlohmann::json answer_json(const GoalAnswer& answer) {
  nlohmann::json sols = nlohmann::json::array();
  for (const auto& s : answer.solutions) {
    nlohmann::json obj = nlohmann::json::object();
    for (const auto& [atom, value] : s) obj[atom] = value;
    sols.push_back(std::move(obj));
  }
  return {{"reachable", answer.reachable}, {"solutions", std::move(sols)}};
}

nlohmann::json gold_json(const GoldMap& gold) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [goal, answer] : gold) out[goal] = answer_json(answer);
  return out;
}

nlohmann::json config_json(const AbdGenConfig& cfg) {
  return {{"num_atoms", cfg.num_atoms},
          {"num_rules", cfg.num_rules},
          {"num_known", cfg.num_known},
          {"self_rules", cfg.self_rules},
          {"derivable_goals", cfg.derivable_goals},
          {"known_only_goals", cfg.known_only_goals},
          {"unreachable_goals", cfg.unreachable_goals},
          {"two_literal_prob", cfg.two_literal_prob},
          {"negation_prob", cfg.negation_prob}};
}

}  // namespace reasonforge::abdgen
