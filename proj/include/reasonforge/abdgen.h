#pragma once

// Abduction instances ("assumption trace-back"): rules with disjunctive
// bodies, known atoms with hidden values, and goals whose gold answer lists
// every assignment of the relevant known atoms that makes the goal derivable.

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "reasonforge/logic.h"

namespace reasonforge::abdgen {

using logic::Assignment;
using logic::Literal;

/// body[0] OR body[1] => head
struct Rule {
  std::vector<Literal> body;
  std::string head;

  friend bool operator==(const Rule&, const Rule&) = default;
};

struct GoalAnswer {
  bool reachable = false;
  std::vector<Assignment> solutions;  // sorted, empty when unreachable

  friend bool operator==(const GoalAnswer&, const GoalAnswer&) = default;
};

using GoldMap = std::map<std::string, GoalAnswer>;

struct AbductionInstance {
  std::string id;
  std::set<std::string> atoms;
  std::vector<Rule> rules;
  std::vector<std::string> known;
  std::vector<std::string> goals;
  GoldMap gold;
  std::uint64_t seed = 0;
};

struct AbdGenConfig {
  int num_atoms = 8;
  int num_rules = 6;
  int num_known = 5;
  int self_rules = 2;
  int derivable_goals = 1;
  int known_only_goals = 1;
  int unreachable_goals = 1;
  double two_literal_prob = 0.6;
  double negation_prob = 0.25;
};

class ConfigError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline constexpr std::size_t kEnumerationLimit = 20;

/// Written into instance metadata; describes how known goals are scored.
inline constexpr std::string_view kKnownGoalConvention =
    "a known goal is enumerated over its own value; with no rule it is reachable with {goal: true}";

void validate(const AbdGenConfig& cfg);

/// Least fixpoint. Facts start as the known atoms assigned true; a positive
/// literal holds for a fact, a negative literal only for a known atom
/// assigned false.
std::set<std::string> forward_chain(const std::vector<Rule>& rules, const Assignment& known_assignment);

/// Atoms reachable backwards from `goal` through rule bodies.
std::set<std::string> cone(const std::vector<Rule>& rules, const std::string& goal);

/// Known atoms an answer for `goal` ranges over: (cone ∪ {goal}) ∩ known.
std::vector<std::string> relevant_known(const std::vector<Rule>& rules, const std::vector<std::string>& known,
                                        const std::string& goal);

GoalAnswer solve_goal(const std::vector<Rule>& rules, const std::vector<std::string>& known, const std::string& goal);
GoalAnswer solve_goal(const AbductionInstance& inst, const std::string& goal);

AbductionInstance gen_abduction(const AbdGenConfig& cfg, std::uint64_t seed);

/// "((M OR L)) => B"
std::string rule_to_string(const Rule& rule);
Rule parse_rule(std::string_view text);

nlohmann::json answer_json(const GoalAnswer& answer);
nlohmann::json gold_json(const GoldMap& gold);
nlohmann::json config_json(const AbdGenConfig& cfg);

}  // namespace reasonforge::abdgen
