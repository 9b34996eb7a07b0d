#pragma once

// Deduction (satisfiability) instances with solver-verified gold answers.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "reasonforge/logic.h"

namespace reasonforge::dedgen {

using logic::Assignment;
using logic::CnfFormula;
using logic::Formula;

enum class DedMode { PlantedCnf, NestedFormula };

struct IntRange {
  int min = 1;
  int max = 1;
};

struct DedGenConfig {
  int num_vars = 8;
  IntRange num_conjuncts{5, 5};
  int max_depth = 3;           // NestedFormula
  IntRange clause_len{2, 3};   // PlantedCnf
  DedMode mode = DedMode::PlantedCnf;
  int resample_budget = 1000;  // NestedFormula
  std::size_t cnf_clause_cap = logic::kDefaultCnfClauseCap;
};

struct DeductionInstance {
  std::string id;
  std::vector<std::string> variables;
  std::vector<Formula> conjuncts;
  CnfFormula cnf;
  Assignment gold;
  std::uint64_t seed = 0;
  DedMode mode = DedMode::PlantedCnf;
};

class ConfigError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

class BudgetExhausted : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

void validate(const DedGenConfig& cfg);

/// "A".."Z" for up to 26 variables, otherwise "V1".."Vn".
std::vector<std::string> variable_names(int count);

DeductionInstance gen_deduction(const DedGenConfig& cfg, std::uint64_t seed);

/// DPLL with unit propagation and pure-literal elimination. Branches on the
/// first unassigned variable in name order, trying false first. Variables
/// left free once every clause is satisfied are set to false.
std::optional<Assignment> solve_dpll(const CnfFormula& cnf);

inline constexpr std::size_t kBruteForceVarLimit = 20;

/// Exhaustive search in lexicographic variable order; the first variable is
/// the most significant and false precedes true.
std::optional<Assignment> brute_force_sat(const Formula& f);
std::optional<Assignment> brute_force_sat(const CnfFormula& cnf);

/// {"A": "False", "B": "True", ...}, keys ascending.
nlohmann::json gold_json(const Assignment& a);

nlohmann::json config_json(const DedGenConfig& cfg);
std::string mode_name(DedMode mode);
DedMode parse_mode(const std::string& name);

}  // namespace reasonforge::dedgen
