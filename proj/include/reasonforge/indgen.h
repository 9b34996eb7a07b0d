#pragma once

// Induction instances: integer sequences driven by a cyclic program of
// add/sub/mul steps, certified to have a unique next term within bounds.

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace reasonforge::indgen {

enum class OpKind { Add, Sub, Mul };

struct CycleOp {
  OpKind kind = OpKind::Add;
  std::int64_t operand = 1;

  friend auto operator<=>(const CycleOp&, const CycleOp&) = default;
  friend bool operator==(const CycleOp&, const CycleOp&) = default;
};

/// Step i applies ops[i mod ops.size()].
struct OpCycle {
  std::vector<CycleOp> ops;

  friend auto operator<=>(const OpCycle&, const OpCycle&) = default;
  friend bool operator==(const OpCycle&, const OpCycle&) = default;
};

struct IndGenConfig {
  int seq_len = 10;
  int cycle_len_min = 3;
  int cycle_len_max = 4;
  bool allow_add = true;
  bool allow_sub = true;
  bool allow_mul = true;
  std::int64_t add_sub_max = 9;  // Add/Sub operands drawn from [1, add_sub_max]
  std::int64_t mul_max = 4;      // Mul operands drawn from [2, mul_max]
  std::int64_t start_min = 1;
  std::int64_t start_max = 20;
  std::int64_t magnitude_cap = 1'000'000;
  bool non_negative = false;
  int resample_budget = 1000;
};

struct InductionInstance {
  std::string id;
  std::vector<std::int64_t> sequence;
  std::int64_t gold = 0;
  OpCycle cycle;
  std::int64_t start = 0;
  std::uint64_t seed = 0;
};

class ConfigError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

class MagnitudeExceeded : public std::overflow_error {
  using std::overflow_error::overflow_error;
};

class BudgetExhausted : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr std::int64_t kNoMagnitudeCap = std::numeric_limits<std::int64_t>::max();

void validate(const OpCycle& cycle);
void validate(const IndGenConfig& cfg);

/// n terms starting at `start`. Throws MagnitudeExceeded if any |term|
/// exceeds the cap or the arithmetic would overflow.
std::vector<std::int64_t> apply_cycle(const OpCycle& cycle, std::int64_t start, int n,
                                      std::int64_t magnitude_cap = kNoMagnitudeCap);

/// Every cycle within the config's length/operand bounds that reproduces
/// `sequence`, sorted by (length, ops). Positions of the cycle that no
/// transition constrains range over all in-bound operations.
std::vector<OpCycle> induce_cycles(const std::vector<std::int64_t>& sequence, const IndGenConfig& bounds);

/// Distinct next-term predictions of the given cycles, ascending.
std::vector<std::int64_t> predictions(const std::vector<OpCycle>& cycles, const std::vector<std::int64_t>& sequence);

InductionInstance gen_induction(const IndGenConfig& cfg, std::uint64_t seed);

std::string to_string(const CycleOp& op);
std::string to_string(const OpCycle& cycle);
nlohmann::json config_json(const IndGenConfig& cfg);
/// Search bounds that certify uniqueness; a subset of config_json.
nlohmann::json bounds_json(const IndGenConfig& cfg);

}  // namespace reasonforge::indgen
