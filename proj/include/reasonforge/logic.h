#pragma once

// Propositional formulas: AST, surface syntaxes, evaluation and CNF.

#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace reasonforge::logic {

enum class Op { Var, Not, And, Or, Xor, Implies, Iff };

/// Surface notation. Symbolic uses ¬ ∧ ∨ ⊕ → ↔; Worded uses NOT/AND/OR.
enum class Dialect { Symbolic, Worded };

/// Immutable propositional formula. Copies share structure.
class Formula {
 public:
  static Formula var(std::string name);
  static Formula negate(Formula child);
  static Formula binary(Op op, Formula left, Formula right);
  static Formula conj(Formula left, Formula right) { return binary(Op::And, std::move(left), std::move(right)); }
  static Formula disj(Formula left, Formula right) { return binary(Op::Or, std::move(left), std::move(right)); }

  Op op() const;
  bool is_var() const { return op() == Op::Var; }
  /// Variable name; only valid when is_var().
  const std::string& name() const;
  /// Operand of a Not, or left operand of a binary node.
  const Formula& left() const;
  const Formula& right() const;

  friend bool operator==(const Formula& a, const Formula& b);

 private:
  struct Node;
  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// Left-nested conjunction of a non-empty list.
Formula conjunction(const std::vector<Formula>& parts);

struct Literal {
  std::string variable;
  bool positive = true;

  friend auto operator<=>(const Literal&, const Literal&) = default;
  friend bool operator==(const Literal&, const Literal&) = default;
};

using Clause = std::vector<Literal>;

struct CnfFormula {
  std::vector<Clause> clauses;

  std::set<std::string> variables() const;
  friend bool operator==(const CnfFormula&, const CnfFormula&) = default;
};

using Assignment = std::map<std::string, bool>;

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t offset);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Raised when an operator has no spelling in the requested dialect.
class DialectError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class UnboundVariable : public std::runtime_error {
 public:
  explicit UnboundVariable(const std::string& name);
  const std::string& variable() const { return name_; }

 private:
  std::string name_;
};

class CnfTooLarge : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kDefaultCnfClauseCap = 4096;

Formula parse_formula(std::string_view text, Dialect dialect);
std::string render_formula(const Formula& f, Dialect dialect);

bool evaluate(const Formula& f, const Assignment& a);
bool evaluate(const Clause& clause, const Assignment& a);
bool evaluate(const CnfFormula& cnf, const Assignment& a);

std::set<std::string> free_vars(const Formula& f);

/// Equivalence-preserving conversion by distribution. No auxiliary
/// variables; clause literals are sorted and deduplicated; duplicate clauses
/// are dropped. Tautological clauses are kept so the variable set matches f.
CnfFormula to_cnf(const Formula& f, std::size_t clause_cap = kDefaultCnfClauseCap);

/// Debug form, e.g. "[[A+,B-],[C+]]".
std::string to_string(const CnfFormula& cnf);

}  // namespace reasonforge::logic
