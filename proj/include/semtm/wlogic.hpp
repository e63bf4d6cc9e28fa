#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "semtm/semiring.hpp"
#include "semtm/structure.hpp"

namespace semtm {

enum class NodeKind : std::uint8_t {
  // Boolean layer
  Leq,
  Rel,
  SoAtom,
  Not,
  Or,
  Exists,
  ExistsSet,
  // weighted layer
  Const,
  WAtom,
  Plus,
  Times,
  Sum,
  Prod,
  SumSet,
  ProdSet,
};

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
  NodeKind kind;
  std::string name;               // relation, set variable, or bound variable
  int arity = 0;                  // arity of a quantified set variable
  std::vector<std::string> args;  // atom arguments (two for Leq)
  std::optional<Value> constant;
  std::vector<FormulaPtr> children;
};

bool is_boolean(NodeKind kind);
bool is_boolean(const Formula& f);

namespace build {
FormulaPtr leq(std::string x, std::string y);
FormulaPtr eq(const std::string& x, const std::string& y);
FormulaPtr lt(const std::string& x, const std::string& y);
FormulaPtr rel(std::string name, std::vector<std::string> args);
FormulaPtr so_atom(std::string name, std::vector<std::string> args);
FormulaPtr neg(FormulaPtr f);
FormulaPtr lor(std::vector<FormulaPtr> fs);
FormulaPtr land(std::vector<FormulaPtr> fs);
FormulaPtr implies(FormulaPtr a, FormulaPtr b);
FormulaPtr iff(FormulaPtr a, FormulaPtr b);
FormulaPtr exists(std::string var, FormulaPtr body);
FormulaPtr forall(const std::string& var, FormulaPtr body);
FormulaPtr exists_set(std::string var, int arity, FormulaPtr body);
FormulaPtr forall_set(const std::string& var, int arity, FormulaPtr body);
FormulaPtr truth();
FormulaPtr falsity();
FormulaPtr constant(Value v);
FormulaPtr watom(std::string name, std::vector<std::string> args);
FormulaPtr plus(std::vector<FormulaPtr> fs);
FormulaPtr times(std::vector<FormulaPtr> fs);
FormulaPtr sum(std::string var, FormulaPtr body);
FormulaPtr prod(std::string var, FormulaPtr body);
FormulaPtr sum_set(std::string var, int arity, FormulaPtr body);
FormulaPtr prod_set(std::string var, int arity, FormulaPtr body);
}  // namespace build

struct ParseOptions {
  SemiringKind semiring = SemiringKind::Natural;
  std::vector<RelationSymbol> freeSets;  // free second-order variables
};

/// Throws SyntaxError, UnknownSymbol, ArityMismatch, BadLiteral, OutOfCarrier.
FormulaPtr parse_formula(std::string_view text, const Signature& sig, const ParseOptions& options);

/// Fully parenthesized concrete syntax accepted by parse_formula.
std::string render_formula(const Formula& f);

bool structurally_equal(const Formula& a, const Formula& b);

struct FreeVariables {
  std::set<std::string> firstOrder;
  std::map<std::string, int> secondOrder;
  bool empty() const { return firstOrder.empty() && secondOrder.empty(); }
};

FreeVariables free_vars(const Formula& f);

enum class Fragment { FO, SO, wFO, wSO, wESO };
std::string_view fragment_name(Fragment f);
Fragment classify(const Formula& f);

struct Assignment {
  std::map<std::string, int> firstOrder;
  std::map<std::string, TupleSet> secondOrder;
};

struct EvalOptions {
  /// When set, every quantifier visits its domain in a seeded random order.
  std::optional<std::uint64_t> permutationSeed;
};

/// Throws SignatureMismatch, TooLarge.
bool eval_bool(const OrderedStructure& a, const Assignment& rho, const Formula& f);
Value eval_weighted(const OrderedStructure& a, const Assignment& rho, const Formula& f, const EvalOptions& options = {});

}  // namespace semtm
