#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semtm/machine.hpp"
#include "semtm/structure.hpp"
#include "semtm/wlogic.hpp"

namespace semtm {

enum class TransitionOrigin : std::uint8_t { Glue, Constant, WeightedAtom, ZeroSink };
std::string_view origin_name(TransitionOrigin o);

struct CompilationReport {
  FormulaPtr formula;
  Machine machine;
  std::size_t stateCount = 0;
  std::size_t transitionCount = 0;
  /// Coefficients c0, c1, ... of a polynomial in the universe size bounding
  /// the length of every computation path.
  std::vector<std::uint64_t> budgetHint;
  /// Free variables in the order their blocks follow the structure encoding.
  std::vector<std::string> freeOrder;
  /// One entry per machine transition.
  std::vector<TransitionOrigin> origins;

  std::uint64_t budget_for(int universeSize) const;
};

/// Free first-order variables sorted by name, then free set variables sorted by name.
std::vector<std::string> free_variable_order(const Formula& f);

/// Deterministic machine whose value is e_⊗ iff the formula holds.
/// Throws UnsupportedConstruct (set quantifiers), TooLarge.
Machine compile_bool(const Formula& beta, const Signature& sig, SemiringKind kind = SemiringKind::Boolean);

/// Throws UnsupportedConstruct (∃X, ΠX), NotWESO, TooLarge.
CompilationReport compile_weighted(const FormulaPtr& phi, const Signature& sig, SemiringKind kind);

/// The free-value blocks for `rho` in the order of `freeOrder`. Throws SignatureMismatch.
std::vector<FreeValue> free_values(const std::vector<std::string>& freeOrder, const Formula& f, const Assignment& rho);

struct EquivalenceReport {
  Value machineValue;
  Value formulaValue;
  bool pass = false;
  std::uint64_t budget = 0;
  SimulationStats stats;
};

/// Runs the compiled machine on the encoded structure and compares with
/// eval_weighted. Propagates TooLarge, BudgetExceeded, SignatureMismatch.
EquivalenceReport verify_equivalence(const CompilationReport& report, const OrderedStructure& a, const Signature& sig,
                                     const Assignment& rho = {});

}  // namespace semtm
