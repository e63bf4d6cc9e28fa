#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "semtm/machine.hpp"
#include "semtm/semiring.hpp"
#include "semtm/wlogic.hpp"
#include "semtm/wqbf.hpp"

namespace semtm {

/// p(n) = c0 + c1 n + c2 n^2 + ...
struct TimeSpaceBound {
  std::vector<std::uint64_t> coefficients;

  std::uint64_t at(std::uint64_t n) const;
  /// Parses "1,0,2". Throws SyntaxError.
  static TimeSpaceBound parse(const std::string& text);
  std::string render() const;
};

/// Names the tableau variables and surrogates of one encoding.
struct VarAtlas {
  std::size_t inputLength = 0;
  std::size_t cells = 0;  // cells 0..cells-1
  std::size_t steps = 0;  // times 0..steps
  std::size_t symbolCount = 0;
  std::size_t stateCount = 0;

  std::string tape(std::size_t cell, std::size_t symbol, std::size_t time) const;
  std::string head(std::size_t cell, std::size_t time) const;
  std::string state(std::size_t state, std::size_t time) const;
  /// Named surrogate for the known constant with the given index.
  static std::string constant_surrogate(std::size_t known);
  /// Named surrogate that is e_⊗ iff input position `cell` holds `symbol`.
  static std::string letter_surrogate(std::size_t cell, std::size_t symbol);

  /// Quantification order: all T, then all H, then all Q.
  std::vector<std::string> variables() const;
  std::size_t variable_count() const;

  /// Values for every named surrogate the encoding may mention.
  std::map<std::string, Value> surrogate_values(const Machine& m, const WeightedWord& input) const;

  /// The interpretation that describes a run through `configs`; the last
  /// configuration is repeated up to time `steps`.
  LiteralInterp interpretation(const std::vector<Configuration>& configs) const;
};

struct CookLevinOptions {
  /// Subformula numbers 1..12 to leave out (negative controls).
  std::set<int> omit;
  /// Probe the bound by simulating one input of the target length.
  bool probeBound = true;
};

struct WqbfEncoding {
  QbfPtr formula;  // sum-quantified over every atlas variable
  QbfPtr matrix;   // the product of the instantiated subformulas
  VarAtlas atlas;
};

/// Throws OracleTransitionsPresent, InvalidMachine, BoundTooSmall.
WqbfEncoding machine_to_wqbf(const Machine& m, std::size_t inputLength, const TimeSpaceBound& bound,
                             const CookLevinOptions& options = {});

struct CrosscheckReport {
  Value encoded;
  Value simulated;
  bool pass = false;
  std::size_t variables = 0;
  std::size_t steps = 0;
  std::uint64_t interpretations = 0;
};

/// Throws BoundTooSmall when the simulator exceeds p(n) transitions.
CrosscheckReport crosscheck_wqbf(const Machine& m, const WeightedWord& input, const TimeSpaceBound& bound,
                                 const CookLevinOptions& options = {});

/// The sentence describing runs of m over structures encoded with the
/// given signature, with time and positions as k-tuples of elements.
/// Throws OracleTransitionsPresent, ArityTooSmall, AlphabetMismatch.
FormulaPtr machine_to_weso(const Machine& m, const Signature& sig, int k);

}  // namespace semtm
