#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "semtm/semiring.hpp"

namespace semtm {

struct ConstWeight {
  Value value;
  bool operator==(const ConstWeight&) const = default;
};

/// The weight is the annotation of the cell under the head.
struct CellWeight {
  bool operator==(const CellWeight&) const = default;
};

/// Limited recognition of the cell annotation against a finite value set.
struct RecWeight {
  std::vector<Value> values;
  bool operator==(const RecWeight&) const = default;
};

using WeightSpec = std::variant<ConstWeight, CellWeight, RecWeight>;

struct Transition {
  int from = 0;
  int read = 0;
  int to = 0;
  int write = 0;
  int direction = 1;  // -1 or +1
  WeightSpec weight = CellWeight{};
  bool operator==(const Transition&) const = default;
};

struct Machine {
  SemiringKind semiring = SemiringKind::Natural;
  std::vector<Value> knownValues;
  std::vector<std::string> states;
  std::vector<std::string> symbols;  // the tape alphabet
  std::vector<int> inputAlphabet;    // indices into symbols
  int initialState = 0;
  int blank = 0;
  int placeholder = 0;
  std::vector<Transition> transitions;
  bool oracleEnabled = false;

  int state_index(std::string_view name) const;   // -1 when absent
  int symbol_index(std::string_view name) const;  // -1 when absent
  bool is_input_letter(int symbol) const;
};

struct Diagnostic {
  std::string code;
  std::string message;
};

std::vector<Diagnostic> validate_machine(const Machine& m);

/// Sorts transitions by their serialized line and drops duplicates.
void canonicalize(Machine& m);

std::string serialize_transition(const Machine& m, const Transition& t);
std::string serialize_machine(const Machine& m);
/// Throws SyntaxError, MalformedFile, UnknownSymbol, BadLiteral, OutOfCarrier.
Machine parse_machine(std::string_view text, SemiringKind kind);

struct Letter {
  std::string symbol;
  bool operator==(const Letter&) const = default;
};
using WordToken = std::variant<Letter, Value>;
using WeightedWord = std::vector<WordToken>;

WeightedWord parse_word(std::string_view text, SemiringKind kind);
std::string render_word(const WeightedWord& w);

struct Configuration {
  int state = 0;
  std::vector<int> tape;  // symbols; cells beyond the end hold the blank
  std::shared_ptr<const std::vector<Value>> annotations;
  std::size_t head = 0;
  int blank = 0;
  SemiringKind semiring = SemiringKind::Natural;

  int symbol_at(std::size_t i) const { return i < tape.size() ? tape[i] : blank; }
  Value annotation_at(std::size_t i) const;
};

/// Throws LetterNotInInputAlphabet, MixedSemirings.
Configuration initial_configuration(const Machine& m, const WeightedWord& word);

std::vector<Transition> applicable_transitions(const Machine& m, const Configuration& c);

Value transition_weight(const Transition& t, const Configuration& c);

/// Throws NotApplicable.
std::pair<Configuration, Value> step(const Machine& m, const Configuration& c, const Transition& t);

struct RecognitionFn {
  std::vector<Value> values;
};

Value rec_apply(const RecognitionFn& f, const Value& x);

struct SimulationStats {
  std::uint64_t steps = 0;
  std::uint64_t branchPoints = 0;
  std::uint64_t memoHits = 0;
  std::size_t longestPath = 0;
};

/// Sum over computation paths of the product of transition weights. Throws
/// BudgetExceeded when some path reaches `budget` transitions without halting.
Value machine_value(const Machine& m, const WeightedWord& word, std::size_t budget,
                    SimulationStats* stats = nullptr);
Value configuration_value(const Machine& m, const Configuration& c, std::size_t budget,
                          SimulationStats* stats = nullptr);

struct ComputationPath {
  std::vector<std::size_t> transitions;  // indices into m.transitions
  Value weight;
};

/// Every maximal computation path; throws BudgetExceeded like machine_value,
/// TooLarge once more than `maxPaths` paths exist.
std::vector<ComputationPath> enumerate_paths(const Machine& m, const WeightedWord& word, std::size_t budget,
                                             std::size_t maxPaths = 1000000);

}  // namespace semtm
