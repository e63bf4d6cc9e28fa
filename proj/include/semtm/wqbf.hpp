#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "semtm/machine.hpp"
#include "semtm/semiring.hpp"

namespace semtm {

enum class QbfKind : std::uint8_t { Const, PosLit, NegLit, InputSurrogate, NamedSurrogate, Plus, Times, Sum, Prod };

struct Qbf;
using QbfPtr = std::shared_ptr<const Qbf>;

struct Qbf {
  QbfKind kind;
  std::string name;           // variable, or surrogate name
  std::size_t position = 0;   // input position of an InputSurrogate
  std::optional<Value> constant;
  std::vector<QbfPtr> children;
};

namespace qbf {
QbfPtr constant(Value v);
QbfPtr pos(std::string var);
QbfPtr neg(std::string var);
QbfPtr input_surrogate(std::size_t position);
QbfPtr named_surrogate(std::string name);
QbfPtr plus(std::vector<QbfPtr> xs);   // one element: that element
QbfPtr times(std::vector<QbfPtr> xs);  // one element: that element
QbfPtr sum(std::string var, QbfPtr body);
QbfPtr prod(std::string var, QbfPtr body);
}  // namespace qbf

/// Throws SyntaxError, BadLiteral, OutOfCarrier.
QbfPtr parse_wqbf(std::string_view text, SemiringKind kind);
std::string render_wqbf(const Qbf& f);

std::set<std::string> qbf_free_vars(const Qbf& f);
std::set<std::string> qbf_all_vars(const Qbf& f);
bool has_surrogates(const Qbf& f);
std::size_t qbf_node_count(const Qbf& f);

/// A consistent set of literals: each variable is absent, positive, or negative.
class LiteralInterp {
 public:
  LiteralInterp with(const std::string& var, bool positive) const;
  bool contains(const std::string& var, bool positive) const;
  std::size_t size() const { return lits_.size(); }

 private:
  std::map<std::string, bool> lits_;
};

struct QbfStats {
  /// Leaves of the branching tree over quantified variables.
  std::uint64_t interpretations = 0;
};

/// Throws UnresolvedSurrogate.
Value eval_wqbf_naive(const Qbf& f, const LiteralInterp& interp, SemiringKind kind, QbfStats* stats = nullptr);
Value eval_wqbf_pruned(const Qbf& f, SemiringKind kind, QbfStats* stats = nullptr);

/// Input positions without a value become e_⊕. Throws UnknownNamedSurrogate.
QbfPtr substitute_surrogates(const QbfPtr& f, const WeightedWord& input, const std::map<std::string, Value>& named,
                             SemiringKind kind);

}  // namespace semtm
