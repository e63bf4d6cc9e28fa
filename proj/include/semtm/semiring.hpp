#pragma once

// Exact commutative semirings. Every other module is generic over Value and
// the free functions add/mul/zero/one declared here.

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "semtm/error.hpp"

namespace semtm {

using Natural = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

enum class SemiringKind : std::uint8_t { Boolean, Natural, Tropical, Arctic, Lattice5, Polynomial };

struct SemiringId {
  SemiringKind kind;
  std::string_view name;  // CLI name: bool, nat, trop, arct, lat5, poly
  bool plusIdempotent;
  std::string_view carrierDescription;
};

std::span<const SemiringId> registered_semirings();
const SemiringId& semiring_info(SemiringKind kind);
/// Throws UnknownSemiring.
SemiringKind semiring_by_name(std::string_view name);

/// min-plus carrier: Q>=0 and +inf (nullopt).
struct TropicalNumber {
  std::optional<Rational> finite;
  bool operator==(const TropicalNumber&) const = default;
};

/// max-plus carrier: Q>=0 and -inf (nullopt).
struct ArcticNumber {
  std::optional<Rational> finite;
  bool operator==(const ArcticNumber&) const = default;
};

// The lattice 0 < a, b < a|b < 1 with a, b incomparable.
enum class Lattice5 : std::uint8_t { Bottom = 0, A = 1, B = 2, AorB = 3, Top = 4 };

/// Sorted (variable, exponent) list; exponents are >= 1.
struct Monomial {
  std::vector<std::pair<std::string, unsigned>> powers;
  auto operator<=>(const Monomial&) const = default;
  bool operator==(const Monomial&) const = default;
};

/// Canonical form: no zero coefficients, ordered by monomial.
using Polynomial = std::map<Monomial, Natural>;

using Payload = std::variant<bool, Natural, TropicalNumber, ArcticNumber, Lattice5, Polynomial>;

class Value {
 public:
  /// The Boolean zero; exists so Value can live in default-constructed slots.
  Value() : Value(SemiringKind::Boolean, false) {}

  static Value zero(SemiringKind kind);
  static Value one(SemiringKind kind);

  static Value boolean(bool b) { return Value(SemiringKind::Boolean, b); }
  static Value natural(Natural n);
  static Value tropical(Rational r);
  static Value tropical_infinity() { return Value(SemiringKind::Tropical, TropicalNumber{}); }
  static Value arctic(Rational r);
  static Value arctic_minus_infinity() { return Value(SemiringKind::Arctic, ArcticNumber{}); }
  static Value lattice(Lattice5 l) { return Value(SemiringKind::Lattice5, l); }
  static Value polynomial(Polynomial p);
  static Value variable(const std::string& name);

  SemiringKind semiring() const noexcept { return kind_; }
  const Payload& payload() const noexcept { return payload_; }

  bool is_zero() const;
  bool is_one() const;

  bool operator==(const Value&) const = default;

 private:
  Value(SemiringKind kind, Payload payload) : kind_(kind), payload_(std::move(payload)) {}

  SemiringKind kind_;
  Payload payload_;
};

/// Both throw MixedSemirings when the operands come from different semirings.
Value add(const Value& a, const Value& b);
Value mul(const Value& a, const Value& b);

Value fold_add(std::span<const Value> items, SemiringKind kind);
Value fold_mul(std::span<const Value> items, SemiringKind kind);

/// Parses the carrier's literal grammar. Throws BadLiteral / OutOfCarrier.
Value parse_value(std::string_view text, SemiringKind kind);
std::string render(const Value& v);

/// Literal form usable after '#' inside formulas and words: bare when the
/// rendering is a single token, bracketed ("[x*y+2]") otherwise.
std::string render_hash_literal(const Value& v);

}  // namespace semtm
