#pragma once

#include <optional>
#include <string>

#include "semtm/semiring.hpp"

namespace semtm::testing {

/// Name of the first commutative-semiring axiom the triple violates.
inline std::optional<std::string> violated_law(const Value& a, const Value& b, const Value& c, SemiringKind kind) {
  Value zero = Value::zero(kind);
  Value one = Value::one(kind);
  if (add(add(a, b), c) != add(a, add(b, c))) return "additive associativity";
  if (add(a, b) != add(b, a)) return "additive commutativity";
  if (add(a, zero) != a) return "additive identity";
  if (mul(mul(a, b), c) != mul(a, mul(b, c))) return "multiplicative associativity";
  if (mul(a, b) != mul(b, a)) return "multiplicative commutativity";
  if (mul(a, one) != a || mul(one, a) != a) return "multiplicative identity";
  if (mul(a, add(b, c)) != add(mul(a, b), mul(a, c))) return "left distributivity";
  if (mul(add(a, b), c) != add(mul(a, c), mul(b, c))) return "right distributivity";
  if (!mul(a, zero).is_zero() || !mul(zero, a).is_zero()) return "annihilation";
  return std::nullopt;
}

}  // namespace semtm::testing
