#pragma once

#include <random>
#include <string>

#include "semtm/semiring.hpp"

namespace semtm::testing {

inline Value random_value(SemiringKind kind, std::mt19937_64& rng) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  switch (kind) {
    case SemiringKind::Boolean: return Value::boolean(pick(0, 1) == 1);
    case SemiringKind::Natural: return Value::natural(pick(0, 9) == 0 ? Natural(pick(0, 1)) : Natural(pick(0, 1000)));
    case SemiringKind::Tropical:
      if (pick(0, 7) == 0) return Value::tropical_infinity();
      return Value::tropical(Rational(pick(0, 40), pick(1, 6)));
    case SemiringKind::Arctic:
      if (pick(0, 7) == 0) return Value::arctic_minus_infinity();
      return Value::arctic(Rational(pick(0, 40), pick(1, 6)));
    case SemiringKind::Lattice5: return Value::lattice(static_cast<Lattice5>(pick(0, 4)));
    case SemiringKind::Polynomial: {
      static const char* vars[] = {"x", "y", "z"};
      Value v = Value::zero(kind);
      int terms = pick(0, 3);
      for (int t = 0; t < terms; ++t) {
        Value term = parse_value(std::to_string(pick(1, 5)), kind);
        int factors = pick(0, 2);
        for (int f = 0; f < factors; ++f) term = mul(term, Value::variable(vars[pick(0, 2)]));
        v = add(v, term);
      }
      return v;
    }
  }
  return Value::zero(kind);
}

}  // namespace semtm::testing
