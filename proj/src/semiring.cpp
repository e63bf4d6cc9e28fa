#include "semtm/semiring.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace semtm {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadLiteral: return "BadLiteral";
    case ErrorCode::OutOfCarrier: return "OutOfCarrier";
    case ErrorCode::UnknownSemiring: return "UnknownSemiring";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnknownSymbol: return "UnknownSymbol";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::MalformedFile: return "MalformedFile";
    case ErrorCode::MixedSemirings: return "MixedSemirings";
    case ErrorCode::LetterNotInInputAlphabet: return "LetterNotInInputAlphabet";
    case ErrorCode::NotApplicable: return "NotApplicable";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::InvalidMachine: return "InvalidMachine";
    case ErrorCode::SignatureMismatch: return "SignatureMismatch";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::UnresolvedSurrogate: return "UnresolvedSurrogate";
    case ErrorCode::UnknownNamedSurrogate: return "UnknownNamedSurrogate";
    case ErrorCode::UnsupportedConstruct: return "UnsupportedConstruct";
    case ErrorCode::NotWESO: return "NotWESO";
    case ErrorCode::OracleTransitionsPresent: return "OracleTransitionsPresent";
    case ErrorCode::BoundTooSmall: return "BoundTooSmall";
    case ErrorCode::ArityTooSmall: return "ArityTooSmall";
    case ErrorCode::AlphabetMismatch: return "AlphabetMismatch";
  }
  return "Unknown";
}

bool is_input_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadLiteral:
    case ErrorCode::OutOfCarrier:
    case ErrorCode::UnknownSemiring:
    case ErrorCode::SyntaxError:
    case ErrorCode::UnknownSymbol:
    case ErrorCode::ArityMismatch:
    case ErrorCode::MalformedFile:
      return true;
    default:
      return false;
  }
}

namespace {

constexpr std::array<SemiringId, 6> kSemirings{{
    {SemiringKind::Boolean, "bool", true, "{0,1} with max as sum and min as product"},
    {SemiringKind::Natural, "nat", false, "arbitrary-precision naturals with + and *"},
    {SemiringKind::Tropical, "trop", true, "nonnegative rationals and +inf with min and +"},
    {SemiringKind::Arctic, "arct", true, "nonnegative rationals and -inf with max and +"},
    {SemiringKind::Lattice5, "lat5", true, "lattice 0 < a,b < ab < 1 with join and meet"},
    {SemiringKind::Polynomial, "poly", false, "polynomials with natural coefficients"},
}};

[[noreturn]] void mixed(const Value& a, const Value& b) {
  throw Error(ErrorCode::MixedSemirings, std::string(semiring_info(a.semiring()).name) + " vs " +
                                             std::string(semiring_info(b.semiring()).name));
}

Monomial monomial_product(const Monomial& a, const Monomial& b) {
  Monomial out;
  auto i = a.powers.begin();
  auto j = b.powers.begin();
  while (i != a.powers.end() || j != b.powers.end()) {
    if (j == b.powers.end() || (i != a.powers.end() && i->first < j->first)) {
      out.powers.push_back(*i++);
    } else if (i == a.powers.end() || j->first < i->first) {
      out.powers.push_back(*j++);
    } else {
      out.powers.emplace_back(i->first, i->second + j->second);
      ++i;
      ++j;
    }
  }
  return out;
}

std::uint8_t lattice_bits(Lattice5 l) { return static_cast<std::uint8_t>(l); }

Lattice5 lattice_join(Lattice5 a, Lattice5 b) {
  if (a == Lattice5::Top || b == Lattice5::Top) return Lattice5::Top;
  return static_cast<Lattice5>(lattice_bits(a) | lattice_bits(b));
}

Lattice5 lattice_meet(Lattice5 a, Lattice5 b) {
  if (a == Lattice5::Top) return b;
  if (b == Lattice5::Top) return a;
  return static_cast<Lattice5>(lattice_bits(a) & lattice_bits(b));
}

std::string render_rational(const Rational& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

[[noreturn]] void bad_literal(std::string_view text, SemiringKind kind, std::string_view why) {
  throw Error(ErrorCode::BadLiteral, "'" + std::string(text) + "' is not a " +
                                         std::string(semiring_info(kind).name) + " literal (" +
                                         std::string(why) + ")");
}

// Signed rational literal: integer or p/q.
Rational parse_rational(std::string_view text, SemiringKind kind) {
  std::string s = trim(text);
  bool negative = false;
  std::string_view body = s;
  if (!body.empty() && (body[0] == '-' || body[0] == '+')) {
    negative = body[0] == '-';
    body.remove_prefix(1);
  }
  auto slash = body.find('/');
  std::string_view num = body.substr(0, slash);
  std::string_view den = slash == std::string_view::npos ? std::string_view("1") : body.substr(slash + 1);
  if (!all_digits(num) || !all_digits(den)) bad_literal(text, kind, "expected integer or p/q");
  Natural d(std::string{den});
  if (d == 0) bad_literal(text, kind, "zero denominator");
  Rational r(Natural(std::string{num}), d);
  return negative ? Rational(-r) : r;
}

Polynomial parse_polynomial(std::string_view text) {
  Polynomial out;
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.empty()) bad_literal(text, SemiringKind::Polynomial, "empty");
  std::size_t pos = 0;
  auto parse_natural = [&]() -> Natural {
    std::size_t start = pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    if (start == pos) bad_literal(text, SemiringKind::Polynomial, "expected a number");
    return Natural(s.substr(start, pos - start));
  };
  while (true) {
    Natural coef = 1;
    std::map<std::string, unsigned> powers;
    while (true) {
      if (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
        coef *= parse_natural();
      } else if (pos < s.size() && (std::islower(static_cast<unsigned char>(s[pos])))) {
        std::size_t start = pos;
        while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) ++pos;
        std::string var = s.substr(start, pos - start);
        unsigned exponent = 1;
        if (pos < s.size() && s[pos] == '^') {
          ++pos;
          Natural e = parse_natural();
          if (e == 0 || e > 1000000) bad_literal(text, SemiringKind::Polynomial, "exponent out of range");
          exponent = e.convert_to<unsigned>();
        }
        powers[var] += exponent;
      } else {
        bad_literal(text, SemiringKind::Polynomial, "expected number or variable");
      }
      if (pos < s.size() && s[pos] == '*') {
        ++pos;
        continue;
      }
      break;
    }
    if (coef != 0) {
      Monomial m;
      m.powers.assign(powers.begin(), powers.end());
      out[m] += coef;
    }
    if (pos == s.size()) break;
    if (s[pos] != '+') bad_literal(text, SemiringKind::Polynomial, "unexpected character");
    ++pos;
  }
  return out;
}

std::string render_polynomial(const Polynomial& p) {
  if (p.empty()) return "0";
  std::string out;
  for (const auto& [mono, coef] : p) {
    if (!out.empty()) out += "+";
    std::string term;
    if (coef != 1 || mono.powers.empty()) term = coef.str();
    for (const auto& [var, exponent] : mono.powers) {
      if (!term.empty()) term += "*";
      term += var;
      if (exponent != 1) term += "^" + std::to_string(exponent);
    }
    out += term;
  }
  return out;
}

}  // namespace

std::span<const SemiringId> registered_semirings() { return kSemirings; }

const SemiringId& semiring_info(SemiringKind kind) { return kSemirings[static_cast<std::size_t>(kind)]; }

SemiringKind semiring_by_name(std::string_view name) {
  for (const auto& s : kSemirings)
    if (s.name == name) return s.kind;
  throw Error(ErrorCode::UnknownSemiring, "'" + std::string(name) + "' (known: bool, nat, trop, arct, lat5, poly)");
}

Value Value::zero(SemiringKind kind) {
  switch (kind) {
    case SemiringKind::Boolean: return Value(kind, false);
    case SemiringKind::Natural: return Value(kind, Natural(0));
    case SemiringKind::Tropical: return Value(kind, TropicalNumber{});
    case SemiringKind::Arctic: return Value(kind, ArcticNumber{});
    case SemiringKind::Lattice5: return Value(kind, Lattice5::Bottom);
    case SemiringKind::Polynomial: return Value(kind, Polynomial{});
  }
  throw Error(ErrorCode::UnknownSemiring, "bad kind");
}

Value Value::one(SemiringKind kind) {
  switch (kind) {
    case SemiringKind::Boolean: return Value(kind, true);
    case SemiringKind::Natural: return Value(kind, Natural(1));
    case SemiringKind::Tropical: return Value(kind, TropicalNumber{Rational(0)});
    case SemiringKind::Arctic: return Value(kind, ArcticNumber{Rational(0)});
    case SemiringKind::Lattice5: return Value(kind, Lattice5::Top);
    case SemiringKind::Polynomial: return Value(kind, Polynomial{{Monomial{}, Natural(1)}});
  }
  throw Error(ErrorCode::UnknownSemiring, "bad kind");
}

Value Value::natural(Natural n) {
  if (n < 0) throw Error(ErrorCode::OutOfCarrier, "negative natural");
  return Value(SemiringKind::Natural, std::move(n));
}

Value Value::tropical(Rational r) {
  if (r < 0) throw Error(ErrorCode::OutOfCarrier, "negative tropical value " + render_rational(r));
  return Value(SemiringKind::Tropical, TropicalNumber{std::move(r)});
}

Value Value::arctic(Rational r) {
  if (r < 0) throw Error(ErrorCode::OutOfCarrier, "negative arctic value " + render_rational(r));
  return Value(SemiringKind::Arctic, ArcticNumber{std::move(r)});
}

Value Value::polynomial(Polynomial p) {
  std::erase_if(p, [](const auto& kv) { return kv.second == 0; });
  return Value(SemiringKind::Polynomial, std::move(p));
}

Value Value::variable(const std::string& name) {
  Monomial m;
  m.powers.emplace_back(name, 1u);
  return Value(SemiringKind::Polynomial, Polynomial{{m, Natural(1)}});
}

bool Value::is_zero() const { return *this == zero(kind_); }
bool Value::is_one() const { return *this == one(kind_); }

Value add(const Value& a, const Value& b) {
  if (a.semiring() != b.semiring()) mixed(a, b);
  switch (a.semiring()) {
    case SemiringKind::Boolean:
      return Value::boolean(std::get<bool>(a.payload()) || std::get<bool>(b.payload()));
    case SemiringKind::Natural:
      return Value::natural(std::get<Natural>(a.payload()) + std::get<Natural>(b.payload()));
    case SemiringKind::Tropical: {
      const auto& x = std::get<TropicalNumber>(a.payload()).finite;
      const auto& y = std::get<TropicalNumber>(b.payload()).finite;
      if (!x) return b;
      if (!y) return a;
      return Value::tropical(std::min(*x, *y));
    }
    case SemiringKind::Arctic: {
      const auto& x = std::get<ArcticNumber>(a.payload()).finite;
      const auto& y = std::get<ArcticNumber>(b.payload()).finite;
      if (!x) return b;
      if (!y) return a;
      return Value::arctic(std::max(*x, *y));
    }
    case SemiringKind::Lattice5:
      return Value::lattice(lattice_join(std::get<Lattice5>(a.payload()), std::get<Lattice5>(b.payload())));
    case SemiringKind::Polynomial: {
      Polynomial sum = std::get<Polynomial>(a.payload());
      for (const auto& [mono, coef] : std::get<Polynomial>(b.payload())) sum[mono] += coef;
      return Value::polynomial(std::move(sum));
    }
  }
  throw Error(ErrorCode::UnknownSemiring, "bad kind");
}

Value mul(const Value& a, const Value& b) {
  if (a.semiring() != b.semiring()) mixed(a, b);
  switch (a.semiring()) {
    case SemiringKind::Boolean:
      return Value::boolean(std::get<bool>(a.payload()) && std::get<bool>(b.payload()));
    case SemiringKind::Natural:
      return Value::natural(std::get<Natural>(a.payload()) * std::get<Natural>(b.payload()));
    case SemiringKind::Tropical: {
      const auto& x = std::get<TropicalNumber>(a.payload()).finite;
      const auto& y = std::get<TropicalNumber>(b.payload()).finite;
      if (!x || !y) return Value::tropical_infinity();
      return Value::tropical(*x + *y);
    }
    case SemiringKind::Arctic: {
      const auto& x = std::get<ArcticNumber>(a.payload()).finite;
      const auto& y = std::get<ArcticNumber>(b.payload()).finite;
      if (!x || !y) return Value::arctic_minus_infinity();
      return Value::arctic(*x + *y);
    }
    case SemiringKind::Lattice5:
      return Value::lattice(lattice_meet(std::get<Lattice5>(a.payload()), std::get<Lattice5>(b.payload())));
    case SemiringKind::Polynomial: {
      Polynomial prod;
      for (const auto& [ma, ca] : std::get<Polynomial>(a.payload()))
        for (const auto& [mb, cb] : std::get<Polynomial>(b.payload())) prod[monomial_product(ma, mb)] += ca * cb;
      return Value::polynomial(std::move(prod));
    }
  }
  throw Error(ErrorCode::UnknownSemiring, "bad kind");
}

Value fold_add(std::span<const Value> items, SemiringKind kind) {
  Value acc = Value::zero(kind);
  for (const auto& v : items) acc = add(acc, v);
  return acc;
}

Value fold_mul(std::span<const Value> items, SemiringKind kind) {
  Value acc = Value::one(kind);
  for (const auto& v : items) acc = mul(acc, v);
  return acc;
}

Value parse_value(std::string_view text, SemiringKind kind) {
  std::string s = trim(text);
  if (s.size() >= 2 && s.front() == '[' && s.back() == ']') s = trim(std::string_view(s).substr(1, s.size() - 2));
  if (s == "zero") return Value::zero(kind);
  if (s == "one") return Value::one(kind);
  switch (kind) {
    case SemiringKind::Boolean:
      if (s == "0") return Value::boolean(false);
      if (s == "1") return Value::boolean(true);
      bad_literal(text, kind, "expected 0 or 1");
    case SemiringKind::Natural:
      if (!s.empty() && s[0] == '-' && all_digits(s.substr(1))) throw Error(ErrorCode::OutOfCarrier, "negative natural '" + s + "'");
      if (!all_digits(s)) bad_literal(text, kind, "expected decimal digits");
      return Value::natural(Natural(s));
    case SemiringKind::Tropical:
      if (s == "inf" || s == "+inf") return Value::tropical_infinity();
      if (s == "-inf") throw Error(ErrorCode::OutOfCarrier, "-inf is not in the tropical carrier");
      {
        Rational r = parse_rational(s, kind);
        if (r < 0) throw Error(ErrorCode::OutOfCarrier, "negative tropical literal '" + s + "'");
        return Value::tropical(r);
      }
    case SemiringKind::Arctic:
      if (s == "-inf") return Value::arctic_minus_infinity();
      if (s == "inf" || s == "+inf") throw Error(ErrorCode::OutOfCarrier, "+inf is not in the arctic carrier");
      {
        Rational r = parse_rational(s, kind);
        if (r < 0) throw Error(ErrorCode::OutOfCarrier, "negative arctic literal '" + s + "'");
        return Value::arctic(r);
      }
    case SemiringKind::Lattice5:
      if (s == "0") return Value::lattice(Lattice5::Bottom);
      if (s == "a") return Value::lattice(Lattice5::A);
      if (s == "b") return Value::lattice(Lattice5::B);
      if (s == "ab") return Value::lattice(Lattice5::AorB);
      if (s == "1") return Value::lattice(Lattice5::Top);
      bad_literal(text, kind, "expected one of 0, a, b, ab, 1");
    case SemiringKind::Polynomial:
      return Value::polynomial(parse_polynomial(s));
  }
  bad_literal(text, kind, "unknown semiring");
}

std::string render(const Value& v) {
  switch (v.semiring()) {
    case SemiringKind::Boolean: return std::get<bool>(v.payload()) ? "1" : "0";
    case SemiringKind::Natural: return std::get<Natural>(v.payload()).str();
    case SemiringKind::Tropical: {
      const auto& f = std::get<TropicalNumber>(v.payload()).finite;
      return f ? render_rational(*f) : "inf";
    }
    case SemiringKind::Arctic: {
      const auto& f = std::get<ArcticNumber>(v.payload()).finite;
      return f ? render_rational(*f) : "-inf";
    }
    case SemiringKind::Lattice5:
      switch (std::get<Lattice5>(v.payload())) {
        case Lattice5::Bottom: return "0";
        case Lattice5::A: return "a";
        case Lattice5::B: return "b";
        case Lattice5::AorB: return "ab";
        case Lattice5::Top: return "1";
      }
      break;
    case SemiringKind::Polynomial: return render_polynomial(std::get<Polynomial>(v.payload()));
  }
  return "?";
}

std::string render_hash_literal(const Value& v) {
  std::string text = render(v);
  bool bare = std::all_of(text.begin(), text.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '/' || c == '-' || c == '_';
  });
  return bare ? text : "[" + text + "]";
}

}  // namespace semtm
