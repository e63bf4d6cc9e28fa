#include <random>

#include "doctest.h"
#include "semtm/semiring.hpp"
#include "support/laws.hpp"
#include "support/sampling.hpp"

using namespace semtm;

namespace {

Value lit(const char* text, SemiringKind kind) { return parse_value(text, kind); }

constexpr SemiringKind kAll[] = {SemiringKind::Boolean, SemiringKind::Natural,  SemiringKind::Tropical,
                                 SemiringKind::Arctic,  SemiringKind::Lattice5, SemiringKind::Polynomial};

}  // namespace

TEST_SUITE("semiring") {
  TEST_CASE("addition examples") {
    CHECK(add(lit("2", SemiringKind::Natural), lit("3", SemiringKind::Natural)) == lit("5", SemiringKind::Natural));
    CHECK(add(lit("2", SemiringKind::Tropical), lit("3", SemiringKind::Tropical)) == lit("2", SemiringKind::Tropical));
    CHECK(add(lit("0", SemiringKind::Boolean), lit("1", SemiringKind::Boolean)) == lit("1", SemiringKind::Boolean));
    CHECK(add(lit("2", SemiringKind::Arctic), lit("7/2", SemiringKind::Arctic)) == lit("7/2", SemiringKind::Arctic));
    CHECK(add(lit("a", SemiringKind::Lattice5), lit("b", SemiringKind::Lattice5)) == lit("ab", SemiringKind::Lattice5));
  }

  TEST_CASE("multiplication examples") {
    CHECK(mul(lit("2", SemiringKind::Natural), lit("3", SemiringKind::Natural)) == lit("6", SemiringKind::Natural));
    CHECK(mul(lit("2", SemiringKind::Tropical), lit("3", SemiringKind::Tropical)) == lit("5", SemiringKind::Tropical));
    CHECK(mul(lit("a", SemiringKind::Lattice5), lit("b", SemiringKind::Lattice5)) == lit("0", SemiringKind::Lattice5));
    CHECK(mul(lit("ab", SemiringKind::Lattice5), lit("b", SemiringKind::Lattice5)) == lit("b", SemiringKind::Lattice5));
    CHECK(render(mul(lit("x+1", SemiringKind::Polynomial), lit("x+1", SemiringKind::Polynomial))) == "1+2*x+x^2");
    for (auto kind : kAll) {
      std::mt19937_64 rng(7);
      for (int i = 0; i < 20; ++i) CHECK(mul(testing::random_value(kind, rng), Value::zero(kind)) == Value::zero(kind));
    }
  }

  TEST_CASE("mixed semirings are rejected") {
    CHECK_THROWS_AS(add(Value::one(SemiringKind::Natural), Value::one(SemiringKind::Tropical)), Error);
    try {
      mul(Value::one(SemiringKind::Boolean), Value::one(SemiringKind::Lattice5));
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MixedSemirings);
    }
  }

  TEST_CASE("folds") {
    CHECK(fold_add({}, SemiringKind::Natural) == Value::zero(SemiringKind::Natural));
    CHECK(fold_mul({}, SemiringKind::Natural) == Value::one(SemiringKind::Natural));
    std::vector<Value> xs{lit("2", SemiringKind::Tropical), lit("3", SemiringKind::Tropical), lit("4", SemiringKind::Tropical)};
    CHECK(fold_add(xs, SemiringKind::Tropical) == lit("2", SemiringKind::Tropical));
    CHECK(fold_mul(xs, SemiringKind::Tropical) == lit("9", SemiringKind::Tropical));
  }

  TEST_CASE("identities per carrier") {
    CHECK(render(Value::zero(SemiringKind::Tropical)) == "inf");
    CHECK(render(Value::one(SemiringKind::Tropical)) == "0");
    CHECK(render(Value::zero(SemiringKind::Arctic)) == "-inf");
    CHECK(render(Value::zero(SemiringKind::Lattice5)) == "0");
    CHECK(render(Value::one(SemiringKind::Polynomial)) == "1");
    CHECK(lit("zero", SemiringKind::Tropical) == Value::zero(SemiringKind::Tropical));
    CHECK(lit("one", SemiringKind::Arctic) == Value::one(SemiringKind::Arctic));
  }

  TEST_CASE("literal grammar") {
    CHECK(lit("3/2", SemiringKind::Tropical) == Value::tropical(Rational(3, 2)));
    CHECK(lit("6/4", SemiringKind::Tropical) == Value::tropical(Rational(3, 2)));
    CHECK(lit("inf", SemiringKind::Tropical) == Value::zero(SemiringKind::Tropical));
    CHECK(lit("-inf", SemiringKind::Arctic) == Value::zero(SemiringKind::Arctic));
    CHECK(render(lit("x*y+2", SemiringKind::Polynomial)) == "2+x*y");
    CHECK(render(lit("y*x + x*y", SemiringKind::Polynomial)) == "2*x*y");
    CHECK(render(lit("0*x", SemiringKind::Polynomial)) == "0");
    CHECK(lit("123456789012345678901234567890", SemiringKind::Natural) ==
          Value::natural(Natural("123456789012345678901234567890")));

    auto code_of = [](const char* text, SemiringKind kind) {
      try {
        parse_value(text, kind);
      } catch (const Error& e) {
        return e.code();
      }
      return ErrorCode::NotApplicable;
    };
    CHECK(code_of("-1", SemiringKind::Tropical) == ErrorCode::OutOfCarrier);
    CHECK(code_of("-inf", SemiringKind::Tropical) == ErrorCode::OutOfCarrier);
    CHECK(code_of("inf", SemiringKind::Arctic) == ErrorCode::OutOfCarrier);
    CHECK(code_of("-3", SemiringKind::Natural) == ErrorCode::OutOfCarrier);
    CHECK(code_of("2", SemiringKind::Boolean) == ErrorCode::BadLiteral);
    CHECK(code_of("c", SemiringKind::Lattice5) == ErrorCode::BadLiteral);
    CHECK(code_of("1/0", SemiringKind::Tropical) == ErrorCode::BadLiteral);
    CHECK(code_of("x+", SemiringKind::Polynomial) == ErrorCode::BadLiteral);
    CHECK(code_of("1.5", SemiringKind::Tropical) == ErrorCode::BadLiteral);
  }

  TEST_CASE("render and parse round trip") {
    for (auto kind : kAll) {
      std::mt19937_64 rng(11);
      for (int i = 0; i < 200; ++i) {
        Value v = testing::random_value(kind, rng);
        CHECK(parse_value(render(v), kind) == v);
        CHECK(parse_value(render_hash_literal(v), kind) == v);
      }
    }
  }

  TEST_CASE("hash literal form") {
    CHECK(render_hash_literal(lit("3/2", SemiringKind::Tropical)) == "3/2");
    CHECK(render_hash_literal(lit("-inf", SemiringKind::Arctic)) == "-inf");
    CHECK(render_hash_literal(lit("x*y+2", SemiringKind::Polynomial)) == "[2+x*y]");
  }

  TEST_CASE("registry") {
    CHECK(registered_semirings().size() == 6);
    CHECK(semiring_by_name("trop") == SemiringKind::Tropical);
    CHECK_THROWS_AS(semiring_by_name("reals"), Error);
    for (const auto& s : registered_semirings()) CHECK(semiring_info(s.kind).name == s.name);
  }

  TEST_CASE("plus-idempotence flag is truthful") {
    for (const auto& s : registered_semirings()) {
      std::mt19937_64 rng(3);
      bool allIdempotent = true;
      for (int i = 0; i < 200; ++i) {
        Value v = testing::random_value(s.kind, rng);
        if (add(v, v) != v) allIdempotent = false;
      }
      CHECK(allIdempotent == s.plusIdempotent);
    }
  }

  TEST_CASE("sampled triples satisfy the semiring axioms") {
    for (auto kind : kAll) {
      std::mt19937_64 rng(17);
      for (int i = 0; i < 300; ++i) {
        Value a = testing::random_value(kind, rng);
        Value b = testing::random_value(kind, rng);
        Value c = testing::random_value(kind, rng);
        auto broken = testing::violated_law(a, b, c, kind);
        CHECK_MESSAGE(!broken, semiring_info(kind).name, ": ", broken.value_or(""), " for ", render(a), ", ",
                      render(b), ", ", render(c));
      }
    }
  }
}
