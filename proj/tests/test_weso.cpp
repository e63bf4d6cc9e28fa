#include "doctest.h"
#include "semtm/cooklevin.hpp"
#include "support/corpus.hpp"

using namespace semtm;

namespace {

Machine load(const std::string& name, SemiringKind kind) {
  return parse_machine(testing::corpus_text("machines/" + name + ".srtm"), kind);
}

Signature weso_sig() { return parse_signature(testing::corpus_text("formulas/weso.sig")); }

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::NotApplicable;
}

}  // namespace

TEST_SUITE("weso") {
  TEST_CASE("emitted sentences are closed existential formulas that round-trip") {
    auto sig = weso_sig();
    for (const auto* name : {"bounce", "sumcells", "onestep"}) {
      auto m = load(name, SemiringKind::Natural);
      auto f = machine_to_weso(m, sig, 3);
      CHECK(free_vars(*f).empty());
      CHECK(classify(*f) == Fragment::wESO);
      auto text = render_formula(*f);
      auto back = parse_formula(text, sig, ParseOptions{SemiringKind::Natural, {}});
      CHECK_MESSAGE(structurally_equal(*f, *back), name);
      CHECK(render_formula(*back) == text);
    }
  }

  TEST_CASE("emitter preconditions") {
    auto sig = weso_sig();
    auto m = load("sumcells", SemiringKind::Natural);
    CHECK(code_of([&] { machine_to_weso(m, sig, 2); }) == ErrorCode::ArityTooSmall);
    CHECK(code_of([&] { machine_to_weso(load("fork", SemiringKind::Natural), sig, 3); }) ==
          ErrorCode::AlphabetMismatch);
    CHECK(code_of([&] { machine_to_weso(load("condprod", SemiringKind::Natural), sig, 3); }) ==
          ErrorCode::AlphabetMismatch);
    CHECK(code_of([&] { machine_to_weso(load("limrec", SemiringKind::Natural), sig, 3); }) ==
          ErrorCode::OracleTransitionsPresent);
  }
}

TEST_CASE("one-step machine sentence evaluates to the machine value" * doctest::test_suite("weso_slow")) {
  auto m = load("onestep", SemiringKind::Natural);
  Signature empty;
  auto f = machine_to_weso(m, empty, 1);
  OrderedStructure a;
  a.size = 2;
  a.semiring = SemiringKind::Natural;
  auto word = encode_structure(a, empty, {});
  auto expected = machine_value(m, word, 1);
  CHECK(expected == Value::natural(5));
  CHECK(eval_weighted(a, {}, *f) == expected);
}
