#include <fstream>
#include <sstream>

#include "doctest.h"
#include "semtm/machine.hpp"

using namespace semtm;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Machine corpus_machine(const std::string& name, SemiringKind kind = SemiringKind::Natural) {
  return parse_machine(slurp(std::string(SEMTM_CORPUS_DIR) + "/machines/" + name), kind);
}

Value nat(int v) { return Value::natural(v); }

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::NotApplicable;
}

}  // namespace

TEST_SUITE("machine") {
  TEST_CASE("conditional product validates") {
    auto m = corpus_machine("condprod.srtm");
    CHECK(validate_machine(m).empty());
    CHECK(m.states.size() == 6);
    CHECK(m.transitions.size() == 20);
  }

  TEST_CASE("validation diagnostics") {
    auto m = corpus_machine("condprod.srtm");
    auto blanked = m;
    blanked.inputAlphabet.push_back(m.blank);
    auto diags = validate_machine(blanked);
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].code == "BlankInInputAlphabet");

    auto unknown = m;
    std::get<ConstWeight>(unknown.transitions.front().weight).value = nat(7);
    diags = validate_machine(unknown);
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].code == "UnknownConstantWeight");

    auto rec = m;
    rec.transitions.front().weight = RecWeight{{nat(1)}};
    diags = validate_machine(rec);
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].code == "OracleDisabled");
  }

  TEST_CASE("serialization round trip") {
    for (const char* name : {"condprod.srtm", "identity.srtm", "limrec.srtm", "fork.srtm"}) {
      auto m = corpus_machine(name);
      auto text = serialize_machine(m);
      auto again = parse_machine(text, SemiringKind::Natural);
      CHECK(serialize_machine(again) == text);
      CHECK(again.transitions == m.transitions);
    }
  }

  TEST_CASE("parser errors") {
    CHECK(code_of([] { parse_machine("states: a\n", SemiringKind::Natural); }) == ErrorCode::MalformedFile);
    const char* head = "states: s\ninput_alphabet: a\ntape_alphabet: a _ X\ninit: s\nblank: _\nplaceholder: X\n";
    CHECK(code_of([&] { parse_machine(std::string(head) + "s,b -> s,a, +1, @cell\n", SemiringKind::Natural); }) ==
          ErrorCode::UnknownSymbol);
    CHECK(code_of([&] { parse_machine(std::string(head) + "s,a -> s,a, 2, @cell\n", SemiringKind::Natural); }) ==
          ErrorCode::SyntaxError);
    CHECK(code_of([&] { parse_machine(std::string(head) + "s,a -> s,a, +1, #-1\n", SemiringKind::Tropical); }) ==
          ErrorCode::OutOfCarrier);
    auto m = parse_machine(std::string(head) + "s,a -> s,a, +1, rec{#1, #2}\n", SemiringKind::Natural);
    CHECK(m.oracleEnabled);
    CHECK(std::get<RecWeight>(m.transitions[0].weight).values.size() == 2);
  }

  TEST_CASE("weighted words") {
    auto w = parse_word("a a #2 #[3]", SemiringKind::Natural);
    REQUIRE(w.size() == 4);
    CHECK(std::get<Letter>(w[0]).symbol == "a");
    CHECK(std::get<Value>(w[3]) == nat(3));
    CHECK(render_word(w) == "a a #2 #3");
    CHECK(render_word(parse_word("#[x*y + 1] b", SemiringKind::Polynomial)) == "#[1+x*y] b");
  }

  TEST_CASE("initial configuration") {
    auto m = corpus_machine("condprod.srtm");
    auto c = initial_configuration(m, parse_word("a #1", SemiringKind::Natural));
    CHECK(c.state == m.state_index("iota"));
    CHECK(c.head == 0);
    CHECK(c.tape == std::vector<int>{m.symbol_index("a"), m.symbol_index("X")});
    CHECK(c.annotation_at(0) == nat(0));
    CHECK(c.annotation_at(1) == nat(1));
    CHECK(c.symbol_at(5) == m.blank);

    auto empty = initial_configuration(m, {});
    CHECK(empty.tape.empty());
    CHECK(empty.symbol_at(0) == m.blank);

    auto five = initial_configuration(m, parse_word("#5", SemiringKind::Natural));
    CHECK(five.tape == std::vector<int>{m.placeholder});
    CHECK(five.annotation_at(0) == nat(5));

    CHECK(code_of([&] { initial_configuration(m, parse_word("c", SemiringKind::Natural)); }) ==
          ErrorCode::LetterNotInInputAlphabet);
    CHECK(code_of([&] { initial_configuration(m, parse_word("_", SemiringKind::Natural)); }) ==
          ErrorCode::LetterNotInInputAlphabet);
  }

  TEST_CASE("applicable transitions and steps follow the worked trace") {
    auto m = corpus_machine("condprod.srtm");
    auto c = initial_configuration(m, parse_word("a #1", SemiringKind::Natural));
    auto ts = applicable_transitions(m, c);
    REQUIRE(ts.size() == 1);
    CHECK(m.states[ts[0].to] == "right");

    std::vector<std::string> states;
    Value total = Value::one(SemiringKind::Natural);
    while (true) {
      auto options = applicable_transitions(m, c);
      if (options.empty()) break;
      REQUIRE(options.size() == 1);
      auto [next, w] = step(m, c, options[0]);
      CHECK(next.annotations == c.annotations);
      total = mul(total, w);
      c = std::move(next);
      states.push_back(m.states[c.state]);
    }
    CHECK(states == std::vector<std::string>{"right", "right", "turn_left", "left", "turn_right", "fin"});
    CHECK(total == nat(1));
    CHECK(c.head == 2);

    Transition bogus = m.transitions.front();
    CHECK(code_of([&] { step(m, c, bogus); }) == ErrorCode::NotApplicable);
  }

  TEST_CASE("left move at cell zero lands on cell one") {
    auto m = parse_machine(
        "states: s t\ninput_alphabet: a\ntape_alphabet: a _ X\ninit: s\nblank: _\nplaceholder: X\nknown: #1\n"
        "s,a -> t,a, -1, #1\n",
        SemiringKind::Natural);
    auto c = initial_configuration(m, parse_word("a", SemiringKind::Natural));
    auto [next, w] = step(m, c, m.transitions[0]);
    CHECK(next.head == 1);
  }

  TEST_CASE("cell weights read the annotation under the head") {
    auto m = corpus_machine("condprod.srtm");
    auto c = initial_configuration(m, parse_word("a #4", SemiringKind::Natural));
    c.head = 1;
    c.state = m.state_index("turn_left");
    auto ts = applicable_transitions(m, c);
    REQUIRE(ts.size() == 1);
    CHECK(step(m, c, ts[0]).second == nat(4));
  }

  TEST_CASE("machine values of the conditional product") {
    auto m = corpus_machine("condprod.srtm");
    CHECK(machine_value(m, parse_word("a #1", SemiringKind::Natural), 20) == nat(1));
    CHECK(machine_value(m, parse_word("a a #2 #3", SemiringKind::Natural), 40) == nat(6));
    CHECK(machine_value(m, parse_word("a", SemiringKind::Natural), 20) == nat(0));
    CHECK(machine_value(m, parse_word("", SemiringKind::Natural), 20) == nat(1));
    CHECK(machine_value(m, parse_word("a b #2 #3", SemiringKind::Natural), 40) == nat(6));
    CHECK(machine_value(m, parse_word("#2 a", SemiringKind::Natural), 40) == nat(0));
    CHECK(code_of([&] { machine_value(m, parse_word("a a #2 #3", SemiringKind::Natural), 5); }) ==
          ErrorCode::BudgetExceeded);

    auto trop = corpus_machine("condprod.srtm", SemiringKind::Tropical);
    CHECK(machine_value(trop, parse_word("a a #2 #3", SemiringKind::Tropical), 40) == Value::tropical(5));
    CHECK(machine_value(trop, parse_word("a a #2", SemiringKind::Tropical), 40) == Value::tropical_infinity());
  }

  TEST_CASE("budget counts transitions") {
    auto m = corpus_machine("condprod.srtm");
    auto w = parse_word("a #1", SemiringKind::Natural);
    CHECK(machine_value(m, w, 6) == nat(1));
    CHECK(code_of([&] { machine_value(m, w, 5); }) == ErrorCode::BudgetExceeded);
  }

  TEST_CASE("path enumeration") {
    auto id = corpus_machine("identity.srtm");
    auto paths = enumerate_paths(id, parse_word("#5", SemiringKind::Natural), 5);
    REQUIRE(paths.size() == 1);
    CHECK(paths[0].weight == nat(5));

    auto cp = corpus_machine("condprod.srtm");
    paths = enumerate_paths(cp, parse_word("a #1", SemiringKind::Natural), 20);
    REQUIRE(paths.size() == 1);
    CHECK(paths[0].transitions.size() == 6);
    CHECK(paths[0].weight == nat(1));

    auto fork = corpus_machine("fork.srtm");
    paths = enumerate_paths(fork, parse_word("a", SemiringKind::Natural), 5);
    REQUIRE(paths.size() == 2);
    CHECK(add(paths[0].weight, paths[1].weight) == nat(5));
    CHECK(machine_value(fork, parse_word("a", SemiringKind::Natural), 5) == nat(5));
  }

  TEST_CASE("halting configurations are worth one") {
    auto m = corpus_machine("condprod.srtm");
    auto c = initial_configuration(m, parse_word("a #7", SemiringKind::Natural));
    c.state = m.state_index("fin");
    CHECK(configuration_value(m, c, 0) == nat(1));
  }

  TEST_CASE("limited recognition") {
    RecognitionFn one{{nat(1)}};
    CHECK(rec_apply(one, nat(1)) == nat(1));
    CHECK(rec_apply(one, nat(2)) == nat(3));
    CHECK(rec_apply(RecognitionFn{{}}, nat(7)) == nat(7));
    CHECK(rec_apply(RecognitionFn{{nat(1), nat(2)}}, nat(2)) == nat(3));

    auto m = corpus_machine("limrec.srtm");
    CHECK(validate_machine(m).empty());
    CHECK(machine_value(m, parse_word("#1", SemiringKind::Natural), 3) == nat(1));
    CHECK(machine_value(m, parse_word("#2", SemiringKind::Natural), 3) == nat(3));
    CHECK(machine_value(m, parse_word("#0", SemiringKind::Natural), 3) == nat(1));
  }

  TEST_CASE("repeated evaluation is deterministic") {
    auto m = corpus_machine("condprod.srtm");
    auto w = parse_word("a b a #2 #3 #4", SemiringKind::Natural);
    auto first = machine_value(m, w, 100);
    for (int i = 0; i < 3; ++i) CHECK(machine_value(m, w, 100) == first);
    CHECK(first == nat(24));
  }
}
