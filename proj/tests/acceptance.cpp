#include <chrono>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "cli.hpp"
#include "semtm/cooklevin.hpp"
#include "semtm/fagin.hpp"
#include "support/corpus.hpp"
#include "support/laws.hpp"
#include "support/qbf_sampler.hpp"
#include "support/sampling.hpp"

using namespace semtm;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

Machine load(const std::string& name, SemiringKind kind) {
  return parse_machine(testing::corpus_text("machines/" + name + ".srtm"), kind);
}

int pick(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

Value small_value(SemiringKind kind, std::mt19937_64& rng) {
  return kind == SemiringKind::Tropical ? Value::tropical(Rational(pick(rng, 0, 9))) : Value::natural(pick(rng, 0, 9));
}

bool well_formed(const WeightedWord& w) {
  std::size_t letters = 0;
  while (letters < w.size() && std::holds_alternative<Letter>(w[letters])) ++letters;
  for (std::size_t i = letters; i < w.size(); ++i)
    if (!std::holds_alternative<Value>(w[i])) return false;
  return w.size() == 2 * letters;
}

Outcome conditional_product() {
  Outcome o;
  std::ostringstream out, err;
  int code = cli::dispatch({"eval-machine", "--machine", testing::corpus_path("machines/condprod.srtm"), "--input",
                            "a #1", "--semiring", "nat", "--budget", "20"},
                           out, err);
  if (code != 0 || out.str().find("result: 1\n") == std::string::npos) {
    o.pass = false;
    o.detail += "example 'a #1' did not return 1; ";
  }
  std::mt19937_64 rng(101);
  int good = 0, bad = 0;
  for (auto kind : {SemiringKind::Natural, SemiringKind::Tropical}) {
    auto m = load("condprod", kind);
    for (int i = 0; i < 50; ++i) {
      int n = pick(rng, 0, 5);
      WeightedWord w;
      Value expected = Value::one(kind);
      for (int j = 0; j < n; ++j) w.emplace_back(Letter{pick(rng, 0, 1) ? "a" : "b"});
      for (int j = 0; j < n; ++j) {
        Value v = small_value(kind, rng);
        expected = mul(expected, v);
        w.emplace_back(v);
      }
      if (machine_value(m, w, 400) == expected) ++good;
    }
    for (int i = 0; i < 50;) {
      WeightedWord w;
      int len = pick(rng, 1, 6);
      for (int j = 0; j < len; ++j) {
        if (pick(rng, 0, 1))
          w.emplace_back(Letter{pick(rng, 0, 1) ? "a" : "b"});
        else
          w.emplace_back(small_value(kind, rng));
      }
      if (well_formed(w)) continue;
      ++i;
      if (machine_value(m, w, 400).is_zero()) ++bad;
    }
  }
  o.pass = o.pass && good == 100 && bad == 100;
  o.detail += std::to_string(good) + "/100 well-formed match the closed form, " + std::to_string(bad) +
              "/100 malformed give zero";
  return o;
}

Machine random_machine(std::mt19937_64& rng) {
  static const char* syms[] = {"a", "_", "X"};
  std::string text =
      "states: s0 s1 s2 sink\ninput_alphabet: a\ntape_alphabet: a _ X\ninit: s0\nblank: _\nplaceholder: X\n"
      "known: #one #2 #3\n";
  int count = pick(rng, 2, 7);
  for (int i = 0; i < count; ++i) {
    int from = pick(rng, 0, 2);
    int to = pick(rng, 0, 3);
    text += "s" + std::to_string(from) + "," + syms[pick(rng, 0, 2)] + " -> " +
            (to == 3 ? std::string("sink") : "s" + std::to_string(to)) + "," + syms[pick(rng, 0, 2)] +
            (pick(rng, 0, 1) ? ", +1, " : ", -1, ") + (pick(rng, 0, 2) == 0 ? "@cell" : pick(rng, 0, 1) ? "#2" : "#3") +
            "\n";
  }
  text += "s" + std::to_string(pick(rng, 0, 2)) + ",a -> sink,a, +1, #3\n";
  return parse_machine(text, SemiringKind::Natural);
}

Outcome empty_sum() {
  std::mt19937_64 rng(202);
  int machines = 0, sinks = 0, attempts = 0;
  bool pass = true;
  while (machines < 20 && attempts < 2000) {
    ++attempts;
    auto m = random_machine(rng);
    WeightedWord w{Letter{"a"}, Value::natural(2), Letter{"a"}};
    std::vector<ComputationPath> paths;
    try {
      paths = enumerate_paths(m, w, 12);
    } catch (const Error&) {
      continue;
    }
    int sink = m.state_index("sink");
    bool reached = false;
    for (const auto& p : paths) {
      auto c = initial_configuration(m, w);
      for (auto t : p.transitions) c = step(m, c, m.transitions[t]).first;
      if (c.state != sink) continue;
      reached = true;
      ++sinks;
      pass = pass && configuration_value(m, c, 0) == Value::one(SemiringKind::Natural);
    }
    if (reached) ++machines;
  }
  return {pass && machines == 20,
          std::to_string(machines) + " machines, " + std::to_string(sinks) + " sink configurations worth one"};
}

std::vector<WeightedWord> words_up_to(const std::vector<WordToken>& tokens, std::size_t maxLen) {
  std::vector<WeightedWord> out{{}};
  std::vector<WeightedWord> frontier{{}};
  for (std::size_t len = 1; len <= maxLen; ++len) {
    std::vector<WeightedWord> next;
    for (const auto& w : frontier)
      for (const auto& t : tokens) {
        auto x = w;
        x.push_back(t);
        next.push_back(x);
      }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

Outcome path_sum() {
  std::size_t checked = 0, overBudget = 0;
  bool pass = true;
  for (const auto* name : {"condprod", "identity", "fork", "sumcells", "bounce", "limrec", "onestep"}) {
    auto m = load(name, SemiringKind::Natural);
    std::vector<WordToken> tokens;
    for (int s : m.inputAlphabet) tokens.emplace_back(Letter{m.symbols[s]});
    tokens.emplace_back(Value::natural(1));
    tokens.emplace_back(Value::natural(2));
    for (const auto& w : words_up_to(tokens, 6)) {
      std::optional<Value> direct, summed;
      try {
        direct = machine_value(m, w, 30);
      } catch (const Error&) {
      }
      try {
        std::vector<Value> weights;
        for (const auto& p : enumerate_paths(m, w, 30)) weights.push_back(p.weight);
        summed = fold_add(weights, SemiringKind::Natural);
      } catch (const Error&) {
      }
      if (!direct || !summed) {
        pass = pass && !direct && !summed;
        ++overBudget;
        continue;
      }
      pass = pass && *direct == *summed;
      ++checked;
    }
  }
  return {pass, std::to_string(checked) + " inputs agree, " + std::to_string(overBudget) + " exceed the budget in both"};
}

Outcome fagin_forward() {
  auto sig = parse_signature(testing::corpus_text("formulas/weso.sig"));
  int agree = 0, total = 0;
  bool pass = true;
  for (const auto& line : testing::corpus_lines("formulas/weso.txt")) {
    auto f = parse_formula(line, sig, ParseOptions{SemiringKind::Natural, {}});
    auto report = compile_weighted(f, sig, SemiringKind::Natural);
    for (int n = 1; n <= 3; ++n) {
      auto a = parse_structure(testing::corpus_text("structures/weso_n" + std::to_string(n) + ".st"),
                               SemiringKind::Natural);
      ++total;
      if (verify_equivalence(report, a, sig).pass) ++agree;
    }
  }
  pass = agree == total;
  int runChecks = 0;
  for (const auto& [text, expected] : std::vector<std::pair<std::string, int>>{{"sum x. #one", 0}, {"sumset X/1. #one", 1}}) {
    auto report = compile_weighted(parse_formula(text, sig, ParseOptions{SemiringKind::Natural, {}}), sig,
                                   SemiringKind::Natural);
    for (int n = 1; n <= 3; ++n) {
      auto a = parse_structure(testing::corpus_text("structures/weso_n" + std::to_string(n) + ".st"),
                               SemiringKind::Natural);
      std::size_t runs = 0;
      for (const auto& p : enumerate_paths(report.machine, encode_structure(a, sig, {}), report.budget_for(n)))
        runs += !p.weight.is_zero();
      std::size_t want = expected == 0 ? static_cast<std::size_t>(n) : std::size_t{1} << n;
      pass = pass && runs == want;
      ++runChecks;
    }
  }
  return {pass, std::to_string(agree) + "/" + std::to_string(total) + " formula-structure pairs agree, " +
                    std::to_string(runChecks) + " run counts checked"};
}

Outcome cook_levin() {
  int agree = 0, total = 0, bounded = 0;
  for (auto kind : {SemiringKind::Natural, SemiringKind::Tropical}) {
    for (const auto* name : {"identity", "fork", "sumcells", "bounce", "onestep"}) {
      auto m = load(name, kind);
      std::vector<WordToken> tokens;
      for (int s : m.inputAlphabet) tokens.emplace_back(Letter{m.symbols[s]});
      for (int v : {0, 1, 2, 5}) tokens.emplace_back(parse_value(std::to_string(v), kind));
      for (const auto& w : words_up_to(tokens, 2)) {
        for (const auto* p : {"3", "6"}) {
          try {
            ++total;
            if (crosscheck_wqbf(m, w, TimeSpaceBound::parse(p)).pass) ++agree;
          } catch (const Error& e) {
            if (e.code() != ErrorCode::BoundTooSmall) throw;
            --total;
            ++bounded;
          }
        }
      }
    }
  }
  bool broken = false;
  for (const auto* name : {"identity", "fork", "sumcells", "bounce"}) {
    auto m = load(name, SemiringKind::Natural);
    std::vector<WordToken> tokens;
    for (int s : m.inputAlphabet) tokens.emplace_back(Letter{m.symbols[s]});
    for (int v : {0, 1, 2, 5}) tokens.emplace_back(Value::natural(v));
    CookLevinOptions opts;
    opts.omit = {5};
    for (const auto& w : words_up_to(tokens, 2)) broken |= !crosscheck_wqbf(m, w, TimeSpaceBound::parse("3"), opts).pass;
  }
  return {agree == total && broken, std::to_string(agree) + "/" + std::to_string(total) + " encodings agree (" +
                                        std::to_string(bounded) + " over the bound), negative control " +
                                        (broken ? "detected" : "missed")};
}

Outcome wqbf_pruning() {
  int agree = 0, total = 0;
  bool bounded = true;
  for (auto kind : {SemiringKind::Natural, SemiringKind::Tropical}) {
    std::mt19937_64 rng(606);
    testing::QbfSampler sampler(kind, rng);
    for (int i = 0; i < 200; ++i) {
      auto f = sampler.sample(14);
      QbfStats naive, pruned;
      auto a = eval_wqbf_naive(*f, LiteralInterp{}, kind, &naive);
      auto b = eval_wqbf_pruned(*f, kind, &pruned);
      ++total;
      agree += a == b;
      auto vars = qbf_all_vars(*f).size();
      bounded = bounded && naive.interpretations <= (std::uint64_t{1} << vars) &&
                pruned.interpretations <= naive.interpretations;
    }
  }
  return {agree == total && bounded,
          std::to_string(agree) + "/" + std::to_string(total) + " agree, counts " + (bounded ? "within" : "over") +
              " bounds"};
}

Outcome order_independence() {
  auto sig = parse_signature(testing::corpus_text("formulas/weso.sig"));
  auto lines = testing::corpus_lines("formulas/weso.txt");
  lines.push_back("prodset X/1. prod x. ((X(x) * W(x)) + #1)");
  lines.push_back("prodset X/1. sum x. (X(x) + C(x,x))");
  int checked = 0;
  bool pass = true;
  for (auto kind : {SemiringKind::Natural, SemiringKind::Polynomial}) {
    std::mt19937_64 rng(707);
    auto a = testing::random_structure(sig, 3, kind, rng);
    for (const auto& line : lines) {
      auto f = parse_formula(line, sig, ParseOptions{kind, {}});
      Value base = eval_weighted(a, {}, *f);
      for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        pass = pass && eval_weighted(a, {}, *f, EvalOptions{seed}) == base;
        ++checked;
      }
    }
  }
  return {pass, std::to_string(checked) + " permuted evaluations match"};
}

Outcome limited_recognition() {
  auto m = load("limrec", SemiringKind::Natural);
  auto at = [&](int v) { return machine_value(m, WeightedWord{Value::natural(v)}, 3); };
  bool pass = at(1) == Value::natural(1) && at(2) == Value::natural(3) && at(0) == Value::natural(1);
  return {pass, "#1 -> " + render(at(1)) + ", #2 -> " + render(at(2)) + ", #0 -> " + render(at(0))};
}

Outcome semiring_laws() {
  int triples = 0;
  std::string failure;
  for (const auto& s : registered_semirings()) {
    std::mt19937_64 rng(909);
    for (int i = 0; i < 1000; ++i) {
      auto a = testing::random_value(s.kind, rng);
      auto b = testing::random_value(s.kind, rng);
      auto c = testing::random_value(s.kind, rng);
      ++triples;
      if (auto law = testing::violated_law(a, b, c, s.kind); law && failure.empty())
        failure = std::string(s.name) + " violates " + *law;
    }
  }
  return {failure.empty(), failure.empty() ? std::to_string(triples) + " triples satisfy every axiom" : failure};
}

Outcome weso_emitter() {
  auto sig = parse_signature(testing::corpus_text("formulas/weso.sig"));
  int emitted = 0, rejected = 0;
  bool pass = true;
  for (const auto* name : {"condprod", "identity", "fork", "sumcells", "bounce", "limrec", "onestep"}) {
    auto m = load(name, SemiringKind::Natural);
    try {
      auto f = machine_to_weso(m, sig, 3);
      auto back = parse_formula(render_formula(*f), sig, ParseOptions{SemiringKind::Natural, {}});
      pass = pass && structurally_equal(*f, *back) && free_vars(*f).empty() && classify(*f) == Fragment::wESO;
      ++emitted;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::AlphabetMismatch && e.code() != ErrorCode::OracleTransitionsPresent) throw;
      ++rejected;
    }
  }
  auto m = load("onestep", SemiringKind::Natural);
  Signature empty;
  OrderedStructure a;
  a.size = 2;
  auto expected = machine_value(m, encode_structure(a, empty, {}), 1);
  auto value = eval_weighted(a, {}, *machine_to_weso(m, empty, 1));
  pass = pass && value == expected;
  return {pass, std::to_string(emitted) + " sentences checked, " + std::to_string(rejected) +
                    " machines outside the alphabet or with oracle weights; one-step value " + render(value) +
                    " vs machine " + render(expected)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    std::string name;
    double limitSeconds;
    std::function<Outcome()> run;
  };
  std::vector<Criterion> criteria{
      {1, "conditional product", 5, conditional_product},
      {2, "empty sum at sinks", 1, empty_sum},
      {3, "path sums", 30, path_sum},
      {4, "formula to machine", 60, fagin_forward},
      {5, "machine to wQBF", 120, cook_levin},
      {6, "pruned wQBF evaluation", 60, wqbf_pruning},
      {7, "product order independence", 30, order_independence},
      {8, "limited recognition", 1, limited_recognition},
      {9, "semiring axioms", 10, semiring_laws},
      {10, "machine to wESO", 600, weso_emitter},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool pass = o.pass && seconds <= c.limitSeconds;
    failures += !pass;
    std::cout << "criterion " << c.id << " (" << c.name << "): " << (pass ? "PASS" : "FAIL") << " in " << std::fixed
              << std::setprecision(2) << seconds << " s (limit " << c.limitSeconds << " s); " << o.detail << "\n";
  }
  return failures == 0 ? 0 : 1;
}
