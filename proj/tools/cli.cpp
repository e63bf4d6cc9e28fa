#include "cli.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <random>
#include <regex>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "semtm/cooklevin.hpp"
#include "semtm/fagin.hpp"

namespace semtm::cli {

namespace {

class Report {
 public:
  void set(const std::string& key, const std::string& value) {
    for (auto& f : fields_) {
      if (f.first == key) {
        f.second = value;
        return;
      }
    }
    fields_.emplace_back(key, value);
  }
  void set(const std::string& key, std::uint64_t value) { set(key, std::to_string(value)); }
  void set_pass(bool pass) { set("pass", pass ? "true" : "false"); }

  void print(std::ostream& out, bool json) const {
    if (json) {
      nlohmann::ordered_json j;
      for (const auto& [k, v] : fields_) j[k] = v;
      out << j.dump(2) << "\n";
      return;
    }
    for (const auto& [k, v] : fields_) out << k << ": " << v << "\n";
  }

 private:
  std::vector<std::pair<std::string, std::string>> fields_;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MalformedFile, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::MalformedFile, "cannot write " + path);
  out << text;
}

std::string digest(std::string_view text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

// "X/2=(0,1),(1,1)" or "X/1=" for the empty set.
std::pair<RelationSymbol, TupleSet> parse_set_assignment(const std::string& text) {
  static const std::regex head(R"(^([A-Z][A-Za-z0-9_']*)/([0-9]+)=(.*)$)");
  std::smatch m;
  if (!std::regex_match(text, m, head)) throw Error(ErrorCode::SyntaxError, "bad set assignment '" + text + "'");
  RelationSymbol sym{m[1].str(), std::stoi(m[2].str())};
  TupleSet set{sym.arity, {}};
  std::string rest = m[3].str();
  static const std::regex tuple(R"(\(([0-9,\s]*)\))");
  for (auto it = std::sregex_iterator(rest.begin(), rest.end(), tuple); it != std::sregex_iterator(); ++it) {
    Tuple t;
    std::stringstream in((*it)[1].str());
    std::string part;
    while (std::getline(in, part, ',')) t.push_back(std::stoi(part));
    if (static_cast<int>(t.size()) != sym.arity) throw Error(ErrorCode::ArityMismatch, "tuple arity in '" + text + "'");
    set.tuples.insert(t);
  }
  return {sym, set};
}

std::pair<std::string, int> parse_element_assignment(const std::string& text) {
  static const std::regex form(R"(^([a-z][A-Za-z0-9_']*)=([0-9]+)$)");
  std::smatch m;
  if (!std::regex_match(text, m, form)) throw Error(ErrorCode::SyntaxError, "bad assignment '" + text + "'");
  return {m[1].str(), std::stoi(m[2].str())};
}

struct Common {
  bool json = false;
  std::uint64_t seed = 1;
  std::string semiring = "nat";
};

using Clock = std::chrono::steady_clock;

void finish(Report& r, Clock::time_point start) {
  auto ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  std::ostringstream out;
  out << std::fixed << std::setprecision(3) << ms;
  r.set("time_ms", out.str());
}

const char* kIdentityMachine =
    "states: start done\ninput_alphabet: a\ntape_alphabet: a _ X\ninit: start\nblank: _\nplaceholder: X\n"
    "known: #1\nstart,X -> done,X, +1, @cell\nstart,a -> done,a, +1, @cell\nstart,_ -> done,_, +1, @cell\n";

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Semiring Turing machines, weighted logics and their translations"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_flag("--json", common.json, "Print the report as a JSON object");
  app.add_option("--seed", common.seed, "Seed for randomized checks");

  auto add_semiring = [&](CLI::App* sub) { sub->add_option("--semiring", common.semiring, "bool, nat, trop, arct, lat5, poly"); };

  std::string machineFile, input, formula, formulaFile, structureFile, sigFile, outFile, poly = "1", target, method = "pruned";
  std::uint64_t budget = 1000;
  int inputLength = -1;
  int k = 0;
  std::vector<std::string> assigns, sets;
  bool paths = false;

  auto* evalMachine = app.add_subcommand("eval-machine", "Sum the weights of all computation paths");
  evalMachine->add_option("--machine", machineFile, "Machine file")->required();
  evalMachine->add_option("--input", input, "Input word, e.g. \"a #1\"")->required();
  evalMachine->add_option("--budget", budget, "Maximum path length");
  evalMachine->add_flag("--paths", paths, "Also enumerate the paths");
  add_semiring(evalMachine);

  auto* evalFormula = app.add_subcommand("eval-formula", "Evaluate a weighted formula on a structure");
  auto* formulaOpt = evalFormula->add_option("--formula", formula, "Formula text");
  evalFormula->add_option("--formula-file", formulaFile, "File holding the formula")->excludes(formulaOpt);
  evalFormula->add_option("--structure", structureFile, "Structure file")->required();
  evalFormula->add_option("--assign", assigns, "Free element, e.g. x=1");
  evalFormula->add_option("--set", sets, "Free set, e.g. X/1=(0),(2)");
  add_semiring(evalFormula);

  auto* evalWqbf = app.add_subcommand("eval-wqbf", "Evaluate a weighted quantified Boolean formula");
  evalWqbf->add_option("--formula", formula, "Formula text")->required();
  evalWqbf->add_option("--method", method, "naive or pruned")->check(CLI::IsMember({"naive", "pruned", "both"}));
  add_semiring(evalWqbf);

  auto* compileFormula = app.add_subcommand("compile-formula", "Compile a wESO formula into a machine");
  auto* cfFormula = compileFormula->add_option("--formula", formula, "Formula text");
  compileFormula->add_option("--formula-file", formulaFile, "File holding the formula")->excludes(cfFormula);
  compileFormula->add_option("--sig", sigFile, "Signature file")->required();
  compileFormula->add_option("--structure", structureFile, "Structure to verify the machine on");
  compileFormula->add_option("--set", sets, "Free set, e.g. X/1=(0),(2)");
  compileFormula->add_option("--assign", assigns, "Free element for verification, e.g. x=1");
  compileFormula->add_option("--out", outFile, "Write the machine here");
  add_semiring(compileFormula);

  auto* compileMachine = app.add_subcommand("compile-machine", "Encode a machine as a wQBF or a wESO sentence");
  compileMachine->add_option("--machine", machineFile, "Machine file")->required();
  compileMachine->add_option("--to", target, "wqbf or weso")->required()->check(CLI::IsMember({"wqbf", "weso"}));
  compileMachine->add_option("--input-length", inputLength, "Input length for wqbf");
  compileMachine->add_option("--poly", poly, "Time bound coefficients, e.g. 1,0,2");
  compileMachine->add_option("--k", k, "Tuple length for weso");
  compileMachine->add_option("--sig", sigFile, "Signature file for weso");
  compileMachine->add_option("--out", outFile, "Write the formula here");
  add_semiring(compileMachine);

  auto* crosscheck = app.add_subcommand("crosscheck", "Compare the wQBF encoding with the simulator");
  crosscheck->add_option("--machine", machineFile, "Machine file")->required();
  crosscheck->add_option("--input", input, "Input word")->required();
  crosscheck->add_option("--poly", poly, "Time bound coefficients")->required();
  add_semiring(crosscheck);

  auto* listSemirings = app.add_subcommand("list-semirings", "Show the registered semirings");
  auto* selftest = app.add_subcommand("selftest", "Run built-in consistency checks");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return Ok;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return InputError;
  }

  Report r;
  auto start = Clock::now();
  int code = Ok;
  try {
    auto* sub = app.get_subcommands().front();
    r.set("command", sub->get_name());
    SemiringKind kind = semiring_by_name(common.semiring);
    auto formula_text = [&] {
      if (!formulaFile.empty()) return read_file(formulaFile);
      if (formula.empty()) throw Error(ErrorCode::SyntaxError, "no formula given");
      return formula;
    };

    if (sub == evalMachine) {
      auto text = read_file(machineFile);
      auto m = parse_machine(text, kind);
      auto word = parse_word(input, kind);
      r.set("semiring", common.semiring);
      r.set("machine_digest", digest(text));
      r.set("input", render_word(word));
      SimulationStats stats;
      auto value = machine_value(m, word, budget, &stats);
      r.set("result", render(value));
      r.set("steps", stats.steps);
      r.set("longest_path", stats.longestPath);
      if (paths) {
        auto all = enumerate_paths(m, word, budget);
        r.set("paths", all.size());
        std::vector<Value> weights;
        for (const auto& p : all) weights.push_back(p.weight);
        r.set("path_sum", render(fold_add(weights, kind)));
      }
    } else if (sub == evalFormula) {
      auto stext = read_file(structureFile);
      auto a = parse_structure(stext, kind);
      auto sig = signature_of(a);
      Assignment rho;
      std::vector<RelationSymbol> freeSets;
      for (const auto& s : sets) {
        auto [sym, value] = parse_set_assignment(s);
        freeSets.push_back(sym);
        rho.secondOrder[sym.name] = value;
      }
      for (const auto& s : assigns) {
        auto [name, value] = parse_element_assignment(s);
        rho.firstOrder[name] = value;
      }
      auto text = formula_text();
      auto f = parse_formula(text, sig, ParseOptions{kind, freeSets});
      r.set("semiring", common.semiring);
      r.set("formula", render_formula(*f));
      r.set("fragment", std::string(fragment_name(classify(*f))));
      r.set("structure_digest", digest(stext));
      r.set("result", render(eval_weighted(a, rho, *f)));
    } else if (sub == evalWqbf) {
      auto f = parse_wqbf(formula, kind);
      r.set("semiring", common.semiring);
      r.set("formula", render_wqbf(*f));
      r.set("variables", qbf_all_vars(*f).size());
      std::optional<Value> naive, pruned;
      if (method == "naive" || method == "both") {
        QbfStats stats;
        naive = eval_wqbf_naive(*f, LiteralInterp{}, kind, &stats);
        r.set(method == "both" ? "naive_result" : "result", render(*naive));
        r.set("naive_interpretations", stats.interpretations);
      }
      if (method == "pruned" || method == "both") {
        QbfStats stats;
        pruned = eval_wqbf_pruned(*f, kind, &stats);
        r.set(method == "both" ? "pruned_result" : "result", render(*pruned));
        r.set("pruned_interpretations", stats.interpretations);
      }
      if (naive && pruned) {
        r.set_pass(*naive == *pruned);
        if (*naive != *pruned) code = CheckFailed;
      }
    } else if (sub == compileFormula) {
      auto sig = parse_signature(read_file(sigFile));
      std::vector<RelationSymbol> freeSets;
      for (const auto& s : sets) freeSets.push_back(parse_set_assignment(s.find('=') == std::string::npos ? s + "=" : s).first);
      auto f = parse_formula(formula_text(), sig, ParseOptions{kind, freeSets});
      auto report = compile_weighted(f, sig, kind);
      r.set("semiring", common.semiring);
      r.set("formula", render_formula(*f));
      r.set("states", report.stateCount);
      r.set("transitions", report.transitionCount);
      std::string hint;
      for (std::size_t i = 0; i < report.budgetHint.size(); ++i)
        hint += (i ? "," : "") + std::to_string(report.budgetHint[i]);
      r.set("budget_polynomial", hint);
      std::string order;
      for (const auto& v : report.freeOrder) order += (order.empty() ? "" : " ") + v;
      r.set("free_order", order);
      auto text = serialize_machine(report.machine);
      r.set("machine_digest", digest(text));
      if (!outFile.empty()) write_file(outFile, text);
      if (!structureFile.empty()) {
        auto a = parse_structure(read_file(structureFile), kind);
        Assignment rho;
        for (const auto& s : sets) {
          if (s.find('=') == std::string::npos) continue;
          auto [sym, value] = parse_set_assignment(s);
          rho.secondOrder[sym.name] = value;
        }
        for (const auto& s : assigns) {
          auto [name, value] = parse_element_assignment(s);
          rho.firstOrder[name] = value;
        }
        auto check = verify_equivalence(report, a, sig, rho);
        r.set("machine_value", render(check.machineValue));
        r.set("formula_value", render(check.formulaValue));
        r.set("budget", check.budget);
        r.set_pass(check.pass);
        if (!check.pass) code = CheckFailed;
      }
    } else if (sub == compileMachine) {
      auto text = read_file(machineFile);
      auto m = parse_machine(text, kind);
      r.set("semiring", common.semiring);
      r.set("machine_digest", digest(text));
      std::string rendered;
      if (target == "wqbf") {
        if (inputLength < 0) throw Error(ErrorCode::SyntaxError, "--input-length is required for wqbf");
        auto enc = machine_to_wqbf(m, static_cast<std::size_t>(inputLength), TimeSpaceBound::parse(poly));
        rendered = render_wqbf(*enc.formula);
        r.set("variables", enc.atlas.variable_count());
        r.set("cells", enc.atlas.cells);
        r.set("steps", enc.atlas.steps);
        r.set("nodes", qbf_node_count(*enc.formula));
      } else {
        Signature sig = sigFile.empty() ? Signature{} : parse_signature(read_file(sigFile));
        auto f = machine_to_weso(m, sig, k);
        rendered = render_formula(*f);
        r.set("fragment", std::string(fragment_name(classify(*f))));
        r.set("closed", free_vars(*f).empty() ? "true" : "false");
      }
      r.set("formula_digest", digest(rendered));
      r.set("formula_length", rendered.size());
      if (!outFile.empty()) write_file(outFile, rendered + "\n");
    } else if (sub == crosscheck) {
      auto text = read_file(machineFile);
      auto m = parse_machine(text, kind);
      auto word = parse_word(input, kind);
      auto report = crosscheck_wqbf(m, word, TimeSpaceBound::parse(poly));
      r.set("semiring", common.semiring);
      r.set("machine_digest", digest(text));
      r.set("input", render_word(word));
      r.set("encoded", render(report.encoded));
      r.set("simulated", render(report.simulated));
      r.set("variables", report.variables);
      r.set("steps", report.steps);
      r.set("interpretations", report.interpretations);
      r.set_pass(report.pass);
      if (!report.pass) code = CheckFailed;
    } else if (sub == listSemirings) {
      for (const auto& s : registered_semirings())
        r.set(std::string(s.name), std::string(s.carrierDescription) + (s.plusIdempotent ? " (idempotent sum)" : ""));
    } else if (sub == selftest) {
      r.set("seed", common.seed);
      bool all = true;
      auto record = [&](const std::string& name, bool pass) {
        r.set("check_" + name, pass ? "pass" : "fail");
        all &= pass;
      };
      auto identity = parse_machine(kIdentityMachine, SemiringKind::Natural);
      record("identity_value", machine_value(identity, parse_word("#5", SemiringKind::Natural), 4) == Value::natural(5));
      record("identity_crosscheck",
             crosscheck_wqbf(identity, parse_word("#5", SemiringKind::Natural), TimeSpaceBound::parse("2")).pass);
      std::mt19937_64 rng(common.seed);
      Signature sig{{{"E", 2}}, {{"W", 1}}};
      OrderedStructure a;
      a.size = 2;
      a.semiring = SemiringKind::Natural;
      for (int x = 0; x < 2; ++x) {
        a.weightedRels["W"][{x}] = Value::natural(static_cast<int>(rng() % 5));
        for (int y = 0; y < 2; ++y)
          if (rng() % 2) a.boolRels["E"].insert({x, y});
      }
      a.boolRels["E"];
      auto f = parse_formula("sum x. prod y. (E(x,y) + W(y))", sig, ParseOptions{SemiringKind::Natural, {}});
      record("formula_compilation", verify_equivalence(compile_weighted(f, sig, SemiringKind::Natural), a, sig).pass);
      auto q = parse_wqbf("sum a. sum b. ((a * #3) + (!b * #2))", SemiringKind::Natural);
      record("wqbf_pruning", eval_wqbf_naive(*q, LiteralInterp{}, SemiringKind::Natural) ==
                                 eval_wqbf_pruned(*q, SemiringKind::Natural));
      r.set_pass(all);
      if (!all) code = CheckFailed;
    }
  } catch (const Error& e) {
    err << e.what() << "\n";
    return is_input_error(e.code()) ? InputError : DomainError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return DomainError;
  }
  finish(r, start);
  r.print(out, common.json);
  return code;
}

}  // namespace semtm::cli
