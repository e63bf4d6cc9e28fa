#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "support/corpus.hpp"

using namespace semtm;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::string corpus(const std::string& rel) { return testing::corpus_path(rel); }

std::string without_timing(const std::string& text) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line))
    if (line.rfind("time_ms", 0) != 0 && line.find("\"time_ms\"") == std::string::npos) out += line + "\n";
  return out;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("conditional product example") {
    auto r = run({"eval-machine", "--machine", corpus("machines/condprod.srtm"), "--input", "a #1", "--semiring", "nat",
                  "--budget", "20"});
    CHECK(r.code == cli::Ok);
    CHECK(r.out.find("result: 1\n") != std::string::npos);
  }

  TEST_CASE("crosscheck of the identity machine passes") {
    auto r = run({"crosscheck", "--machine", corpus("machines/identity.srtm"), "--input", "#5", "--poly", "2"});
    CHECK(r.code == cli::Ok);
    CHECK(r.out.find("pass: true") != std::string::npos);
  }

  TEST_CASE("exit codes") {
    CHECK(run({"eval-formula", "--formula", "bad(", "--structure", corpus("structures/weso_n2.st")}).code ==
          cli::InputError);
    CHECK(run({"eval-formula", "--formula", "bad(", "--structure", corpus("structures/weso_n2.st")})
              .err.find("SyntaxError") != std::string::npos);
    CHECK(run({}).code == cli::InputError);
    CHECK(run({"no-such-command"}).code == cli::InputError);
    CHECK(run({"eval-machine", "--machine", "/nonexistent", "--input", "a"}).code == cli::InputError);
    CHECK(run({"eval-machine", "--machine", corpus("machines/sumcells.srtm"), "--input", "0 0", "--budget", "1"}).code ==
          cli::DomainError);
    CHECK(run({"compile-machine", "--machine", corpus("machines/fork.srtm"), "--to", "weso", "--k", "1"}).code ==
          cli::DomainError);
    CHECK(run({"eval-machine", "--machine", corpus("machines/condprod.srtm"), "--input", "a #1", "--semiring", "nope"})
              .code == cli::InputError);
  }

  TEST_CASE("reports are stable apart from timing") {
    std::vector<std::string> args{"compile-formula", "--formula", "sum x. prod y. (E(x,y) + W(y))", "--sig",
                                  corpus("formulas/weso.sig"), "--structure", corpus("structures/weso_n2.st")};
    auto first = run(args);
    auto second = run(args);
    CHECK(first.code == cli::Ok);
    CHECK(first.out.find("pass: true") != std::string::npos);
    CHECK(without_timing(first.out) == without_timing(second.out));
    args.insert(args.begin(), "--json");
    auto json = run(args);
    CHECK(json.out.find("\"pass\": \"true\"") != std::string::npos);
  }

  TEST_CASE("every subcommand is reachable") {
    CHECK(run({"list-semirings"}).out.find("trop:") != std::string::npos);
    CHECK(run({"selftest", "--seed", "7"}).code == cli::Ok);
    CHECK(run({"eval-wqbf", "--formula", "sum a. (a + #2)", "--method", "both"}).out.find("pass: true") !=
          std::string::npos);
    CHECK(run({"eval-formula", "--formula", "sum x. (X(x) * W(x))", "--set", "X/1=(1)", "--structure",
               corpus("structures/weso_n2.st")})
              .out.find("result: 3") != std::string::npos);
    CHECK(run({"compile-machine", "--machine", corpus("machines/bounce.srtm"), "--to", "wqbf", "--input-length", "2",
               "--poly", "3"})
              .code == cli::Ok);
    auto weso = run({"compile-machine", "--machine", corpus("machines/sumcells.srtm"), "--to", "weso", "--k", "3",
                     "--sig", corpus("formulas/weso.sig")});
    CHECK(weso.out.find("fragment: wESO") != std::string::npos);
  }
}
