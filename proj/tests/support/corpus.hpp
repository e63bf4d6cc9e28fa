#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "semtm/structure.hpp"
#include "support/sampling.hpp"

namespace semtm::testing {

inline std::string corpus_path(const std::string& rel) { return std::string(SEMTM_CORPUS_DIR) + "/" + rel; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string corpus_text(const std::string& rel) { return read_file(corpus_path(rel)); }

/// Non-empty, non-comment lines.
inline std::vector<std::string> corpus_lines(const std::string& rel) {
  std::vector<std::string> out;
  std::istringstream in(corpus_text(rel));
  std::string line;
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line.compare(first, 2, "//") == 0) continue;
    out.push_back(line);
  }
  return out;
}

inline OrderedStructure random_structure(const Signature& sig, int n, SemiringKind kind, std::mt19937_64& rng) {
  OrderedStructure a;
  a.size = n;
  a.semiring = kind;
  std::bernoulli_distribution coin(0.5);
  for (const auto& r : sig.boolRelations) {
    a.arities[r.name] = r.arity;
    auto& set = a.boolRels[r.name];
    for (const auto& t : enumerate_tuples_lex(n, r.arity))
      if (coin(rng)) set.insert(t);
  }
  for (const auto& r : sig.weightedRelations) {
    a.arities[r.name] = r.arity;
    auto& map = a.weightedRels[r.name];
    for (const auto& t : enumerate_tuples_lex(n, r.arity)) map.emplace(t, random_value(kind, rng));
  }
  return a;
}

}  // namespace semtm::testing
