#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "semtm/machine.hpp"
#include "semtm/semiring.hpp"

namespace semtm {

struct RelationSymbol {
  std::string name;
  int arity = 1;
  bool operator==(const RelationSymbol&) const = default;
};

struct Signature {
  std::vector<RelationSymbol> boolRelations;
  std::vector<RelationSymbol> weightedRelations;

  const RelationSymbol* find_bool(std::string_view name) const;
  const RelationSymbol* find_weighted(std::string_view name) const;
  bool operator==(const Signature&) const = default;
};

using Tuple = std::vector<int>;

struct OrderedStructure {
  int size = 1;
  SemiringKind semiring = SemiringKind::Natural;
  std::map<std::string, std::set<Tuple>> boolRels;
  std::map<std::string, std::map<Tuple, Value>> weightedRels;
  std::map<std::string, int> arities;  // declared arities; otherwise inferred from a tuple

  int arity_of(const std::string& name) const;
};

/// A second-order value: a set of tuples of a fixed arity.
struct TupleSet {
  int arity = 1;
  std::set<Tuple> tuples;
  bool operator==(const TupleSet&) const = default;
};

using FreeValue = std::variant<int, TupleSet>;

/// Upper bound on n^k for second-order enumeration (env SRTM_SO_CAP, default 24).
std::size_t so_cap();

/// n^k, saturating at SIZE_MAX.
std::size_t tuple_count(int n, int k);
std::vector<Tuple> enumerate_tuples_lex(int n, int k);
std::size_t tuple_rank(const Tuple& t, int n);

/// All subsets of A^k in characteristic-vector order (least tuple is the most
/// significant bit, absent before present). Throws TooLarge above so_cap().
std::vector<std::set<Tuple>> enumerate_relations_lex(int n, int k);

/// Bit (count-1-rank) of the mask marks the tuple of that rank, so masks in
/// increasing numeric order follow enumerate_relations_lex.
std::set<Tuple> relation_from_mask(std::uint64_t mask, int n, int k);
std::uint64_t mask_from_relation(const std::set<Tuple>& rel, int n, int k);

std::vector<Diagnostic> validate_structure(const OrderedStructure& a, const Signature& sig);

/// 0^n 1, Boolean relation bits, weighted relation values, then one block per
/// free value (n bits for an element, n^k bits for a k-ary tuple set).
/// Throws SignatureMismatch.
WeightedWord encode_structure(const OrderedStructure& a, const Signature& sig, const std::vector<FreeValue>& freeValues);

Signature signature_of(const OrderedStructure& a);

/// Throws SyntaxError, MalformedFile, BadLiteral, OutOfCarrier.
OrderedStructure parse_structure(std::string_view text, SemiringKind kind);
std::string serialize_structure(const OrderedStructure& a);
Signature parse_signature(std::string_view text);
std::string serialize_signature(const Signature& sig);

}  // namespace semtm
