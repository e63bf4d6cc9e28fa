#include "semtm/structure.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <sstream>

#include "text_util.hpp"

namespace semtm {

const RelationSymbol* Signature::find_bool(std::string_view name) const {
  for (const auto& r : boolRelations)
    if (r.name == name) return &r;
  return nullptr;
}

const RelationSymbol* Signature::find_weighted(std::string_view name) const {
  for (const auto& r : weightedRelations)
    if (r.name == name) return &r;
  return nullptr;
}

int OrderedStructure::arity_of(const std::string& name) const {
  if (auto it = arities.find(name); it != arities.end()) return it->second;
  if (auto it = boolRels.find(name); it != boolRels.end() && !it->second.empty())
    return static_cast<int>(it->second.begin()->size());
  if (auto it = weightedRels.find(name); it != weightedRels.end() && !it->second.empty())
    return static_cast<int>(it->second.begin()->first.size());
  return 1;
}

std::size_t so_cap() {
  constexpr std::size_t kDefault = 24;
  const char* env = std::getenv("SRTM_SO_CAP");
  if (!env || !*env) return kDefault;
  char* end = nullptr;
  unsigned long v = std::strtoul(env, &end, 10);
  if (*end != '\0' || v == 0) return kDefault;
  return std::min<std::size_t>(v, 62);
}

std::size_t tuple_count(int n, int k) {
  std::size_t total = 1;
  for (int i = 0; i < k; ++i) {
    if (total > std::numeric_limits<std::size_t>::max() / static_cast<std::size_t>(n))
      return std::numeric_limits<std::size_t>::max();
    total *= static_cast<std::size_t>(n);
  }
  return total;
}

std::vector<Tuple> enumerate_tuples_lex(int n, int k) {
  std::vector<Tuple> out;
  std::size_t count = tuple_count(n, k);
  out.reserve(count);
  Tuple t(k, 0);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(t);
    for (int pos = k - 1; pos >= 0; --pos) {
      if (++t[pos] < n) break;
      t[pos] = 0;
    }
  }
  return out;
}

std::size_t tuple_rank(const Tuple& t, int n) {
  std::size_t r = 0;
  for (int x : t) r = r * static_cast<std::size_t>(n) + static_cast<std::size_t>(x);
  return r;
}

std::set<Tuple> relation_from_mask(std::uint64_t mask, int n, int k) {
  auto tuples = enumerate_tuples_lex(n, k);
  std::size_t count = tuples.size();
  std::set<Tuple> out;
  for (std::size_t r = 0; r < count; ++r)
    if (mask >> (count - 1 - r) & 1u) out.insert(tuples[r]);
  return out;
}

std::uint64_t mask_from_relation(const std::set<Tuple>& rel, int n, int k) {
  std::size_t count = tuple_count(n, k);
  std::uint64_t mask = 0;
  for (const auto& t : rel) mask |= std::uint64_t{1} << (count - 1 - tuple_rank(t, n));
  return mask;
}

std::vector<std::set<Tuple>> enumerate_relations_lex(int n, int k) {
  std::size_t count = tuple_count(n, k);
  if (count > so_cap())
    throw Error(ErrorCode::TooLarge, std::to_string(n) + "^" + std::to_string(k) + " tuples exceed the second-order cap " +
                                         std::to_string(so_cap()));
  std::vector<std::set<Tuple>> out;
  out.reserve(std::size_t{1} << count);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << count); ++mask) out.push_back(relation_from_mask(mask, n, k));
  return out;
}

namespace {

bool tuple_in_range(const Tuple& t, int n) {
  return std::all_of(t.begin(), t.end(), [n](int x) { return x >= 0 && x < n; });
}

std::string render_tuple(const Tuple& t) {
  std::string out = "(";
  for (std::size_t i = 0; i < t.size(); ++i) out += (i ? "," : "") + std::to_string(t[i]);
  return out + ")";
}

[[noreturn]] void mismatch(const std::string& what) { throw Error(ErrorCode::SignatureMismatch, what); }

}  // namespace

std::vector<Diagnostic> validate_structure(const OrderedStructure& a, const Signature& sig) {
  std::vector<Diagnostic> out;
  auto report = [&](std::string code, std::string msg) { out.push_back({std::move(code), std::move(msg)}); };
  if (a.size < 1) report("EmptyUniverse", "size must be at least 1");
  for (const auto& r : sig.boolRelations) {
    if (r.arity < 1) report("BadArity", r.name);
    if (sig.find_weighted(r.name)) report("NameClash", r.name + " is both Boolean and weighted");
  }
  for (const auto& r : sig.weightedRelations)
    if (r.arity < 1) report("BadArity", r.name);
  for (const auto& [name, tuples] : a.boolRels) {
    const auto* sym = sig.find_bool(name);
    if (!sym) {
      report("UnknownRelation", name);
      continue;
    }
    for (const auto& t : tuples) {
      if (static_cast<int>(t.size()) != sym->arity) report("ArityMismatch", name + render_tuple(t));
      else if (!tuple_in_range(t, a.size)) report("TupleOutOfRange", name + render_tuple(t));
    }
  }
  for (const auto& r : sig.boolRelations)
    if (!a.boolRels.count(r.name)) report("MissingRelation", r.name);
  for (const auto& [name, values] : a.weightedRels) {
    const auto* sym = sig.find_weighted(name);
    if (!sym) {
      report("UnknownRelation", name);
      continue;
    }
    bool shapeOk = true;
    for (const auto& [t, v] : values) {
      if (static_cast<int>(t.size()) != sym->arity) {
        report("ArityMismatch", name + render_tuple(t));
        shapeOk = false;
      } else if (!tuple_in_range(t, a.size)) {
        report("TupleOutOfRange", name + render_tuple(t));
        shapeOk = false;
      }
      if (v.semiring() != a.semiring) report("MixedSemiringWeights", name + render_tuple(t));
    }
    if (shapeOk && a.size >= 1 && values.size() != tuple_count(a.size, sym->arity))
      report("PartialWeightedRelation", name + " is not defined on every tuple");
  }
  for (const auto& r : sig.weightedRelations)
    if (!a.weightedRels.count(r.name)) report("MissingRelation", r.name);
  return out;
}

WeightedWord encode_structure(const OrderedStructure& a, const Signature& sig, const std::vector<FreeValue>& freeValues) {
  auto diags = validate_structure(a, sig);
  if (!diags.empty()) mismatch(diags.front().code + ": " + diags.front().message);
  const int n = a.size;
  WeightedWord out;
  auto bit = [](bool b) { return WordToken{Letter{b ? "1" : "0"}}; };
  for (int i = 0; i < n; ++i) out.push_back(bit(false));
  out.push_back(bit(true));
  for (const auto& r : sig.boolRelations) {
    const auto& tuples = a.boolRels.at(r.name);
    for (const auto& t : enumerate_tuples_lex(n, r.arity)) out.push_back(bit(tuples.count(t) > 0));
  }
  for (const auto& r : sig.weightedRelations) {
    const auto& values = a.weightedRels.at(r.name);
    for (const auto& t : enumerate_tuples_lex(n, r.arity)) out.emplace_back(values.at(t));
  }
  for (const auto& fv : freeValues) {
    if (const auto* e = std::get_if<int>(&fv)) {
      if (*e < 0 || *e >= n) mismatch("free element " + std::to_string(*e) + " outside the universe");
      for (int i = 0; i < n; ++i) out.push_back(bit(i == *e));
    } else {
      const auto& set = std::get<TupleSet>(fv);
      for (const auto& t : set.tuples)
        if (static_cast<int>(t.size()) != set.arity || !tuple_in_range(t, n)) mismatch("free set tuple " + render_tuple(t));
      for (const auto& t : enumerate_tuples_lex(n, set.arity)) out.push_back(bit(set.tuples.count(t) > 0));
    }
  }
  return out;
}

Signature signature_of(const OrderedStructure& a) {
  Signature sig;
  for (const auto& entry : a.boolRels) sig.boolRelations.push_back({entry.first, a.arity_of(entry.first)});
  for (const auto& entry : a.weightedRels) sig.weightedRelations.push_back({entry.first, a.arity_of(entry.first)});
  return sig;
}

namespace {

struct RelationHeader {
  bool weighted;
  std::string name;
  int arity;
};

// Parses "rel R/2" or "wrel W/1".
RelationHeader parse_relation_header(std::string_view s, std::size_t line) {
  s = text::trim(s);
  auto where = "line " + std::to_string(line) + ": ";
  RelationHeader h{};
  if (s.starts_with("wrel ")) {
    h.weighted = true;
    s.remove_prefix(5);
  } else if (s.starts_with("rel ")) {
    h.weighted = false;
    s.remove_prefix(4);
  } else {
    throw Error(ErrorCode::SyntaxError, where + "expected 'rel' or 'wrel'");
  }
  s = text::trim(s);
  auto slash = s.find('/');
  if (slash == std::string_view::npos) throw Error(ErrorCode::SyntaxError, where + "expected NAME/ARITY");
  h.name = std::string(text::trim(s.substr(0, slash)));
  auto ar = text::trim(s.substr(slash + 1));
  if (h.name.empty() || !std::isupper(static_cast<unsigned char>(h.name[0])) ||
      !std::all_of(h.name.begin(), h.name.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }))
    throw Error(ErrorCode::SyntaxError, where + "relation names start with an uppercase letter: '" + h.name + "'");
  if (ar.empty() || ar.size() > 2 || !std::all_of(ar.begin(), ar.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
    throw Error(ErrorCode::SyntaxError, where + "bad arity '" + std::string(ar) + "'");
  h.arity = std::stoi(std::string(ar));
  if (h.arity < 1) throw Error(ErrorCode::SyntaxError, where + "arity must be at least 1");
  return h;
}

Tuple parse_tuple(std::string_view s, std::size_t& pos, std::size_t line) {
  auto where = "line " + std::to_string(line) + ": ";
  if (pos >= s.size() || s[pos] != '(') throw Error(ErrorCode::SyntaxError, where + "expected '('");
  auto close = s.find(')', pos);
  if (close == std::string_view::npos) throw Error(ErrorCode::SyntaxError, where + "unterminated tuple");
  Tuple t;
  for (const auto& part : text::split_list(s.substr(pos + 1, close - pos - 1))) {
    if (!std::all_of(part.begin(), part.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }) ||
        part.size() > 9)
      throw Error(ErrorCode::SyntaxError, where + "tuple components are element numbers: '" + part + "'");
    t.push_back(std::stoi(part));
  }
  pos = close + 1;
  return t;
}

void skip_separators(std::string_view s, std::size_t& pos) {
  while (pos < s.size() && (text::is_space(s[pos]) || s[pos] == ',')) ++pos;
}

}  // namespace

OrderedStructure parse_structure(std::string_view source, SemiringKind kind) {
  OrderedStructure a;
  a.semiring = kind;
  bool sawSize = false;
  std::map<std::string, int> arities;
  auto lines = text::split_lines(source);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    auto line = text::trim(text::strip_comment(lines[ln]));
    if (line.empty()) continue;
    auto colon = line.find(':');
    if (colon == std::string_view::npos) throw Error(ErrorCode::SyntaxError, "line " + std::to_string(ln + 1) + ": missing ':'");
    auto head = text::trim(line.substr(0, colon));
    auto body = line.substr(colon + 1);
    if (head == "size") {
      auto v = std::string(text::trim(body));
      if (sawSize) throw Error(ErrorCode::MalformedFile, "duplicate size");
      if (v.empty() || v.size() > 6 || !std::all_of(v.begin(), v.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
        throw Error(ErrorCode::SyntaxError, "bad size '" + v + "'");
      a.size = std::stoi(v);
      if (a.size < 1) throw Error(ErrorCode::MalformedFile, "size must be at least 1");
      sawSize = true;
      continue;
    }
    auto h = parse_relation_header(head, ln + 1);
    if (arities.count(h.name)) throw Error(ErrorCode::MalformedFile, "relation '" + h.name + "' declared twice");
    arities[h.name] = h.arity;
    std::size_t pos = 0;
    if (!h.weighted) {
      auto& tuples = a.boolRels[h.name];
      while (true) {
        skip_separators(body, pos);
        if (pos >= body.size()) break;
        Tuple t = parse_tuple(body, pos, ln + 1);
        if (static_cast<int>(t.size()) != h.arity)
          throw Error(ErrorCode::ArityMismatch, h.name + render_tuple(t) + " has the wrong arity");
        tuples.insert(t);
      }
    } else {
      auto& values = a.weightedRels[h.name];
      while (true) {
        skip_separators(body, pos);
        if (pos >= body.size()) break;
        Tuple t = parse_tuple(body, pos, ln + 1);
        if (static_cast<int>(t.size()) != h.arity)
          throw Error(ErrorCode::ArityMismatch, h.name + render_tuple(t) + " has the wrong arity");
        while (pos < body.size() && text::is_space(body[pos])) ++pos;
        if (pos >= body.size() || body[pos] != '=')
          throw Error(ErrorCode::SyntaxError, "line " + std::to_string(ln + 1) + ": expected '=' after tuple");
        ++pos;
        while (pos < body.size() && text::is_space(body[pos])) ++pos;
        Value v = parse_value(text::read_hash_literal(body, pos, ","), kind);
        if (!values.emplace(t, v).second) throw Error(ErrorCode::MalformedFile, h.name + render_tuple(t) + " given twice");
      }
    }
  }
  if (!sawSize) throw Error(ErrorCode::MalformedFile, "missing 'size:' line");
  a.arities = arities;
  Signature sig;
  for (const auto& [name, arity] : arities) {
    if (a.boolRels.count(name)) sig.boolRelations.push_back({name, arity});
    else sig.weightedRelations.push_back({name, arity});
  }
  for (const auto& d : validate_structure(a, sig))
    if (d.code == "TupleOutOfRange" || d.code == "PartialWeightedRelation") throw Error(ErrorCode::MalformedFile, d.code + ": " + d.message);
  return a;
}

std::string serialize_structure(const OrderedStructure& a) {
  std::ostringstream os;
  os << "size: " << a.size << "\n";
  for (const auto& [name, tuples] : a.boolRels) {
    os << "rel " << name << "/" << a.arity_of(name) << ":";
    bool first = true;
    for (const auto& t : tuples) {
      os << (first ? " " : ", ") << render_tuple(t);
      first = false;
    }
    os << "\n";
  }
  for (const auto& [name, values] : a.weightedRels) {
    os << "wrel " << name << "/" << a.arity_of(name) << ":";
    bool first = true;
    for (const auto& [t, v] : values) {
      os << (first ? " " : ", ") << render_tuple(t) << "=#" << render_hash_literal(v);
      first = false;
    }
    os << "\n";
  }
  return os.str();
}

Signature parse_signature(std::string_view source) {
  Signature sig;
  auto lines = text::split_lines(source);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    auto line = text::trim(text::strip_comment(lines[ln]));
    if (line.empty()) continue;
    auto colon = line.find(':');
    auto h = parse_relation_header(colon == std::string_view::npos ? line : line.substr(0, colon), ln + 1);
    if (sig.find_bool(h.name) || sig.find_weighted(h.name))
      throw Error(ErrorCode::MalformedFile, "relation '" + h.name + "' declared twice");
    (h.weighted ? sig.weightedRelations : sig.boolRelations).push_back({h.name, h.arity});
  }
  return sig;
}

std::string serialize_signature(const Signature& sig) {
  std::string out;
  for (const auto& r : sig.boolRelations) out += "rel " + r.name + "/" + std::to_string(r.arity) + "\n";
  for (const auto& r : sig.weightedRelations) out += "wrel " + r.name + "/" + std::to_string(r.arity) + "\n";
  return out;
}

}  // namespace semtm
