#include "semtm/wlogic.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <random>

#include "text_util.hpp"

namespace semtm {

bool is_boolean(NodeKind kind) {
  switch (kind) {
    case NodeKind::Leq:
    case NodeKind::Rel:
    case NodeKind::SoAtom:
    case NodeKind::Not:
    case NodeKind::Or:
    case NodeKind::Exists:
    case NodeKind::ExistsSet:
      return true;
    default:
      return false;
  }
}

bool is_boolean(const Formula& f) { return is_boolean(f.kind); }

namespace build {

namespace {
FormulaPtr make(NodeKind kind, std::string name = {}, int arity = 0, std::vector<std::string> args = {},
                std::vector<FormulaPtr> children = {}) {
  auto f = std::make_shared<Formula>();
  f->kind = kind;
  f->name = std::move(name);
  f->arity = arity;
  f->args = std::move(args);
  f->children = std::move(children);
  return f;
}

FormulaPtr chain(NodeKind kind, std::vector<FormulaPtr> fs, FormulaPtr unit) {
  if (fs.empty()) return unit;
  if (fs.size() == 1) return fs.front();
  return make(kind, {}, 0, {}, std::move(fs));
}
}  // namespace

FormulaPtr leq(std::string x, std::string y) { return make(NodeKind::Leq, {}, 0, {std::move(x), std::move(y)}); }
FormulaPtr eq(const std::string& x, const std::string& y) { return land({leq(x, y), leq(y, x)}); }
FormulaPtr lt(const std::string& x, const std::string& y) { return land({leq(x, y), neg(leq(y, x))}); }
FormulaPtr rel(std::string name, std::vector<std::string> args) { return make(NodeKind::Rel, std::move(name), 0, std::move(args)); }
FormulaPtr so_atom(std::string name, std::vector<std::string> args) {
  return make(NodeKind::SoAtom, std::move(name), 0, std::move(args));
}
FormulaPtr neg(FormulaPtr f) { return make(NodeKind::Not, {}, 0, {}, {std::move(f)}); }
FormulaPtr truth() { return forall("u", leq("u", "u")); }
FormulaPtr falsity() { return neg(truth()); }
FormulaPtr lor(std::vector<FormulaPtr> fs) {
  if (fs.empty()) return falsity();
  return chain(NodeKind::Or, std::move(fs), nullptr);
}
FormulaPtr land(std::vector<FormulaPtr> fs) {
  if (fs.empty()) return truth();
  if (fs.size() == 1) return fs.front();
  for (auto& f : fs) f = neg(std::move(f));
  return neg(lor(std::move(fs)));
}
FormulaPtr implies(FormulaPtr a, FormulaPtr b) { return lor({neg(std::move(a)), std::move(b)}); }
FormulaPtr iff(FormulaPtr a, FormulaPtr b) { return land({implies(a, b), implies(b, a)}); }
FormulaPtr exists(std::string var, FormulaPtr body) { return make(NodeKind::Exists, std::move(var), 0, {}, {std::move(body)}); }
FormulaPtr forall(const std::string& var, FormulaPtr body) { return neg(exists(var, neg(std::move(body)))); }
FormulaPtr exists_set(std::string var, int arity, FormulaPtr body) {
  return make(NodeKind::ExistsSet, std::move(var), arity, {}, {std::move(body)});
}
FormulaPtr forall_set(const std::string& var, int arity, FormulaPtr body) {
  return neg(exists_set(var, arity, neg(std::move(body))));
}
FormulaPtr constant(Value v) {
  auto f = std::make_shared<Formula>();
  f->kind = NodeKind::Const;
  f->constant = std::move(v);
  return f;
}
FormulaPtr watom(std::string name, std::vector<std::string> args) {
  return make(NodeKind::WAtom, std::move(name), 0, std::move(args));
}
FormulaPtr plus(std::vector<FormulaPtr> fs) {
  if (fs.empty()) throw Error(ErrorCode::SyntaxError, "empty sum");
  return chain(NodeKind::Plus, std::move(fs), nullptr);
}
FormulaPtr times(std::vector<FormulaPtr> fs) {
  if (fs.empty()) throw Error(ErrorCode::SyntaxError, "empty product");
  return chain(NodeKind::Times, std::move(fs), nullptr);
}
FormulaPtr sum(std::string var, FormulaPtr body) { return make(NodeKind::Sum, std::move(var), 0, {}, {std::move(body)}); }
FormulaPtr prod(std::string var, FormulaPtr body) { return make(NodeKind::Prod, std::move(var), 0, {}, {std::move(body)}); }
FormulaPtr sum_set(std::string var, int arity, FormulaPtr body) {
  return make(NodeKind::SumSet, std::move(var), arity, {}, {std::move(body)});
}
FormulaPtr prod_set(std::string var, int arity, FormulaPtr body) {
  return make(NodeKind::ProdSet, std::move(var), arity, {}, {std::move(body)});
}

}  // namespace build

// ---------------------------------------------------------------------------
// Parsing

namespace {

enum class Tok { Ident, Number, Hash, LParen, RParen, Comma, Dot, Slash, Leq, Lt, Eq, Arrow, DArrow, Plus, Star, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
};

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (true) {
    while (i < s.size() && text::is_space(s[i])) ++i;
    if (i >= s.size()) break;
    std::size_t start = i;
    char c = s[i];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_' || s[i] == '\'')) ++i;
      out.push_back({Tok::Ident, std::string(s.substr(start, i - start)), start});
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      out.push_back({Tok::Number, std::string(s.substr(start, i - start)), start});
    } else if (c == '#') {
      out.push_back({Tok::Hash, text::read_hash_literal(s, i, "(),."), start});
    } else if (s.substr(i, 3) == "<->") {
      i += 3;
      out.push_back({Tok::DArrow, "<->", start});
    } else if (s.substr(i, 2) == "<=") {
      i += 2;
      out.push_back({Tok::Leq, "<=", start});
    } else if (s.substr(i, 2) == "->") {
      i += 2;
      out.push_back({Tok::Arrow, "->", start});
    } else {
      Tok kind;
      switch (c) {
        case '(': kind = Tok::LParen; break;
        case ')': kind = Tok::RParen; break;
        case ',': kind = Tok::Comma; break;
        case '.': kind = Tok::Dot; break;
        case '/': kind = Tok::Slash; break;
        case '<': kind = Tok::Lt; break;
        case '=': kind = Tok::Eq; break;
        case '+': kind = Tok::Plus; break;
        case '*': kind = Tok::Star; break;
        default:
          throw Error(ErrorCode::SyntaxError, "unexpected character '" + std::string(1, c) + "' at " + std::to_string(i));
      }
      ++i;
      out.push_back({kind, std::string(1, c), start});
    }
  }
  out.push_back({Tok::End, "", s.size()});
  return out;
}

bool is_keyword(const std::string& w) {
  static const std::set<std::string> kw{"sum",    "prod",      "sumset",    "prodset", "exists", "forall",
                                        "existsset", "forallset", "not",     "or",     "and"};
  return kw.count(w) > 0;
}

bool is_fo_name(const std::string& w) { return std::islower(static_cast<unsigned char>(w[0])) && !is_keyword(w); }
bool is_upper_name(const std::string& w) { return std::isupper(static_cast<unsigned char>(w[0])) != 0; }

class Parser {
 public:
  Parser(std::string_view source, const Signature& sig, const ParseOptions& options)
      : toks_(lex(source)), sig_(sig), options_(options) {}

  FormulaPtr parse() {
    auto f = chain();
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'");
    return f;
  }

 private:
  const Token& peek() const { return toks_[i_]; }
  Token next() { return toks_[i_++]; }
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::SyntaxError, msg + " at offset " + std::to_string(peek().pos));
  }
  void expect(Tok kind, const char* what) {
    if (peek().kind != kind) fail(std::string("expected ") + what);
    ++i_;
  }

  enum class Op { None, Plus, Times, Or, And, Implies, Iff };

  Op peek_op() const {
    const auto& t = peek();
    if (t.kind == Tok::Plus) return Op::Plus;
    if (t.kind == Tok::Star) return Op::Times;
    if (t.kind == Tok::Arrow) return Op::Implies;
    if (t.kind == Tok::DArrow) return Op::Iff;
    if (t.kind == Tok::Ident && t.text == "or") return Op::Or;
    if (t.kind == Tok::Ident && t.text == "and") return Op::And;
    return Op::None;
  }

  void require_boolean(const FormulaPtr& f, const char* ctx) const {
    if (!is_boolean(*f)) fail(std::string("operand of '") + ctx + "' must be a Boolean formula");
  }

  FormulaPtr chain() {
    std::vector<FormulaPtr> items{unit()};
    Op op = peek_op();
    if (op == Op::None) return items.front();
    while (peek_op() != Op::None) {
      if (peek_op() != op) fail("mixed operators need parentheses");
      ++i_;
      items.push_back(unit());
      if ((op == Op::Implies || op == Op::Iff) && peek_op() != Op::None) fail("'->' and '<->' take exactly two operands");
    }
    switch (op) {
      case Op::Plus: return build::plus(std::move(items));
      case Op::Times: return build::times(std::move(items));
      case Op::Or:
        for (const auto& f : items) require_boolean(f, "or");
        return build::lor(std::move(items));
      case Op::And:
        for (const auto& f : items) require_boolean(f, "and");
        return build::land(std::move(items));
      case Op::Implies:
        for (const auto& f : items) require_boolean(f, "->");
        return build::implies(items[0], items[1]);
      case Op::Iff:
        for (const auto& f : items) require_boolean(f, "<->");
        return build::iff(items[0], items[1]);
      case Op::None: break;
    }
    fail("internal parser error");
  }

  std::string fo_variable() {
    if (peek().kind != Tok::Ident || !is_fo_name(peek().text)) fail("expected a first-order variable (lowercase)");
    return next().text;
  }

  std::pair<std::string, int> so_binder() {
    if (peek().kind != Tok::Ident || !is_upper_name(peek().text)) fail("expected a set variable (uppercase)");
    std::string name = next().text;
    expect(Tok::Slash, "'/' and an arity");
    if (peek().kind != Tok::Number || peek().text.size() > 2) fail("expected an arity");
    int arity = std::stoi(next().text);
    if (arity < 1) fail("arity must be at least 1");
    return {name, arity};
  }

  FormulaPtr body_in_fo_scope(const std::string& var) {
    (void)var;
    expect(Tok::Dot, "'.'");
    return unit();
  }

  FormulaPtr body_in_so_scope(const std::string& var, int arity) {
    expect(Tok::Dot, "'.'");
    soScopes_.emplace_back(var, arity);
    auto body = unit();
    soScopes_.pop_back();
    return body;
  }

  const int* so_arity(const std::string& name) const {
    for (auto it = soScopes_.rbegin(); it != soScopes_.rend(); ++it)
      if (it->first == name) return &it->second;
    for (const auto& r : options_.freeSets)
      if (r.name == name) return &r.arity;
    return nullptr;
  }

  FormulaPtr unit() {
    const Token t = peek();
    if (t.kind == Tok::LParen) {
      ++i_;
      auto f = chain();
      expect(Tok::RParen, "')'");
      return f;
    }
    if (t.kind == Tok::Hash) {
      ++i_;
      return build::constant(parse_value(t.text, options_.semiring));
    }
    if (t.kind != Tok::Ident) fail("expected a formula");
    const std::string& w = t.text;
    if (w == "not") {
      ++i_;
      if (peek().kind == Tok::LParen || peek().kind == Tok::Ident || peek().kind == Tok::Hash) {
        auto f = unit();
        require_boolean(f, "not");
        return build::neg(f);
      }
      fail("expected a formula after 'not'");
    }
    if (w == "sum" || w == "prod" || w == "exists" || w == "forall") {
      ++i_;
      auto var = fo_variable();
      auto body = body_in_fo_scope(var);
      if (w == "sum") return build::sum(var, body);
      if (w == "prod") return build::prod(var, body);
      require_boolean(body, w.c_str());
      return w == "exists" ? build::exists(var, body) : build::forall(var, body);
    }
    if (w == "sumset" || w == "prodset" || w == "existsset" || w == "forallset") {
      ++i_;
      auto [var, arity] = so_binder();
      auto body = body_in_so_scope(var, arity);
      if (w == "sumset") return build::sum_set(var, arity, body);
      if (w == "prodset") return build::prod_set(var, arity, body);
      require_boolean(body, w.c_str());
      return w == "existsset" ? build::exists_set(var, arity, body) : build::forall_set(var, arity, body);
    }
    if (is_keyword(w)) fail("unexpected keyword '" + w + "'");
    ++i_;
    if (is_upper_name(w)) return atom(w);
    if (!is_fo_name(w)) fail("bad identifier '" + w + "'");
    Tok cmp = peek().kind;
    if (cmp != Tok::Leq && cmp != Tok::Lt && cmp != Tok::Eq) fail("expected '<=', '<' or '=' after variable '" + w + "'");
    ++i_;
    auto rhs = fo_variable();
    if (cmp == Tok::Leq) return build::leq(w, rhs);
    if (cmp == Tok::Lt) return build::lt(w, rhs);
    return build::eq(w, rhs);
  }

  FormulaPtr atom(const std::string& name) {
    expect(Tok::LParen, "'(' after relation name");
    std::vector<std::string> args;
    if (peek().kind != Tok::RParen) {
      args.push_back(fo_variable());
      while (peek().kind == Tok::Comma) {
        ++i_;
        args.push_back(fo_variable());
      }
    }
    expect(Tok::RParen, "')'");
    auto check = [&](int arity) {
      if (static_cast<int>(args.size()) != arity)
        throw Error(ErrorCode::ArityMismatch, name + " expects " + std::to_string(arity) + " arguments, got " +
                                                  std::to_string(args.size()));
    };
    if (const int* ar = so_arity(name)) {
      check(*ar);
      return build::so_atom(name, std::move(args));
    }
    if (const auto* r = sig_.find_bool(name)) {
      check(r->arity);
      return build::rel(name, std::move(args));
    }
    if (const auto* r = sig_.find_weighted(name)) {
      check(r->arity);
      return build::watom(name, std::move(args));
    }
    throw Error(ErrorCode::UnknownSymbol, "'" + name + "' is neither a relation of the signature nor a set variable");
  }

  std::vector<Token> toks_;
  std::size_t i_ = 0;
  const Signature& sig_;
  const ParseOptions& options_;
  std::vector<std::pair<std::string, int>> soScopes_;
};

std::string join_args(const std::vector<std::string>& args) {
  std::string out;
  for (std::size_t i = 0; i < args.size(); ++i) out += (i ? "," : "") + args[i];
  return out;
}

void render_into(const Formula& f, std::string& out) {
  auto list = [&](const char* sep) {
    out += "(";
    for (std::size_t i = 0; i < f.children.size(); ++i) {
      if (i) out += sep;
      render_into(*f.children[i], out);
    }
    out += ")";
  };
  auto quantifier = [&](const char* kw, bool set) {
    out += kw;
    out += " ";
    out += f.name;
    if (set) out += "/" + std::to_string(f.arity);
    out += ". ";
    render_into(*f.children[0], out);
  };
  switch (f.kind) {
    case NodeKind::Leq: out += f.args[0] + " <= " + f.args[1]; break;
    case NodeKind::Rel:
    case NodeKind::SoAtom:
    case NodeKind::WAtom: out += f.name + "(" + join_args(f.args) + ")"; break;
    case NodeKind::Not:
      out += "not ";
      if (f.children[0]->kind == NodeKind::Leq) {
        out += "(";
        render_into(*f.children[0], out);
        out += ")";
      } else {
        render_into(*f.children[0], out);
      }
      break;
    case NodeKind::Or: list(" or "); break;
    case NodeKind::Plus: list(" + "); break;
    case NodeKind::Times: list(" * "); break;
    case NodeKind::Exists: quantifier("exists", false); break;
    case NodeKind::ExistsSet: quantifier("existsset", true); break;
    case NodeKind::Sum: quantifier("sum", false); break;
    case NodeKind::Prod: quantifier("prod", false); break;
    case NodeKind::SumSet: quantifier("sumset", true); break;
    case NodeKind::ProdSet: quantifier("prodset", true); break;
    case NodeKind::Const: out += "#" + render_hash_literal(*f.constant); break;
  }
}

void collect_free(const Formula& f, std::vector<std::string>& foBound, std::vector<std::string>& soBound, FreeVariables& out) {
  auto fo_bound = [&](const std::string& v) { return std::find(foBound.begin(), foBound.end(), v) != foBound.end(); };
  switch (f.kind) {
    case NodeKind::Leq:
    case NodeKind::Rel:
    case NodeKind::WAtom:
      for (const auto& a : f.args)
        if (!fo_bound(a)) out.firstOrder.insert(a);
      return;
    case NodeKind::SoAtom:
      for (const auto& a : f.args)
        if (!fo_bound(a)) out.firstOrder.insert(a);
      if (std::find(soBound.begin(), soBound.end(), f.name) == soBound.end())
        out.secondOrder.emplace(f.name, static_cast<int>(f.args.size()));
      return;
    case NodeKind::Exists:
    case NodeKind::Sum:
    case NodeKind::Prod:
      foBound.push_back(f.name);
      collect_free(*f.children[0], foBound, soBound, out);
      foBound.pop_back();
      return;
    case NodeKind::ExistsSet:
    case NodeKind::SumSet:
    case NodeKind::ProdSet:
      soBound.push_back(f.name);
      collect_free(*f.children[0], foBound, soBound, out);
      soBound.pop_back();
      return;
    default:
      for (const auto& c : f.children) collect_free(*c, foBound, soBound, out);
  }
}

struct FragmentFlags {
  bool weighted = false;
  bool secondOrder = false;
  bool prodSet = false;
};

void scan(const Formula& f, FragmentFlags& flags) {
  if (!is_boolean(f)) flags.weighted = true;
  if (f.kind == NodeKind::SoAtom || f.kind == NodeKind::ExistsSet || f.kind == NodeKind::SumSet ||
      f.kind == NodeKind::ProdSet)
    flags.secondOrder = true;
  if (f.kind == NodeKind::ProdSet) flags.prodSet = true;
  for (const auto& c : f.children) scan(*c, flags);
}

}  // namespace

FormulaPtr parse_formula(std::string_view source, const Signature& sig, const ParseOptions& options) {
  return Parser(source, sig, options).parse();
}

std::string render_formula(const Formula& f) {
  std::string out;
  render_into(f, out);
  return out;
}

bool structurally_equal(const Formula& a, const Formula& b) {
  if (a.kind != b.kind || a.name != b.name || a.arity != b.arity || a.args != b.args || a.constant != b.constant ||
      a.children.size() != b.children.size())
    return false;
  for (std::size_t i = 0; i < a.children.size(); ++i)
    if (!structurally_equal(*a.children[i], *b.children[i])) return false;
  return true;
}

FreeVariables free_vars(const Formula& f) {
  FreeVariables out;
  std::vector<std::string> fo;
  std::vector<std::string> so;
  collect_free(f, fo, so, out);
  return out;
}

std::string_view fragment_name(Fragment f) {
  switch (f) {
    case Fragment::FO: return "FO";
    case Fragment::SO: return "SO";
    case Fragment::wFO: return "wFO";
    case Fragment::wSO: return "wSO";
    case Fragment::wESO: return "wESO";
  }
  return "?";
}

Fragment classify(const Formula& f) {
  FragmentFlags flags;
  scan(f, flags);
  if (!flags.weighted) return flags.secondOrder ? Fragment::SO : Fragment::FO;
  if (!flags.secondOrder) return Fragment::wFO;
  return flags.prodSet ? Fragment::wSO : Fragment::wESO;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

class Evaluator {
 public:
  Evaluator(const OrderedStructure& a, const Assignment& rho, const EvalOptions& options)
      : a_(a), n_(a.size), one_(Value::one(a.semiring)), zero_(Value::zero(a.semiring)) {
    if (options.permutationSeed) rng_.emplace(*options.permutationSeed);
    for (const auto& [name, e] : rho.firstOrder) {
      if (e < 0 || e >= n_) throw Error(ErrorCode::SignatureMismatch, "assignment " + name + "=" + std::to_string(e) + " outside the universe");
      foScope_.emplace_back(name, new_fo_slot(e));
    }
    for (const auto& [name, set] : rho.secondOrder) {
      if (tuple_count(n_, set.arity) > 62) throw Error(ErrorCode::TooLarge, "free set " + name + " too large");
      soScope_.emplace_back(name, new_so_slot(set.arity, mask_from_relation(set.tuples, n_, set.arity), true));
    }
  }

  int compile(const Formula& f) {
    Node node;
    node.kind = f.kind;
    switch (f.kind) {
      case NodeKind::Leq:
        node.slots = {fo_slot(f.args[0]), fo_slot(f.args[1])};
        break;
      case NodeKind::Rel: {
        node.slots = fo_slots(f.args);
        node.rel = bool_relation(f.name, static_cast<int>(f.args.size()));
        break;
      }
      case NodeKind::WAtom:
        node.slots = fo_slots(f.args);
        node.rel = weighted_relation(f.name, static_cast<int>(f.args.size()));
        break;
      case NodeKind::SoAtom: {
        node.slots = fo_slots(f.args);
        node.slot = so_slot(f.name, static_cast<int>(f.args.size()));
        break;
      }
      case NodeKind::Const:
        if (f.constant->semiring() != a_.semiring)
          throw Error(ErrorCode::MixedSemirings, "constant " + render(*f.constant) + " is not in the structure's semiring");
        node.constant = *f.constant;
        break;
      case NodeKind::Exists:
      case NodeKind::Sum:
      case NodeKind::Prod: {
        node.slot = new_fo_slot(-1);
        node.order = element_order();
        foScope_.emplace_back(f.name, node.slot);
        node.kids.push_back(compile(*f.children[0]));
        foScope_.pop_back();
        break;
      }
      case NodeKind::ExistsSet:
      case NodeKind::SumSet:
      case NodeKind::ProdSet: {
        std::size_t count = tuple_count(n_, f.arity);
        if (count > so_cap())
          throw Error(ErrorCode::TooLarge, "quantifying " + f.name + "/" + std::to_string(f.arity) + " needs 2^" +
                                               std::to_string(count) + " sets, above the cap 2^" + std::to_string(so_cap()));
        node.slot = new_so_slot(f.arity, 0, false);
        node.count = count;
        if (rng_) {
          std::uint64_t size = std::uint64_t{1} << count;
          node.mulKey = ((*rng_)() | 1u) & (size - 1);
          if (node.mulKey == 0) node.mulKey = 1;
          node.addKey = (*rng_)() & (size - 1);
        }
        soScope_.emplace_back(f.name, node.slot);
        node.kids.push_back(compile(*f.children[0]));
        soScope_.pop_back();
        break;
      }
      default:
        for (const auto& c : f.children) node.kids.push_back(compile(*c));
    }
    nodes_.push_back(std::move(node));
    return static_cast<int>(nodes_.size() - 1);
  }

  bool truth(int id) {
    const Node& node = nodes_[id];
    switch (node.kind) {
      case NodeKind::Leq: {
        int x = fo_[node.slots[0]];
        int y = fo_[node.slots[1]];
        return x >= 0 && y >= 0 && x <= y;
      }
      case NodeKind::Rel: {
        std::size_t r;
        if (!rank(node.slots, r)) return false;
        return boolData_[node.rel][r] != 0;
      }
      case NodeKind::SoAtom: {
        std::size_t r;
        const auto& so = so_[node.slot];
        if (!so.bound || !rank(node.slots, r)) return false;
        return (so.mask >> (so.count - 1 - r)) & 1u;
      }
      case NodeKind::Not: return !truth(node.kids[0]);
      case NodeKind::Or:
        for (int k : node.kids)
          if (truth(k)) return true;
        return false;
      case NodeKind::Exists: {
        for (int e : node.order) {
          fo_[node.slot] = e;
          if (truth(node.kids[0])) {
            fo_[node.slot] = -1;
            return true;
          }
        }
        fo_[node.slot] = -1;
        return false;
      }
      case NodeKind::ExistsSet: {
        auto& so = so_[node.slot];
        so.bound = true;
        bool found = false;
        std::uint64_t total = std::uint64_t{1} << node.count;
        for (std::uint64_t i = 0; i < total && !found; ++i) {
          so_[node.slot].mask = permuted(node, i);
          found = truth(node.kids[0]);
        }
        so_[node.slot].bound = false;
        return found;
      }
      default:
        throw Error(ErrorCode::UnsupportedConstruct, "weighted node in a Boolean position");
    }
  }

  Value value(int id) {
    const Node& node = nodes_[id];
    if (is_boolean(node.kind)) return truth(id) ? one_ : zero_;
    switch (node.kind) {
      case NodeKind::Const: return node.constant;
      case NodeKind::WAtom: {
        std::size_t r;
        if (!rank(node.slots, r)) return zero_;
        return weightData_[node.rel][r];
      }
      case NodeKind::Plus: {
        Value acc = zero_;
        for (int k : node.kids) acc = add(acc, value(k));
        return acc;
      }
      case NodeKind::Times: {
        Value acc = one_;
        for (int k : node.kids) {
          acc = mul(acc, value(k));
          if (acc == zero_) return zero_;
        }
        return acc;
      }
      case NodeKind::Sum:
      case NodeKind::Prod: {
        bool product = node.kind == NodeKind::Prod;
        Value acc = product ? one_ : zero_;
        for (int e : node.order) {
          fo_[node.slot] = e;
          Value v = value(node.kids[0]);
          acc = product ? mul(acc, v) : add(acc, v);
          if (product && acc == zero_) break;
        }
        fo_[node.slot] = -1;
        return acc;
      }
      case NodeKind::SumSet:
      case NodeKind::ProdSet: {
        bool product = node.kind == NodeKind::ProdSet;
        Value acc = product ? one_ : zero_;
        so_[node.slot].bound = true;
        std::uint64_t total = std::uint64_t{1} << node.count;
        for (std::uint64_t i = 0; i < total; ++i) {
          so_[node.slot].mask = permuted(node, i);
          Value v = value(node.kids[0]);
          acc = product ? mul(acc, v) : add(acc, v);
          if (product && acc == zero_) break;
        }
        so_[node.slot].bound = false;
        return acc;
      }
      default: break;
    }
    throw Error(ErrorCode::UnsupportedConstruct, "unexpected node");
  }

 private:
  struct Node {
    NodeKind kind;
    int rel = -1;
    int slot = -1;
    std::vector<int> slots;
    std::vector<int> kids;
    std::vector<int> order;
    std::size_t count = 0;
    std::uint64_t mulKey = 1;
    std::uint64_t addKey = 0;
    Value constant;
  };

  struct SoSlot {
    int arity;
    std::size_t count;
    std::uint64_t mask;
    bool bound;
  };

  std::uint64_t permuted(const Node& node, std::uint64_t i) const {
    std::uint64_t mask = (std::uint64_t{1} << node.count) - 1;
    return (i * node.mulKey + node.addKey) & mask;
  }

  std::vector<int> element_order() {
    std::vector<int> order(n_);
    std::iota(order.begin(), order.end(), 0);
    if (rng_) std::shuffle(order.begin(), order.end(), *rng_);
    return order;
  }

  int new_fo_slot(int value) {
    fo_.push_back(value);
    return static_cast<int>(fo_.size() - 1);
  }

  int new_so_slot(int arity, std::uint64_t mask, bool bound) {
    so_.push_back({arity, tuple_count(n_, arity), mask, bound});
    return static_cast<int>(so_.size() - 1);
  }

  int fo_slot(const std::string& name) {
    for (auto it = foScope_.rbegin(); it != foScope_.rend(); ++it)
      if (it->first == name) return it->second;
    // Unassigned free variable: the slot stays unbound and atoms over it fail.
    int s = new_fo_slot(-1);
    foScope_.insert(foScope_.begin(), {name, s});
    return s;
  }

  std::vector<int> fo_slots(const std::vector<std::string>& names) {
    std::vector<int> out;
    for (const auto& n : names) out.push_back(fo_slot(n));
    return out;
  }

  int so_slot(const std::string& name, int arity) {
    for (auto it = soScope_.rbegin(); it != soScope_.rend(); ++it)
      if (it->first == name) {
        if (so_[it->second].arity != arity) throw Error(ErrorCode::ArityMismatch, "set variable " + name);
        return it->second;
      }
    int s = new_so_slot(arity, 0, false);
    soScope_.insert(soScope_.begin(), {name, s});
    return s;
  }

  int bool_relation(const std::string& name, int arity) {
    auto it = a_.boolRels.find(name);
    if (it == a_.boolRels.end()) throw Error(ErrorCode::SignatureMismatch, "structure has no relation " + name);
    if (a_.arity_of(name) != arity) throw Error(ErrorCode::SignatureMismatch, "arity of " + name);
    if (auto c = boolIndex_.find(name); c != boolIndex_.end()) return c->second;
    std::vector<char> bits(tuple_count(n_, arity), 0);
    for (const auto& t : it->second) bits[tuple_rank(t, n_)] = 1;
    boolData_.push_back(std::move(bits));
    return boolIndex_[name] = static_cast<int>(boolData_.size() - 1);
  }

  int weighted_relation(const std::string& name, int arity) {
    auto it = a_.weightedRels.find(name);
    if (it == a_.weightedRels.end()) throw Error(ErrorCode::SignatureMismatch, "structure has no weighted relation " + name);
    if (a_.arity_of(name) != arity) throw Error(ErrorCode::SignatureMismatch, "arity of " + name);
    if (auto c = weightIndex_.find(name); c != weightIndex_.end()) return c->second;
    std::vector<Value> values(tuple_count(n_, arity), zero_);
    for (const auto& [t, v] : it->second) {
      if (v.semiring() != a_.semiring) throw Error(ErrorCode::MixedSemirings, name);
      values[tuple_rank(t, n_)] = v;
    }
    weightData_.push_back(std::move(values));
    return weightIndex_[name] = static_cast<int>(weightData_.size() - 1);
  }

  bool rank(const std::vector<int>& slots, std::size_t& out) const {
    std::size_t r = 0;
    for (int s : slots) {
      int e = fo_[s];
      if (e < 0) return false;
      r = r * static_cast<std::size_t>(n_) + static_cast<std::size_t>(e);
    }
    out = r;
    return true;
  }

  const OrderedStructure& a_;
  int n_;
  Value one_;
  Value zero_;
  std::optional<std::mt19937_64> rng_;
  std::vector<Node> nodes_;
  std::vector<int> fo_;
  std::vector<SoSlot> so_;
  std::vector<std::pair<std::string, int>> foScope_;
  std::vector<std::pair<std::string, int>> soScope_;
  std::vector<std::vector<char>> boolData_;
  std::vector<std::vector<Value>> weightData_;
  std::map<std::string, int> boolIndex_;
  std::map<std::string, int> weightIndex_;
};

}  // namespace

bool eval_bool(const OrderedStructure& a, const Assignment& rho, const Formula& f) {
  if (!is_boolean(f)) throw Error(ErrorCode::UnsupportedConstruct, "eval_bool needs a Boolean formula");
  Evaluator ev(a, rho, {});
  int root = ev.compile(f);
  return ev.truth(root);
}

Value eval_weighted(const OrderedStructure& a, const Assignment& rho, const Formula& f, const EvalOptions& options) {
  Evaluator ev(a, rho, options);
  int root = ev.compile(f);
  return ev.value(root);
}

}  // namespace semtm
