#include "semtm/wqbf.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_map>

#include "text_util.hpp"

namespace semtm {

namespace {

QbfPtr make(QbfKind kind, std::string name = {}, std::vector<QbfPtr> children = {}) {
  auto f = std::make_shared<Qbf>();
  f->kind = kind;
  f->name = std::move(name);
  f->children = std::move(children);
  return f;
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

}  // namespace

namespace qbf {

QbfPtr constant(Value v) {
  auto f = std::make_shared<Qbf>();
  f->kind = QbfKind::Const;
  f->constant = std::move(v);
  return f;
}

QbfPtr pos(std::string var) { return make(QbfKind::PosLit, std::move(var)); }
QbfPtr neg(std::string var) { return make(QbfKind::NegLit, std::move(var)); }

QbfPtr input_surrogate(std::size_t position) {
  auto f = std::make_shared<Qbf>();
  f->kind = QbfKind::InputSurrogate;
  f->position = position;
  return f;
}

QbfPtr named_surrogate(std::string name) { return make(QbfKind::NamedSurrogate, std::move(name)); }

QbfPtr plus(std::vector<QbfPtr> xs) {
  if (xs.empty()) throw Error(ErrorCode::SyntaxError, "empty sum");
  if (xs.size() == 1) return xs.front();
  return make(QbfKind::Plus, {}, std::move(xs));
}

QbfPtr times(std::vector<QbfPtr> xs) {
  if (xs.empty()) throw Error(ErrorCode::SyntaxError, "empty product");
  if (xs.size() == 1) return xs.front();
  return make(QbfKind::Times, {}, std::move(xs));
}

QbfPtr sum(std::string var, QbfPtr body) { return make(QbfKind::Sum, std::move(var), {std::move(body)}); }
QbfPtr prod(std::string var, QbfPtr body) { return make(QbfKind::Prod, std::move(var), {std::move(body)}); }

}  // namespace qbf

namespace {

class QbfParser {
 public:
  QbfParser(std::string_view text, SemiringKind kind) : text_(text), kind_(kind) {}

  QbfPtr parse() {
    auto f = expr();
    skip();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::SyntaxError, msg + " at offset " + std::to_string(pos_));
  }

  void skip() {
    while (pos_ < text_.size() && text::is_space(text_[pos_])) ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::string ident() {
    skip();
    if (pos_ >= text_.size() || !is_ident_start(text_[pos_])) fail("expected a variable");
    std::size_t start = pos_;
    while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string variable() {
    auto name = ident();
    if (name == "sum" || name == "prod" || name == "surr") fail("reserved word '" + name + "' used as a variable");
    return name;
  }

  QbfPtr expr() {
    std::vector<QbfPtr> terms{term()};
    while (eat('+')) terms.push_back(term());
    return qbf::plus(std::move(terms));
  }

  QbfPtr term() {
    std::vector<QbfPtr> factors{factor()};
    while (eat('*')) factors.push_back(factor());
    return qbf::times(std::move(factors));
  }

  QbfPtr factor() {
    skip();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      auto f = expr();
      if (!eat(')')) fail("expected ')'");
      return f;
    }
    if (c == '#') {
      auto lit = text::read_hash_literal(text_, pos_, "()+*");
      return qbf::constant(parse_value(lit, kind_));
    }
    if (c == '!') {
      ++pos_;
      skip();
      if (pos_ < text_.size() && text_[pos_] == '(') fail("negation applies to variables only");
      return qbf::neg(variable());
    }
    std::size_t save = pos_;
    auto word = ident();
    if (word == "sum" || word == "prod") {
      auto var = variable();
      if (!eat('.')) fail("expected '.' after quantified variable");
      auto body = factor();
      return word == "sum" ? qbf::sum(var, body) : qbf::prod(var, body);
    }
    if (word == "surr") {
      if (pos_ < text_.size() && text_[pos_] == '@') {
        ++pos_;
        std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (start == pos_) fail("expected a position after 'surr@'");
        return qbf::input_surrogate(std::stoull(std::string(text_.substr(start, pos_ - start))));
      }
      if (pos_ < text_.size() && text_[pos_] == ':') {
        ++pos_;
        std::size_t start = pos_;
        while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
        if (start == pos_) fail("expected a name after 'surr:'");
        return qbf::named_surrogate(std::string(text_.substr(start, pos_ - start)));
      }
      fail("expected '@' or ':' after 'surr'");
    }
    pos_ = save;
    return qbf::pos(variable());
  }

  std::string_view text_;
  SemiringKind kind_;
  std::size_t pos_ = 0;
};

void render_into(const Qbf& f, std::string& out) {
  switch (f.kind) {
    case QbfKind::Const:
      out += '#';
      out += render_hash_literal(*f.constant);
      return;
    case QbfKind::PosLit:
      out += f.name;
      return;
    case QbfKind::NegLit:
      out += '!';
      out += f.name;
      return;
    case QbfKind::InputSurrogate:
      out += "surr@" + std::to_string(f.position);
      return;
    case QbfKind::NamedSurrogate:
      out += "surr:" + f.name;
      return;
    case QbfKind::Plus:
    case QbfKind::Times: {
      const char* op = f.kind == QbfKind::Plus ? " + " : " * ";
      out += '(';
      for (std::size_t i = 0; i < f.children.size(); ++i) {
        if (i) out += op;
        render_into(*f.children[i], out);
      }
      out += ')';
      return;
    }
    case QbfKind::Sum:
    case QbfKind::Prod:
      out += f.kind == QbfKind::Sum ? "(sum " : "(prod ";
      out += f.name;
      out += ". ";
      render_into(*f.children[0], out);
      out += ')';
      return;
  }
}

void collect_free(const Qbf& f, std::set<std::string>& bound, std::set<std::string>& out) {
  switch (f.kind) {
    case QbfKind::PosLit:
    case QbfKind::NegLit:
      if (!bound.count(f.name)) out.insert(f.name);
      return;
    case QbfKind::Sum:
    case QbfKind::Prod: {
      bool fresh = bound.insert(f.name).second;
      collect_free(*f.children[0], bound, out);
      if (fresh) bound.erase(f.name);
      return;
    }
    default:
      for (const auto& c : f.children) collect_free(*c, bound, out);
  }
}

void collect_all(const Qbf& f, std::set<std::string>& out) {
  if (f.kind == QbfKind::PosLit || f.kind == QbfKind::NegLit || f.kind == QbfKind::Sum || f.kind == QbfKind::Prod)
    out.insert(f.name);
  for (const auto& c : f.children) collect_all(*c, out);
}

bool has_quantifier(const Qbf& f) {
  if (f.kind == QbfKind::Sum || f.kind == QbfKind::Prod) return true;
  return std::any_of(f.children.begin(), f.children.end(), [](const QbfPtr& c) { return has_quantifier(*c); });
}

[[noreturn]] void unresolved(const Qbf& f) {
  std::string what = f.kind == QbfKind::InputSurrogate ? "surr@" + std::to_string(f.position) : "surr:" + f.name;
  throw Error(ErrorCode::UnresolvedSurrogate, what + " must be substituted before evaluation");
}

Value naive(const Qbf& f, const LiteralInterp& interp, SemiringKind kind, QbfStats* stats) {
  switch (f.kind) {
    case QbfKind::Const:
      if (f.constant->semiring() != kind) throw Error(ErrorCode::MixedSemirings, "constant from another semiring");
      return *f.constant;
    case QbfKind::PosLit:
      return interp.contains(f.name, true) ? Value::one(kind) : Value::zero(kind);
    case QbfKind::NegLit:
      return interp.contains(f.name, false) ? Value::one(kind) : Value::zero(kind);
    case QbfKind::InputSurrogate:
    case QbfKind::NamedSurrogate:
      unresolved(f);
    case QbfKind::Plus: {
      Value acc = Value::zero(kind);
      for (const auto& c : f.children) acc = add(acc, naive(*c, interp, kind, stats));
      return acc;
    }
    case QbfKind::Times: {
      Value acc = Value::one(kind);
      for (const auto& c : f.children) acc = mul(acc, naive(*c, interp, kind, stats));
      return acc;
    }
    case QbfKind::Sum:
    case QbfKind::Prod: {
      const Qbf& body = *f.children[0];
      Value pos = naive(body, interp.with(f.name, true), kind, stats);
      Value neg = naive(body, interp.with(f.name, false), kind, stats);
      if (stats && !has_quantifier(body)) stats->interpretations += 2;
      return f.kind == QbfKind::Sum ? add(pos, neg) : mul(pos, neg);
    }
  }
  return Value::zero(kind);
}

// Pruned evaluation over integer-indexed variables.
class Pruner {
 public:
  Pruner(const Qbf& root, SemiringKind kind, QbfStats* stats) : kind_(kind), stats_(stats) {
    std::set<std::string> names;
    collect_all(root, names);
    for (const auto& n : names) {
      index_.emplace(n, static_cast<int>(index_.size()));
    }
    value_.assign(index_.size(), -1);
    pending_.assign(index_.size(), false);
    root_ = compile(root);
  }

  Value run() { return eval(root_); }

 private:
  struct Node {
    QbfKind kind;
    int var = -1;
    Value constant;
    std::vector<int> children;
    std::vector<int> free;  // sorted free variable indices
    bool quantified = false;  // contains a quantifier
  };

  int compile(const Qbf& f) {
    Node n;
    n.kind = f.kind;
    if (f.kind == QbfKind::InputSurrogate || f.kind == QbfKind::NamedSurrogate) unresolved(f);
    if (f.kind == QbfKind::Const) {
      if (f.constant->semiring() != kind_) throw Error(ErrorCode::MixedSemirings, "constant from another semiring");
      n.constant = *f.constant;
    }
    if (!f.name.empty()) n.var = index_.at(f.name);
    std::set<int> free;
    if (f.kind == QbfKind::PosLit || f.kind == QbfKind::NegLit) free.insert(n.var);
    for (const auto& c : f.children) {
      int id = compile(*c);
      n.children.push_back(id);
      free.insert(nodes_[id].free.begin(), nodes_[id].free.end());
    }
    if (f.kind == QbfKind::Sum || f.kind == QbfKind::Prod) free.erase(n.var);
    n.quantified = has_quantifier(f);
    n.free.assign(free.begin(), free.end());
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }

  // A variable that is neither bound nor pending is absent from the
  // interpretation, so both of its literals are false.
  bool literal_zero(const Node& n) const {
    int v = value_[n.var];
    if (v < 0) return !pending_[n.var];
    return n.kind == QbfKind::PosLit ? v == 0 : v == 1;
  }

  bool definitely_zero(int id) {
    const Node& n = nodes_[id];
    switch (n.kind) {
      case QbfKind::Const:
        return n.constant.is_zero();
      case QbfKind::PosLit:
      case QbfKind::NegLit:
        return literal_zero(n);
      case QbfKind::Times:
        for (int c : n.children)
          if (definitely_zero(c)) return true;
        return false;
      case QbfKind::Plus:
        for (int c : n.children)
          if (!definitely_zero(c)) return false;
        return true;
      case QbfKind::Sum:
      case QbfKind::Prod: {
        int saved = value_[n.var];
        bool savedPending = pending_[n.var];
        value_[n.var] = -1;
        pending_[n.var] = true;
        bool z = definitely_zero(n.children[0]);
        value_[n.var] = saved;
        pending_[n.var] = savedPending;
        return z;
      }
      default:
        return false;
    }
  }

  Value eval(int id) {
    const Node& n = nodes_[id];
    switch (n.kind) {
      case QbfKind::Const:
        return n.constant;
      case QbfKind::PosLit:
      case QbfKind::NegLit:
        return literal_zero(n) ? Value::zero(kind_) : Value::one(kind_);
      case QbfKind::Plus: {
        Value acc = Value::zero(kind_);
        for (int c : n.children) acc = add(acc, eval(c));
        return acc;
      }
      case QbfKind::Times: {
        Value acc = Value::one(kind_);
        for (int c : n.children) {
          acc = mul(acc, eval(c));
          if (acc.is_zero()) return acc;
        }
        return acc;
      }
      case QbfKind::Sum:
      case QbfKind::Prod:
        return eval_chain(id);
      default:
        return Value::zero(kind_);
    }
  }

  struct Chain {
    QbfKind kind;
    std::vector<int> relevant;  // variables free in the body
    std::size_t idle = 0;       // quantifiers whose variable the body ignores
    std::vector<int> factors;
    std::vector<std::vector<int>> factorVars;  // relevant variables per factor
    std::vector<std::vector<int>> varFactors;  // factors per relevant slot
    std::vector<int> slotOf;                   // variable -> slot, or -1
    std::vector<int> unassigned;               // per factor
    bool leafBody = true;                      // the body has no nested quantifier
  };

  Value eval_chain(int id) {
    Chain ch;
    ch.kind = nodes_[id].kind;
    std::vector<int> vars;
    int body = id;
    while (nodes_[body].kind == ch.kind) {
      vars.push_back(nodes_[body].var);
      body = nodes_[body].children[0];
    }
    const auto& bodyFree = nodes_[body].free;
    ch.leafBody = !nodes_[body].quantified;
    std::set<int> seen;
    for (auto it = vars.rbegin(); it != vars.rend(); ++it) {
      bool effective = seen.insert(*it).second;
      if (effective && std::binary_search(bodyFree.begin(), bodyFree.end(), *it))
        ch.relevant.push_back(*it);
      else
        ++ch.idle;
    }
    if (nodes_[body].kind == QbfKind::Times)
      ch.factors = nodes_[body].children;
    else
      ch.factors = {body};

    ch.slotOf.assign(value_.size(), -1);
    for (std::size_t s = 0; s < ch.relevant.size(); ++s) ch.slotOf[ch.relevant[s]] = static_cast<int>(s);
    ch.varFactors.resize(ch.relevant.size());
    for (std::size_t fi = 0; fi < ch.factors.size(); ++fi) {
      std::vector<int> fv;
      for (int v : nodes_[ch.factors[fi]].free) {
        int s = ch.slotOf[v];
        if (s >= 0) {
          fv.push_back(s);
          ch.varFactors[s].push_back(static_cast<int>(fi));
        }
      }
      ch.unassigned.push_back(static_cast<int>(fv.size()));
      ch.factorVars.push_back(std::move(fv));
    }

    std::vector<int> savedValue;
    std::vector<bool> savedPending;
    for (int v : ch.relevant) {
      savedValue.push_back(value_[v]);
      savedPending.push_back(pending_[v]);
      value_[v] = -1;
      pending_[v] = true;
    }

    Value result = Value::zero(kind_);
    bool zeroAtStart = false;
    for (int f : ch.factors) {
      if (definitely_zero(f)) {
        zeroAtStart = true;
        break;
      }
    }
    if (zeroAtStart) {
      if (stats_) ++stats_->interpretations;
    } else {
      result = search(ch, 0);
    }

    for (std::size_t s = 0; s < ch.relevant.size(); ++s) {
      value_[ch.relevant[s]] = savedValue[s];
      pending_[ch.relevant[s]] = savedPending[s];
    }

    bool idempotent = semiring_info(kind_).plusIdempotent;
    for (std::size_t i = 0; i < ch.idle; ++i) {
      if (ch.kind == QbfKind::Sum) {
        if (idempotent) break;
        result = add(result, result);
      } else {
        result = mul(result, result);
      }
    }
    return result;
  }

  // Picks an unassigned variable from the factor with the fewest unassigned ones.
  int choose(const Chain& ch) const {
    int best = -1;
    int bestCount = 0;
    for (std::size_t fi = 0; fi < ch.factors.size(); ++fi) {
      int c = ch.unassigned[fi];
      if (c > 0 && (best < 0 || c < bestCount)) {
        best = static_cast<int>(fi);
        bestCount = c;
        if (c == 1) break;
      }
    }
    if (best < 0) {
      for (std::size_t s = 0; s < ch.relevant.size(); ++s)
        if (value_[ch.relevant[s]] < 0) return static_cast<int>(s);
      return -1;
    }
    for (int s : ch.factorVars[best])
      if (value_[ch.relevant[s]] < 0) return s;
    return -1;
  }

  Value search(Chain& ch, std::size_t assigned) {
    if (assigned == ch.relevant.size()) {
      if (stats_ && ch.leafBody) ++stats_->interpretations;
      Value acc = Value::one(kind_);
      for (int f : ch.factors) {
        acc = mul(acc, eval(f));
        if (acc.is_zero()) break;
      }
      return acc;
    }
    int slot = choose(ch);
    int var = ch.relevant[slot];
    bool isSum = ch.kind == QbfKind::Sum;
    Value acc = isSum ? Value::zero(kind_) : Value::one(kind_);
    for (auto& f : ch.varFactors[slot]) --ch.unassigned[f];
    pending_[var] = false;
    for (int bit : {1, 0}) {
      value_[var] = bit;
      bool dead = false;
      for (int f : ch.varFactors[slot]) {
        if (definitely_zero(ch.factors[f])) {
          dead = true;
          break;
        }
      }
      Value part = Value::zero(kind_);
      if (dead) {
        if (stats_) ++stats_->interpretations;
      } else {
        part = search(ch, assigned + 1);
      }
      acc = isSum ? add(acc, part) : mul(acc, part);
      if (!isSum && acc.is_zero()) break;
    }
    value_[var] = -1;
    pending_[var] = true;
    for (auto& f : ch.varFactors[slot]) ++ch.unassigned[f];
    return acc;
  }

  SemiringKind kind_;
  QbfStats* stats_;
  std::unordered_map<std::string, int> index_;
  std::vector<int> value_;
  std::vector<bool> pending_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

QbfPtr substitute(const QbfPtr& f, const WeightedWord& input, const std::map<std::string, Value>& named,
                  SemiringKind kind) {
  switch (f->kind) {
    case QbfKind::InputSurrogate: {
      if (f->position < input.size()) {
        if (const auto* v = std::get_if<Value>(&input[f->position])) return qbf::constant(*v);
      }
      return qbf::constant(Value::zero(kind));
    }
    case QbfKind::NamedSurrogate: {
      auto it = named.find(f->name);
      if (it == named.end()) throw Error(ErrorCode::UnknownNamedSurrogate, "no value for surr:" + f->name);
      return qbf::constant(it->second);
    }
    default:
      break;
  }
  if (f->children.empty()) return f;
  auto copy = std::make_shared<Qbf>(*f);
  for (auto& c : copy->children) c = substitute(c, input, named, kind);
  return copy;
}

}  // namespace

QbfPtr parse_wqbf(std::string_view text, SemiringKind kind) { return QbfParser(text, kind).parse(); }

std::string render_wqbf(const Qbf& f) {
  std::string out;
  render_into(f, out);
  return out;
}

std::set<std::string> qbf_free_vars(const Qbf& f) {
  std::set<std::string> bound, out;
  collect_free(f, bound, out);
  return out;
}

std::set<std::string> qbf_all_vars(const Qbf& f) {
  std::set<std::string> out;
  collect_all(f, out);
  return out;
}

bool has_surrogates(const Qbf& f) {
  if (f.kind == QbfKind::InputSurrogate || f.kind == QbfKind::NamedSurrogate) return true;
  return std::any_of(f.children.begin(), f.children.end(), [](const QbfPtr& c) { return has_surrogates(*c); });
}

std::size_t qbf_node_count(const Qbf& f) {
  std::size_t n = 1;
  for (const auto& c : f.children) n += qbf_node_count(*c);
  return n;
}

LiteralInterp LiteralInterp::with(const std::string& var, bool positive) const {
  LiteralInterp copy = *this;
  copy.lits_[var] = positive;
  return copy;
}

bool LiteralInterp::contains(const std::string& var, bool positive) const {
  auto it = lits_.find(var);
  return it != lits_.end() && it->second == positive;
}

Value eval_wqbf_naive(const Qbf& f, const LiteralInterp& interp, SemiringKind kind, QbfStats* stats) {
  Value v = naive(f, interp, kind, stats);
  if (stats && stats->interpretations == 0) stats->interpretations = 1;
  return v;
}

Value eval_wqbf_pruned(const Qbf& f, SemiringKind kind, QbfStats* stats) {
  Pruner p(f, kind, stats);
  Value v = p.run();
  if (stats && stats->interpretations == 0) stats->interpretations = 1;
  return v;
}

QbfPtr substitute_surrogates(const QbfPtr& f, const WeightedWord& input, const std::map<std::string, Value>& named,
                             SemiringKind kind) {
  return substitute(f, input, named, kind);
}

}  // namespace semtm
