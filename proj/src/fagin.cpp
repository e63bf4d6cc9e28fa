#include "semtm/fagin.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <optional>

namespace semtm {

std::string_view origin_name(TransitionOrigin o) {
  switch (o) {
    case TransitionOrigin::Glue: return "glue";
    case TransitionOrigin::Constant: return "constant";
    case TransitionOrigin::WeightedAtom: return "weighted-atom";
    case TransitionOrigin::ZeroSink: return "zero-sink";
  }
  return "?";
}

std::uint64_t CompilationReport::budget_for(int universeSize) const {
  std::uint64_t value = 0;
  std::uint64_t power = 1;
  for (auto c : budgetHint) {
    value += c * power;
    power *= static_cast<std::uint64_t>(universeSize);
  }
  return value;
}

namespace {

// Tape layout after initialization:
//   prefix cells (one per element; cell 0 flagged) carrying variable and odometer marks,
//   the end-of-prefix cell, the remaining input cells with block-boundary and cursor flags,
//   then one separator plus bit block per active set quantifier.
enum class Zone : std::uint8_t { Prefix, End, Cell, Sep, Work, Blank };

struct Sym {
  Zone zone = Zone::Blank;
  bool first = false;
  unsigned marks = 0;
  char base = 0;
  bool boundary = false;
  bool cursor = false;
};

using Pred = std::function<bool(const Sym&)>;
using Rewrite = std::function<Sym(Sym)>;

Sym same(Sym s) { return s; }

Pred operator&&(Pred a, Pred b) {
  return [a = std::move(a), b = std::move(b)](const Sym& s) { return a(s) && b(s); };
}
Pred operator!(Pred a) {
  return [a = std::move(a)](const Sym& s) { return !a(s); };
}

const Pred any = [](const Sym&) { return true; };
const Pred prefix = [](const Sym& s) { return s.zone == Zone::Prefix; };
const Pred first = [](const Sym& s) { return s.zone == Zone::Prefix && s.first; };
const Pred inner = [](const Sym& s) { return s.zone == Zone::Prefix && !s.first; };
const Pred endCell = [](const Sym& s) { return s.zone == Zone::End; };
const Pred cell = [](const Sym& s) { return s.zone == Zone::Cell; };
const Pred work = [](const Sym& s) { return s.zone == Zone::Work; };
const Pred sep = [](const Sym& s) { return s.zone == Zone::Sep; };
const Pred blank = [](const Sym& s) { return s.zone == Zone::Blank; };
const Pred cursor = [](const Sym& s) { return s.cursor; };
const Pred boundary = [](const Sym& s) { return s.boundary; };
const Pred raw = [](const Sym& s) { return s.zone == Zone::Cell && !s.boundary && !s.cursor; };

Pred has(unsigned bit) {
  return [bit](const Sym& s) { return s.zone == Zone::Prefix && (s.marks >> bit & 1U); };
}
Pred base_is(char c) {
  return [c](const Sym& s) { return s.base == c; };
}
Rewrite add_mark(unsigned bit) {
  return [bit](Sym s) {
    s.marks |= 1U << bit;
    return s;
  };
}
Rewrite remove_mark(unsigned bit) {
  return [bit](Sym s) {
    s.marks &= ~(1U << bit);
    return s;
  };
}
Sym add_cursor(Sym s) {
  s.cursor = true;
  return s;
}
Sym remove_cursor(Sym s) {
  s.cursor = false;
  return s;
}

using Poly = std::vector<std::uint64_t>;

Poly padd(Poly a, const Poly& b) {
  if (a.size() < b.size()) a.resize(b.size(), 0);
  for (std::size_t i = 0; i < b.size(); ++i) a[i] += b[i];
  return a;
}
Poly pmul(const Poly& a, const Poly& b) {
  if (a.empty() || b.empty()) return {};
  Poly out(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}
Poly pconst(std::uint64_t c) { return {c}; }
Poly pow_n(int k) {
  Poly p(static_cast<std::size_t>(k) + 1, 0);
  p[static_cast<std::size_t>(k)] = 1;
  return p;
}

class Builder {
 public:
  Builder(unsigned slots, unsigned digits, SemiringKind kind) : slots_(slots), digits_(digits), kind_(kind) {
    unsigned marks = slots + digits;
    for (bool f : {false, true})
      for (unsigned m = 0; m < (1U << marks); ++m) add_symbol(Sym{Zone::Prefix, f, m});
    add_symbol(Sym{Zone::End});
    for (char b : {'0', '1', 'X'})
      for (bool bd : {false, true})
        for (bool c : {false, true}) add_symbol(Sym{Zone::Cell, false, 0, b, bd, c});
    add_symbol(Sym{Zone::Sep});
    for (char b : {'0', '1'})
      for (bool c : {false, true}) add_symbol(Sym{Zone::Work, false, 0, b, false, c});
    add_symbol(Sym{Zone::Blank});
  }

  int state(const std::string& hint) {
    states_.push_back("q" + std::to_string(states_.size()) + "_" + hint);
    return static_cast<int>(states_.size()) - 1;
  }

  void on(int from, const Pred& p, int to, const Rewrite& w, int dir) {
    weighted(from, p, to, w, dir, ConstWeight{Value::one(kind_)}, TransitionOrigin::Glue);
  }

  void weighted(int from, const Pred& p, int to, const Rewrite& w, int dir, const WeightSpec& weight,
                TransitionOrigin origin) {
    for (std::size_t i = 0; i < syms_.size(); ++i) {
      if (!p(syms_[i])) continue;
      Transition t{from, static_cast<int>(i), to, index(w(syms_[i])), dir, weight};
      transitions_.push_back(t);
      origins_.push_back(origin);
    }
  }

  unsigned slot_bit(int slot) const { return static_cast<unsigned>(slot); }
  unsigned digit_bit(int digit) const { return slots_ + static_cast<unsigned>(digit) - 1; }
  unsigned all_digits() const { return ((1U << digits_) - 1) << slots_; }
  SemiringKind kind() const { return kind_; }

  Machine finish(int initial, std::vector<TransitionOrigin>& origins) {
    Machine m;
    m.semiring = kind_;
    m.states = states_;
    for (const auto& s : syms_) m.symbols.push_back(name(s));
    m.inputAlphabet = {index(Sym{Zone::Cell, false, 0, '0'}), index(Sym{Zone::Cell, false, 0, '1'})};
    m.initialState = initial;
    m.blank = index(Sym{Zone::Blank});
    m.placeholder = index(Sym{Zone::Cell, false, 0, 'X'});
    m.transitions = transitions_;
    for (const auto& t : transitions_) {
      if (const auto* c = std::get_if<ConstWeight>(&t.weight)) {
        if (std::find(m.knownValues.begin(), m.knownValues.end(), c->value) == m.knownValues.end())
          m.knownValues.push_back(c->value);
      }
    }
    std::map<std::string, TransitionOrigin> byLine;
    for (std::size_t i = 0; i < transitions_.size(); ++i)
      byLine.emplace(serialize_transition(m, transitions_[i]), origins_[i]);
    canonicalize(m);
    origins.clear();
    for (const auto& t : m.transitions) origins.push_back(byLine.at(serialize_transition(m, t)));
    return m;
  }

 private:
  static std::uint64_t code(const Sym& s) {
    std::uint64_t baseIdx = s.base == '1' ? 1 : s.base == 'X' ? 2 : 0;
    return ((((static_cast<std::uint64_t>(s.zone) * 2 + s.first) * 4096 + s.marks) * 4 + baseIdx) * 2 + s.boundary) *
               2 +
           s.cursor;
  }

  void add_symbol(const Sym& s) {
    codes_.emplace(code(s), static_cast<int>(syms_.size()));
    syms_.push_back(s);
  }

  int index(const Sym& s) const { return codes_.at(code(s)); }

  std::string name(const Sym& s) const {
    switch (s.zone) {
      case Zone::Prefix: {
        std::string out = s.first ? "F" : "P";
        for (unsigned b = 0; b < slots_ + digits_; ++b) {
          if (!(s.marks >> b & 1U)) continue;
          out += b < slots_ ? "s" + std::to_string(b) : "d" + std::to_string(b - slots_ + 1);
        }
        return out;
      }
      case Zone::End: return "E";
      case Zone::Cell: return std::string(1, s.base) + (s.boundary ? "b" : "") + (s.cursor ? "c" : "");
      case Zone::Sep: return "S";
      case Zone::Work: return std::string("w") + s.base + (s.cursor ? "c" : "");
      case Zone::Blank: return "_";
    }
    return "?";
  }

  unsigned slots_;
  unsigned digits_;
  SemiringKind kind_;
  std::vector<Sym> syms_;
  std::map<std::uint64_t, int> codes_;
  std::vector<std::string> states_;
  std::vector<Transition> transitions_;
  std::vector<TransitionOrigin> origins_;
};

struct Block {
  std::string name;
  int arity = 1;
};

struct Locator {
  bool workArea = false;
  int index = 0;
};

struct Shape {
  int foDepth = 0;
  std::vector<int> setArities;
};

void measure(const Formula& f, int depth, Shape& shape) {
  int inner = depth;
  if (f.kind == NodeKind::Exists || f.kind == NodeKind::Sum || f.kind == NodeKind::Prod) inner = depth + 1;
  shape.foDepth = std::max(shape.foDepth, inner);
  if (f.kind == NodeKind::SumSet) shape.setArities.push_back(f.arity);
  for (const auto& c : f.children) measure(*c, inner, shape);
}

void reject_unsupported(const Formula& f) {
  if (f.kind == NodeKind::ExistsSet)
    throw Error(ErrorCode::UnsupportedConstruct, "Boolean set quantifiers are not compiled");
  if (f.kind == NodeKind::ProdSet)
    throw Error(ErrorCode::UnsupportedConstruct, "product over sets is outside the existential fragment");
  for (const auto& c : f.children) reject_unsupported(*c);
}

class Compiler {
 public:
  Compiler(const Formula& f, const Signature& sig, SemiringKind kind, std::vector<std::string> freeOrder)
      : sig_(sig), freeOrder_(std::move(freeOrder)) {
    reject_unsupported(f);
    auto fv = free_vars(f);
    for (const auto& r : sig.boolRelations) blocks_.push_back({r.name, r.arity});
    for (const auto& r : sig.weightedRelations) blocks_.push_back({r.name, r.arity});
    firstFree_ = static_cast<int>(blocks_.size());
    int freeElements = 0;
    for (const auto& v : freeOrder_) {
      if (fv.firstOrder.count(v)) {
        blocks_.push_back({v, 1});
        foEnv_.emplace_back(v, freeElements++);
      } else {
        blocks_.push_back({v, fv.secondOrder.at(v)});
      }
    }
    Shape shape;
    measure(f, 0, shape);
    int digits = 0;
    for (const auto& b : blocks_) digits = std::max(digits, b.arity);
    for (int k : shape.setArities) digits = std::max(digits, k);
    slots_ = freeElements + shape.foDepth;
    digits_ = digits;
    if (slots_ + digits_ > 10) throw Error(ErrorCode::TooLarge, "too many simultaneous variables to compile");
    b_.emplace(static_cast<unsigned>(slots_), static_cast<unsigned>(digits_), kind);

    tapeBound_ = padd(pow_n(1), pconst(5));
    for (const auto& blk : blocks_) tapeBound_ = padd(tapeBound_, pow_n(blk.arity));
    for (int k : shape.setArities) tapeBound_ = padd(tapeBound_, padd(pow_n(k), pconst(1)));
  }

  Machine compile(const Formula& f, bool weightedTop, std::vector<TransitionOrigin>& origins, Poly& budget) {
    Builder& b = *b_;
    int init = b.state("init");
    accept_ = b.state("accept");
    zsink_ = b.state("zero");
    int dead = b.state("dead");
    b.weighted(zsink_, any, dead, same, 1, ConstWeight{Value::zero(b.kind())}, TransitionOrigin::ZeroSink);

    int next = b.state("prepared");
    budget = initialize(init, next);
    for (std::size_t i = 0; i < foEnv_.size(); ++i) {
      int after = b.state("copied");
      budget = padd(budget, copy_element(next, firstFree_ + static_cast<int>(i), foEnv_[i].second, after));
      next = after;
    }
    freeSlots_ = static_cast<int>(foEnv_.size());
    if (weightedTop)
      budget = padd(budget, weighted(f, next, accept_));
    else
      budget = padd(budget, boolean(f, next, accept_, zsink_));
    budget = padd(budget, pconst(4));
    return b.finish(init, origins);
  }

 private:
  // --- cost model ---------------------------------------------------------
  Poly scan() const { return padd(tapeBound_, pconst(2)); }
  Poly home_cost() const { return scan(); }
  Poly sweep() const { return padd(home_cost(), scan()); }
  Poly inc_cost(int k) const { return pmul(pconst(static_cast<std::uint64_t>(k) + 1), padd(sweep(), sweep())); }
  Poly lookup_cost(int k) const {
    Poly per = padd(padd(sweep(), inc_cost(k)), padd(scan(), pconst(4)));
    return padd(padd(sweep(), sweep()), padd(pmul(pow_n(k), per), padd(scan(), pconst(4))));
  }

  // --- routines -------------------------------------------------------------
  void home(int q) { b_->on(q, !first, q, same, -1); }

  void clear(int entry, unsigned bit, int next) {
    int c = b_->state("clear");
    home(entry);
    b_->on(entry, first, c, remove_mark(bit), 1);
    b_->on(c, inner, c, remove_mark(bit), 1);
    b_->on(c, endCell, next, same, 1);
  }

  void guess(int entry, unsigned bit, int next) {
    int at = b_->state("guess_at");
    int peek = b_->state("guess_peek");
    int last = b_->state("guess_last");
    int choose = b_->state("guess_choose");
    home(entry);
    b_->on(entry, first, peek, same, 1);
    b_->on(at, inner, peek, same, 1);
    b_->on(peek, endCell, last, same, -1);
    b_->on(peek, inner, choose, same, -1);
    b_->on(last, prefix, next, add_mark(bit), 1);
    b_->on(choose, prefix, next, add_mark(bit), 1);
    b_->on(choose, prefix, at, same, 1);
  }

  void reset(int entry, int k, int next) {
    int r = b_->state("reset");
    unsigned all = b_->all_digits();
    unsigned want = 0;
    for (int d = 1; d <= k; ++d) want |= 1U << b_->digit_bit(d);
    home(entry);
    b_->on(entry, first, r, [all, want](Sym s) {
      s.marks = (s.marks & ~all) | want;
      return s;
    }, 1);
    b_->on(r, inner, r, [all](Sym s) {
      s.marks &= ~all;
      return s;
    }, 1);
    b_->on(r, endCell, next, same, 1);
  }

  // Odometer over the prefix: digit 1 is most significant.
  void increment(int entry, int k, int ok, int overflow) {
    if (k == 0) {
      b_->on(entry, any, overflow, same, 1);
      return;
    }
    int e = entry;
    for (int j = k; j >= 1; --j) {
      unsigned d = b_->digit_bit(j);
      int find = b_->state("inc_find");
      int put = b_->state("inc_put");
      int carry = b_->state("inc_carry");
      home(e);
      b_->on(e, first && has(d), put, remove_mark(d), 1);
      b_->on(e, first && !has(d), find, same, 1);
      b_->on(find, inner && has(d), put, remove_mark(d), 1);
      b_->on(find, inner && !has(d), find, same, 1);
      b_->on(put, inner, ok, add_mark(d), 1);
      b_->on(put, endCell, carry, same, -1);
      int target = j > 1 ? b_->state("inc") : overflow;
      home(carry);
      b_->on(carry, first, target, add_mark(d), 1);
      e = target;
    }
  }

  void locate(int entry, const Locator& loc, int next) {
    int pre = b_->state("loc_prefix");
    home(entry);
    b_->on(entry, first, pre, same, 1);
    b_->on(pre, inner, pre, same, 1);
    if (!loc.workArea) {
      int l = b_->state("loc_block");
      b_->on(pre, endCell, l, same, 1);
      for (int j = 0; j <= loc.index; ++j) {
        b_->on(l, cell && !boundary, l, same, 1);
        if (j < loc.index) {
          int nl = b_->state("loc_block");
          b_->on(l, cell && boundary, nl, same, 1);
          l = nl;
        } else {
          b_->on(l, cell && boundary, next, add_cursor, 1);
        }
      }
      return;
    }
    int w = b_->state("loc_work");
    b_->on(pre, endCell, w, same, 1);
    for (int j = 0; j <= loc.index; ++j) {
      Pred passing = [](const Sym& s) { return s.zone == Zone::Cell || s.zone == Zone::Work; };
      b_->on(w, passing, w, same, 1);
      int nw = b_->state(j < loc.index ? "loc_work" : "loc_mark");
      b_->on(w, sep, nw, same, 1);
      w = nw;
    }
    b_->on(w, work, next, add_cursor, 1);
  }

  void compare(int entry, const std::vector<unsigned>& varBits, int eq, int neq) {
    std::vector<unsigned> digitBits;
    for (std::size_t i = 0; i < varBits.size(); ++i) digitBits.push_back(b_->digit_bit(static_cast<int>(i) + 1));
    Pred consistent = [varBits, digitBits](const Sym& s) {
      for (std::size_t i = 0; i < varBits.size(); ++i)
        if ((s.marks >> digitBits[i] & 1U) != (s.marks >> varBits[i] & 1U)) return false;
      return true;
    };
    int c = b_->state("cmp");
    home(entry);
    b_->on(entry, first && consistent, c, same, 1);
    b_->on(entry, first && !consistent, neq, same, 1);
    b_->on(c, inner && consistent, c, same, 1);
    b_->on(c, inner && !consistent, neq, same, 1);
    b_->on(c, endCell, eq, same, 1);
  }

  void move_cursor(int entry, int next) {
    int step = b_->state("cursor_step");
    b_->on(entry, !cursor && !blank, entry, same, 1);
    b_->on(entry, blank, zsink_, same, 1);
    b_->on(entry, cursor, step, remove_cursor, 1);
    Pred movable = [](const Sym& s) { return (s.zone == Zone::Cell || s.zone == Zone::Work) && !s.cursor; };
    b_->on(step, movable, next, add_cursor, 1);
    b_->on(step, !movable, zsink_, same, 1);
  }

  // Leaves the head in `found` scanning right towards the cursor cell, whose
  // transitions the caller adds.
  Poly lookup(int entry, const Locator& loc, const std::vector<unsigned>& varBits, int found) {
    int k = static_cast<int>(varBits.size());
    int rs = b_->state("lookup_reset");
    int cmp = b_->state("lookup_cmp");
    int neq = b_->state("lookup_next");
    int mv = b_->state("lookup_move");
    locate(entry, loc, rs);
    reset(rs, k, cmp);
    compare(cmp, varBits, found, neq);
    increment(neq, k, mv, zsink_);
    move_cursor(mv, cmp);
    b_->on(found, !cursor && !blank, found, same, 1);
    b_->on(found, blank, zsink_, same, 1);
    return lookup_cost(k);
  }

  void advance(int entry, unsigned bit, int again, int done) {
    int put = b_->state("adv_put");
    int sc = b_->state("adv_scan");
    home(entry);
    b_->on(entry, first && has(bit), put, remove_mark(bit), 1);
    b_->on(entry, first && !has(bit), sc, same, 1);
    b_->on(sc, inner && has(bit), put, remove_mark(bit), 1);
    b_->on(sc, inner && !has(bit), sc, same, 1);
    b_->on(put, inner, again, add_mark(bit), 1);
    b_->on(put, endCell, done, same, 1);
  }

  void go_end(int entry, int atBlank) {
    home(entry);
    b_->on(entry, first, atBlank, same, 1);
    b_->on(atBlank, !blank && !first, atBlank, same, 1);
  }

  Poly initialize(int init, int next) {
    Builder& b = *b_;
    int body = b.state("init_prefix");
    int blk = b.state("init_block");
    Pred raw0 = raw && base_is('0');
    Pred raw1 = raw && base_is('1');
    b.on(init, raw0, body, [](Sym) { return Sym{Zone::Prefix, true}; }, 1);
    b.on(init, !raw0, zsink_, same, 1);
    b.on(body, raw0, body, [](Sym) { return Sym{Zone::Prefix, false}; }, 1);
    b.on(body, raw1, blocks_.empty() ? next : blk, [](Sym) { return Sym{Zone::End}; }, 1);
    b.on(body, !raw0 && !raw1, zsink_, same, 1);
    Poly cost = padd(pow_n(1), pconst(4));
    for (std::size_t r = 0; r < blocks_.size(); ++r) {
      int k = blocks_[r].arity;
      int rs = b.state("init_reset");
      int inc = b.state("init_inc");
      int mv = b.state("init_move");
      int fin = b.state("init_close");
      int after = r + 1 < blocks_.size() ? b.state("init_block") : next;
      b.on(blk, raw, rs, [](Sym s) {
        s.boundary = true;
        s.cursor = true;
        return s;
      }, 1);
      b.on(blk, !raw, zsink_, same, 1);
      reset(rs, k, inc);
      increment(inc, k, mv, fin);
      move_cursor(mv, inc);
      b.on(fin, !cursor && !blank, fin, same, 1);
      b.on(fin, blank, zsink_, same, 1);
      b.on(fin, cursor, after, remove_cursor, 1);
      Poly per = padd(inc_cost(k), padd(scan(), pconst(2)));
      cost = padd(cost, padd(sweep(), padd(pmul(pow_n(k), per), padd(scan(), pconst(4)))));
      blk = after;
    }
    return cost;
  }

  Poly copy_element(int entry, int block, int slot, int next) {
    Builder& b = *b_;
    unsigned bit = b.slot_bit(slot);
    unsigned d1 = b.digit_bit(1);
    int rs = b.state("copy_reset");
    int cp = b.state("copy_read");
    int inc = b.state("copy_inc");
    int rm = b.state("copy_done");
    locate(entry, Locator{false, block}, rs);
    reset(rs, 1, cp);
    b.on(cp, !cursor && !blank, cp, same, 1);
    b.on(cp, blank, zsink_, same, 1);
    for (char bitValue : {'0', '1'}) {
      int nextCell = b.state("copy_shift");
      int back = b.state("copy_home");
      int scanDigit = b.state("copy_find");
      Rewrite mark = bitValue == '1' ? add_mark(bit) : Rewrite(same);
      b.on(cp, cursor && base_is(bitValue), nextCell, remove_cursor, 1);
      b.on(nextCell, cell && !cursor, back, add_cursor, 1);
      b.on(nextCell, !(cell && !cursor), back, same, 1);
      home(back);
      b.on(back, first && has(d1), inc, mark, 1);
      b.on(back, first && !has(d1), scanDigit, same, 1);
      b.on(scanDigit, inner && has(d1), inc, mark, 1);
      b.on(scanDigit, inner && !has(d1), scanDigit, same, 1);
    }
    b.on(cp, cursor && base_is('X'), zsink_, same, 1);
    increment(inc, 1, cp, rm);
    b.on(rm, !cursor && !blank, rm, same, 1);
    b.on(rm, blank, next, same, 1);
    b.on(rm, cursor, next, remove_cursor, 1);
    Poly per = padd(padd(scan(), sweep()), inc_cost(1));
    return padd(padd(sweep(), sweep()), padd(pmul(pow_n(1), per), padd(scan(), pconst(4))));
  }

  // --- variables -------------------------------------------------------------
  std::optional<int> element_slot(const std::string& v) const {
    for (auto it = foEnv_.rbegin(); it != foEnv_.rend(); ++it)
      if (it->first == v) return it->second;
    return std::nullopt;
  }

  std::optional<std::vector<unsigned>> arg_bits(const std::vector<std::string>& args) const {
    std::vector<unsigned> bits;
    for (const auto& a : args) {
      auto s = element_slot(a);
      if (!s) return std::nullopt;
      bits.push_back(b_->slot_bit(*s));
    }
    return bits;
  }

  int block_of(const std::string& name, bool weightedRel) const {
    std::size_t lo = weightedRel ? sig_.boolRelations.size() : 0;
    std::size_t hi = weightedRel ? lo + sig_.weightedRelations.size() : lo + sig_.boolRelations.size();
    for (std::size_t i = lo; i < hi; ++i)
      if (blocks_[i].name == name) return static_cast<int>(i);
    throw Error(ErrorCode::SignatureMismatch, "relation " + name + " is not in the signature");
  }

  std::optional<Locator> set_locator(const std::string& name) const {
    for (auto it = soEnv_.rbegin(); it != soEnv_.rend(); ++it)
      if (it->first == name) return Locator{true, it->second};
    for (std::size_t i = static_cast<std::size_t>(firstFree_); i < blocks_.size(); ++i)
      if (blocks_[i].name == name && !element_slot(name)) return Locator{false, static_cast<int>(i)};
    return std::nullopt;
  }

  int push_element(const std::string& v) {
    int slot = freeSlots_ + depth_++;
    foEnv_.emplace_back(v, slot);
    return slot;
  }
  void pop_element() {
    foEnv_.pop_back();
    --depth_;
  }

  // --- formulas ---------------------------------------------------------------
  Poly read_bit(int entry, const Locator& loc, const std::vector<unsigned>& bits, int yes, int no) {
    int found = b_->state("read_bit");
    Poly cost = lookup(entry, loc, bits, found);
    b_->on(found, cursor && base_is('1'), yes, remove_cursor, 1);
    b_->on(found, cursor && base_is('0'), no, remove_cursor, 1);
    b_->on(found, cursor && base_is('X'), zsink_, same, 1);
    return cost;
  }

  Poly boolean(const Formula& f, int entry, int yes, int no) {
    Builder& b = *b_;
    switch (f.kind) {
      case NodeKind::Leq: {
        auto sx = element_slot(f.args[0]);
        auto sy = element_slot(f.args[1]);
        if (!sx || !sy) {
          b.on(entry, any, no, same, 1);
          return pconst(1);
        }
        unsigned bx = b.slot_bit(*sx);
        unsigned by = b.slot_bit(*sy);
        int lq = b.state("leq");
        home(entry);
        auto rule = [&](int from, const Pred& where) {
          b.on(from, where && has(bx), yes, same, 1);
          b.on(from, where && !has(bx) && has(by), no, same, 1);
          b.on(from, where && !has(bx) && !has(by), lq, same, 1);
        };
        rule(entry, first);
        rule(lq, inner);
        b.on(lq, endCell, no, same, 1);
        return sweep();
      }
      case NodeKind::Rel: {
        auto bits = arg_bits(f.args);
        if (!bits) {
          b.on(entry, any, no, same, 1);
          return pconst(1);
        }
        return read_bit(entry, Locator{false, block_of(f.name, false)}, *bits, yes, no);
      }
      case NodeKind::SoAtom: {
        auto bits = arg_bits(f.args);
        auto loc = set_locator(f.name);
        if (!bits || !loc) {
          b.on(entry, any, no, same, 1);
          return pconst(1);
        }
        return read_bit(entry, *loc, *bits, yes, no);
      }
      case NodeKind::Not:
        return boolean(*f.children[0], entry, no, yes);
      case NodeKind::Or: {
        Poly cost = pconst(1);
        int e = entry;
        for (std::size_t i = 0; i < f.children.size(); ++i) {
          int fail = i + 1 < f.children.size() ? b.state("or_next") : no;
          cost = padd(cost, boolean(*f.children[i], e, yes, fail));
          e = fail;
        }
        return cost;
      }
      case NodeKind::Exists: {
        int slot = push_element(f.name);
        unsigned bit = b.slot_bit(slot);
        int start = b.state("exists_start");
        int body = b.state("exists_body");
        int adv = b.state("exists_next");
        clear(entry, bit, start);
        home(start);
        b.on(start, first, body, add_mark(bit), 1);
        Poly inner = boolean(*f.children[0], body, yes, adv);
        advance(adv, bit, body, no);
        pop_element();
        return padd(padd(sweep(), sweep()), pmul(pow_n(1), padd(inner, padd(sweep(), pconst(2)))));
      }
      default:
        throw Error(ErrorCode::UnsupportedConstruct, "unexpected node in a Boolean formula");
    }
  }

  Poly weighted(const Formula& f, int entry, int exit) {
    Builder& b = *b_;
    if (is_boolean(f)) return padd(boolean(f, entry, exit, zsink_), pconst(2));
    switch (f.kind) {
      case NodeKind::Const:
        b.weighted(entry, any, exit, same, 1, ConstWeight{*f.constant}, TransitionOrigin::Constant);
        return pconst(1);
      case NodeKind::WAtom: {
        auto bits = arg_bits(f.args);
        if (!bits) {
          b.on(entry, any, zsink_, same, 1);
          return pconst(2);
        }
        int found = b.state("weight_read");
        Poly cost = lookup(entry, Locator{false, block_of(f.name, true)}, *bits, found);
        b.weighted(found, cursor && base_is('X'), exit, remove_cursor, 1, CellWeight{},
                   TransitionOrigin::WeightedAtom);
        b.on(found, cursor && !base_is('X'), zsink_, same, 1);
        return padd(cost, pconst(1));
      }
      case NodeKind::Plus: {
        Poly cost = pconst(1);
        for (const auto& c : f.children) {
          int e = b.state("plus_branch");
          b.on(entry, any, e, same, 1);
          cost = padd(cost, weighted(*c, e, exit));
        }
        return cost;
      }
      case NodeKind::Times: {
        Poly cost;
        int e = entry;
        for (std::size_t i = 0; i < f.children.size(); ++i) {
          int next = i + 1 < f.children.size() ? b.state("times_next") : exit;
          cost = padd(cost, weighted(*f.children[i], e, next));
          e = next;
        }
        return cost;
      }
      case NodeKind::Sum: {
        int slot = push_element(f.name);
        unsigned bit = b.slot_bit(slot);
        int g = b.state("sum_guess");
        int body = b.state("sum_body");
        clear(entry, bit, g);
        guess(g, bit, body);
        Poly inner = weighted(*f.children[0], body, exit);
        pop_element();
        return padd(padd(sweep(), padd(sweep(), pmul(pconst(3), pow_n(1)))), inner);
      }
      case NodeKind::Prod: {
        int slot = push_element(f.name);
        unsigned bit = b.slot_bit(slot);
        int start = b.state("prod_start");
        int body = b.state("prod_body");
        int adv = b.state("prod_next");
        clear(entry, bit, start);
        home(start);
        b.on(start, first, body, add_mark(bit), 1);
        Poly inner = weighted(*f.children[0], body, adv);
        advance(adv, bit, body, exit);
        pop_element();
        return padd(padd(sweep(), sweep()), pmul(pow_n(1), padd(inner, padd(sweep(), pconst(2)))));
      }
      case NodeKind::SumSet: {
        int k = f.arity;
        int open = b.state("sumset_open");
        int rs = b.state("sumset_reset");
        int fill = b.state("sumset_fill");
        int fillEnd = b.state("sumset_fill_end");
        int inc = b.state("sumset_inc");
        int body = b.state("sumset_body");
        int close = b.state("sumset_close");
        int closeEnd = b.state("sumset_close_end");
        int erase = b.state("sumset_erase");
        go_end(entry, open);
        b.on(open, blank, rs, [](Sym) { return Sym{Zone::Sep}; }, 1);
        reset(rs, k, fill);
        go_end(fill, fillEnd);
        for (char bit : {'0', '1'})
          b.on(fillEnd, blank, inc, [bit](Sym) { return Sym{Zone::Work, false, 0, bit}; }, 1);
        increment(inc, k, fill, body);
        soEnv_.emplace_back(f.name, static_cast<int>(soEnv_.size()));
        Poly inner = weighted(*f.children[0], body, close);
        soEnv_.pop_back();
        go_end(close, closeEnd);
        b.on(closeEnd, blank, erase, same, -1);
        b.on(erase, work, erase, [](Sym) { return Sym{Zone::Blank}; }, -1);
        b.on(erase, sep, exit, [](Sym) { return Sym{Zone::Blank}; }, -1);
        Poly per = padd(sweep(), padd(inc_cost(k), pconst(2)));
        Poly cost = padd(padd(sweep(), sweep()), padd(pmul(pow_n(k), per), padd(inner, padd(sweep(), pow_n(k)))));
        return padd(cost, pconst(4));
      }
      default:
        throw Error(ErrorCode::UnsupportedConstruct, "unexpected node in a weighted formula");
    }
  }

  const Signature& sig_;
  std::vector<std::string> freeOrder_;
  std::vector<Block> blocks_;
  int firstFree_ = 0;
  int slots_ = 0;
  int digits_ = 0;
  int freeSlots_ = 0;
  int depth_ = 0;
  std::vector<std::pair<std::string, int>> foEnv_;
  std::vector<std::pair<std::string, int>> soEnv_;
  std::optional<Builder> b_;
  Poly tapeBound_;
  int accept_ = 0;
  int zsink_ = 0;
};

}  // namespace

std::vector<std::string> free_variable_order(const Formula& f) {
  auto fv = free_vars(f);
  std::vector<std::string> out(fv.firstOrder.begin(), fv.firstOrder.end());
  for (const auto& entry : fv.secondOrder) out.push_back(entry.first);
  return out;
}

Machine compile_bool(const Formula& beta, const Signature& sig, SemiringKind kind) {
  if (!is_boolean(beta)) throw Error(ErrorCode::UnsupportedConstruct, "expected a Boolean formula");
  Compiler c(beta, sig, kind, free_variable_order(beta));
  std::vector<TransitionOrigin> origins;
  Poly budget;
  return c.compile(beta, false, origins, budget);
}

CompilationReport compile_weighted(const FormulaPtr& phi, const Signature& sig, SemiringKind kind) {
  reject_unsupported(*phi);
  auto fragment = classify(*phi);
  if (fragment == Fragment::SO || fragment == Fragment::wSO)
    throw Error(ErrorCode::NotWESO, std::string("formula is ") + std::string(fragment_name(fragment)));
  CompilationReport report;
  report.formula = phi;
  report.freeOrder = free_variable_order(*phi);
  Compiler c(*phi, sig, kind, report.freeOrder);
  Poly budget;
  report.machine = c.compile(*phi, true, report.origins, budget);
  report.budgetHint = budget;
  report.stateCount = report.machine.states.size();
  report.transitionCount = report.machine.transitions.size();
  return report;
}

std::vector<FreeValue> free_values(const std::vector<std::string>& freeOrder, const Formula& f, const Assignment& rho) {
  auto fv = free_vars(f);
  std::vector<FreeValue> out;
  for (const auto& v : freeOrder) {
    if (fv.firstOrder.count(v)) {
      auto it = rho.firstOrder.find(v);
      if (it == rho.firstOrder.end()) throw Error(ErrorCode::SignatureMismatch, "no value for free variable " + v);
      out.emplace_back(it->second);
    } else {
      auto it = rho.secondOrder.find(v);
      if (it == rho.secondOrder.end()) throw Error(ErrorCode::SignatureMismatch, "no value for free set " + v);
      out.emplace_back(it->second);
    }
  }
  return out;
}

EquivalenceReport verify_equivalence(const CompilationReport& report, const OrderedStructure& a, const Signature& sig,
                                     const Assignment& rho) {
  EquivalenceReport out;
  out.formulaValue = eval_weighted(a, rho, *report.formula);
  auto word = encode_structure(a, sig, free_values(report.freeOrder, *report.formula, rho));
  out.budget = report.budget_for(a.size);
  out.machineValue = machine_value(report.machine, word, out.budget, &out.stats);
  out.pass = out.machineValue == out.formulaValue;
  return out;
}

}  // namespace semtm
