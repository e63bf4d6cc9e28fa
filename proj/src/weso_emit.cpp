#include <algorithm>
#include <set>

#include "semtm/cooklevin.hpp"

namespace semtm {

namespace {

using Vars = std::vector<std::string>;
using namespace build;

// One step shape; padding steps keep the head in place and have weight one.
struct StepShape {
  int from = 0;
  int read = 0;
  int to = 0;
  int write = 0;
  int direction = 0;
};

class WesoEmitter {
 public:
  WesoEmitter(const Machine& m, const Signature& sig, int k) : m_(m), sig_(sig), k_(k) {
    std::set<std::string> taken;
    for (const auto& r : sig.boolRelations) taken.insert(r.name);
    for (const auto& r : sig.weightedRelations) taken.insert(r.name);
    auto unique = [&](std::string name) {
      while (taken.count(name)) name += "_";
      taken.insert(name);
      return name;
    };
    for (int i = 0; i < 4; ++i) tape_.push_back(unique("T" + std::to_string(i)));
    for (std::size_t q = 0; q < m.states.size(); ++q) head_.push_back(unique("H" + std::to_string(q)));
    for (std::size_t s = 0; s < m.symbols.size(); ++s) {
      const auto& name = m.symbols[s];
      int code = static_cast<int>(s) == m.placeholder ? 2 : static_cast<int>(s) == m.blank ? 3 : name == "0" ? 0 : 1;
      symbolCode_.push_back(code);
    }
  }

  FormulaPtr emit() {
    Vars t = fresh(k_);
    FormulaPtr inner = times({tape_constraints(), head_sums(times({head_constraints(), prod_all(t, chi(t))}))});
    for (int i = 3; i >= 0; --i) inner = sum_set(tape_[i], 2 * k_, inner);
    return inner;
  }

 private:
  Vars fresh(int count) {
    Vars out;
    for (int i = 0; i < count; ++i) out.push_back("v" + std::to_string(++counter_));
    return out;
  }

  static FormulaPtr exists_all(const Vars& vs, FormulaPtr body) {
    for (auto it = vs.rbegin(); it != vs.rend(); ++it) body = exists(*it, body);
    return body;
  }
  static FormulaPtr forall_all(const Vars& vs, FormulaPtr body) {
    for (auto it = vs.rbegin(); it != vs.rend(); ++it) body = forall(*it, body);
    return body;
  }
  static FormulaPtr sum_all(const Vars& vs, FormulaPtr body) {
    for (auto it = vs.rbegin(); it != vs.rend(); ++it) body = sum(*it, body);
    return body;
  }
  static FormulaPtr prod_all(const Vars& vs, FormulaPtr body) {
    for (auto it = vs.rbegin(); it != vs.rend(); ++it) body = prod(*it, body);
    return body;
  }
  static Vars concat(const Vars& a, const Vars& b) {
    Vars out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
  }

  // --- elements and tuples (component 0 is the most significant) ----------
  FormulaPtr is_bottom(const std::string& x) {
    auto z = fresh(1)[0];
    return forall(z, leq(x, z));
  }
  FormulaPtr is_top(const std::string& x) {
    auto z = fresh(1)[0];
    return forall(z, leq(z, x));
  }
  FormulaPtr succ(const std::string& x, const std::string& y) {
    auto z = fresh(1)[0];
    return land({lt(x, y), forall(z, implies(lt(x, z), leq(y, z)))});
  }
  FormulaPtr all_bottom(const Vars& xs) {
    std::vector<FormulaPtr> parts;
    for (const auto& x : xs) parts.push_back(is_bottom(x));
    return land(parts);
  }
  FormulaPtr all_top(const Vars& xs) {
    std::vector<FormulaPtr> parts;
    for (const auto& x : xs) parts.push_back(is_top(x));
    return land(parts);
  }
  static FormulaPtr tuple_eq(const Vars& xs, const Vars& ys) {
    std::vector<FormulaPtr> parts;
    for (std::size_t i = 0; i < xs.size(); ++i) parts.push_back(eq(xs[i], ys[i]));
    return land(parts);
  }
  static FormulaPtr tuple_lt(const Vars& xs, const Vars& ys) {
    std::vector<FormulaPtr> cases;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      std::vector<FormulaPtr> parts;
      for (std::size_t j = 0; j < i; ++j) parts.push_back(eq(xs[j], ys[j]));
      parts.push_back(lt(xs[i], ys[i]));
      cases.push_back(land(parts));
    }
    return lor(cases);
  }
  static FormulaPtr tuple_leq(const Vars& xs, const Vars& ys) { return lor({tuple_lt(xs, ys), tuple_eq(xs, ys)}); }

  // ys = xs + 1
  FormulaPtr tuple_succ(const Vars& xs, const Vars& ys) {
    std::vector<FormulaPtr> cases;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      std::vector<FormulaPtr> parts;
      for (std::size_t j = 0; j < i; ++j) parts.push_back(eq(xs[j], ys[j]));
      parts.push_back(succ(xs[i], ys[i]));
      for (std::size_t j = i + 1; j < xs.size(); ++j) {
        parts.push_back(is_top(xs[j]));
        parts.push_back(is_bottom(ys[j]));
      }
      cases.push_back(land(parts));
    }
    return lor(cases);
  }

  // q = p + x, advancing p by the number of r-tuples up to and including x.
  FormulaPtr tuple_add(const Vars& q, const Vars& p, const Vars& x) {
    std::string rel = "A" + std::to_string(++counter_);
    Vars p1 = fresh(k_), p2 = fresh(k_);
    Vars x1 = fresh(static_cast<int>(x.size())), x2 = fresh(static_cast<int>(x.size()));
    auto in_range = [&](const Vars& v) { return land({tuple_leq(p, v), tuple_lt(v, q)}); };
    auto covers = forall_all(p1, implies(in_range(p1), exists_all(x1, land({tuple_leq(x1, x), so_atom(rel, concat(p1, x1))}))));
    auto onto = forall_all(x1, implies(tuple_leq(x1, x), exists_all(p1, land({in_range(p1), so_atom(rel, concat(p1, x1))}))));
    auto matching = forall_all(concat(concat(p1, p2), concat(x1, x2)),
                               implies(land({so_atom(rel, concat(p1, x1)), so_atom(rel, concat(p2, x2))}),
                                       iff(tuple_eq(p1, p2), tuple_eq(x1, x2))));
    return exists_set(rel, k_ + static_cast<int>(x.size()), land({covers, onto, matching}));
  }

  // pos = bottom^k + top^{r_1} + ... + top^{r_m} (+ x)
  FormulaPtr position(const Vars& pos, const std::vector<int>& topArities, const Vars& x = {}) {
    Vars current = fresh(k_);
    Vars bound = current;
    std::vector<FormulaPtr> parts{all_bottom(current)};
    auto step = [&](const Vars& addend) {
      Vars next = fresh(k_);
      bound = concat(bound, next);
      parts.push_back(tuple_add(next, current, addend));
      current = next;
    };
    for (int r : topArities) {
      Vars top = fresh(r);
      bound = concat(bound, top);
      parts.push_back(all_top(top));
      step(top);
    }
    if (!x.empty()) step(x);
    parts.push_back(tuple_eq(pos, current));
    return exists_all(bound, land(parts));
  }

  // p < offset; true when the offset lies past the last tuple.
  FormulaPtr before(const Vars& p, const std::vector<int>& offset) {
    Vars c = fresh(k_);
    return neg(exists_all(c, land({position(c, offset), tuple_leq(c, p)})));
  }
  // offset < p
  FormulaPtr after(const Vars& p, const std::vector<int>& offset) {
    Vars c = fresh(k_);
    return exists_all(c, land({position(c, offset), tuple_lt(c, p)}));
  }

  // --- configurations --------------------------------------------------------
  FormulaPtr tape(int code, const Vars& p, const Vars& t) { return so_atom(tape_[code], concat(p, t)); }
  FormulaPtr head(int state, const Vars& p, const Vars& t) { return so_atom(head_[state], concat(p, t)); }
  FormulaPtr head_any(const Vars& p, const Vars& t) {
    std::vector<FormulaPtr> parts;
    for (std::size_t q = 0; q < head_.size(); ++q) parts.push_back(head(static_cast<int>(q), p, t));
    return lor(parts);
  }

  std::vector<int> relation_offset(std::size_t boolCount, std::size_t weightedCount) const {
    std::vector<int> offset{1};
    for (std::size_t i = 0; i < boolCount; ++i) offset.push_back(sig_.boolRelations[i].arity);
    for (std::size_t i = 0; i < weightedCount; ++i) offset.push_back(sig_.weightedRelations[i].arity);
    return offset;
  }

  FormulaPtr tape_constraints() {
    Vars p = fresh(k_), t = fresh(k_);
    std::vector<FormulaPtr> exactlyOne;
    for (int i = 0; i < 4; ++i) {
      std::vector<FormulaPtr> parts{tape(i, p, t)};
      for (int j = 0; j < 4; ++j)
        if (j != i) parts.push_back(neg(tape(j, p, t)));
      exactlyOne.push_back(land(parts));
    }
    std::vector<FormulaPtr> conjuncts{forall_all(concat(p, t), lor(exactlyOne))};

    Vars b = fresh(k_);
    std::vector<FormulaPtr> initial;
    Vars c = fresh(k_);
    initial.push_back(forall_all(c, implies(before(c, {1}), tape(0, c, b))));
    Vars d = fresh(k_);
    initial.push_back(forall_all(d, implies(position(d, {1}), tape(1, d, b))));
    for (std::size_t i = 0; i < sig_.boolRelations.size(); ++i) {
      const auto& r = sig_.boolRelations[i];
      Vars x = fresh(r.arity), q = fresh(k_);
      auto atom = rel(r.name, x);
      initial.push_back(forall_all(concat(x, q), implies(position(q, relation_offset(i, 0), x),
                                                         land({implies(atom, tape(1, q, b)),
                                                               implies(neg(atom), tape(0, q, b))}))));
    }
    auto weightStart = relation_offset(sig_.boolRelations.size(), 0);
    auto weightEnd = relation_offset(sig_.boolRelations.size(), sig_.weightedRelations.size());
    Vars w = fresh(k_);
    initial.push_back(
        forall_all(w, implies(land({after(w, weightStart), neg(after(w, weightEnd))}), tape(2, w, b))));
    Vars e = fresh(k_);
    initial.push_back(forall_all(e, implies(after(e, weightEnd), tape(3, e, b))));
    conjuncts.push_back(exists_all(b, land({all_bottom(b), land(initial)})));
    return land(conjuncts);
  }

  FormulaPtr head_sums(FormulaPtr body) {
    for (auto it = head_.rbegin(); it != head_.rend(); ++it) body = sum_set(*it, 2 * k_, body);
    return body;
  }

  FormulaPtr theta(const StepShape& s, const Vars& t) {
    Vars p = fresh(k_), q = fresh(k_), next = fresh(k_), other = fresh(k_);
    FormulaPtr move;
    if (s.direction > 0)
      move = tuple_succ(p, q);
    else if (s.direction < 0)
      move = lor({tuple_succ(q, p), land({all_bottom(p), tuple_succ(p, q)})});
    else
      move = tuple_eq(p, q);
    std::vector<FormulaPtr> same;
    for (int i = 0; i < 4; ++i) same.push_back(iff(tape(i, other, t), tape(i, other, next)));
    auto frame = forall_all(other, implies(neg(tuple_eq(other, p)), land(same)));
    return exists_all(concat(concat(p, q), next),
                      land({move, tuple_succ(t, next), head(s.from, p, t), tape(symbolCode_[s.read], p, t),
                            head(s.to, q, next), tape(symbolCode_[s.write], p, next), frame}));
  }

  std::vector<StepShape> padding() const {
    std::vector<StepShape> out;
    for (std::size_t q = 0; q < m_.states.size(); ++q) {
      for (std::size_t a = 0; a < m_.symbols.size(); ++a) {
        bool moves = std::any_of(m_.transitions.begin(), m_.transitions.end(), [&](const Transition& t) {
          return t.from == static_cast<int>(q) && t.read == static_cast<int>(a);
        });
        if (!moves) out.push_back({static_cast<int>(q), static_cast<int>(a), static_cast<int>(q), static_cast<int>(a), 0});
      }
    }
    return out;
  }

  static StepShape shape_of(const Transition& t) { return {t.from, t.read, t.to, t.write, t.direction}; }

  FormulaPtr head_constraints() {
    Vars b = fresh(k_);
    std::vector<FormulaPtr> conjuncts{exists_all(b, land({all_bottom(b), head(m_.initialState, b, b)}))};

    Vars t = fresh(k_), p = fresh(k_), p2 = fresh(k_);
    conjuncts.push_back(forall_all(
        t, exists_all(p, land({head_any(p, t), forall_all(p2, implies(head_any(p2, t), tuple_eq(p2, p)))}))));

    Vars p3 = fresh(k_), t3 = fresh(k_);
    std::vector<FormulaPtr> oneState;
    for (std::size_t q = 0; q < head_.size(); ++q)
      for (std::size_t r = q + 1; r < head_.size(); ++r)
        oneState.push_back(lor({neg(head(static_cast<int>(q), p3, t3)), neg(head(static_cast<int>(r), p3, t3))}));
    conjuncts.push_back(forall_all(concat(p3, t3), land(oneState)));

    Vars t4 = fresh(k_);
    std::vector<FormulaPtr> steps;
    for (const auto& tr : m_.transitions) steps.push_back(theta(shape_of(tr), t4));
    for (const auto& pad : padding()) steps.push_back(theta(pad, t4));
    steps.push_back(all_top(t4));
    conjuncts.push_back(forall_all(t4, lor(steps)));
    return land(conjuncts);
  }

  FormulaPtr cell_weight(const Vars& t) {
    if (sig_.weightedRelations.empty()) return constant(Value::zero(m_.semiring));
    Vars p = fresh(k_);
    std::vector<FormulaPtr> reads;
    for (std::size_t i = 0; i < sig_.weightedRelations.size(); ++i) {
      const auto& r = sig_.weightedRelations[i];
      Vars x = fresh(r.arity);
      reads.push_back(sum_all(x, times({watom(r.name, x), position(p, relation_offset(sig_.boolRelations.size(), i), x)})));
    }
    return sum_all(p, times({head_any(p, t), plus(reads)}));
  }

  FormulaPtr chi(const Vars& t) {
    std::vector<FormulaPtr> terms{all_top(t)};
    for (const auto& tr : m_.transitions) {
      if (const auto* c = std::get_if<ConstWeight>(&tr.weight))
        terms.push_back(times({constant(c->value), theta(shape_of(tr), t)}));
    }
    for (const auto& pad : padding()) terms.push_back(theta(pad, t));
    for (const auto& tr : m_.transitions) {
      if (std::holds_alternative<CellWeight>(tr.weight)) terms.push_back(times({cell_weight(t), theta(shape_of(tr), t)}));
    }
    return plus(terms);
  }

  const Machine& m_;
  const Signature& sig_;
  int k_;
  int counter_ = 0;
  Vars tape_;
  Vars head_;
  std::vector<int> symbolCode_;
};

}  // namespace

FormulaPtr machine_to_weso(const Machine& m, const Signature& sig, int k) {
  for (const auto& t : m.transitions)
    if (std::holds_alternative<RecWeight>(t.weight))
      throw Error(ErrorCode::OracleTransitionsPresent, "recognition weights cannot be expressed");
  int maxArity = 0;
  for (const auto& r : sig.boolRelations) maxArity = std::max(maxArity, r.arity);
  for (const auto& r : sig.weightedRelations) maxArity = std::max(maxArity, r.arity);
  if (k < 1 || k <= maxArity)
    throw Error(ErrorCode::ArityTooSmall, "k must exceed every relation arity (" + std::to_string(maxArity) + ")");
  std::set<std::string> letters;
  for (std::size_t s = 0; s < m.symbols.size(); ++s)
    if (static_cast<int>(s) != m.placeholder && static_cast<int>(s) != m.blank) letters.insert(m.symbols[s]);
  if (m.symbols.size() != 4 || letters != std::set<std::string>{"0", "1"})
    throw Error(ErrorCode::AlphabetMismatch, "tape alphabet must be 0, 1, placeholder and blank");
  return WesoEmitter(m, sig, k).emit();
}

}  // namespace semtm
