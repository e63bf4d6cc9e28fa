#pragma once

// Reference semantics written straight from the inductive clauses, without
// slots, masks or short-circuits. Only for small structures.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "semtm/wlogic.hpp"

namespace semtm::testing {

class NaiveLogic {
 public:
  explicit NaiveLogic(const OrderedStructure& a) : a_(a) {}

  Value eval(const Formula& f, std::map<std::string, int> fo, std::map<std::string, std::set<Tuple>> so) const {
    fo_ = std::move(fo);
    so_ = std::move(so);
    return weighted(f);
  }

  bool holds(const Formula& f, std::map<std::string, int> fo, std::map<std::string, std::set<Tuple>> so) const {
    fo_ = std::move(fo);
    so_ = std::move(so);
    return sat(f);
  }

 private:
  std::vector<Tuple> all_tuples(int k) const {
    std::vector<Tuple> out{Tuple{}};
    for (int i = 0; i < k; ++i) {
      std::vector<Tuple> next;
      for (const auto& t : out)
        for (int e = 0; e < a_.size; ++e) {
          Tuple u = t;
          u.push_back(e);
          next.push_back(u);
        }
      out = next;
    }
    return out;
  }

  std::vector<std::set<Tuple>> all_subsets(int k) const {
    std::vector<std::set<Tuple>> out{{}};
    for (const auto& t : all_tuples(k)) {
      std::vector<std::set<Tuple>> next = out;
      for (auto s : out) {
        s.insert(t);
        next.push_back(s);
      }
      out = next;
    }
    return out;
  }

  bool lookup(const std::vector<std::string>& args, Tuple& t) const {
    t.clear();
    for (const auto& v : args) {
      auto it = fo_.find(v);
      if (it == fo_.end()) return false;
      t.push_back(it->second);
    }
    return true;
  }

  bool sat(const Formula& f) const {
    Tuple t;
    switch (f.kind) {
      case NodeKind::Leq: return lookup(f.args, t) && t[0] <= t[1];
      case NodeKind::Rel: return lookup(f.args, t) && a_.boolRels.at(f.name).count(t) > 0;
      case NodeKind::SoAtom: return lookup(f.args, t) && so_.count(f.name) && so_.at(f.name).count(t) > 0;
      case NodeKind::Not: return !sat(*f.children[0]);
      case NodeKind::Or: {
        bool any = false;
        for (const auto& c : f.children) any = sat(*c) || any;
        return any;
      }
      case NodeKind::Exists: {
        auto saved = fo_;
        bool any = false;
        for (int e = 0; e < a_.size; ++e) {
          fo_[f.name] = e;
          any = sat(*f.children[0]) || any;
        }
        fo_ = saved;
        return any;
      }
      case NodeKind::ExistsSet: {
        auto saved = so_;
        bool any = false;
        for (const auto& s : all_subsets(f.arity)) {
          so_[f.name] = s;
          any = sat(*f.children[0]) || any;
        }
        so_ = saved;
        return any;
      }
      default: return false;
    }
  }

  Value weighted(const Formula& f) const {
    const auto kind = a_.semiring;
    if (is_boolean(f)) return sat(f) ? Value::one(kind) : Value::zero(kind);
    Tuple t;
    switch (f.kind) {
      case NodeKind::Const: return *f.constant;
      case NodeKind::WAtom: return lookup(f.args, t) ? a_.weightedRels.at(f.name).at(t) : Value::zero(kind);
      case NodeKind::Plus:
      case NodeKind::Times: {
        Value acc = f.kind == NodeKind::Plus ? Value::zero(kind) : Value::one(kind);
        for (const auto& c : f.children) acc = f.kind == NodeKind::Plus ? add(acc, weighted(*c)) : mul(acc, weighted(*c));
        return acc;
      }
      case NodeKind::Sum:
      case NodeKind::Prod: {
        auto saved = fo_;
        Value acc = f.kind == NodeKind::Sum ? Value::zero(kind) : Value::one(kind);
        for (int e = 0; e < a_.size; ++e) {
          fo_[f.name] = e;
          Value v = weighted(*f.children[0]);
          acc = f.kind == NodeKind::Sum ? add(acc, v) : mul(acc, v);
        }
        fo_ = saved;
        return acc;
      }
      case NodeKind::SumSet:
      case NodeKind::ProdSet: {
        auto saved = so_;
        Value acc = f.kind == NodeKind::SumSet ? Value::zero(kind) : Value::one(kind);
        for (const auto& s : all_subsets(f.arity)) {
          so_[f.name] = s;
          Value v = weighted(*f.children[0]);
          acc = f.kind == NodeKind::SumSet ? add(acc, v) : mul(acc, v);
        }
        so_ = saved;
        return acc;
      }
      default: return Value::zero(kind);
    }
  }

  const OrderedStructure& a_;
  mutable std::map<std::string, int> fo_;
  mutable std::map<std::string, std::set<Tuple>> so_;
};

}  // namespace semtm::testing
