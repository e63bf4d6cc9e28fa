#pragma once

#include <random>
#include <string>
#include <vector>

#include "semtm/wqbf.hpp"

namespace semtm::testing {

// Random fully quantified formulas whose variables are each bound once.
class QbfSampler {
 public:
  QbfSampler(SemiringKind kind, std::mt19937_64& rng) : kind_(kind), rng_(rng) {}

  QbfPtr sample(int maxVars) {
    next_ = 0;
    limit_ = pick(1, maxVars);
    int prefix = pick(1, limit_);
    std::vector<std::string> bound;
    std::vector<std::pair<bool, std::string>> quants;
    for (int i = 0; i < prefix; ++i) {
      auto v = fresh();
      bound.push_back(v);
      quants.emplace_back(pick(0, 3) != 0, v);
    }
    auto body = matrix(bound, 6);
    for (auto it = quants.rbegin(); it != quants.rend(); ++it)
      body = it->first ? qbf::sum(it->second, body) : qbf::prod(it->second, body);
    return body;
  }

 private:
  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  std::string fresh() { return "v" + std::to_string(next_++); }

  Value small_constant() {
    if (kind_ == SemiringKind::Tropical) {
      int r = pick(0, 6);
      return r == 6 ? Value::tropical_infinity() : Value::tropical(Rational(r));
    }
    return Value::natural(pick(0, 3));
  }

  QbfPtr matrix(std::vector<std::string> bound, int depth) {
    int choice = depth <= 1 ? pick(0, 2) : pick(0, 6);
    if (choice == 0 || bound.empty()) return qbf::constant(small_constant());
    if (choice <= 2) {
      const auto& v = bound[pick(0, static_cast<int>(bound.size()) - 1)];
      return pick(0, 1) ? qbf::pos(v) : qbf::neg(v);
    }
    if (choice == 6 && next_ < limit_) {
      auto v = fresh();
      bound.push_back(v);
      auto body = matrix(bound, depth - 1);
      return pick(0, 1) ? qbf::sum(v, body) : qbf::prod(v, body);
    }
    std::vector<QbfPtr> kids;
    int n = pick(2, 3);
    for (int i = 0; i < n; ++i) kids.push_back(matrix(bound, depth - 1));
    return choice <= 4 ? qbf::times(std::move(kids)) : qbf::plus(std::move(kids));
  }

  SemiringKind kind_;
  std::mt19937_64& rng_;
  int next_ = 0;
  int limit_ = 0;
};

}  // namespace semtm::testing
