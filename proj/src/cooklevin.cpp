#include "semtm/cooklevin.hpp"

#include <algorithm>
#include <cstdlib>

#include "text_util.hpp"

namespace semtm {

std::uint64_t TimeSpaceBound::at(std::uint64_t n) const {
  std::uint64_t value = 0;
  std::uint64_t power = 1;
  for (auto c : coefficients) {
    value += c * power;
    power *= n;
  }
  return value;
}

TimeSpaceBound TimeSpaceBound::parse(const std::string& text) {
  TimeSpaceBound p;
  for (const auto& piece : text::split_list(text)) {
    if (piece.empty() || !std::all_of(piece.begin(), piece.end(), [](char c) { return c >= '0' && c <= '9'; }))
      throw Error(ErrorCode::SyntaxError, "bad polynomial coefficient '" + piece + "'");
    p.coefficients.push_back(std::stoull(piece));
  }
  if (p.coefficients.empty()) throw Error(ErrorCode::SyntaxError, "empty polynomial");
  return p;
}

std::string TimeSpaceBound::render() const {
  std::string out;
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(coefficients[i]);
  }
  return out;
}

std::string VarAtlas::tape(std::size_t cell, std::size_t symbol, std::size_t time) const {
  return "T_" + std::to_string(cell) + "_" + std::to_string(symbol) + "_" + std::to_string(time);
}

std::string VarAtlas::head(std::size_t cell, std::size_t time) const {
  return "H_" + std::to_string(cell) + "_" + std::to_string(time);
}

std::string VarAtlas::state(std::size_t q, std::size_t time) const {
  return "Q_" + std::to_string(q) + "_" + std::to_string(time);
}

std::string VarAtlas::constant_surrogate(std::size_t known) { return "r_" + std::to_string(known); }

std::string VarAtlas::letter_surrogate(std::size_t cell, std::size_t symbol) {
  return "in_" + std::to_string(cell) + "_" + std::to_string(symbol);
}

std::vector<std::string> VarAtlas::variables() const {
  std::vector<std::string> out;
  out.reserve(variable_count());
  for (std::size_t k = 0; k <= steps; ++k)
    for (std::size_t i = 0; i < cells; ++i)
      for (std::size_t j = 0; j < symbolCount; ++j) out.push_back(tape(i, j, k));
  for (std::size_t k = 0; k <= steps; ++k)
    for (std::size_t i = 0; i < cells; ++i) out.push_back(head(i, k));
  for (std::size_t k = 0; k <= steps; ++k)
    for (std::size_t q = 0; q < stateCount; ++q) out.push_back(state(q, k));
  return out;
}

std::size_t VarAtlas::variable_count() const {
  return (cells * symbolCount + cells + stateCount) * (steps + 1);
}

std::map<std::string, Value> VarAtlas::surrogate_values(const Machine& m, const WeightedWord& input) const {
  std::map<std::string, Value> out;
  for (std::size_t r = 0; r < m.knownValues.size(); ++r) out[constant_surrogate(r)] = m.knownValues[r];
  for (std::size_t i = 0; i < inputLength; ++i) {
    int present = -1;
    if (i < input.size()) {
      if (const auto* letter = std::get_if<Letter>(&input[i]))
        present = m.symbol_index(letter->symbol);
      else
        present = m.placeholder;
    }
    for (std::size_t j = 0; j < symbolCount; ++j)
      out[letter_surrogate(i, j)] =
          static_cast<int>(j) == present ? Value::one(m.semiring) : Value::zero(m.semiring);
  }
  return out;
}

LiteralInterp VarAtlas::interpretation(const std::vector<Configuration>& configs) const {
  LiteralInterp interp;
  for (std::size_t k = 0; k <= steps; ++k) {
    const Configuration& c = configs[std::min(k, configs.size() - 1)];
    for (std::size_t i = 0; i < cells; ++i) {
      for (std::size_t j = 0; j < symbolCount; ++j)
        interp = interp.with(tape(i, j, k), c.symbol_at(i) == static_cast<int>(j));
      interp = interp.with(head(i, k), c.head == i);
    }
    for (std::size_t q = 0; q < stateCount; ++q) interp = interp.with(state(q, k), c.state == static_cast<int>(q));
  }
  return interp;
}

namespace {

void require_encodable(const Machine& m) {
  for (const auto& t : m.transitions)
    if (std::holds_alternative<RecWeight>(t.weight))
      throw Error(ErrorCode::OracleTransitionsPresent, "limited recognition weights cannot be encoded");
  auto diags = validate_machine(m);
  if (!diags.empty()) throw Error(ErrorCode::InvalidMachine, diags.front().code + ": " + diags.front().message);
}

// Every letter pattern of the given length; annotation values do not
// influence control flow, so these inputs cover all runs.
void probe_bound(const Machine& m, std::size_t n, std::size_t budget) {
  std::vector<int> options = m.inputAlphabet;
  options.push_back(m.placeholder);
  std::size_t patterns = 1;
  for (std::size_t i = 0; i < n && patterns <= 4096; ++i) patterns *= options.size();
  patterns = std::min<std::size_t>(patterns, 4096);
  for (std::size_t code = 0; code < patterns; ++code) {
    WeightedWord word;
    std::size_t rest = code;
    for (std::size_t i = 0; i < n; ++i) {
      int sym = options[rest % options.size()];
      rest /= options.size();
      if (sym == m.placeholder)
        word.emplace_back(Value::one(m.semiring));
      else
        word.emplace_back(Letter{m.symbols[sym]});
    }
    try {
      machine_value(m, word, budget);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::BudgetExceeded) throw;
      throw Error(ErrorCode::BoundTooSmall, "input '" + render_word(word) + "' needs more than " +
                                                std::to_string(budget) + " transitions");
    }
  }
}

class Encoder {
 public:
  Encoder(const Machine& m, VarAtlas atlas, const CookLevinOptions& options)
      : m_(m), a_(std::move(atlas)), options_(options) {}

  QbfPtr matrix() {
    std::size_t n = a_.inputLength;
    std::size_t p = a_.steps;
    if (use(1)) {
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<QbfPtr> options;
        std::vector<int> letters = m_.inputAlphabet;
        letters.push_back(m_.placeholder);
        for (int j : letters)
          options.push_back(qbf::times({T(i, j, 0), qbf::named_surrogate(VarAtlas::letter_surrogate(i, j))}));
        add(qbf::plus(std::move(options)));
      }
    }
    if (use(2))
      for (std::size_t i = n; i < a_.cells; ++i) add(T(i, m_.blank, 0));
    if (use(3)) add(Q(m_.initialState, 0));
    if (use(4)) add(H(0, 0));
    for (std::size_t k = 0; k <= p; ++k) {
      for (std::size_t i = 0; i < a_.cells; ++i) {
        if (use(5)) {
          for (std::size_t j = 0; j < a_.symbolCount; ++j)
            for (std::size_t j2 = j + 1; j2 < a_.symbolCount; ++j2)
              add(qbf::plus({nT(i, j, k), qbf::times({T(i, j, k), nT(i, j2, k)})}));
        }
        if (use(6)) {
          std::vector<QbfPtr> some;
          for (std::size_t j = 0; j < a_.symbolCount; ++j) some.push_back(T(i, j, k));
          add(qbf::plus(std::move(some)));
        }
        if (use(7) && k < p) {
          for (std::size_t j = 0; j < a_.symbolCount; ++j)
            for (std::size_t j2 = 0; j2 < a_.symbolCount; ++j2) {
              if (j == j2) continue;
              add(qbf::plus({nT(i, j, k), qbf::times({T(i, j, k), nT(i, j2, k + 1)}),
                             qbf::times({T(i, j, k), T(i, j2, k + 1), H(i, k)})}));
            }
        }
      }
      if (use(8)) {
        for (std::size_t q = 0; q < a_.stateCount; ++q)
          for (std::size_t q2 = q + 1; q2 < a_.stateCount; ++q2)
            add(qbf::plus({nQ(q, k), qbf::times({Q(q, k), nQ(q2, k)})}));
      }
      if (use(9)) {
        for (std::size_t i = 0; i < a_.cells; ++i)
          for (std::size_t i2 = i + 1; i2 < a_.cells; ++i2)
            add(qbf::plus({nH(i, k), qbf::times({H(i, k), nH(i2, k)})}));
      }
      if (k < p) transitions(k);
    }
    if (factors_.empty()) return qbf::constant(Value::one(m_.semiring));
    return qbf::times(std::move(factors_));
  }

 private:
  bool use(int subformula) const { return !options_.omit.count(subformula); }
  void add(QbfPtr f) { factors_.push_back(std::move(f)); }

  QbfPtr T(std::size_t i, std::size_t j, std::size_t k) const { return qbf::pos(a_.tape(i, j, k)); }
  QbfPtr nT(std::size_t i, std::size_t j, std::size_t k) const { return qbf::neg(a_.tape(i, j, k)); }
  QbfPtr H(std::size_t i, std::size_t k) const { return qbf::pos(a_.head(i, k)); }
  QbfPtr nH(std::size_t i, std::size_t k) const { return qbf::neg(a_.head(i, k)); }
  QbfPtr Q(std::size_t q, std::size_t k) const { return qbf::pos(a_.state(q, k)); }
  QbfPtr nQ(std::size_t q, std::size_t k) const { return qbf::neg(a_.state(q, k)); }

  QbfPtr weight_surrogate(const Transition& t, std::size_t cell) const {
    if (const auto* c = std::get_if<ConstWeight>(&t.weight)) {
      auto it = std::find(m_.knownValues.begin(), m_.knownValues.end(), c->value);
      return qbf::named_surrogate(VarAtlas::constant_surrogate(it - m_.knownValues.begin()));
    }
    return qbf::input_surrogate(cell);
  }

  // Constant and cell weights of one (state, symbol) pair share a single
  // factor so that a step is charged exactly once.
  void transitions(std::size_t k) {
    for (std::size_t q = 0; q < a_.stateCount; ++q) {
      for (std::size_t s = 0; s < a_.symbolCount; ++s) {
        std::vector<const Transition*> moves;
        for (const auto& t : m_.transitions)
          if (t.from == static_cast<int>(q) && t.read == static_cast<int>(s)) moves.push_back(&t);
        bool halting = moves.empty();
        if (halting ? !use(12) : !use(10) && !use(11)) continue;
        for (std::size_t i = 0; i < a_.cells; ++i) {
          std::vector<QbfPtr> next;
          if (halting) {
            next.push_back(qbf::times({H(i, k + 1), Q(q, k + 1), T(i, s, k + 1)}));
          } else {
            for (const auto* t : moves) {
              bool constant = std::holds_alternative<ConstWeight>(t->weight);
              if (!use(constant ? 10 : 11)) continue;
              auto target = static_cast<std::size_t>(std::abs(static_cast<long>(i) + t->direction));
              if (target >= a_.cells) continue;
              next.push_back(qbf::times({H(target, k + 1), Q(t->to, k + 1), T(i, t->write, k + 1),
                                         weight_surrogate(*t, i)}));
            }
          }
          QbfPtr step = next.empty() ? qbf::constant(Value::zero(m_.semiring)) : qbf::plus(std::move(next));
          add(qbf::plus({nH(i, k), qbf::times({H(i, k), nQ(q, k)}), qbf::times({H(i, k), Q(q, k), nT(i, s, k)}),
                         qbf::times({H(i, k), Q(q, k), T(i, s, k), step})}));
        }
      }
    }
  }

  const Machine& m_;
  VarAtlas a_;
  const CookLevinOptions& options_;
  std::vector<QbfPtr> factors_;
};

}  // namespace

WqbfEncoding machine_to_wqbf(const Machine& m, std::size_t inputLength, const TimeSpaceBound& bound,
                             const CookLevinOptions& options) {
  require_encodable(m);
  std::size_t p = bound.at(inputLength);
  if (options.probeBound) probe_bound(m, inputLength, p);

  VarAtlas atlas;
  atlas.inputLength = inputLength;
  atlas.cells = std::max(p + 1, inputLength);
  atlas.steps = p;
  atlas.symbolCount = m.symbols.size();
  atlas.stateCount = m.states.size();

  WqbfEncoding enc;
  enc.matrix = Encoder(m, atlas, options).matrix();
  QbfPtr f = enc.matrix;
  auto vars = atlas.variables();
  for (auto it = vars.rbegin(); it != vars.rend(); ++it) f = qbf::sum(*it, f);
  enc.formula = f;
  enc.atlas = std::move(atlas);
  return enc;
}

CrosscheckReport crosscheck_wqbf(const Machine& m, const WeightedWord& input, const TimeSpaceBound& bound,
                                 const CookLevinOptions& options) {
  CookLevinOptions opts = options;
  opts.probeBound = false;
  auto enc = machine_to_wqbf(m, input.size(), bound, opts);
  CrosscheckReport report;
  report.steps = enc.atlas.steps;
  report.variables = enc.atlas.variable_count();
  try {
    report.simulated = machine_value(m, input, enc.atlas.steps);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::BudgetExceeded) throw;
    throw Error(ErrorCode::BoundTooSmall, "input needs more than " + std::to_string(enc.atlas.steps) + " transitions");
  }
  auto concrete = substitute_surrogates(enc.formula, input, enc.atlas.surrogate_values(m, input), m.semiring);
  QbfStats stats;
  report.encoded = eval_wqbf_pruned(*concrete, m.semiring, &stats);
  report.interpretations = stats.interpretations;
  report.pass = report.encoded == report.simulated;
  return report;
}

}  // namespace semtm
