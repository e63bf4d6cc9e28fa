#include "semtm/machine.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "text_util.hpp"

namespace semtm {

int Machine::state_index(std::string_view name) const {
  for (std::size_t i = 0; i < states.size(); ++i)
    if (states[i] == name) return static_cast<int>(i);
  return -1;
}

int Machine::symbol_index(std::string_view name) const {
  for (std::size_t i = 0; i < symbols.size(); ++i)
    if (symbols[i] == name) return static_cast<int>(i);
  return -1;
}

bool Machine::is_input_letter(int symbol) const {
  return std::find(inputAlphabet.begin(), inputAlphabet.end(), symbol) != inputAlphabet.end();
}

namespace {

bool in_range(int i, std::size_t n) { return i >= 0 && static_cast<std::size_t>(i) < n; }

std::string name_or_index(const std::vector<std::string>& names, int i) {
  return in_range(i, names.size()) ? names[i] : "<" + std::to_string(i) + ">";
}

std::string render_weight(const WeightSpec& w) {
  if (const auto* c = std::get_if<ConstWeight>(&w)) return "#" + render_hash_literal(c->value);
  if (std::holds_alternative<CellWeight>(w)) return "@cell";
  const auto& r = std::get<RecWeight>(w);
  std::string out = "rec{";
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    if (i) out += ",";
    out += "#" + render_hash_literal(r.values[i]);
  }
  return out + "}";
}

bool valid_name(std::string_view s) {
  if (s.empty() || s == "->") return false;
  return std::none_of(s.begin(), s.end(), [](char c) {
    return text::is_space(c) || c == ',' || c == '#' || c == '@' || c == '{' || c == '}' || c == ':';
  });
}

std::vector<Value> parse_value_list(std::string_view s, SemiringKind kind) {
  std::vector<Value> out;
  std::size_t pos = 0;
  while (true) {
    while (pos < s.size() && (text::is_space(s[pos]) || s[pos] == ',')) ++pos;
    if (pos >= s.size()) break;
    if (s[pos] != '#') throw Error(ErrorCode::SyntaxError, "expected '#<literal>' in value list: " + std::string(s));
    out.push_back(parse_value(text::read_hash_literal(s, pos, ",}"), kind));
  }
  return out;
}

WeightSpec parse_weight(std::string_view s, SemiringKind kind) {
  s = text::trim(s);
  if (s == "@cell") return CellWeight{};
  if (s.starts_with("rec{")) {
    if (!s.ends_with("}")) throw Error(ErrorCode::SyntaxError, "unterminated rec{...}");
    return RecWeight{parse_value_list(s.substr(4, s.size() - 5), kind)};
  }
  if (s.starts_with("#")) {
    std::size_t pos = 0;
    auto lit = text::read_hash_literal(s, pos, "");
    if (pos != s.size()) throw Error(ErrorCode::SyntaxError, "trailing text after weight '" + std::string(s) + "'");
    return ConstWeight{parse_value(lit, kind)};
  }
  throw Error(ErrorCode::SyntaxError, "weight must be #<literal>, @cell or rec{...}: '" + std::string(s) + "'");
}

int parse_direction(std::string_view s) {
  s = text::trim(s);
  if (s == "-1" || s == "L") return -1;
  if (s == "+1" || s == "1" || s == "R") return 1;
  throw Error(ErrorCode::SyntaxError, "direction must be -1 or +1: '" + std::string(s) + "'");
}

}  // namespace

std::string serialize_transition(const Machine& m, const Transition& t) {
  return name_or_index(m.states, t.from) + "," + name_or_index(m.symbols, t.read) + " -> " +
         name_or_index(m.states, t.to) + "," + name_or_index(m.symbols, t.write) + ", " +
         (t.direction < 0 ? "-1" : "+1") + ", " + render_weight(t.weight);
}

void canonicalize(Machine& m) {
  std::vector<std::pair<std::string, Transition>> keyed;
  keyed.reserve(m.transitions.size());
  for (auto& t : m.transitions) keyed.emplace_back(serialize_transition(m, t), std::move(t));
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  m.transitions.clear();
  for (std::size_t i = 0; i < keyed.size(); ++i)
    if (i == 0 || keyed[i].first != keyed[i - 1].first) m.transitions.push_back(std::move(keyed[i].second));
}

std::vector<Diagnostic> validate_machine(const Machine& m) {
  std::vector<Diagnostic> out;
  auto report = [&](std::string code, std::string msg) { out.push_back({std::move(code), std::move(msg)}); };
  if (m.states.empty()) report("NoStates", "the state set is empty");
  if (!in_range(m.initialState, m.states.size())) report("InitialStateOutOfRange", "initial state index invalid");
  if (!in_range(m.blank, m.symbols.size())) report("BlankNotInTapeAlphabet", "blank symbol invalid");
  if (!in_range(m.placeholder, m.symbols.size())) report("PlaceholderNotInTapeAlphabet", "placeholder symbol invalid");
  if (m.blank == m.placeholder) report("BlankIsPlaceholder", "blank and placeholder coincide");
  for (int s : m.inputAlphabet) {
    if (!in_range(s, m.symbols.size())) report("InputLetterNotInTapeAlphabet", "input letter index invalid");
    if (s == m.blank) report("BlankInInputAlphabet", "blank '" + name_or_index(m.symbols, s) + "' is an input letter");
    if (s == m.placeholder)
      report("PlaceholderInInputAlphabet", "placeholder '" + name_or_index(m.symbols, s) + "' is an input letter");
  }
  if (std::set<std::string>(m.states.begin(), m.states.end()).size() != m.states.size())
    report("DuplicateState", "state names are not distinct");
  if (std::set<std::string>(m.symbols.begin(), m.symbols.end()).size() != m.symbols.size())
    report("DuplicateSymbol", "symbol names are not distinct");
  for (const auto& v : m.knownValues)
    if (v.semiring() != m.semiring) report("MixedSemiringWeights", "known value " + render(v) + " from another semiring");

  std::set<std::string> seen;
  for (const auto& t : m.transitions) {
    std::string line = serialize_transition(m, t);
    if (!in_range(t.from, m.states.size()) || !in_range(t.to, m.states.size()))
      report("StateOutOfRange", line);
    if (!in_range(t.read, m.symbols.size()) || !in_range(t.write, m.symbols.size()))
      report("SymbolOutOfRange", line);
    if (t.direction != 1 && t.direction != -1) report("BadDirection", line);
    if (!seen.insert(line).second) report("DuplicateTransition", line);
    if (const auto* c = std::get_if<ConstWeight>(&t.weight)) {
      if (c->value.semiring() != m.semiring) report("MixedSemiringWeights", line);
      else if (std::find(m.knownValues.begin(), m.knownValues.end(), c->value) == m.knownValues.end())
        report("UnknownConstantWeight", line);
    } else if (const auto* r = std::get_if<RecWeight>(&t.weight)) {
      if (!m.oracleEnabled) report("OracleDisabled", line);
      for (const auto& v : r->values)
        if (v.semiring() != m.semiring) report("MixedSemiringWeights", line);
    }
  }
  return out;
}

std::string serialize_machine(const Machine& m) {
  std::ostringstream os;
  auto join = [](const std::vector<std::string>& xs) {
    std::string s;
    for (const auto& x : xs) s += (s.empty() ? "" : " ") + x;
    return s;
  };
  std::vector<std::string> input;
  for (int s : m.inputAlphabet) input.push_back(name_or_index(m.symbols, s));
  std::vector<std::string> known;
  for (const auto& v : m.knownValues) known.push_back("#" + render_hash_literal(v));
  os << "states: " << join(m.states) << "\n";
  os << "input_alphabet: " << join(input) << "\n";
  os << "tape_alphabet: " << join(m.symbols) << "\n";
  os << "init: " << name_or_index(m.states, m.initialState) << "\n";
  os << "blank: " << name_or_index(m.symbols, m.blank) << "\n";
  os << "placeholder: " << name_or_index(m.symbols, m.placeholder) << "\n";
  os << "known: " << join(known) << "\n";
  os << "oracle: " << (m.oracleEnabled ? "on" : "off") << "\n";
  for (const auto& t : m.transitions) os << serialize_transition(m, t) << "\n";
  return os.str();
}

Machine parse_machine(std::string_view source, SemiringKind kind) {
  Machine m;
  m.semiring = kind;
  std::map<std::string, std::string> headers;
  std::vector<std::pair<std::size_t, std::string>> transitionLines;
  auto lines = text::split_lines(source);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    auto line = text::trim(text::strip_comment(lines[ln]));
    if (line.empty()) continue;
    if (line.find("->") != std::string_view::npos) {
      transitionLines.emplace_back(ln + 1, std::string(line));
      continue;
    }
    auto colon = line.find(':');
    if (colon == std::string_view::npos)
      throw Error(ErrorCode::SyntaxError, "line " + std::to_string(ln + 1) + ": expected 'key: value' or a transition");
    std::string key(text::trim(line.substr(0, colon)));
    static const std::set<std::string> keys{"states",      "input_alphabet", "tape_alphabet", "init",
                                            "blank",       "placeholder",    "known",         "oracle"};
    if (!keys.count(key)) throw Error(ErrorCode::MalformedFile, "line " + std::to_string(ln + 1) + ": unknown header '" + key + "'");
    if (headers.count(key)) throw Error(ErrorCode::MalformedFile, "duplicate header '" + key + "'");
    headers[key] = std::string(text::trim(line.substr(colon + 1)));
  }
  for (const char* required : {"states", "input_alphabet", "tape_alphabet", "init", "blank", "placeholder"})
    if (!headers.count(required)) throw Error(ErrorCode::MalformedFile, std::string("missing header '") + required + "'");

  auto names = [&](const std::string& key) {
    auto xs = text::split_list(headers[key]);
    for (const auto& x : xs)
      if (!valid_name(x)) throw Error(ErrorCode::SyntaxError, "invalid name '" + x + "' in " + key);
    return xs;
  };
  m.states = names("states");
  m.symbols = names("tape_alphabet");
  auto symbol = [&](const std::string& name, const std::string& where) {
    int i = m.symbol_index(name);
    if (i < 0) throw Error(ErrorCode::UnknownSymbol, "symbol '" + name + "' (" + where + ") is not in tape_alphabet");
    return i;
  };
  auto state = [&](const std::string& name) {
    int i = m.state_index(name);
    if (i < 0) throw Error(ErrorCode::UnknownSymbol, "state '" + name + "' is not declared");
    return i;
  };
  for (const auto& a : names("input_alphabet")) m.inputAlphabet.push_back(symbol(a, "input_alphabet"));
  m.initialState = state(std::string(text::trim(headers["init"])));
  m.blank = symbol(std::string(text::trim(headers["blank"])), "blank");
  m.placeholder = symbol(std::string(text::trim(headers["placeholder"])), "placeholder");
  if (headers.count("known")) m.knownValues = parse_value_list(headers["known"], kind);

  for (const auto& [ln, line] : transitionLines) {
    auto where = "line " + std::to_string(ln) + ": ";
    auto arrow = line.find("->");
    auto lhs = text::split_list(line.substr(0, arrow));
    if (lhs.size() != 2) throw Error(ErrorCode::SyntaxError, where + "left side must be 'state,symbol'");
    std::string_view rhs = std::string_view(line).substr(arrow + 2);
    std::vector<std::string_view> parts;
    for (int i = 0; i < 3; ++i) {
      auto comma = rhs.find(',');
      if (comma == std::string_view::npos) throw Error(ErrorCode::SyntaxError, where + "right side must be 'state,symbol, d, w'");
      parts.push_back(text::trim(rhs.substr(0, comma)));
      rhs = rhs.substr(comma + 1);
    }
    parts.push_back(text::trim(rhs));
    Transition t;
    t.from = state(lhs[0]);
    t.read = symbol(lhs[1], "transition");
    t.to = state(std::string(parts[0]));
    t.write = symbol(std::string(parts[1]), "transition");
    t.direction = parse_direction(parts[2]);
    t.weight = parse_weight(parts[3], kind);
    m.transitions.push_back(std::move(t));
  }
  bool hasRec = std::any_of(m.transitions.begin(), m.transitions.end(),
                            [](const Transition& t) { return std::holds_alternative<RecWeight>(t.weight); });
  m.oracleEnabled = hasRec;
  if (headers.count("oracle")) {
    const auto& o = headers["oracle"];
    if (o == "on") m.oracleEnabled = true;
    else if (o == "off") m.oracleEnabled = false;
    else throw Error(ErrorCode::SyntaxError, "oracle must be on or off");
  }
  canonicalize(m);
  return m;
}

WeightedWord parse_word(std::string_view source, SemiringKind kind) {
  WeightedWord out;
  std::size_t pos = 0;
  while (true) {
    while (pos < source.size() && text::is_space(source[pos])) ++pos;
    if (pos >= source.size()) break;
    if (source[pos] == '#') {
      out.emplace_back(parse_value(text::read_hash_literal(source, pos, ""), kind));
    } else {
      std::size_t start = pos;
      while (pos < source.size() && !text::is_space(source[pos])) ++pos;
      std::string letter(source.substr(start, pos - start));
      if (!valid_name(letter)) throw Error(ErrorCode::SyntaxError, "invalid letter '" + letter + "'");
      out.emplace_back(Letter{letter});
    }
  }
  return out;
}

std::string render_word(const WeightedWord& w) {
  std::string out;
  for (const auto& tok : w) {
    if (!out.empty()) out += " ";
    if (const auto* l = std::get_if<Letter>(&tok)) out += l->symbol;
    else out += "#" + render_hash_literal(std::get<Value>(tok));
  }
  return out;
}

Value Configuration::annotation_at(std::size_t i) const {
  if (annotations && i < annotations->size()) return (*annotations)[i];
  return Value::zero(semiring);
}

Configuration initial_configuration(const Machine& m, const WeightedWord& word) {
  Configuration c;
  c.state = m.initialState;
  c.blank = m.blank;
  c.semiring = m.semiring;
  auto notes = std::make_shared<std::vector<Value>>();
  for (const auto& tok : word) {
    if (const auto* l = std::get_if<Letter>(&tok)) {
      int s = m.symbol_index(l->symbol);
      if (s < 0 || !m.is_input_letter(s))
        throw Error(ErrorCode::LetterNotInInputAlphabet, "'" + l->symbol + "' is not an input letter");
      c.tape.push_back(s);
      notes->push_back(Value::zero(m.semiring));
    } else {
      const auto& v = std::get<Value>(tok);
      if (v.semiring() != m.semiring)
        throw Error(ErrorCode::MixedSemirings, "input value " + render(v) + " is not in the machine's semiring");
      c.tape.push_back(m.placeholder);
      notes->push_back(v);
    }
  }
  c.annotations = std::move(notes);
  return c;
}

std::vector<Transition> applicable_transitions(const Machine& m, const Configuration& c) {
  std::vector<std::pair<std::string, const Transition*>> found;
  int sym = c.symbol_at(c.head);
  for (const auto& t : m.transitions)
    if (t.from == c.state && t.read == sym) found.emplace_back(serialize_transition(m, t), &t);
  std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Transition> out;
  for (const auto& [key, t] : found) out.push_back(*t);
  return out;
}

Value rec_apply(const RecognitionFn& f, const Value& x) {
  Value total = Value::zero(x.semiring());
  bool member = false;
  for (const auto& r : f.values) {
    total = add(total, r);
    if (r == x) member = true;
  }
  return member ? total : add(x, total);
}

Value transition_weight(const Transition& t, const Configuration& c) {
  if (const auto* k = std::get_if<ConstWeight>(&t.weight)) return k->value;
  if (std::holds_alternative<CellWeight>(t.weight)) return c.annotation_at(c.head);
  return rec_apply(RecognitionFn{std::get<RecWeight>(t.weight).values}, c.annotation_at(c.head));
}

namespace {

void apply_in_place(Configuration& c, const Transition& t) {
  if (c.head >= c.tape.size()) c.tape.resize(c.head + 1, c.blank);
  c.tape[c.head] = t.write;
  c.state = t.to;
  if (t.direction < 0 && c.head == 0) c.head = 1;
  else c.head = t.direction < 0 ? c.head - 1 : c.head + 1;
}

// Transition indices per (state, symbol), each list in canonical order.
class TransitionTable {
 public:
  explicit TransitionTable(const Machine& m) : width_(m.symbols.size()), rows_(m.states.size() * m.symbols.size()) {
    std::vector<std::string> keys;
    for (const auto& t : m.transitions) keys.push_back(serialize_transition(m, t));
    for (std::size_t i = 0; i < m.transitions.size(); ++i) {
      const auto& t = m.transitions[i];
      if (!in_range(t.from, m.states.size()) || !in_range(t.read, m.symbols.size()))
        throw Error(ErrorCode::InvalidMachine, keys[i]);
      rows_[t.from * width_ + t.read].push_back(i);
    }
    for (auto& row : rows_) std::sort(row.begin(), row.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  }

  const std::vector<std::size_t>& at(const Configuration& c) const {
    return rows_[c.state * width_ + c.symbol_at(c.head)];
  }

 private:
  std::size_t width_;
  std::vector<std::vector<std::size_t>> rows_;
};

std::string memo_key(const Configuration& c) {
  std::size_t len = c.tape.size();
  while (len > 0 && c.tape[len - 1] == c.blank) --len;
  std::string key;
  key.reserve(8 + 2 * len);
  auto put32 = [&](std::uint32_t x) {
    for (int i = 0; i < 4; ++i) key.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
  };
  put32(static_cast<std::uint32_t>(c.state));
  put32(static_cast<std::uint32_t>(c.head));
  for (std::size_t i = 0; i < len; ++i) {
    key.push_back(static_cast<char>(c.tape[i] & 0xff));
    key.push_back(static_cast<char>((c.tape[i] >> 8) & 0xff));
  }
  return key;
}

[[noreturn]] void budget_exceeded(std::size_t budget, const Machine& m, const Configuration& c) {
  throw Error(ErrorCode::BudgetExceeded, "a path reached " + std::to_string(budget) + " transitions in state '" +
                                             name_or_index(m.states, c.state) + "' without halting");
}

struct Outcome {
  Value value;
  std::size_t height;
};

class Evaluator {
 public:
  Evaluator(const Machine& m, std::size_t budget, SimulationStats* stats)
      : m_(m), table_(m), budget_(budget), stats_(stats) {}

  Value run(Configuration start) {
    Segment seg = walk(std::move(start), 0, Value::one(m_.semiring), 0);
    if (seg.done) return finish(seg.outcome.value, seg.outcome.height);
    std::vector<Frame> stack;
    stack.push_back(open(std::move(seg)));
    while (true) {
      Frame& top = stack.back();
      if (top.next < top.options->size()) {
        const Transition& t = m_.transitions[(*top.options)[top.next++]];
        Configuration child = top.config;
        Value w = transition_weight(t, child);
        apply_in_place(child, t);
        if (stats_) ++stats_->steps;
        Segment s = walk(std::move(child), top.depth + 1, std::move(w), 1);
        if (s.done) {
          absorb(top, s.outcome);
        } else {
          stack.push_back(open(std::move(s)));
        }
        continue;
      }
      memo_.emplace(std::move(top.key), Outcome{top.sum, top.height});
      Outcome result{mul(top.prefix, top.sum), top.prefixSteps + top.height};
      stack.pop_back();
      if (stack.empty()) return finish(result.value, result.height);
      absorb(stack.back(), result);
    }
  }

 private:
  struct Segment {
    bool done = false;
    Outcome outcome;
    Configuration config;
    std::size_t depth = 0;
    Value prefix;
    std::size_t prefixSteps = 0;
    std::string key;
  };

  struct Frame {
    Configuration config;
    std::size_t depth;
    const std::vector<std::size_t>* options;
    std::size_t next = 0;
    Value sum;
    std::size_t height = 0;
    Value prefix;
    std::size_t prefixSteps;
    std::string key;
  };

  Value finish(Value v, std::size_t height) {
    if (stats_) stats_->longestPath = std::max(stats_->longestPath, height);
    return v;
  }

  static void absorb(Frame& f, const Outcome& o) {
    f.sum = add(f.sum, o.value);
    f.height = std::max(f.height, o.height);
  }

  Frame open(Segment s) {
    if (stats_) ++stats_->branchPoints;
    const auto* options = &table_.at(s.config);
    return Frame{std::move(s.config), s.depth, options, 0, Value::zero(m_.semiring), 0,
                 std::move(s.prefix), s.prefixSteps, std::move(s.key)};
  }

  // Follows the computation from c while it is deterministic. Stops at a
  // halting configuration, a memoized branch point, or a fresh branch point.
  Segment walk(Configuration c, std::size_t depth, Value product, std::size_t steps) {
    while (true) {
      const auto& options = table_.at(c);
      if (options.empty()) return Segment{true, Outcome{std::move(product), steps}, {}, 0, Value::one(m_.semiring), 0, {}};
      if (depth >= budget_) budget_exceeded(budget_, m_, c);
      if (options.size() == 1) {
        const Transition& t = m_.transitions[options.front()];
        product = mul(product, transition_weight(t, c));
        apply_in_place(c, t);
        ++depth;
        ++steps;
        if (stats_) ++stats_->steps;
        continue;
      }
      std::string key = memo_key(c);
      auto hit = memo_.find(key);
      if (hit != memo_.end()) {
        if (stats_) ++stats_->memoHits;
        if (depth + hit->second.height > budget_) budget_exceeded(budget_, m_, c);
        return Segment{true, Outcome{mul(product, hit->second.value), steps + hit->second.height}, {}, 0,
                       Value::one(m_.semiring), 0, {}};
      }
      Segment s;
      s.config = std::move(c);
      s.depth = depth;
      s.prefix = std::move(product);
      s.prefixSteps = steps;
      s.key = std::move(key);
      return s;
    }
  }

  const Machine& m_;
  TransitionTable table_;
  std::size_t budget_;
  SimulationStats* stats_;
  std::unordered_map<std::string, Outcome> memo_;
};

}  // namespace

std::pair<Configuration, Value> step(const Machine& m, const Configuration& c, const Transition& t) {
  if (t.from != c.state || t.read != c.symbol_at(c.head) ||
      std::find(m.transitions.begin(), m.transitions.end(), t) == m.transitions.end())
    throw Error(ErrorCode::NotApplicable, serialize_transition(m, t));
  Configuration next = c;
  Value w = transition_weight(t, c);
  apply_in_place(next, t);
  return {std::move(next), std::move(w)};
}

Value configuration_value(const Machine& m, const Configuration& c, std::size_t budget, SimulationStats* stats) {
  Evaluator ev(m, budget, stats);
  return ev.run(c);
}

Value machine_value(const Machine& m, const WeightedWord& word, std::size_t budget, SimulationStats* stats) {
  return configuration_value(m, initial_configuration(m, word), budget, stats);
}

std::vector<ComputationPath> enumerate_paths(const Machine& m, const WeightedWord& word, std::size_t budget,
                                             std::size_t maxPaths) {
  TransitionTable table(m);
  std::vector<ComputationPath> out;
  struct Pending {
    Configuration config;
    std::vector<std::size_t> trail;
    Value weight;
  };
  std::vector<Pending> work;
  work.push_back({initial_configuration(m, word), {}, Value::one(m.semiring)});
  while (!work.empty()) {
    Pending p = std::move(work.back());
    work.pop_back();
    const auto& options = table.at(p.config);
    if (options.empty()) {
      if (out.size() >= maxPaths) throw Error(ErrorCode::TooLarge, "more than " + std::to_string(maxPaths) + " paths");
      out.push_back({std::move(p.trail), std::move(p.weight)});
      continue;
    }
    if (p.trail.size() >= budget) budget_exceeded(budget, m, p.config);
    for (std::size_t k = options.size(); k-- > 0;) {
      const Transition& t = m.transitions[options[k]];
      Value w = mul(p.weight, transition_weight(t, p.config));
      Pending q{k == 0 ? std::move(p.config) : p.config, p.trail, std::move(w)};
      apply_in_place(q.config, t);
      q.trail.push_back(options[k]);
      work.push_back(std::move(q));
    }
  }
  return out;
}

}  // namespace semtm
