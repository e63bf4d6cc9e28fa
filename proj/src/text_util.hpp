#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "semtm/error.hpp"

namespace semtm::text {

inline bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

inline std::string_view strip_comment(std::string_view line) {
  auto p = line.find("//");
  return p == std::string_view::npos ? line : line.substr(0, p);
}

inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

/// Reads a value literal that starts at text[pos] == '#'. Bracketed literals
/// run to the matching ']'; bare ones stop at whitespace or any of `stops`.
inline std::string read_hash_literal(std::string_view text, std::size_t& pos, std::string_view stops) {
  if (pos >= text.size() || text[pos] != '#') throw Error(ErrorCode::SyntaxError, "expected '#'");
  ++pos;
  if (pos < text.size() && text[pos] == '[') {
    auto close = text.find(']', pos);
    if (close == std::string_view::npos) throw Error(ErrorCode::SyntaxError, "unterminated '#['");
    std::string body(text.substr(pos + 1, close - pos - 1));
    pos = close + 1;
    return body;
  }
  std::size_t start = pos;
  while (pos < text.size() && !is_space(text[pos]) && stops.find(text[pos]) == std::string_view::npos) ++pos;
  if (start == pos) throw Error(ErrorCode::SyntaxError, "empty literal after '#'");
  return std::string(text.substr(start, pos - start));
}

/// Splits on commas and whitespace, dropping empty pieces.
inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || is_space(c)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

}  // namespace semtm::text
