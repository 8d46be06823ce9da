#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace emoarc::corpus {

/// Abbreviations that never end a sentence when followed by a single period.
/// Compared case-insensitively without the trailing period.
inline constexpr std::array<std::string_view, 34> kAbbreviations = {
    "mr",   "mrs",  "ms",   "dr",   "st",  "jr",   "sr",   "prof", "mt",  "rev",  "hon",  "capt",
    "col",  "gen",  "lt",   "sgt",  "gov", "pres", "messrs", "mme", "mlle", "esq", "vs",  "etc",
    "e.g",  "i.e",  "cf",   "viz",  "no",  "vol",  "ch",   "fig",  "ft",  "ave",
};

namespace detail {

inline bool is_space(unsigned char c) { return std::isspace(c) != 0; }

/// Length of a sentence terminator starting at pos (0 if none).
inline std::size_t terminator_len(std::string_view t, std::size_t pos) {
  const char c = t[pos];
  if (c == '.' || c == '!' || c == '?') return 1;
  if (t.substr(pos, 3) == "\xE2\x80\xA6") return 3;  // horizontal ellipsis
  return 0;
}

/// Length of a closing quote/bracket starting at pos (0 if none).
inline std::size_t closer_len(std::string_view t, std::size_t pos) {
  const char c = t[pos];
  if (c == '"' || c == '\'' || c == ')' || c == ']') return 1;
  for (std::string_view q : {"\xE2\x80\x9D", "\xE2\x80\x99", "\xC2\xBB"})  // ” ’ »
    if (t.substr(pos, q.size()) == q) return q.size();
  return 0;
}

/// The word immediately preceding pos, with leading openers stripped.
inline std::string word_before(std::string_view t, std::size_t pos) {
  std::size_t start = pos;
  while (start > 0 && !is_space(static_cast<unsigned char>(t[start - 1]))) --start;
  std::string w(t.substr(start, pos - start));
  const auto first = w.find_first_not_of("\"'([");
  w = first == std::string::npos ? std::string() : w.substr(first);
  for (auto& ch : w) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return w;
}

/// The whitespace-delimited token starting at the first non-space at or
/// after pos.
inline std::string_view next_token(std::string_view t, std::size_t pos) {
  while (pos < t.size() && is_space(static_cast<unsigned char>(t[pos]))) ++pos;
  std::size_t end = pos;
  while (end < t.size() && !is_space(static_cast<unsigned char>(t[end]))) ++end;
  return t.substr(pos, end - pos);
}

/// "J. R. Tolkien", "J. Smith": an initial followed by another initial or a
/// capitalized word.
inline bool continues_name(std::string_view next) {
  while (!next.empty() && (next.front() == '"' || next.front() == '\'' || next.front() == '(')) next.remove_prefix(1);
  if (next.empty() || !std::isupper(static_cast<unsigned char>(next[0]))) return false;
  if (next.size() == 2 && next[1] == '.') return true;
  return next.size() >= 2 && std::isalpha(static_cast<unsigned char>(next[1]));
}

inline bool suppresses_break(std::string_view t, std::size_t period_pos) {
  std::string_view raw = t.substr(0, period_pos);
  std::size_t start = raw.size();
  while (start > 0 && !is_space(static_cast<unsigned char>(raw[start - 1]))) --start;
  std::string_view orig = raw.substr(start);
  while (!orig.empty() && (orig.front() == '"' || orig.front() == '\'' || orig.front() == '(' || orig.front() == '['))
    orig.remove_prefix(1);
  // Single uppercase initial such as "J." (but not the pronoun "I.").
  if (orig.size() == 1 && std::isupper(static_cast<unsigned char>(orig[0])) && orig[0] != 'I')
    return continues_name(next_token(t, period_pos + 1));
  const auto w = word_before(t, period_pos);
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), w) != kAbbreviations.end();
}

inline void flush(std::string_view piece, std::vector<std::string>& out) {
  std::string s;
  bool pending_space = false;
  for (unsigned char c : piece) {
    if (is_space(c)) {
      pending_space = !s.empty();
    } else {
      if (pending_space) s.push_back(' ');
      pending_space = false;
      s.push_back(static_cast<char>(c));
    }
  }
  if (!s.empty()) out.push_back(std::move(s));
}

}  // namespace detail

/// Rule-based sentence splitting. A boundary follows a run of terminal
/// punctuation (. ! ? and the ellipsis character) plus any closing quotes or
/// brackets, when the next character is whitespace or the end of the text.
/// No boundary when the next word starts in lowercase ("Run!" she cried), and
/// a lone period after a listed abbreviation or after a single capital initial
/// that continues a name does not end a sentence. Blank lines always end a sentence. Whitespace inside a
/// sentence is collapsed to single spaces.
inline std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    if (text[i] == '\n') {
      std::size_t j = i + 1;
      while (j < n && detail::is_space(static_cast<unsigned char>(text[j])) && text[j] != '\n') ++j;
      if (j < n && text[j] == '\n') {
        detail::flush(text.substr(start, i - start), out);
        start = i = j;
        continue;
      }
      ++i;
      continue;
    }
    const auto tl = detail::terminator_len(text, i);
    if (tl == 0) {
      ++i;
      continue;
    }
    const std::size_t run_start = i;
    std::size_t j = i;
    std::size_t run_chars = 0;
    while (j < n) {
      const auto l = detail::terminator_len(text, j);
      if (l == 0) break;
      j += l;
      ++run_chars;
    }
    const bool single_period = run_chars == 1 && text[run_start] == '.';
    while (j < n) {
      const auto l = detail::closer_len(text, j);
      if (l == 0) break;
      j += l;
    }
    const bool at_break = j == n || detail::is_space(static_cast<unsigned char>(text[j]));
    const auto next = detail::next_token(text, j);
    const bool lower_next = !next.empty() && std::islower(static_cast<unsigned char>(next[0]));
    if (at_break && !lower_next && !(single_period && detail::suppresses_break(text, run_start))) {
      detail::flush(text.substr(start, j - start), out);
      start = j;
    }
    i = j;
  }
  if (start < n) detail::flush(text.substr(start), out);
  return out;
}

}  // namespace emoarc::corpus
