#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

#include "emoarc/error.hpp"
#include "emoarc/mapping/va.hpp"
#include "emoarc/util.hpp"

namespace emoarc::mapping {

/// Word -> VA lexicon in the NRC-VAD layout. Exact lowercase lookup.
struct VadLexicon {
  std::string name;
  std::unordered_map<std::string, VAPoint> entries;

  std::optional<VAPoint> lookup(std::string_view token) const {
    auto it = entries.find(to_lower_ascii(token));
    if (it == entries.end()) return std::nullopt;
    return it->second;
  }
  std::size_t size() const { return entries.size(); }
};

struct LexiconLoad {
  VadLexicon lexicon;
  std::size_t duplicate_warnings = 0;
  std::size_t skipped_multiword = 0;
};

/// term<TAB>valence<TAB>arousal[<TAB>dominance]. A first row whose value
/// columns are not numeric is treated as a header. Duplicate terms: the last
/// row wins and is counted. Multi-word terms are skipped.
inline LexiconLoad parse_lexicon(const std::string& content, const std::string& name) {
  LexiconLoad out;
  out.lexicon.name = name;
  const auto lines = split_lines(content);
  bool first_row = true;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (trim(lines[ln]).empty()) continue;
    const auto at = name + ":" + std::to_string(ln + 1) + ": ";
    const auto cells = split_char(lines[ln], '\t');
    double v = 0, a = 0;
    const bool numeric = cells.size() >= 3 && parse_double(cells[1], v) && parse_double(cells[2], a);
    if (first_row) {
      first_row = false;
      if (!numeric && cells.size() >= 3) continue;
    }
    if (cells.size() < 3 || cells.size() > 4) throw ValidationError(at + "expected term<TAB>valence<TAB>arousal[<TAB>dominance]");
    if (!numeric) throw ValidationError(at + "bad valence/arousal value");
    const auto term = to_lower_ascii(trim(cells[0]));
    if (term.empty()) throw ValidationError(at + "empty term");
    if (term.find_first_of(" \t") != std::string::npos) {
      ++out.skipped_multiword;
      continue;
    }
    if (!(v >= 0.0 && v <= 1.0) || !(a >= 0.0 && a <= 1.0)) throw ValidationError(at + "valence/arousal outside [0,1]");
    auto [it, fresh] = out.lexicon.entries.insert_or_assign(term, VAPoint(v, a));
    if (!fresh) ++out.duplicate_warnings;
  }
  return out;
}

inline LexiconLoad load_lexicon(const std::string& path) {
  return parse_lexicon(read_file(path), std::filesystem::path(path).filename().string());
}

}  // namespace emoarc::mapping
