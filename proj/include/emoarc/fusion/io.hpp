#pragma once

#include <map>
#include <optional>
#include <string>

#include "emoarc/error.hpp"
#include "emoarc/fusion/signal.hpp"
#include "emoarc/util.hpp"

namespace emoarc::fusion {

using SignalMap = std::map<std::string, TrajectorySignal>;

/// story_id<TAB>index<TAB>valence<TAB>arousal, 6 decimals, stories in map
/// order. A run id, when given, is written as a leading "# run_id=" line.
inline std::string format_signals(const SignalMap& signals, const std::optional<std::string>& run_id = {}) {
  std::string out;
  if (run_id) out += "# run_id=" + *run_id + "\n";
  for (const auto& [id, s] : signals)
    for (std::size_t i = 0; i < s.size(); ++i)
      out += id + '\t' + std::to_string(i) + '\t' + format_fixed(s.valence[i], 6) + '\t' +
             format_fixed(s.arousal[i], 6) + '\n';
  return out;
}

struct SignalFile {
  std::optional<std::string> run_id;
  SignalMap signals;
};

/// Reads the signal TSV. Indices per story must be contiguous from 0 and
/// values must lie in [0,1].
inline SignalFile parse_signals(const std::string& content, SourceKind kind, const std::string& path = "<signals>") {
  SignalFile f;
  std::map<std::string, std::map<std::size_t, std::pair<double, double>>> rows;
  const auto lines = split_lines(content);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const auto at = path + ":" + std::to_string(ln + 1) + ": ";
    const auto line = trim(lines[ln]);
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string_view body = trim(line.substr(1));
      if (body.rfind("run_id=", 0) == 0) f.run_id = std::string(trim(body.substr(7)));
      continue;
    }
    const auto cells = split_char(lines[ln], '\t');
    if (cells.size() != 4) throw ValidationError(at + "expected story_id<TAB>index<TAB>valence<TAB>arousal");
    long long idx = 0;
    double v = 0, a = 0;
    if (!parse_int(cells[1], idx) || idx < 0) throw ValidationError(at + "bad index");
    if (!parse_double(cells[2], v) || !parse_double(cells[3], a)) throw ValidationError(at + "bad value");
    if (!(v >= 0.0 && v <= 1.0) || !(a >= 0.0 && a <= 1.0)) throw DataError(at + "value outside [0,1]");
    const std::string id(trim(cells[0]));
    if (!rows[id].emplace(static_cast<std::size_t>(idx), std::pair{v, a}).second)
      throw ValidationError(at + "duplicate (story_id, index)");
  }
  for (auto& [id, r] : rows) {
    TrajectorySignal s;
    s.story_id = id;
    s.source = {kind, kind == SourceKind::prediction ? f.run_id.value_or("") : ""};
    std::size_t expect = 0;
    for (const auto& [i, va] : r) {
      if (i != expect) throw DataError(path + ": coverage gap in story " + id + " at index " + std::to_string(expect));
      ++expect;
      s.valence.push_back(va.first);
      s.arousal.push_back(va.second);
    }
    f.signals.emplace(id, std::move(s));
  }
  return f;
}

}  // namespace emoarc::fusion
