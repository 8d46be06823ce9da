#pragma once

#include <array>
#include <cmath>
#include <map>
#include <string>
#include <utility>

#include "emoarc/corpus/types.hpp"
#include "emoarc/error.hpp"
#include "emoarc/fusion/signal.hpp"
#include "emoarc/metrics/correlation.hpp"
#include "emoarc/util.hpp"

namespace emoarc::mapping {

/// A point in valence/arousal space; both coordinates in [0,1].
class VAPoint {
 public:
  VAPoint(double valence, double arousal) : valence_(valence), arousal_(arousal) {
    if (!(valence >= 0.0 && valence <= 1.0) || !(arousal >= 0.0 && arousal <= 1.0))
      throw ValidationError("VAPoint out of [0,1]: (" + format_exact(valence) + ", " + format_exact(arousal) + ")");
  }

  double valence() const { return valence_; }
  double arousal() const { return arousal_; }
  bool operator==(const VAPoint&) const = default;

 private:
  double valence_;
  double arousal_;
};

/// Neutral anchor of the default label table.
inline const VAPoint kNeutralAnchor{0.469, 0.184};

/// Label -> VA table. Always holds all eight labels.
class LabelMap {
 public:
  /// The default table, taken from NRC-VAD entries for the label words.
  /// positive_surprise uses the entry for "surprise"; negative_surprise keeps
  /// that arousal and takes the mean valence of anger, disgust and fear
  /// rounded to three decimals.
  static LabelMap standard() {
    return LabelMap({{
        {0.167, 0.865},  // anger
        {0.052, 0.775},  // disgust
        {0.073, 0.840},  // fear
        {0.960, 0.732},  // happiness
        {0.097, 0.875},  // negative_surprise
        {0.469, 0.184},  // neutral
        {0.875, 0.875},  // positive_surprise
        {0.052, 0.288},  // sadness
    }});
  }

  explicit LabelMap(std::array<std::pair<double, double>, 8> entries) {
    for (std::size_t i = 0; i < 8; ++i) entries_[i] = VAPoint(entries[i].first, entries[i].second);
  }

  const VAPoint& operator[](corpus::EmotionLabel l) const { return entries_[corpus::label_index(l)]; }

  /// label<TAB>valence<TAB>arousal, 3 decimals, in enum order.
  std::string serialize() const {
    std::string out;
    for (auto l : corpus::kAllLabels) {
      out += corpus::to_string(l);
      out += '\t' + format_fixed((*this)[l].valence(), 3) + '\t' + format_fixed((*this)[l].arousal(), 3) + '\n';
    }
    return out;
  }

  std::string digest() const { return hex64(fnv1a64(serialize())); }

 private:
  std::array<VAPoint, 8> entries_{{{0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}}};
};

/// Parses a label table override (label<TAB>valence<TAB>arousal). Every
/// label must appear exactly once; a header row is skipped.
inline LabelMap parse_label_table(const std::string& content, const std::string& path = "<label table>") {
  std::array<std::pair<double, double>, 8> entries{};
  std::array<bool, 8> seen{};
  const auto lines = split_lines(content);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (trim(lines[ln]).empty() || lines[ln][0] == '#') continue;
    const auto cells = split_char(lines[ln], '\t');
    const auto at = path + ":" + std::to_string(ln + 1) + ": ";
    if (cells.size() != 3) throw ValidationError(at + "expected label<TAB>valence<TAB>arousal");
    const auto label = corpus::parse_label(trim(cells[0]));
    double v = 0, a = 0;
    if (!label) {
      if (!parse_double(cells[1], v)) continue;  // header row
      throw ValidationError(at + "unknown label '" + cells[0] + "'");
    }
    if (!parse_double(cells[1], v) || !parse_double(cells[2], a)) throw ValidationError(at + "bad number");
    if (seen[corpus::label_index(*label)]) throw ValidationError(at + "label listed twice");
    seen[corpus::label_index(*label)] = true;
    entries[corpus::label_index(*label)] = {v, a};
  }
  for (auto l : corpus::kAllLabels)
    if (!seen[corpus::label_index(l)]) throw ValidationError(path + ": missing label " + std::string(corpus::to_string(l)));
  try {
    return LabelMap(entries);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

inline VAPoint map_label(corpus::EmotionLabel label, const LabelMap& table) { return table[label]; }

/// Maps one annotator's per-sentence labels of a story to a VA trajectory.
inline fusion::TrajectorySignal build_annotator_signal(const corpus::Story& story, const corpus::AnnotatorId& annotator,
                                                       const LabelMap& table) {
  fusion::TrajectorySignal sig;
  sig.story_id = story.story_id;
  sig.source = {fusion::SourceKind::annotator, annotator};
  sig.valence.reserve(story.size());
  sig.arousal.reserve(story.size());
  for (const auto& s : story.sentences) {
    auto it = s.labels.find(annotator);
    if (it == s.labels.end())
      throw DataError("annotator " + annotator + " has no label at " + story.story_id + "/" + std::to_string(s.index));
    const auto p = map_label(it->second, table);
    sig.valence.push_back(p.valence());
    sig.arousal.push_back(p.arousal());
  }
  return sig;
}

/// Pearson correlation per dimension between directly annotated VA values
/// and label-mapped ones.
inline std::pair<double, double> validate_mapping(const fusion::TrajectorySignal& direct,
                                                  const fusion::TrajectorySignal& mapped) {
  return {metrics::pearson(direct.valence, mapped.valence), metrics::pearson(direct.arousal, mapped.arousal)};
}

}  // namespace emoarc::mapping
