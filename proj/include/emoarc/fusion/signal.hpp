#pragma once

#include <string>
#include <vector>

#include "emoarc/error.hpp"

namespace emoarc::fusion {

enum class SourceKind { annotator, gold, prediction };

struct SignalSource {
  SourceKind kind = SourceKind::gold;
  std::string id;  // annotator id or run id; empty for gold

  bool operator==(const SignalSource&) const = default;
};

/// Per-sentence valence/arousal trajectory of one story from one source.
struct TrajectorySignal {
  std::string story_id;
  SignalSource source;
  std::vector<double> valence;
  std::vector<double> arousal;

  std::size_t size() const { return valence.size(); }
  const std::vector<double>& dim(std::size_t d) const { return d == 0 ? valence : arousal; }
  std::vector<double>& dim(std::size_t d) { return d == 0 ? valence : arousal; }

  bool operator==(const TrajectorySignal&) const = default;
};

inline constexpr const char* kDimensionNames[2] = {"valence", "arousal"};

/// Length agreement and the [0,1] range.
inline void validate(const TrajectorySignal& s) {
  if (s.valence.size() != s.arousal.size())
    throw DataError("signal " + s.story_id + ": valence/arousal length mismatch");
  for (std::size_t d = 0; d < 2; ++d)
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double v = s.dim(d)[i];
      if (!(v >= 0.0 && v <= 1.0))
        throw DataError("signal " + s.story_id + ": " + kDimensionNames[d] + " out of [0,1] at index " +
                        std::to_string(i));
    }
}

}  // namespace emoarc::fusion
