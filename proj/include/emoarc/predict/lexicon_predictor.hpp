#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "emoarc/error.hpp"
#include "emoarc/fusion/signal.hpp"
#include "emoarc/mapping/lexicon.hpp"
#include "emoarc/util.hpp"

namespace emoarc::predict {

/// Mean lexicon VA over the matched word tokens of a sentence; the neutral
/// anchor when nothing matches.
inline std::pair<double, double> sentence_lexicon_mean(const std::string& sentence, const mapping::VadLexicon& lexicon) {
  double v = 0.0, a = 0.0;
  std::size_t hits = 0;
  for (const auto& tok : word_tokens(sentence)) {
    auto it = lexicon.entries.find(tok);
    if (it == lexicon.entries.end()) continue;
    v += it->second.valence();
    a += it->second.arousal();
    ++hits;
  }
  if (hits == 0) return {mapping::kNeutralAnchor.valence(), mapping::kNeutralAnchor.arousal()};
  return {v / static_cast<double>(hits), a / static_cast<double>(hits)};
}

/// Per-step carry-over for exponential smoothing with the given half-life
/// (in sentences): 2^(-1/h), or 0 for h = 0.
inline double smoothing_decay(double half_life) {
  if (!(half_life >= 0.0)) throw ValidationError("half-life must be non-negative");
  return half_life == 0.0 ? 0.0 : std::exp2(-1.0 / half_life);
}

/// Lexicon baseline: per-sentence lexicon means, exponentially smoothed along
/// the story: out[0] = raw[0], out[i] = (1 - q) raw[i] + q out[i-1].
inline fusion::TrajectorySignal lexicon_predict(const std::string& story_id, std::span<const std::string> sentences,
                                                const mapping::VadLexicon& lexicon, double half_life,
                                                const std::string& run_id = "lexicon") {
  const double q = smoothing_decay(half_life);
  fusion::TrajectorySignal sig;
  sig.story_id = story_id;
  sig.source = {fusion::SourceKind::prediction, run_id};
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    auto [v, a] = sentence_lexicon_mean(sentences[i], lexicon);
    if (i > 0 && q > 0.0) {
      v = (1.0 - q) * v + q * sig.valence.back();
      a = (1.0 - q) * a + q * sig.arousal.back();
    }
    sig.valence.push_back(std::clamp(v, 0.0, 1.0));
    sig.arousal.push_back(std::clamp(a, 0.0, 1.0));
  }
  return sig;
}

}  // namespace emoarc::predict
