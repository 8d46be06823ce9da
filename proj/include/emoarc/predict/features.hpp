#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "emoarc/mapping/lexicon.hpp"
#include "emoarc/predict/windows.hpp"
#include "emoarc/util.hpp"

namespace emoarc::predict {

/// Hashed bag-of-words buckets (FNV-1a 32 of the lowercase token, low 15 bits)
/// followed by the two lexicon-mean features.
inline constexpr std::uint32_t kHashBits = 15;
inline constexpr std::uint32_t kHashBuckets = 1u << kHashBits;
inline constexpr std::uint32_t kLexiconValenceFeature = kHashBuckets;
inline constexpr std::uint32_t kLexiconArousalFeature = kHashBuckets + 1;
inline constexpr std::uint32_t kFeatureDim = kHashBuckets + 2;

/// Sparse feature vector, sorted by index, no duplicates.
using FeatureVector = std::vector<std::pair<std::uint32_t, double>>;

inline std::uint32_t token_bucket(const std::string& token) { return fnv1a32(token) & (kHashBuckets - 1); }

/// Features of one context window. Sentence j contributes with weight
/// 1 / (1 + |j - center|). Bucket values are weighted token counts divided by
/// the total weighted token count; the lexicon features are the weighted
/// mean VA of matched tokens (neutral anchor when none match).
inline FeatureVector window_features(std::span<const std::string> sentences, const ContextInput& window,
                                     const mapping::VadLexicon& lexicon) {
  std::map<std::uint32_t, double> buckets;
  double mass = 0.0, lex_v = 0.0, lex_a = 0.0, lex_mass = 0.0;
  for (std::size_t j = window.lo; j <= window.hi; ++j) {
    const std::size_t dist = j > window.center_index ? j - window.center_index : window.center_index - j;
    const double w = 1.0 / (1.0 + static_cast<double>(dist));
    for (const auto& tok : word_tokens(sentences[j])) {
      buckets[token_bucket(tok)] += w;
      mass += w;
      if (auto it = lexicon.entries.find(tok); it != lexicon.entries.end()) {
        lex_v += w * it->second.valence();
        lex_a += w * it->second.arousal();
        lex_mass += w;
      }
    }
  }
  FeatureVector f;
  f.reserve(buckets.size() + 2);
  for (const auto& [b, v] : buckets) f.emplace_back(b, v / mass);
  if (lex_mass > 0.0) {
    f.emplace_back(kLexiconValenceFeature, lex_v / lex_mass);
    f.emplace_back(kLexiconArousalFeature, lex_a / lex_mass);
  } else {
    f.emplace_back(kLexiconValenceFeature, mapping::kNeutralAnchor.valence());
    f.emplace_back(kLexiconArousalFeature, mapping::kNeutralAnchor.arousal());
  }
  return f;
}

inline std::vector<FeatureVector> sequence_features(std::span<const std::string> sentences, const WindowSpec& spec,
                                                    const mapping::VadLexicon& lexicon) {
  std::vector<FeatureVector> out;
  for (const auto& w : build_windows(sentences, spec)) out.push_back(window_features(sentences, w, lexicon));
  return out;
}

}  // namespace emoarc::predict
