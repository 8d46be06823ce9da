#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "emoarc/corpus/types.hpp"
#include "emoarc/error.hpp"
#include "emoarc/fusion/io.hpp"

namespace emoarc::predict {

struct PredictionSet {
  std::string run_id;
  fusion::SignalMap signals;
};

/// Checks every predicted story against the corpus: the story must exist and
/// be covered sentence for sentence.
inline void validate_coverage(const fusion::SignalMap& signals, const std::map<std::string, std::size_t>& lengths) {
  for (const auto& [id, s] : signals) {
    auto it = lengths.find(id);
    if (it == lengths.end()) throw DataError("predictions name unknown story_id " + id);
    if (s.size() < it->second)
      throw DataError("coverage gap: story " + id + " missing index " + std::to_string(s.size()));
    if (s.size() > it->second)
      throw DataError("coverage gap: story " + id + " has index " + std::to_string(it->second) +
                      " beyond its " + std::to_string(it->second) + " sentences");
  }
}

inline std::map<std::string, std::size_t> story_lengths(const std::vector<corpus::Story>& stories) {
  std::map<std::string, std::size_t> out;
  for (const auto& s : stories) out[s.story_id] = s.size();
  return out;
}

/// Reads a predictions TSV (gold-export layout after a "# run_id=" line).
/// Without that line the run id is the file stem.
inline PredictionSet parse_external_predictions(const std::string& content, const std::vector<corpus::Story>& stories,
                                                const std::string& path = "<predictions>") {
  auto file = fusion::parse_signals(content, fusion::SourceKind::prediction, path);
  PredictionSet set;
  set.run_id = file.run_id.value_or(std::filesystem::path(path).stem().string());
  for (auto& [id, s] : file.signals) s.source = {fusion::SourceKind::prediction, set.run_id};
  set.signals = std::move(file.signals);
  validate_coverage(set.signals, story_lengths(stories));
  return set;
}

inline PredictionSet load_external_predictions(const std::string& path, const std::vector<corpus::Story>& stories) {
  return parse_external_predictions(read_file(path), stories, path);
}

}  // namespace emoarc::predict
