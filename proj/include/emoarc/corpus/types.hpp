#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "emoarc/error.hpp"

namespace emoarc::corpus {

enum class EmotionLabel {
  anger,
  disgust,
  fear,
  happiness,
  negative_surprise,
  neutral,
  positive_surprise,
  sadness,
};

inline constexpr std::array<EmotionLabel, 8> kAllLabels = {
    EmotionLabel::anger,     EmotionLabel::disgust,           EmotionLabel::fear,
    EmotionLabel::happiness, EmotionLabel::negative_surprise, EmotionLabel::neutral,
    EmotionLabel::positive_surprise, EmotionLabel::sadness,
};

/// The six-label scheme: no surprise variants.
inline constexpr std::array<EmotionLabel, 6> kReducedLabels = {
    EmotionLabel::anger,   EmotionLabel::disgust, EmotionLabel::fear,
    EmotionLabel::happiness, EmotionLabel::neutral, EmotionLabel::sadness,
};

inline constexpr bool in_reduced_scheme(EmotionLabel l) {
  return l != EmotionLabel::positive_surprise && l != EmotionLabel::negative_surprise;
}

inline constexpr std::size_t label_index(EmotionLabel l) { return static_cast<std::size_t>(l); }

inline std::string_view to_string(EmotionLabel l) {
  switch (l) {
    case EmotionLabel::anger: return "anger";
    case EmotionLabel::disgust: return "disgust";
    case EmotionLabel::fear: return "fear";
    case EmotionLabel::happiness: return "happiness";
    case EmotionLabel::negative_surprise: return "negative_surprise";
    case EmotionLabel::neutral: return "neutral";
    case EmotionLabel::positive_surprise: return "positive_surprise";
    case EmotionLabel::sadness: return "sadness";
  }
  return "?";
}

inline std::optional<EmotionLabel> parse_label(std::string_view token) {
  for (auto l : kAllLabels)
    if (to_string(l) == token) return l;
  return std::nullopt;
}

enum class Author { Grimm, HCA, Potter, Other };

inline constexpr std::array<Author, 4> kAllAuthors = {Author::Grimm, Author::HCA, Author::Potter,
                                                      Author::Other};

inline std::string_view to_string(Author a) {
  switch (a) {
    case Author::Grimm: return "Grimm";
    case Author::HCA: return "HCA";
    case Author::Potter: return "Potter";
    case Author::Other: return "Other";
  }
  return "?";
}

inline std::optional<Author> parse_author(std::string_view token) {
  for (auto a : kAllAuthors)
    if (to_string(a) == token) return a;
  return std::nullopt;
}

using AnnotatorId = std::string;

struct AnnotatedSentence {
  std::string story_id;
  std::size_t index = 0;
  std::string text;
  std::map<AnnotatorId, EmotionLabel> labels;

  bool operator==(const AnnotatedSentence&) const = default;
};

struct Story {
  std::string story_id;
  Author author = Author::Other;
  std::vector<AnnotatedSentence> sentences;

  std::size_t size() const { return sentences.size(); }
  bool operator==(const Story&) const = default;
};

enum class PartitionName { train, dev, test };

inline constexpr std::array<PartitionName, 3> kAllPartitions = {
    PartitionName::train, PartitionName::dev, PartitionName::test};

inline std::string_view to_string(PartitionName p) {
  switch (p) {
    case PartitionName::train: return "train";
    case PartitionName::dev: return "dev";
    case PartitionName::test: return "test";
  }
  return "?";
}

inline std::optional<PartitionName> parse_partition(std::string_view token) {
  for (auto p : kAllPartitions)
    if (to_string(p) == token) return p;
  return std::nullopt;
}

struct Partition {
  PartitionName name = PartitionName::train;
  std::vector<std::string> story_ids;  // sorted

  bool operator==(const Partition&) const = default;
};

struct Document {
  std::string doc_id;
  std::vector<std::string> sentences;

  bool operator==(const Document&) const = default;
};

struct UnlabeledCorpus {
  std::vector<Document> documents;

  std::size_t sentence_count() const {
    std::size_t n = 0;
    for (const auto& d : documents) n += d.sentences.size();
    return n;
  }
};

/// Sentence texts of a story, in order.
inline std::vector<std::string> sentence_texts(const Story& story) {
  std::vector<std::string> out;
  out.reserve(story.sentences.size());
  for (const auto& s : story.sentences) out.push_back(s.text);
  return out;
}

inline const Story& find_story(const std::vector<Story>& stories, std::string_view id) {
  for (const auto& s : stories)
    if (s.story_id == id) return s;
  throw DataError("unknown story_id: " + std::string(id));
}

}  // namespace emoarc::corpus
