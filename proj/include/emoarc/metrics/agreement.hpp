#pragma once

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "emoarc/corpus/types.hpp"
#include "emoarc/error.hpp"

namespace emoarc::metrics {

/// Nominal-level Krippendorff's alpha from the coincidence matrix.
/// Each unit is the multiset of category codes assigned to it; units with
/// fewer than two values are not pairable and contribute nothing. When all
/// pairable values share one category the expected disagreement is zero and
/// alpha is defined as 1.
inline double krippendorff_alpha(const std::vector<std::vector<int>>& units) {
  std::map<int, std::size_t> index;
  for (const auto& u : units)
    if (u.size() >= 2)
      for (int v : u) index.emplace(v, 0);
  if (index.empty()) throw ValidationError("krippendorff_alpha: no unit has two or more values");
  std::size_t k = 0;
  for (auto& [v, i] : index) i = k++;

  std::vector<double> coincidence(k * k, 0.0);
  std::vector<std::size_t> counts(k);
  for (const auto& u : units) {
    const std::size_t m = u.size();
    if (m < 2) continue;
    std::fill(counts.begin(), counts.end(), 0);
    for (int v : u) ++counts[index[v]];
    const double w = 1.0 / static_cast<double>(m - 1);
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t d = 0; d < k; ++d) {
        if (counts[d] == 0) continue;
        const double pairs = c == d ? static_cast<double>(counts[c] * (counts[c] - 1))
                                    : static_cast<double>(counts[c] * counts[d]);
        coincidence[c * k + d] += pairs * w;
      }
    }
  }
  std::vector<double> marginal(k, 0.0);
  double n = 0.0;
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t d = 0; d < k; ++d) marginal[c] += coincidence[c * k + d];
  for (double m : marginal) n += m;

  double observed = 0.0, expected = 0.0;
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t d = 0; d < k; ++d)
      if (c != d) {
        observed += coincidence[c * k + d];
        expected += marginal[c] * marginal[d];
      }
  if (expected == 0.0) return 1.0;
  return 1.0 - (n - 1.0) * observed / expected;
}

/// One unit per sentence holding the labels of the chosen annotators (all
/// annotators when the subset is empty). Labels are pooled into one space
/// regardless of scheme.
inline std::vector<std::vector<int>> label_units(const std::vector<corpus::Story>& stories,
                                                 const std::vector<corpus::AnnotatorId>& annotators) {
  std::vector<std::vector<int>> units;
  for (const auto& st : stories)
    for (const auto& s : st.sentences) {
      std::vector<int> u;
      if (annotators.empty()) {
        for (const auto& [a, l] : s.labels) u.push_back(static_cast<int>(l));
      } else {
        for (const auto& a : annotators)
          if (auto it = s.labels.find(a); it != s.labels.end()) u.push_back(static_cast<int>(it->second));
      }
      units.push_back(std::move(u));
    }
  return units;
}

struct AlphaSummary {
  double alpha_sentence = 0.0;
  double alpha_story_mean = 0.0;
  double alpha_story_std = 0.0;  // population
  std::size_t stories = 0;
};

struct AgreementReport {
  AlphaSummary overall;
  std::map<std::string, double> per_story;
  std::map<std::string, AlphaSummary> per_author;
  std::vector<corpus::AnnotatorId> annotator_set;
};

namespace detail {

inline AlphaSummary summarize(const std::vector<corpus::Story>& stories,
                              const std::vector<corpus::AnnotatorId>& annotators,
                              const std::map<std::string, double>& per_story) {
  AlphaSummary s;
  s.alpha_sentence = krippendorff_alpha(label_units(stories, annotators));
  s.stories = stories.size();
  double sum = 0.0;
  for (const auto& st : stories) sum += per_story.at(st.story_id);
  s.alpha_story_mean = sum / static_cast<double>(stories.size());
  double ss = 0.0;
  for (const auto& st : stories) {
    const double d = per_story.at(st.story_id) - s.alpha_story_mean;
    ss += d * d;
  }
  s.alpha_story_std = std::sqrt(ss / static_cast<double>(stories.size()));
  return s;
}

}  // namespace detail

/// Sentence-level alpha over pooled sentences, per-story alphas with their
/// mean and spread, and the same breakdown per author.
inline AgreementReport alpha_report(const std::vector<corpus::Story>& stories,
                                    const std::vector<corpus::AnnotatorId>& annotators) {
  if (stories.empty()) throw ValidationError("alpha_report: empty corpus");
  for (const auto& st : stories)
    for (const auto& s : st.sentences)
      for (const auto& a : annotators)
        if (!s.labels.count(a))
          throw DataError("alpha_report: annotator " + a + " missing at " + st.story_id + "/" + std::to_string(s.index));

  AgreementReport r;
  r.annotator_set = annotators;
  for (const auto& st : stories) r.per_story[st.story_id] = krippendorff_alpha(label_units({st}, annotators));
  r.overall = detail::summarize(stories, annotators, r.per_story);
  std::map<std::string, std::vector<corpus::Story>> groups;
  for (const auto& st : stories) groups[std::string(corpus::to_string(st.author))].push_back(st);
  for (const auto& [author, group] : groups) r.per_author[author] = detail::summarize(group, annotators, r.per_story);
  return r;
}

/// Per-story alpha over all available labels, as used for low-agreement
/// filtering.
inline std::map<std::string, double> story_alphas(const std::vector<corpus::Story>& stories,
                                                  const std::vector<corpus::AnnotatorId>& annotators = {}) {
  std::map<std::string, double> out;
  for (const auto& st : stories) out[st.story_id] = krippendorff_alpha(label_units({st}, annotators));
  return out;
}

struct ConfusionMatrix {
  std::vector<corpus::EmotionLabel> labels_row;
  std::vector<corpus::EmotionLabel> labels_col;
  std::vector<std::vector<std::size_t>> counts;

  std::size_t total() const {
    std::size_t t = 0;
    for (const auto& r : counts)
      for (auto c : r) t += c;
    return t;
  }

  std::size_t at(corpus::EmotionLabel row, corpus::EmotionLabel col) const {
    for (std::size_t i = 0; i < labels_row.size(); ++i)
      if (labels_row[i] == row)
        for (std::size_t j = 0; j < labels_col.size(); ++j)
          if (labels_col[j] == col) return counts[i][j];
    throw ValidationError("label not in confusion matrix");
  }
};

/// Rows: annotator a, columns: annotator b. Each axis lists the annotator's
/// label scheme (the six-label scheme when declared reduced). Sentences
/// lacking either label are skipped.
inline ConfusionMatrix confusion(const std::vector<corpus::Story>& stories, const corpus::AnnotatorId& a,
                                 const corpus::AnnotatorId& b,
                                 const std::set<corpus::AnnotatorId>& reduced = {"a3"}) {
  ConfusionMatrix m;
  auto scheme = [&](const corpus::AnnotatorId& id) {
    if (reduced.count(id)) return std::vector<corpus::EmotionLabel>(corpus::kReducedLabels.begin(), corpus::kReducedLabels.end());
    return std::vector<corpus::EmotionLabel>(corpus::kAllLabels.begin(), corpus::kAllLabels.end());
  };
  m.labels_row = scheme(a);
  m.labels_col = scheme(b);
  m.counts.assign(m.labels_row.size(), std::vector<std::size_t>(m.labels_col.size(), 0));
  auto pos = [](const std::vector<corpus::EmotionLabel>& ls, corpus::EmotionLabel l) -> std::size_t {
    for (std::size_t i = 0; i < ls.size(); ++i)
      if (ls[i] == l) return i;
    throw DataError("label outside annotator scheme: " + std::string(corpus::to_string(l)));
  };
  for (const auto& st : stories)
    for (const auto& s : st.sentences) {
      auto ia = s.labels.find(a);
      auto ib = s.labels.find(b);
      if (ia == s.labels.end() || ib == s.labels.end()) continue;
      ++m.counts[pos(m.labels_row, ia->second)][pos(m.labels_col, ib->second)];
    }
  return m;
}

inline std::string confusion_csv(const ConfusionMatrix& m) {
  std::string out = "label";
  for (auto l : m.labels_col) out += "," + std::string(corpus::to_string(l));
  out += '\n';
  for (std::size_t i = 0; i < m.labels_row.size(); ++i) {
    out += corpus::to_string(m.labels_row[i]);
    for (auto c : m.counts[i]) out += "," + std::to_string(c);
    out += '\n';
  }
  return out;
}

}  // namespace emoarc::metrics
