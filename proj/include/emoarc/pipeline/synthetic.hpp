#pragma once

#include <cmath>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "emoarc/corpus/io.hpp"
#include "emoarc/corpus/types.hpp"
#include "emoarc/fusion/io.hpp"
#include "emoarc/mapping/lexicon.hpp"
#include "emoarc/mapping/va.hpp"
#include "emoarc/predict/linear_model.hpp"
#include "emoarc/random.hpp"

namespace emoarc::pipeline {

/// Synthetic labeled + unlabeled corpora whose gold trajectory is a known
/// function of lexicon content:
///   gold_d = logistic(slope * (lexicon_mean_d - 0.5) + noise * N(0,1))
/// where lexicon_mean_d is the mean lexicon value of the sentence's words.
/// Each annotator labels a sentence with the table label nearest (in VA) to a
/// jittered copy of the gold point.
struct SyntheticSpec {
  std::size_t stories = 200;
  std::size_t documents = 60;
  std::size_t min_sentences = 8;
  std::size_t max_sentences = 30;
  std::size_t lexicon_words = 120;
  std::size_t filler_words = 60;
  double slope = 4.0;
  double noise = 0.05;
  double annotator_jitter = 0.12;
  std::uint64_t seed = 7;
};

struct SyntheticData {
  std::vector<corpus::Story> stories;
  fusion::SignalMap gold;
  corpus::UnlabeledCorpus unlabeled;
  std::string lexicon_tsv;
};

namespace detail {

inline std::string synth_word(std::size_t k) {
  static constexpr const char* syll[] = {"ba", "ko", "mi", "ru", "te", "sa", "no", "li", "fa", "du",
                                         "pe", "zo", "gi", "hu", "ve", "ra"};
  std::string w;
  for (int i = 0; i < 3; ++i) {
    w += syll[k % 16];
    k /= 16;
  }
  return w;
}

inline corpus::EmotionLabel nearest_label(double v, double a, bool reduced, const mapping::LabelMap& table) {
  corpus::EmotionLabel best = corpus::EmotionLabel::neutral;
  double best_d = std::numeric_limits<double>::infinity();
  for (auto l : corpus::kAllLabels) {
    if (reduced && !corpus::in_reduced_scheme(l)) continue;
    const double dv = table[l].valence() - v, da = table[l].arousal() - a;
    const double dist = dv * dv + da * da;
    if (dist < best_d) {
      best_d = dist;
      best = l;
    }
  }
  return best;
}

}  // namespace detail

inline SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  Rng rng(spec.seed);
  const auto table = mapping::LabelMap::standard();
  SyntheticData out;

  std::vector<std::string> lex_words, fillers;
  std::vector<std::pair<double, double>> lex_values;
  for (std::size_t k = 0; k < spec.lexicon_words; ++k) {
    lex_words.push_back(detail::synth_word(k));
    lex_values.emplace_back(0.05 + 0.9 * rng.uniform(), 0.05 + 0.9 * rng.uniform());
  }
  for (std::size_t k = 0; k < spec.filler_words; ++k) fillers.push_back(detail::synth_word(spec.lexicon_words + k));
  out.lexicon_tsv = "Word\tValence\tArousal\tDominance\n";
  for (std::size_t k = 0; k < lex_words.size(); ++k)
    out.lexicon_tsv += lex_words[k] + "\t" + format_fixed(lex_values[k].first, 3) + "\t" +
                       format_fixed(lex_values[k].second, 3) + "\t0.500\n";
  // Round-trip the 3-decimal values so generation sees exactly what is loaded.
  for (auto& [v, a] : lex_values) {
    v = std::round(v * 1000.0) / 1000.0;
    a = std::round(a * 1000.0) / 1000.0;
  }

  auto sentence = [&](double& mv, double& ma) {
    const std::size_t hits = 1 + rng.below(3), filler = 2 + rng.below(5);
    std::vector<std::string> words;
    mv = ma = 0.0;
    for (std::size_t h = 0; h < hits; ++h) {
      const auto k = rng.below(lex_words.size());
      words.push_back(lex_words[k]);
      mv += lex_values[k].first;
      ma += lex_values[k].second;
    }
    mv /= static_cast<double>(hits);
    ma /= static_cast<double>(hits);
    for (std::size_t f = 0; f < filler; ++f) words.push_back(fillers[rng.below(fillers.size())]);
    rng.shuffle(words);
    std::string text;
    for (const auto& w : words) text += (text.empty() ? "" : " ") + w;
    text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
    return text + ".";
  };
  auto length = [&] { return spec.min_sentences + rng.below(spec.max_sentences - spec.min_sentences + 1); };

  for (std::size_t s = 0; s < spec.stories; ++s) {
    corpus::Story story;
    char id[32];
    std::snprintf(id, sizeof id, "story_%04zu", s);
    story.story_id = id;
    const double u = rng.uniform();
    story.author = u < 0.45 ? corpus::Author::Grimm : u < 0.85 ? corpus::Author::HCA : corpus::Author::Potter;
    fusion::TrajectorySignal g;
    g.story_id = id;
    const std::size_t n = length();
    for (std::size_t i = 0; i < n; ++i) {
      double mv = 0, ma = 0;
      corpus::AnnotatedSentence sent;
      sent.story_id = id;
      sent.index = i;
      sent.text = sentence(mv, ma);
      const double gv = predict::logistic(spec.slope * (mv - 0.5) + spec.noise * rng.normal());
      const double ga = predict::logistic(spec.slope * (ma - 0.5) + spec.noise * rng.normal());
      g.valence.push_back(gv);
      g.arousal.push_back(ga);
      for (const char* ann : {"a1", "a2", "a3"}) {
        const double jv = gv + spec.annotator_jitter * rng.normal();
        const double ja = ga + spec.annotator_jitter * rng.normal();
        sent.labels[ann] = detail::nearest_label(jv, ja, std::string(ann) == "a3", table);
      }
      story.sentences.push_back(std::move(sent));
    }
    out.gold.emplace(id, std::move(g));
    out.stories.push_back(std::move(story));
  }
  for (std::size_t d = 0; d < spec.documents; ++d) {
    corpus::Document doc;
    doc.doc_id = "doc_" + std::to_string(d);
    const std::size_t n = length();
    for (std::size_t i = 0; i < n; ++i) {
      double mv = 0, ma = 0;
      doc.sentences.push_back(sentence(mv, ma));
    }
    out.unlabeled.documents.push_back(std::move(doc));
  }
  return out;
}

/// Writes labeled.tsv, gold.tsv, lexicon.tsv, unlabeled.jsonl and a
/// pipeline.cfg that wires them together.
inline void write_synthetic(const SyntheticData& data, const std::string& dir, std::uint64_t seed,
                            const std::string& backend = "linear", std::size_t context = 1) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path p(dir);
  write_file((p / "labeled.tsv").string(), corpus::format_labeled(data.stories));
  write_file((p / "gold.tsv").string(), fusion::format_signals(data.gold));
  write_file((p / "lexicon.tsv").string(), data.lexicon_tsv);
  write_file((p / "unlabeled.jsonl").string(), corpus::format_unlabeled_jsonl(data.unlabeled));
  std::string cfg =
      "# synthetic pipeline run\n"
      "labeled_corpus = labeled.tsv\n"
      "unlabeled_corpus = unlabeled.jsonl\n"
      "lexicon = lexicon.tsv\n"
      "gold = gold.tsv\n";
  cfg += "backend = " + backend + "\n";
  cfg += "context = " + std::to_string(context) + "\n";
  cfg += "seed = " + std::to_string(seed) + "\n";
  cfg += "l2 = 0.01,0.1,1\nanchor = 0.1,1,10\nhalf_life = 0,1\n";
  write_file((p / "pipeline.cfg").string(), cfg);
}

}  // namespace emoarc::pipeline
