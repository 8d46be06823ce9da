#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "emoarc/corpus/io.hpp"
#include "emoarc/corpus/operations.hpp"
#include "emoarc/fusion/ewe.hpp"
#include "emoarc/fusion/io.hpp"
#include "emoarc/mapping/lexicon.hpp"
#include "emoarc/metrics/agreement.hpp"
#include "emoarc/pipeline/config.hpp"
#include "emoarc/pipeline/evaluation.hpp"
#include "emoarc/predict/external.hpp"
#include "emoarc/predict/lexicon_predictor.hpp"
#include "emoarc/predict/linear_model.hpp"

namespace emoarc::pipeline {

/// A trained (or parameterized) predictor of either backend.
struct ModelArtifact {
  Backend backend = Backend::linear;
  predict::LinearModel linear;  // linear backend
  double half_life = 0.0;       // lexicon backend
  std::string lexicon;

  std::string serialize() const {
    if (backend == Backend::linear) return linear.serialize();
    return "emoarc-lexicon-model 1\nlexicon " + lexicon + "\nhalf_life " + format_exact(half_life) + "\n";
  }
  std::string digest() const { return hex64(fnv1a64(serialize())); }

  fusion::TrajectorySignal predict(const std::string& id, std::span<const std::string> sentences,
                                   const mapping::VadLexicon& lex, const predict::WindowSpec& spec,
                                   const std::string& run_id) const {
    if (backend == Backend::lexicon) return predict::lexicon_predict(id, sentences, lex, half_life, run_id);
    return predict::predict_linear(linear, id, sentences, lex, spec, run_id);
  }
};

/// Everything the stages share: corpus, gold, split, lexicon.
struct RunData {
  PipelineConfig config;
  std::vector<corpus::Story> stories;
  std::vector<std::string> removed_low_agreement;
  fusion::SignalMap gold;
  std::vector<corpus::Partition> partitions;
  mapping::VadLexicon lexicon;
  corpus::UnlabeledCorpus unlabeled;
  std::vector<std::string> warnings;

  const corpus::Partition& partition(corpus::PartitionName p) const {
    return partitions[static_cast<std::size_t>(p)];
  }
};

/// Default split when no counts are configured: 70/15/15 by story, rounded
/// down for dev and test.
inline corpus::SplitTargets default_targets(std::size_t n) {
  const std::size_t dev = n * 15 / 100, test = n * 15 / 100;
  return {n - dev - test, dev, test};
}

inline RunData prepare(const PipelineConfig& config) {
  RunData data;
  data.config = config;
  data.stories = corpus::ingest_labeled(config.labeled_corpus);
  if (config.low_agreement_k > 0.0) {
    auto filtered = corpus::remove_low_agreement(data.stories, metrics::story_alphas(data.stories), config.low_agreement_k);
    data.stories = std::move(filtered.kept);
    data.removed_low_agreement = std::move(filtered.removed);
  }
  const auto table = config.label_table ? mapping::parse_label_table(read_file(*config.label_table), *config.label_table)
                                        : mapping::LabelMap::standard();
  if (config.gold) {
    auto file = fusion::parse_signals(read_file(*config.gold), fusion::SourceKind::gold, *config.gold);
    const auto lengths = predict::story_lengths(data.stories);
    for (auto& [id, s] : file.signals) {
      auto it = lengths.find(id);
      if (it == lengths.end()) continue;  // e.g. removed as low-agreement
      if (it->second != s.size()) throw DataError("gold for story " + id + " does not match its length");
      data.gold.emplace(id, std::move(s));
    }
    for (const auto& [id, n] : lengths)
      if (!data.gold.count(id)) throw DataError("gold file lacks story " + id);
  } else {
    data.gold = fusion::gold_standard(data.stories, table, config.ewe);
  }

  std::optional<std::map<std::string, corpus::PartitionName>> manifest;
  if (config.split_manifest) manifest = corpus::parse_manifest(read_file(*config.split_manifest), *config.split_manifest);
  const auto targets = config.split_counts
                           ? corpus::SplitTargets{(*config.split_counts)[0], (*config.split_counts)[1], (*config.split_counts)[2]}
                           : default_targets(data.stories.size());
  data.partitions = corpus::stratified_split(data.stories, targets, config.seed, manifest);

  if (config.exclude_author) {
    // Leave-one-author-out: the author is removed from train and dev and is
    // the only author kept in test.
    std::map<std::string, corpus::Author> author_of;
    for (const auto& s : data.stories) author_of[s.story_id] = s.author;
    for (auto& p : data.partitions) {
      std::vector<std::string> keep;
      for (const auto& id : p.story_ids) {
        const bool is_author = author_of[id] == *config.exclude_author;
        if (is_author == (p.name == corpus::PartitionName::test)) keep.push_back(id);
      }
      p.story_ids = std::move(keep);
    }
  }

  data.lexicon = mapping::load_lexicon(config.lexicon).lexicon;
  data.unlabeled = corpus::ingest_unlabeled(config.unlabeled_corpus);
  return data;
}

/// Training examples of a set of sequences: window features and targets.
struct TrainingSet {
  std::vector<predict::FeatureVector> features;
  std::vector<std::array<double, 2>> targets;
};

inline void append_examples(TrainingSet& set, std::span<const std::string> sentences, const fusion::TrajectorySignal& target,
                            const predict::WindowSpec& spec, const mapping::VadLexicon& lex) {
  auto f = predict::sequence_features(sentences, spec, lex);
  for (std::size_t i = 0; i < f.size(); ++i) {
    set.features.push_back(std::move(f[i]));
    set.targets.push_back({target.valence[i], target.arousal[i]});
  }
}

inline TrainingSet labeled_examples(const RunData& data, corpus::PartitionName p) {
  TrainingSet set;
  for (const auto& id : data.partition(p).story_ids) {
    const auto& story = corpus::find_story(data.stories, id);
    append_examples(set, corpus::sentence_texts(story), data.gold.at(id), data.config.window, data.lexicon);
  }
  return set;
}

inline fusion::SignalMap predict_stories(const ModelArtifact& model, const RunData& data, const std::vector<std::string>& ids,
                                         const std::string& run_id) {
  fusion::SignalMap out;
  for (const auto& id : ids) {
    const auto& story = corpus::find_story(data.stories, id);
    out.emplace(id, model.predict(id, corpus::sentence_texts(story), data.lexicon, data.config.window, run_id));
  }
  return out;
}

/// Mean of valence and arousal CCC over the concatenated dev partition;
/// nothing when dev is empty or the CCC is undefined.
inline std::optional<double> dev_score(const ModelArtifact& model, const RunData& data) {
  const auto& dev = data.partition(corpus::PartitionName::dev);
  if (dev.story_ids.empty()) return std::nullopt;
  const auto preds = predict_stories(model, data, dev.story_ids, "dev");
  const auto report = evaluate_run(preds, data.gold, data.stories, data.partitions, {corpus::PartitionName::dev});
  const auto& d = report.partitions.front().dims;
  if (!d[0].overall_ccc || !d[1].overall_ccc) return std::nullopt;
  return 0.5 * (*d[0].overall_ccc + *d[1].overall_ccc);
}

struct StageResult {
  ModelArtifact model;
  std::optional<double> dev_score;
  std::vector<std::pair<double, std::optional<double>>> grid;  // (hyperparameter, dev score)
  double seconds = 0.0;
};

namespace detail {

inline bool better(const std::optional<double>& a, const std::optional<double>& b) {
  return a && (!b || *a > *b);
}

template <typename Fn>
StageResult select_by_dev(const std::vector<double>& grid, const RunData& data, Fn&& make) {
  StageResult best;
  bool have = false;
  for (double h : grid) {
    auto model = make(h);
    auto score = dev_score(model, data);
    if (!have || detail::better(score, best.dev_score)) {
      best.model = std::move(model);
      best.dev_score = score;
      have = true;
    }
    best.grid.emplace_back(h, score);
  }
  return best;
}

inline ModelArtifact lexicon_model(double half_life, const RunData& data) {
  ModelArtifact m;
  m.backend = Backend::lexicon;
  m.half_life = half_life;
  m.lexicon = data.lexicon.name;
  return m;
}

inline ModelArtifact linear_model(predict::LinearModel lm, const RunData& data) {
  lm.window = data.config.window;
  lm.lexicon = data.lexicon.name;
  ModelArtifact m;
  m.backend = Backend::linear;
  m.linear = std::move(lm);
  m.lexicon = data.lexicon.name;
  return m;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace detail

/// Step 1: fit on the labeled train partition, choosing the hyperparameter
/// (l2, or half-life for the lexicon backend) with the best dev score.
inline StageResult run_stage1_train(const RunData& data) {
  detail::Stopwatch sw;
  if (data.partition(corpus::PartitionName::train).story_ids.empty())
    throw DataError("stage 1: empty train partition");
  StageResult r;
  if (data.config.backend == Backend::lexicon) {
    r = detail::select_by_dev(data.config.half_life, data, [&](double h) { return detail::lexicon_model(h, data); });
  } else {
    const auto train = labeled_examples(data, corpus::PartitionName::train);
    r = detail::select_by_dev(data.config.l2, data, [&](double l2) {
      return detail::linear_model(predict::train_linear(train.features, train.targets, l2), data);
    });
  }
  r.seconds = sw.seconds();
  return r;
}

struct PseudoLabeledCorpus {
  corpus::UnlabeledCorpus corpus;
  predict::PredictionSet predictions;
};

/// Step 2: label the unlabeled corpus with the stage-1 model.
inline PseudoLabeledCorpus run_stage2_pseudolabel(const ModelArtifact& model, const RunData& data,
                                                  std::vector<std::string>* warnings = nullptr) {
  PseudoLabeledCorpus out;
  out.corpus = data.unlabeled;
  out.predictions.run_id = data.config.run_id + "-pseudo";
  if (data.unlabeled.documents.empty() && warnings) warnings->push_back("stage 2: unlabeled corpus is empty");
  for (const auto& doc : data.unlabeled.documents) {
    fusion::TrajectorySignal sig;
    try {
      sig = model.predict(doc.doc_id, doc.sentences, data.lexicon, data.config.window, out.predictions.run_id);
      fusion::validate(sig);
    } catch (const Error& e) {
      throw DataError("stage 2: prediction failed for document " + doc.doc_id + ": " + e.what());
    }
    if (sig.size() != doc.sentences.size()) throw DataError("stage 2: incomplete predictions for document " + doc.doc_id);
    out.predictions.signals.emplace(doc.doc_id, std::move(sig));
  }
  return out;
}

/// Step 3: a fresh model trained on pseudo-labels only. The lexicon backend
/// has nothing to train and passes its model through.
inline StageResult run_stage3_train_on_pseudo(const RunData& data, const PseudoLabeledCorpus& pseudo,
                                              const StageResult& stage1) {
  detail::Stopwatch sw;
  if (pseudo.corpus.sentence_count() == 0) throw DataError("stage 3: pseudo-labeled corpus is empty");
  StageResult r;
  if (data.config.backend == Backend::lexicon) {
    r.model = stage1.model;
  } else {
    TrainingSet set;
    for (const auto& doc : pseudo.corpus.documents)
      append_examples(set, doc.sentences, pseudo.predictions.signals.at(doc.doc_id), data.config.window, data.lexicon);
    const double l2 = data.config.pseudo_l2.value_or(stage1.model.linear.l2);
    r.model = detail::linear_model(predict::train_linear(set.features, set.targets, l2), data);
  }
  r.dev_score = dev_score(r.model, data);
  r.seconds = sw.seconds();
  return r;
}

/// Step 4: continue from the stage-3 model on the labeled train partition.
/// For the linear backend this is a re-solve with an anchor penalty toward
/// the stage-3 weights; the anchor strength is chosen on dev.
inline StageResult run_stage4_finetune(const RunData& data, const StageResult& stage3, const StageResult& stage1) {
  detail::Stopwatch sw;
  StageResult r;
  if (data.config.backend == Backend::lexicon) {
    r.model = stage3.model;
    r.dev_score = stage3.dev_score;
  } else {
    const auto train = labeled_examples(data, corpus::PartitionName::train);
    const double l2 = stage1.model.linear.l2;
    r = detail::select_by_dev(data.config.anchor, data, [&](double strength) {
      return detail::linear_model(
          predict::train_linear(train.features, train.targets, l2, predict::kFeatureDim, {&stage3.model.linear, strength}),
          data);
    });
  }
  r.seconds = sw.seconds();
  return r;
}

struct PipelineResult {
  RunData data;
  StageResult stage1, stage3, stage4;
  PseudoLabeledCorpus pseudo;
  fusion::SignalMap predictions;
  EvaluationReport report;
  nlohmann::ordered_json manifest;
};

inline nlohmann::ordered_json stage_json(const StageResult& s, const std::string& input_digest = "") {
  nlohmann::ordered_json j;
  j["model_digest"] = s.model.digest();
  if (!input_digest.empty()) j["input_model_digest"] = input_digest;
  j["dev_ccc_mean"] = opt_json(s.dev_score);
  auto grid = nlohmann::ordered_json::array();
  for (const auto& [h, score] : s.grid) grid.push_back({h, opt_json(score)});
  j["grid"] = grid;
  j["seconds"] = s.seconds;
  return j;
}

/// Runs the four steps and the final evaluation on dev and test. Writes
/// artifacts to out_dir when it is non-empty.
inline PipelineResult run_pipeline(const PipelineConfig& config, const std::string& out_dir) {
  detail::Stopwatch total;
  PipelineResult r;
  r.data = prepare(config);
  const auto& data = r.data;

  r.stage1 = run_stage1_train(data);
  detail::Stopwatch sw2;
  r.pseudo = run_stage2_pseudolabel(r.stage1.model, data, &r.data.warnings);
  const double stage2_seconds = sw2.seconds();
  r.stage3 = run_stage3_train_on_pseudo(data, r.pseudo, r.stage1);
  r.stage4 = run_stage4_finetune(data, r.stage3, r.stage1);

  std::vector<std::string> all_ids;
  for (const auto& s : data.stories) all_ids.push_back(s.story_id);
  r.predictions = predict_stories(r.stage4.model, data, all_ids, config.run_id);
  r.report = evaluate_run(r.predictions, data.gold, data.stories, data.partitions,
                          {corpus::PartitionName::dev, corpus::PartitionName::test}, config.run_id, config.digest());

  auto& m = r.manifest;
  m["schema"] = "emoarc.manifest/1";
  m["run_id"] = config.run_id;
  m["config_digest"] = config.digest();
  m["config"] = config.echo;
  m["stories"] = data.stories.size();
  m["removed_low_agreement"] = data.removed_low_agreement;
  m["partitions"] = nlohmann::ordered_json::object();
  for (const auto& p : data.partitions) m["partitions"][std::string(corpus::to_string(p.name))] = p.story_ids.size();
  m["stages"]["1_train"] = stage_json(r.stage1);
  m["stages"]["2_pseudolabel"] = {{"input_model_digest", r.stage1.model.digest()},
                                  {"documents", r.pseudo.corpus.documents.size()},
                                  {"sentences", r.pseudo.corpus.sentence_count()},
                                  {"labels_digest", hex64(fnv1a64(fusion::format_signals(r.pseudo.predictions.signals)))},
                                  {"seconds", stage2_seconds}};
  m["stages"]["3_train_on_pseudo"] = stage_json(r.stage3);
  m["stages"]["4_finetune"] = stage_json(r.stage4, r.stage3.model.digest());
  m["warnings"] = data.warnings;
  m["seconds"] = total.seconds();

  if (!out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    write_file((dir / "gold.tsv").string(), fusion::format_signals(data.gold));
    write_file((dir / "split.tsv").string(), corpus::format_manifest(data.partitions));
    write_file((dir / "stage1.model").string(), r.stage1.model.serialize());
    write_file((dir / "stage3.model").string(), r.stage3.model.serialize());
    write_file((dir / "stage4.model").string(), r.stage4.model.serialize());
    write_file((dir / "pseudo_labels.tsv").string(),
               fusion::format_signals(r.pseudo.predictions.signals, r.pseudo.predictions.run_id));
    write_file((dir / "predictions.tsv").string(), fusion::format_signals(r.predictions, config.run_id));
    write_file((dir / "report.json").string(), to_json(r.report).dump(2) + "\n");
    write_file((dir / "manifest.json").string(), m.dump(2) + "\n");
  }
  return r;
}

}  // namespace emoarc::pipeline
