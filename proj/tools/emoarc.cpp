// emoarc: command-line front end for gold-standard construction, agreement,
// prediction and evaluation of valence/arousal story trajectories.

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "emoarc/corpus/io.hpp"
#include "emoarc/corpus/operations.hpp"
#include "emoarc/error.hpp"
#include "emoarc/fusion/ewe.hpp"
#include "emoarc/fusion/io.hpp"
#include "emoarc/mapping/lexicon.hpp"
#include "emoarc/mapping/va.hpp"
#include "emoarc/metrics/agreement.hpp"
#include "emoarc/pipeline/config.hpp"
#include "emoarc/pipeline/evaluation.hpp"
#include "emoarc/pipeline/pipeline.hpp"
#include "emoarc/pipeline/synthetic.hpp"
#include "emoarc/predict/external.hpp"
#include "emoarc/predict/lexicon_predictor.hpp"
#include "emoarc/predict/linear_model.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace emoarc;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  std::string out = ".";
};

std::string out_path(const Globals& g, const std::string& name) {
  fs::create_directories(g.out);
  return (fs::path(g.out) / name).string();
}

std::vector<corpus::Story> load_labeled(const std::string& path, double low_agreement_k) {
  auto stories = corpus::ingest_labeled(path);
  if (low_agreement_k > 0.0) {
    auto r = corpus::remove_low_agreement(stories, metrics::story_alphas(stories), low_agreement_k);
    std::cerr << "removed " << r.removed.size() << " low-agreement stories (threshold "
              << format_fixed(r.threshold, 4) << ")\n";
    stories = std::move(r.kept);
  }
  return stories;
}

mapping::LabelMap load_table(const std::string& path) {
  return path.empty() ? mapping::LabelMap::standard() : mapping::parse_label_table(read_file(path), path);
}

fusion::EweOptions ewe_options(const std::string& weight, const std::string& ref) {
  fusion::EweOptions o;
  o.metric = weight == "pearson" ? fusion::WeightMetric::pearson : fusion::WeightMetric::ccc;
  o.reference = ref == "mean" ? fusion::WeightReference::mean : fusion::WeightReference::loo;
  return o;
}

json summary_json(const metrics::AlphaSummary& s) {
  return {{"alpha_sentence", s.alpha_sentence},
          {"alpha_story_mean", s.alpha_story_mean},
          {"alpha_story_std", s.alpha_story_std},
          {"stories", s.stories}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"emoarc - emotional arc gold standards, agreement and evaluation"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Seed for stochastic steps");
  app.add_option("--out", g.out, "Output directory");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Validate a labeled or unlabeled corpus and print a summary");
  std::string ingest_labeled_path, ingest_export;
  std::vector<std::string> ingest_unlabeled;
  ingest->add_option("--labeled", ingest_labeled_path, "Labeled corpus TSV");
  ingest->add_option("--unlabeled", ingest_unlabeled, "Unlabeled corpus files (.jsonl or raw text)");
  ingest->add_option("--export", ingest_export, "Write the normalized corpus to this file");

  // stats
  auto* stats = app.add_subcommand("stats", "Corpus size and emotion label distribution");
  std::string stats_labeled;
  double stats_k = 0.0;
  stats->add_option("--labeled", stats_labeled, "Labeled corpus TSV")->required();
  stats->add_option("--low-agreement-k", stats_k, "Drop stories with alpha < mean - k*std first (0 = off)");

  // split
  auto* split = app.add_subcommand("split", "Author-stratified train/dev/test split");
  std::string split_labeled, split_manifest;
  std::size_t n_train = 0, n_dev = 0, n_test = 0;
  double split_k = 0.0;
  split->add_option("--labeled", split_labeled, "Labeled corpus TSV")->required();
  split->add_option("--train", n_train, "Train stories");
  split->add_option("--dev", n_dev, "Dev stories");
  split->add_option("--test", n_test, "Test stories");
  split->add_option("--manifest", split_manifest, "Existing story_id<TAB>partition manifest (overrides the algorithm)");
  split->add_option("--low-agreement-k", split_k, "Low-agreement filter before splitting (0 = off)");

  // agree
  auto* agree = app.add_subcommand("agree", "Krippendorff's alpha report and confusion matrices");
  std::string agree_labeled;
  std::vector<std::string> agree_annotators, agree_confusion;
  double agree_k = 0.0;
  agree->add_option("--labeled", agree_labeled, "Labeled corpus TSV")->required();
  agree->add_option("--annotators", agree_annotators, "Annotator subset (default: all)")->delimiter(',');
  agree->add_option("--confusion", agree_confusion, "Annotator pair for a confusion matrix, e.g. a1,a3")
      ->delimiter(',')
      ->expected(2);
  agree->add_option("--low-agreement-k", agree_k, "Report low-agreement removal with this k (0 = off)");

  // fuse
  auto* fuse = app.add_subcommand("fuse", "Build the gold standard by evaluator-weighted fusion");
  std::string fuse_labeled, fuse_table, fuse_weight = "ccc", fuse_ref = "loo";
  double fuse_k = 0.0;
  fuse->add_option("--labeled", fuse_labeled, "Labeled corpus TSV")->required();
  fuse->add_option("--ewe-weight", fuse_weight, "Annotator weight metric")->check(CLI::IsMember({"ccc", "pearson"}));
  fuse->add_option("--ewe-ref", fuse_ref, "Weight reference signal")->check(CLI::IsMember({"loo", "mean"}));
  fuse->add_option("--label-table", fuse_table, "Label table override TSV");
  fuse->add_option("--low-agreement-k", fuse_k, "Low-agreement filter before fusion (0 = off)");

  // predict
  auto* pred = app.add_subcommand("predict", "Per-sentence valence/arousal predictions");
  std::string pred_backend = "lexicon", pred_lexicon, pred_model, pred_external, pred_labeled, pred_run_id;
  std::vector<std::string> pred_unlabeled;
  std::size_t pred_context = 0, pred_max_tokens = 512;
  double pred_half_life = 0.0;
  pred->add_option("--backend", pred_backend, "Predictor")->check(CLI::IsMember({"lexicon", "linear", "external"}));
  pred->add_option("--context", pred_context, "Context window size C");
  pred->add_option("--max-tokens", pred_max_tokens, "Window capacity in estimated tokens");
  pred->add_option("--lexicon", pred_lexicon, "VAD lexicon TSV");
  pred->add_option("--half-life", pred_half_life, "Lexicon smoothing half-life in sentences");
  pred->add_option("--model", pred_model, "Linear model file (linear backend)");
  pred->add_option("--predictions", pred_external, "External predictions TSV (external backend)");
  pred->add_option("--labeled", pred_labeled, "Labeled corpus to predict");
  pred->add_option("--unlabeled", pred_unlabeled, "Unlabeled corpus files to predict");
  pred->add_option("--run-id", pred_run_id, "Run id written to the output");

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate predictions against the gold standard");
  std::string eval_labeled, eval_gold, eval_manifest, eval_predictions, eval_table, eval_weight = "ccc",
                                                                              eval_ref = "loo";
  eval->add_option("--labeled", eval_labeled, "Labeled corpus TSV")->required();
  eval->add_option("--gold", eval_gold, "Gold TSV (default: fuse from labels)");
  eval->add_option("--manifest", eval_manifest, "Split manifest")->required();
  eval->add_option("--predictions", eval_predictions, "Predictions TSV")->required();
  eval->add_option("--label-table", eval_table, "Label table override TSV");
  eval->add_option("--ewe-weight", eval_weight, "Annotator weight metric")->check(CLI::IsMember({"ccc", "pearson"}));
  eval->add_option("--ewe-ref", eval_ref, "Weight reference signal")->check(CLI::IsMember({"loo", "mean"}));

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "Run the four-step weakly supervised pipeline");
  std::string pipe_config;
  pipe->add_option("--config", pipe_config, "Pipeline config file")->required();

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic corpus, lexicon and pipeline config");
  pipeline::SyntheticSpec synth_spec;
  std::string synth_backend = "linear";
  std::size_t synth_context = 1;
  synth->add_option("--stories", synth_spec.stories, "Labeled stories");
  synth->add_option("--documents", synth_spec.documents, "Unlabeled documents");
  synth->add_option("--noise", synth_spec.noise, "Gold noise in logit units");
  synth->add_option("--backend", synth_backend, "Backend written to the config")->check(CLI::IsMember({"lexicon", "linear"}));
  synth->add_option("--context", synth_context, "Context size written to the config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*ingest) {
      if (ingest_labeled_path.empty() == ingest_unlabeled.empty())
        throw ValidationError("ingest: give exactly one of --labeled or --unlabeled");
      json j;
      if (!ingest_labeled_path.empty()) {
        const auto stories = corpus::ingest_labeled(ingest_labeled_path);
        const auto sizes = corpus::corpus_sizes(stories);
        for (const auto& [k, v] : sizes) j[k] = {{"stories", v.stories}, {"sentences", v.sentences}};
        if (!ingest_export.empty()) write_file(ingest_export, corpus::format_labeled(stories));
      } else {
        const auto corpus = corpus::ingest_unlabeled(ingest_unlabeled);
        j["documents"] = corpus.documents.size();
        j["sentences"] = corpus.sentence_count();
        if (!ingest_export.empty()) write_file(ingest_export, corpus::format_unlabeled_jsonl(corpus));
      }
      std::cout << j.dump(2) << "\n";
    } else if (*stats) {
      const auto stories = load_labeled(stats_labeled, stats_k);
      json j;
      for (const auto& [group, size] : corpus::corpus_sizes(stories)) {
        j[group]["stories"] = size.stories;
        j[group]["sentences"] = size.sentences;
      }
      for (const auto& [group, dist] : corpus::emotion_distribution(stories))
        for (const auto& [label, pct] : dist) j[group]["distribution"][std::string(corpus::to_string(label))] = pct;
      std::cout << j.dump(2) << "\n";
    } else if (*split) {
      const auto stories = load_labeled(split_labeled, split_k);
      std::optional<std::map<std::string, corpus::PartitionName>> manifest;
      if (!split_manifest.empty()) manifest = corpus::parse_manifest(read_file(split_manifest), split_manifest);
      corpus::SplitTargets targets{n_train, n_dev, n_test};
      if (!manifest && targets.total() == 0) targets = pipeline::default_targets(stories.size());
      const auto parts = corpus::stratified_split(stories, targets, g.seed, manifest);
      write_file(out_path(g, "split.tsv"), corpus::format_manifest(parts));
      json j;
      for (const auto& p : parts) {
        const auto sel = corpus::select_stories(stories, p.story_ids);
        for (const auto& [group, size] : corpus::corpus_sizes(sel)) {
          j[std::string(corpus::to_string(p.name))][group] = {{"stories", size.stories}, {"sentences", size.sentences}};
        }
      }
      std::cout << j.dump(2) << "\n";
    } else if (*agree) {
      auto stories = corpus::ingest_labeled(agree_labeled);
      json j;
      if (agree_k > 0.0) {
        const auto alphas = metrics::story_alphas(stories);
        auto r = corpus::remove_low_agreement(stories, alphas, agree_k);
        j["low_agreement"] = {{"mean", r.mean}, {"std", r.std}, {"threshold", r.threshold}, {"removed", r.removed}};
        stories = std::move(r.kept);
      }
      std::vector<std::string> annotators = agree_annotators;
      if (annotators.empty()) {
        std::set<std::string> all;
        for (const auto& st : stories)
          for (const auto& s : st.sentences)
            for (const auto& [a, l] : s.labels) all.insert(a);
        annotators.assign(all.begin(), all.end());
      }
      const auto report = metrics::alpha_report(stories, annotators);
      j["annotators"] = report.annotator_set;
      j["overall"] = summary_json(report.overall);
      for (const auto& [author, s] : report.per_author) j["per_author"][author] = summary_json(s);
      j["per_story"] = report.per_story;
      write_file(out_path(g, "agreement.json"), j.dump(2) + "\n");
      if (!agree_confusion.empty()) {
        const auto m = metrics::confusion(stories, agree_confusion[0], agree_confusion[1]);
        write_file(out_path(g, "confusion_" + agree_confusion[0] + "_" + agree_confusion[1] + ".csv"),
                   metrics::confusion_csv(m));
      }
      std::cout << json{{"annotators", j["annotators"]}, {"overall", j["overall"]}}.dump(2) << "\n";
    } else if (*fuse) {
      const auto stories = load_labeled(fuse_labeled, fuse_k);
      const auto signals = fusion::annotator_signals(stories, load_table(fuse_table));
      const auto fused = fusion::fuse_corpus(signals, ewe_options(fuse_weight, fuse_ref));
      fusion::SignalMap gold;
      json weights;
      std::size_t fallbacks = 0;
      for (const auto& [id, r] : fused) {
        gold.emplace(id, r.gold);
        weights[id] = {{"annotators", r.weights.annotators},
                       {"valence", r.weights.normalized[0]},
                       {"arousal", r.weights.normalized[1]},
                       {"fallback", r.weights.fallback_used()}};
        fallbacks += r.weights.fallback_used() ? 1 : 0;
      }
      write_file(out_path(g, "gold.tsv"), fusion::format_signals(gold));
      write_file(out_path(g, "fusion_weights.json"), weights.dump(2) + "\n");
      std::cout << json{{"stories", gold.size()}, {"fallback_stories", fallbacks}}.dump(2) << "\n";
    } else if (*pred) {
      if (pred_labeled.empty() == pred_unlabeled.empty())
        throw ValidationError("predict: give exactly one of --labeled or --unlabeled");
      std::vector<std::pair<std::string, std::vector<std::string>>> seqs;
      std::vector<corpus::Story> stories;
      if (!pred_labeled.empty()) {
        stories = corpus::ingest_labeled(pred_labeled);
        for (const auto& s : stories) seqs.emplace_back(s.story_id, corpus::sentence_texts(s));
      } else {
        for (auto& d : corpus::ingest_unlabeled(pred_unlabeled).documents) seqs.emplace_back(d.doc_id, d.sentences);
      }
      const std::string run_id = pred_run_id.empty() ? pred_backend : pred_run_id;
      fusion::SignalMap out;
      if (pred_backend == "external") {
        if (pred_external.empty()) throw ValidationError("predict: --predictions is required for the external backend");
        std::map<std::string, std::size_t> lengths;
        for (const auto& [id, s] : seqs) lengths[id] = s.size();
        auto file = fusion::parse_signals(read_file(pred_external), fusion::SourceKind::prediction, pred_external);
        predict::validate_coverage(file.signals, lengths);
        out = std::move(file.signals);
      } else {
        if (pred_lexicon.empty()) throw ValidationError("predict: --lexicon is required");
        const auto lex = mapping::load_lexicon(pred_lexicon).lexicon;
        predict::WindowSpec spec;
        spec.context_size = pred_context;
        spec.max_tokens = pred_max_tokens;
        std::optional<predict::LinearModel> model;
        if (pred_backend == "linear") {
          if (pred_model.empty()) throw ValidationError("predict: --model is required for the linear backend");
          model = predict::LinearModel::deserialize(read_file(pred_model), pred_model);
        }
        for (const auto& [id, sents] : seqs)
          out.emplace(id, model ? predict::predict_linear(*model, id, sents, lex, spec, run_id)
                                : predict::lexicon_predict(id, sents, lex, pred_half_life, run_id));
      }
      write_file(out_path(g, "predictions.tsv"), fusion::format_signals(out, run_id));
      std::cout << json{{"run_id", run_id}, {"sequences", out.size()}}.dump(2) << "\n";
    } else if (*eval) {
      const auto stories = corpus::ingest_labeled(eval_labeled);
      const auto table = load_table(eval_table);
      fusion::SignalMap gold;
      if (!eval_gold.empty())
        gold = fusion::parse_signals(read_file(eval_gold), fusion::SourceKind::gold, eval_gold).signals;
      else
        gold = fusion::gold_standard(stories, table, ewe_options(eval_weight, eval_ref));
      const auto manifest = corpus::parse_manifest(read_file(eval_manifest), eval_manifest);
      const auto in_manifest = [&] {
        std::vector<corpus::Story> sel;
        for (const auto& s : stories)
          if (manifest.count(s.story_id)) sel.push_back(s);
        return sel;
      }();
      const auto parts = corpus::stratified_split(in_manifest, {}, g.seed, manifest);
      const auto preds = predict::load_external_predictions(eval_predictions, stories);
      const auto report = pipeline::evaluate_run(preds.signals, gold, stories, parts,
                                                 {corpus::PartitionName::dev, corpus::PartitionName::test}, preds.run_id);
      auto j = pipeline::to_json(report);
      try {
        const auto human = pipeline::human_agreement(fusion::annotator_signals(stories, table));
        const auto c = pipeline::story_correlation_analysis(report, human);
        j["story_correlations"] = {{"stories", c.stories},
                                   {"valence_vs_arousal", c.valence_vs_arousal},
                                   {"model_vs_human_valence", c.model_vs_human[0]},
                                   {"model_vs_human_arousal", c.model_vs_human[1]}};
      } catch (const Error& e) {
        std::cerr << "story correlation analysis skipped: " << e.what() << "\n";
      }
      pipeline::validate_report_json(j);
      write_file(out_path(g, "report.json"), j.dump(2) + "\n");
      json brief;
      for (const auto& p : report.partitions)
        for (std::size_t d = 0; d < 2; ++d)
          brief[std::string(corpus::to_string(p.name))][fusion::kDimensionNames[d]] = pipeline::opt_json(p.dims[d].overall_ccc);
      std::cout << brief.dump(2) << "\n";
    } else if (*pipe) {
      auto config = pipeline::load_config(pipe_config);
      if (app.get_option("--seed")->count() > 0) {
        config.seed = g.seed;
        config.echo["seed"] = std::to_string(g.seed);
      }
      const std::string out = app.get_option("--out")->count() > 0 ? g.out : config.out_dir;
      const auto r = pipeline::run_pipeline(config, out);
      for (const auto& w : r.data.warnings) std::cerr << "warning: " << w << "\n";
      json brief;
      brief["out"] = out;
      brief["stage1_dev"] = r.manifest["stages"]["1_train"]["dev_ccc_mean"];
      brief["stage4_dev"] = r.manifest["stages"]["4_finetune"]["dev_ccc_mean"];
      for (const auto& p : r.report.partitions)
        for (std::size_t d = 0; d < 2; ++d)
          brief[std::string(corpus::to_string(p.name))][fusion::kDimensionNames[d]] = pipeline::opt_json(p.dims[d].overall_ccc);
      std::cout << brief.dump(2) << "\n";
    } else if (*synth) {
      synth_spec.seed = g.seed;
      const auto data = pipeline::generate_synthetic(synth_spec);
      pipeline::write_synthetic(data, g.out, g.seed, synth_backend, synth_context);
      std::cout << json{{"out", g.out}, {"stories", data.stories.size()}, {"documents", data.unlabeled.documents.size()}}.dump(2)
                << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "emoarc: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "emoarc: internal error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
