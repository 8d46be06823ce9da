#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>

#include "emoarc/fusion/ewe.hpp"
#include "emoarc/pipeline/config.hpp"
#include "emoarc/pipeline/evaluation.hpp"
#include "emoarc/pipeline/pipeline.hpp"
#include "emoarc/pipeline/synthetic.hpp"

using namespace emoarc;
using namespace emoarc::pipeline;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("emoarc_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

class SyntheticRun : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    SyntheticSpec spec;
    spec.stories = 80;
    spec.documents = 20;
    dir_ = new fs::path(scratch("pipeline"));
    write_synthetic(generate_synthetic(spec), dir_->string(), 3);
  }
  static void TearDownTestSuite() {
    fs::remove_all(*dir_);
    delete dir_;
  }

  static PipelineConfig config(Backend backend, std::size_t context) {
    auto c = load_config((*dir_ / "pipeline.cfg").string());
    c.backend = backend;
    c.window.context_size = context;
    return c;
  }

  static fs::path* dir_;
};

fs::path* SyntheticRun::dir_ = nullptr;

corpus::Partition part(corpus::PartitionName n, std::vector<std::string> ids) { return {n, std::move(ids)}; }

}  // namespace

TEST(StoryParts, LeftoverGoesToEarlierParts) {
  EXPECT_EQ(story_part_bounds(10), (std::array<std::size_t, 6>{0, 2, 4, 6, 8, 10}));
  EXPECT_EQ(story_part_bounds(11), (std::array<std::size_t, 6>{0, 3, 5, 7, 9, 11}));
  EXPECT_EQ(story_part_bounds(3), (std::array<std::size_t, 6>{0, 1, 2, 3, 3, 3}));
  for (std::size_t n = 0; n < 200; ++n) {
    const auto b = story_part_bounds(n);
    for (std::size_t p = 0; p < 5; ++p) {
      const std::size_t len = b[p + 1] - b[p];
      EXPECT_TRUE(len == n / 5 || len == n / 5 + 1);
      if (p > 0) {
        EXPECT_LE(len, b[p] - b[p - 1]);
      }
    }
  }
}

TEST(Evaluate, PerfectPredictionsAndSchema) {
  std::vector<corpus::Story> stories;
  fusion::SignalMap gold;
  Rng rng(1);
  for (int k = 0; k < 6; ++k) {
    const std::string id = "s" + std::to_string(k);
    corpus::Story s{id, k % 2 ? corpus::Author::HCA : corpus::Author::Grimm, {}};
    fusion::TrajectorySignal g{id, {}, {}, {}};
    for (std::size_t i = 0; i < 7; ++i) {
      s.sentences.push_back({id, i, "x", {}});
      g.valence.push_back(rng.uniform());
      g.arousal.push_back(rng.uniform());
    }
    stories.push_back(s);
    gold[id] = g;
  }
  const std::vector parts = {part(corpus::PartitionName::train, {"s0", "s1"}),
                             part(corpus::PartitionName::dev, {"s2", "s3"}),
                             part(corpus::PartitionName::test, {"s4", "s5"})};
  const auto r = evaluate_run(gold, gold, stories, parts, {corpus::PartitionName::dev, corpus::PartitionName::test}, "id");
  for (const auto& p : r.partitions)
    for (std::size_t d = 0; d < 2; ++d) {
      EXPECT_NEAR(*p.dims[d].overall_ccc, 1.0, 1e-12);
      EXPECT_NEAR(p.dims[d].story_ccc_mean, 1.0, 1e-12);
      EXPECT_NEAR(p.dims[d].story_ccc_std, 0.0, 1e-12);
      EXPECT_EQ(p.dims[d].author_ccc.size(), 2u);
    }
  EXPECT_EQ(r.errors[0].p95, 0.0);
  EXPECT_EQ(r.partition(corpus::PartitionName::test).sentences, 14u);
  auto j = to_json(r);
  EXPECT_NO_THROW(validate_report_json(j));
  j["partitions"]["dev"]["valence"]["overall_ccc"] = 1.5;
  EXPECT_THROW(validate_report_json(j), ValidationError);
  j = to_json(r);
  j.erase("error_stats");
  EXPECT_THROW(validate_report_json(j), ValidationError);

  auto gap = gold;
  gap["s3"].valence.pop_back();
  gap["s3"].arousal.pop_back();
  EXPECT_THROW(evaluate_run(gap, gold, stories, parts), DataError);
  gap.erase("s3");
  EXPECT_THROW(evaluate_run(gap, gold, stories, parts), DataError);
}

TEST(Evaluate, ConcatenationOrderAndUndefinedStories) {
  std::vector<corpus::Story> stories = {{"b", corpus::Author::HCA, {{"b", 0, "x", {}}, {"b", 1, "y", {}}}},
                                        {"a", corpus::Author::HCA, {{"a", 0, "x", {}}, {"a", 1, "y", {}}}}};
  fusion::SignalMap gold, pred;
  gold["a"] = {"a", {}, {0.2, 0.2}, {0.1, 0.9}};
  gold["b"] = {"b", {}, {0.4, 0.8}, {0.3, 0.5}};
  pred["a"] = {"a", {}, {0.2, 0.2}, {0.2, 0.7}};
  pred["b"] = {"b", {}, {0.5, 0.6}, {0.3, 0.6}};
  const std::vector parts = {part(corpus::PartitionName::train, {}), part(corpus::PartitionName::dev, {"b", "a"}),
                             part(corpus::PartitionName::test, {})};
  const auto r = evaluate_run(pred, gold, stories, parts, {corpus::PartitionName::dev});
  const auto& dev = r.partition(corpus::PartitionName::dev);
  const std::vector<double> gv = {0.2, 0.2, 0.4, 0.8}, pv = {0.2, 0.2, 0.5, 0.6};
  EXPECT_DOUBLE_EQ(*dev.dims[0].overall_ccc, metrics::ccc(gv, pv));
  EXPECT_FALSE(dev.story_ccc.at("a")[0].has_value());  // 0/0 story is skipped
  EXPECT_EQ(dev.dims[0].stories_scored, 1u);
  EXPECT_EQ(dev.dims[1].stories_scored, 2u);
}

TEST(Evaluate, StoryCorrelationAnalysis) {
  EvaluationReport r;
  PartitionScores p;
  std::map<std::string, DimPair> human;
  for (int k = 0; k < 5; ++k) {
    const std::string id = "s" + std::to_string(k);
    p.story_ccc[id] = {0.1 * k, 0.5 - 0.05 * k};
    human[id] = {0.2 + 0.1 * k, 0.3 + 0.01 * k * k};
  }
  r.partitions.push_back(p);
  const auto c = story_correlation_analysis(r, human);
  EXPECT_EQ(c.stories, 5u);
  EXPECT_NEAR(c.valence_vs_arousal, -1.0, 1e-12);
  EXPECT_NEAR(c.model_vs_human[0], 1.0, 1e-12);
  EXPECT_LT(c.model_vs_human[1], 0.0);
  human.erase("s0");
  human.erase("s1");
  human.erase("s2");
  EXPECT_THROW(story_correlation_analysis(r, human), ValidationError);
}

TEST(Evaluate, HumanAgreementIsMeanPairwiseCcc) {
  std::map<std::string, std::vector<fusion::TrajectorySignal>> sigs;
  sigs["s"] = {{"s", {}, {0.1, 0.5, 0.9}, {0.2, 0.2, 0.2}},
               {"s", {}, {0.2, 0.5, 0.8}, {0.2, 0.2, 0.2}},
               {"s", {}, {0.9, 0.5, 0.1}, {0.3, 0.1, 0.2}}};
  const auto h = human_agreement(sigs);
  const std::vector<double> a = {0.1, 0.5, 0.9}, b = {0.2, 0.5, 0.8}, c = {0.9, 0.5, 0.1};
  EXPECT_NEAR(*h.at("s")[0], (metrics::ccc(a, b) + metrics::ccc(a, c) + metrics::ccc(b, c)) / 3, 1e-15);
  EXPECT_NEAR(*h.at("s")[1], 0.0, 1e-15);  // the constant pair is skipped, the others have zero covariance
}

TEST(Config, ParsesAndRejects) {
  const std::string base = "labeled_corpus = l.tsv\nunlabeled_corpus = u1.jsonl, u2.txt\nlexicon = lex.tsv\n";
  const auto c = parse_config(base + "backend = lexicon\ncontext = 3\nl2 = 0.1, 1\nexclude_author = HCA\n", "/data", false);
  EXPECT_EQ(c.labeled_corpus, "/data/l.tsv");
  EXPECT_EQ(c.unlabeled_corpus.size(), 2u);
  EXPECT_EQ(c.backend, Backend::lexicon);
  EXPECT_EQ(c.window.context_size, 3u);
  EXPECT_EQ(c.l2, (std::vector<double>{0.1, 1.0}));
  EXPECT_EQ(*c.exclude_author, corpus::Author::HCA);
  EXPECT_NE(c.digest(), parse_config(base, "/data", false).digest());

  EXPECT_THROW(parse_config(base + "colour = red\n", ".", false), ValidationError);
  EXPECT_THROW(parse_config(base + "seed = 1\nseed = 2\n", ".", false), ValidationError);
  EXPECT_THROW(parse_config("lexicon = x\n", ".", false), ValidationError);
  EXPECT_THROW(parse_config(base + "backend = bert\n", ".", false), ValidationError);
  EXPECT_THROW(parse_config(base + "train = 10\n", ".", false), ValidationError);
  EXPECT_THROW(parse_config(base + "l2 = 0\n", ".", false), ValidationError);
  EXPECT_THROW(parse_config(base + "just words\n", ".", false), ValidationError);
  EXPECT_THROW(parse_config(base, "/nonexistent", true), ValidationError);
}

TEST_F(SyntheticRun, LinearStageOneFitsSyntheticGold) {
  const auto data = prepare(config(Backend::linear, 0));
  const auto s1 = run_stage1_train(data);
  ASSERT_TRUE(s1.dev_score);
  EXPECT_GE(*s1.dev_score, 0.95);
  EXPECT_EQ(s1.grid.size(), 3u);
}

TEST_F(SyntheticRun, LexiconBackendPassesThrough) {
  const auto data = prepare(config(Backend::lexicon, 0));
  const auto s1 = run_stage1_train(data);
  const auto pseudo = run_stage2_pseudolabel(s1.model, data);
  const auto s3 = run_stage3_train_on_pseudo(data, pseudo, s1);
  const auto s4 = run_stage4_finetune(data, s3, s1);
  EXPECT_EQ(s3.model.digest(), s1.model.digest());
  EXPECT_EQ(s4.model.digest(), s1.model.digest());
  EXPECT_EQ(s4.dev_score, s1.dev_score);
}

TEST_F(SyntheticRun, PseudoLabelsCoverEveryDocumentInRange) {
  const auto data = prepare(config(Backend::linear, 1));
  const auto s1 = run_stage1_train(data);
  const auto pseudo = run_stage2_pseudolabel(s1.model, data);
  ASSERT_EQ(pseudo.predictions.signals.size(), data.unlabeled.documents.size());
  for (const auto& doc : data.unlabeled.documents) {
    const auto& sig = pseudo.predictions.signals.at(doc.doc_id);
    ASSERT_EQ(sig.size(), doc.sentences.size());
    EXPECT_NO_THROW(fusion::validate(sig));
  }
}

TEST_F(SyntheticRun, PseudoLabelsOfRandomTextStayInRange) {
  auto data = prepare(config(Backend::linear, 1));
  const auto s1 = run_stage1_train(data);
  Rng rng(5);
  data.unlabeled.documents.clear();
  for (int d = 0; d < 10; ++d) {
    corpus::Document doc{"fuzz" + std::to_string(d), {}};
    for (std::size_t i = 0; i < 1 + rng.below(12); ++i) {
      std::string s;
      for (std::size_t k = 0; k < 1 + rng.below(30); ++k) s += static_cast<char>(32 + rng.below(95));
      doc.sentences.push_back(s);
    }
    data.unlabeled.documents.push_back(doc);
  }
  const auto pseudo = run_stage2_pseudolabel(s1.model, data);
  EXPECT_EQ(pseudo.predictions.signals.size(), 10u);
  for (const auto& [id, sig] : pseudo.predictions.signals) EXPECT_NO_THROW(fusion::validate(sig));
}

TEST_F(SyntheticRun, EmptyUnlabeledCorpus) {
  auto data = prepare(config(Backend::linear, 0));
  const auto s1 = run_stage1_train(data);
  data.unlabeled.documents.clear();
  std::vector<std::string> warnings;
  const auto pseudo = run_stage2_pseudolabel(s1.model, data, &warnings);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_TRUE(pseudo.predictions.signals.empty());
  EXPECT_THROW(run_stage3_train_on_pseudo(data, pseudo, s1), DataError);
}

TEST_F(SyntheticRun, AnchorStrengthInterpolatesBetweenStages) {
  auto cfg = config(Backend::linear, 1);
  auto data = prepare(cfg);
  const auto s1 = run_stage1_train(data);
  const auto pseudo = run_stage2_pseudolabel(s1.model, data);
  const auto s3 = run_stage3_train_on_pseudo(data, pseudo, s1);

  data.config.anchor = {1e12};
  const auto pinned = run_stage4_finetune(data, s3, s1);
  for (std::size_t j = 0; j < predict::kFeatureDim; ++j)
    for (std::size_t d = 0; d < 2; ++d)
      ASSERT_NEAR(pinned.model.linear.weights[j][d], s3.model.linear.weights[j][d], 1e-6);

  data.config.anchor = {0.0};
  const auto loose = run_stage4_finetune(data, s3, s1);
  EXPECT_EQ(loose.model.linear.serialize(), s1.model.linear.serialize());

  data.config.anchor = {0.1, 1, 10};
  const auto tuned = run_stage4_finetune(data, s3, s1);
  ASSERT_TRUE(tuned.dev_score && s1.dev_score && s3.dev_score);
  EXPECT_GE(*tuned.dev_score, std::max(*s1.dev_score, *s3.dev_score) - 0.02);
}

TEST_F(SyntheticRun, FullRunIsReproducible) {
  const auto cfg = config(Backend::linear, 1);
  const auto out_a = scratch("run_a"), out_b = scratch("run_b");
  const auto a = run_pipeline(cfg, out_a.string());
  const auto b = run_pipeline(cfg, out_b.string());
  for (const char* f : {"report.json", "stage1.model", "stage3.model", "stage4.model", "predictions.tsv",
                        "pseudo_labels.tsv", "split.tsv", "gold.tsv"})
    EXPECT_EQ(read_file((out_a / f).string()), read_file((out_b / f).string())) << f;
  EXPECT_NO_THROW(validate_report_json(nlohmann::ordered_json::parse(read_file((out_a / "report.json").string()))));
  const auto manifest = nlohmann::json::parse(read_file((out_a / "manifest.json").string()));
  EXPECT_EQ(manifest["stages"]["4_finetune"]["input_model_digest"], a.stage3.model.digest());
  EXPECT_EQ(manifest["stages"]["2_pseudolabel"]["input_model_digest"], a.stage1.model.digest());
  EXPECT_EQ(a.report.config_digest, cfg.digest());
  fs::remove_all(out_a);
  fs::remove_all(out_b);
}

TEST_F(SyntheticRun, ExcludedAuthorOnlyInTest) {
  auto cfg = config(Backend::lexicon, 0);
  cfg.exclude_author = corpus::Author::Grimm;
  const auto data = prepare(cfg);
  for (const auto& p : data.partitions)
    for (const auto& id : p.story_ids) {
      const bool grimm = corpus::find_story(data.stories, id).author == corpus::Author::Grimm;
      EXPECT_EQ(grimm, p.name == corpus::PartitionName::test) << id;
    }
}
