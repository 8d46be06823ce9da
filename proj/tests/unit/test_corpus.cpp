#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "emoarc/corpus/io.hpp"
#include "emoarc/corpus/operations.hpp"
#include "emoarc/corpus/sentence_split.hpp"
#include "emoarc/random.hpp"

using namespace emoarc;
using namespace emoarc::corpus;

namespace {

const char* kTwoStories =
    "story_id\tauthor\tindex\ttext\tlabel_a1\tlabel_a2\tlabel_a3\n"
    "s1\tGrimm\t0\tOnce upon a time.\tneutral\tneutral\tneutral\n"
    "s1\tGrimm\t1\tShe wept.\tsadness\tsadness\tfear\n"
    "s2\tPotter\t1\tThe rabbit ran!\tfear\tpositive_surprise\t\n"
    "s2\tPotter\t0\tPeter was hungry.\tneutral\thappiness\tneutral\n";

template <typename Fn>
std::string error_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

Story make_story(const std::string& id, Author author, std::size_t n) {
  Story s{id, author, {}};
  for (std::size_t i = 0; i < n; ++i)
    s.sentences.push_back({id, i, "x.", {{"a1", EmotionLabel::neutral}, {"a2", EmotionLabel::neutral}}});
  return s;
}

}  // namespace

TEST(Ingest, WellFormedTwoStories) {
  const auto stories = parse_labeled(kTwoStories);
  ASSERT_EQ(stories.size(), 2u);
  EXPECT_EQ(stories[0].story_id, "s1");
  EXPECT_EQ(stories[0].author, Author::Grimm);
  EXPECT_EQ(stories[0].sentences[1].labels.at("a3"), EmotionLabel::fear);
  ASSERT_EQ(stories[1].sentences.size(), 2u);
  EXPECT_EQ(stories[1].sentences[0].text, "Peter was hungry.");
  EXPECT_EQ(stories[1].sentences[1].labels.size(), 2u);  // empty a3
  EXPECT_EQ(stories[1].sentences[1].labels.at("a2"), EmotionLabel::positive_surprise);
}

TEST(Ingest, RoundTripIsIdentity) {
  const auto stories = parse_labeled(kTwoStories);
  EXPECT_EQ(parse_labeled(format_labeled(stories)), stories);
}

TEST(Ingest, ReducedSchemeViolationForAnnotatorThree) {
  const std::string bad = "story_id\tauthor\tindex\ttext\tlabel_a1\tlabel_a2\tlabel_a3\n"
                          "s1\tHCA\t0\tOh!\tneutral\tneutral\tpositive_surprise\n";
  const auto msg = error_of([&] { parse_labeled(bad, "f.tsv"); });
  EXPECT_NE(msg.find("six-label scheme"), std::string::npos) << msg;
  EXPECT_NE(msg.find("f.tsv:2"), std::string::npos) << msg;
}

TEST(Ingest, SpaceSeparatedLabelTokenIsUnknown) {
  const std::string bad = "story_id\tauthor\tindex\ttext\tlabel_a1\tlabel_a2\tlabel_a3\n"
                          "s1\tHCA\t0\tOh!\tneutral\tneutral\tpositive surprise\n";
  EXPECT_NE(error_of([&] { parse_labeled(bad); }).find("unknown label token"), std::string::npos);
}

TEST(Ingest, Errors) {
  const std::string head = "story_id\tauthor\tindex\ttext\tlabel_a1\tlabel_a2\n";
  EXPECT_NE(error_of([&] { parse_labeled(head + "s1\tHCA\t0\tA.\tneutral\n", "x"); }).find("x:2: malformed row"),
            std::string::npos);
  EXPECT_NE(error_of([&] { parse_labeled(head + "s1\tHCA\t0\tA.\tneutral\tjoy\n"); }).find("unknown label"),
            std::string::npos);
  EXPECT_NE(error_of([&] {
              parse_labeled(head + "s1\tHCA\t0\tA.\tneutral\tneutral\ns1\tHCA\t0\tB.\tneutral\tneutral\n");
            }).find("duplicate"),
            std::string::npos);
  EXPECT_NE(error_of([&] { parse_labeled("story_id\tindex\ttext\tlabel_a1\tlabel_a2\n"); }).find("missing required column"),
            std::string::npos);
  EXPECT_NE(error_of([&] { parse_labeled(head + "s1\tHCA\t1\tA.\tneutral\tneutral\n"); }).find("non-contiguous"),
            std::string::npos);
  EXPECT_NE(error_of([&] { parse_labeled(head + "s1\tNobody\t0\tA.\tneutral\tneutral\n"); }).find("unknown author"),
            std::string::npos);
}

TEST(Ingest, UnlabeledJsonl) {
  const auto c = parse_unlabeled_jsonl(
      "{\"doc_id\": \"d2\", \"index\": 1, \"text\": \"Second.\"}\n"
      "{\"doc_id\": \"d2\", \"index\": 0, \"text\": \"First.\"}\n"
      "{\"doc_id\": \"d1\", \"index\": 0, \"text\": \"Only.\"}\n");
  ASSERT_EQ(c.documents.size(), 2u);
  EXPECT_EQ(c.documents[0].doc_id, "d2");
  EXPECT_EQ(c.documents[0].sentences, (std::vector<std::string>{"First.", "Second."}));
  EXPECT_EQ(parse_unlabeled_jsonl(format_unlabeled_jsonl(c)).documents, c.documents);
  EXPECT_THROW(parse_unlabeled_jsonl("{\"doc_id\": \"d\", \"index\": 0, \"text\": \"  \"}\n"), ValidationError);
  EXPECT_THROW(parse_unlabeled_jsonl("{\"doc_id\": \"d\", \"index\": 0}\n"), ValidationError);
}

TEST(SplitSentences, TerminalPunctuation) {
  EXPECT_EQ(split_sentences("A. B! C?"), (std::vector<std::string>{"A.", "B!", "C?"}));
}

TEST(SplitSentences, AbbreviationSuppressesBreak) {
  EXPECT_EQ(split_sentences("Mr. Smith left. He ran."), (std::vector<std::string>{"Mr. Smith left.", "He ran."}));
  EXPECT_EQ(split_sentences("Dr. Who and St. Paul met Mrs. Brown. Then tea."),
            (std::vector<std::string>{"Dr. Who and St. Paul met Mrs. Brown.", "Then tea."}));
  EXPECT_EQ(split_sentences("I chose A. B was worse."), (std::vector<std::string>{"I chose A.", "B was worse."}));
  EXPECT_EQ(split_sentences("J. R. Tolkien wrote. It was I. Yes."),
            (std::vector<std::string>{"J. R. Tolkien wrote.", "It was I.", "Yes."}));
}

TEST(SplitSentences, NoTerminalPunctuation) {
  EXPECT_EQ(split_sentences("no terminal punctuation"), (std::vector<std::string>{"no terminal punctuation"}));
  EXPECT_TRUE(split_sentences("").empty());
  EXPECT_TRUE(split_sentences("   \n ").empty());
}

TEST(SplitSentences, QuotesEllipsisAndParagraphs) {
  EXPECT_EQ(split_sentences("\"Run!\" she cried. \"Why?\" he asked\xE2\x80\xA6 Then silence."),
            (std::vector<std::string>{"\"Run!\" she cried.", "\"Why?\" he asked\xE2\x80\xA6", "Then silence."}));
  EXPECT_EQ(split_sentences("CHAPTER ONE\n\nThe wolf\ncame. Later..."),
            (std::vector<std::string>{"CHAPTER ONE", "The wolf came.", "Later..."}));
}

TEST(SplitSentences, PropertyWhitespaceNormalizedConcatenation) {
  const std::vector<std::string> pieces = {"Mr.", "Smith", "went", "home.", "Wow!", "Really?", "\"Yes.\"",
                                           "e.g.", "a", "J.", "end", "...", "(so).", "\xE2\x80\x9Cok.\xE2\x80\x9D"};
  const std::vector<std::string> gaps = {" ", "  ", "\n", "\t", " \n "};
  Rng rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    std::string text;
    const auto n = 1 + rng.below(25);
    for (std::size_t i = 0; i < n; ++i) {
      if (i) text += gaps[rng.below(gaps.size())];
      text += pieces[rng.below(pieces.size())];
    }
    const auto out = split_sentences(text);
    std::string joined;
    for (const auto& s : out) {
      ASSERT_FALSE(s.empty());
      ASSERT_EQ(s, std::string(trim(s)));
      joined += (joined.empty() ? "" : " ") + s;
    }
    std::string normalized;
    bool space = false;
    for (unsigned char c : text) {
      if (std::isspace(c)) {
        space = !normalized.empty();
      } else {
        if (space) normalized += ' ';
        space = false;
        normalized += static_cast<char>(c);
      }
    }
    ASSERT_EQ(joined, normalized) << text;
  }
}

TEST(LowAgreement, ThresholdFromMeanAndSpread) {
  std::vector<Story> stories = {make_story("a", Author::Grimm, 1), make_story("b", Author::HCA, 1)};
  // mean .341, population std .126
  const std::map<std::string, double> alphas = {{"a", 0.341 - 0.126}, {"b", 0.341 + 0.126}};
  const auto r = remove_low_agreement(stories, alphas, 2.0);
  EXPECT_NEAR(r.mean, 0.341, 1e-12);
  EXPECT_NEAR(r.std, 0.126, 1e-12);
  EXPECT_NEAR(r.threshold, 0.089, 1e-12);
  EXPECT_TRUE(r.removed.empty());
}

TEST(LowAgreement, EqualAlphasRemoveNothing) {
  std::vector<Story> stories = {make_story("a", Author::Grimm, 1), make_story("b", Author::HCA, 1),
                                make_story("c", Author::HCA, 1)};
  const auto r = remove_low_agreement(stories, {{"a", 0.4}, {"b", 0.4}, {"c", 0.4}}, 2.0);
  EXPECT_EQ(r.std, 0.0);
  EXPECT_EQ(r.threshold, 0.4);
  EXPECT_EQ(r.kept.size(), 3u);
}

TEST(LowAgreement, ErrorsAndPartitionProperty) {
  std::vector<Story> stories;
  std::map<std::string, double> alphas;
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const auto id = "s" + std::to_string(i);
    stories.push_back(make_story(id, Author::Grimm, 1));
    alphas[id] = rng.uniform() * 0.8 - 0.1;
  }
  alphas["s0"] = -0.9;  // an outlier
  const auto r = remove_low_agreement(stories, alphas, 2.0);
  EXPECT_EQ(r.kept.size() + r.removed.size(), stories.size());
  for (const auto& id : r.removed) EXPECT_LT(alphas[id], r.threshold);
  for (const auto& s : r.kept) EXPECT_GE(alphas[s.story_id], r.threshold);
  EXPECT_NE(std::find(r.removed.begin(), r.removed.end(), "s0"), r.removed.end());

  alphas.erase("s7");
  EXPECT_THROW(remove_low_agreement(stories, alphas, 2.0), DataError);
  EXPECT_THROW(remove_low_agreement(stories, {}, 0.0), ValidationError);
}

TEST(StratifiedSplit, OnePerAuthorForced) {
  std::vector<Story> stories = {make_story("g", Author::Grimm, 2), make_story("h", Author::HCA, 2),
                                make_story("p", Author::Potter, 2)};
  const auto parts = stratified_split(stories, {1, 1, 1}, 42);
  std::set<std::string> seen;
  for (const auto& p : parts) {
    ASSERT_EQ(p.story_ids.size(), 1u);
    seen.insert(p.story_ids[0]);
  }
  EXPECT_EQ(seen.size(), 3u);
}

TEST(StratifiedSplit, SixtyStoriesWithinOneOfProportional) {
  std::vector<Story> stories;
  for (int i = 0; i < 30; ++i) stories.push_back(make_story("g" + std::to_string(i), Author::Grimm, 3));
  for (int i = 0; i < 20; ++i) stories.push_back(make_story("h" + std::to_string(i), Author::HCA, 3));
  for (int i = 0; i < 10; ++i) stories.push_back(make_story("p" + std::to_string(i), Author::Potter, 3));
  const SplitTargets targets{40, 10, 10};
  for (std::uint64_t seed : {0ULL, 1ULL, 99ULL}) {
    const auto parts = stratified_split(stories, targets, seed);
    // counting oracle
    std::map<std::string, int> where;
    for (const auto& p : parts)
      for (const auto& id : p.story_ids) ++where[id];
    ASSERT_EQ(where.size(), stories.size());
    for (const auto& [id, count] : where) ASSERT_EQ(count, 1);
    const std::map<char, double> author_n = {{'g', 30}, {'h', 20}, {'p', 10}};
    for (std::size_t p = 0; p < 3; ++p) {
      EXPECT_EQ(parts[p].story_ids.size(), targets.at(p));
      std::map<char, int> count;
      for (const auto& id : parts[p].story_ids) ++count[id[0]];
      for (const auto& [a, n] : author_n) {
        const double expected = n * static_cast<double>(targets.at(p)) / 60.0;
        EXPECT_LE(std::fabs(count[a] - expected), 1.0) << "partition " << p << " author " << a;
      }
    }
  }
}

TEST(StratifiedSplit, DeterministicAndSeedSensitive) {
  std::vector<Story> stories;
  for (int i = 0; i < 40; ++i)
    stories.push_back(make_story("s" + std::to_string(i), i % 3 == 0 ? Author::Potter : Author::HCA, 2));
  const auto a = stratified_split(stories, {28, 6, 6}, 5);
  const auto b = stratified_split(stories, {28, 6, 6}, 5);
  EXPECT_EQ(format_manifest(a), format_manifest(b));
  EXPECT_NE(format_manifest(a), format_manifest(stratified_split(stories, {28, 6, 6}, 6)));
}

TEST(StratifiedSplit, ManifestOverridesAndErrors) {
  std::vector<Story> stories = {make_story("a", Author::Grimm, 1), make_story("b", Author::Grimm, 1),
                                make_story("c", Author::HCA, 1)};
  const auto manifest = parse_manifest("story_id\tpartition\na\ttest\nb\ttest\nc\ttrain\n");
  const auto parts = stratified_split(stories, {}, 0, manifest);
  EXPECT_EQ(parts[2].story_ids, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(parts[0].story_ids, (std::vector<std::string>{"c"}));
  EXPECT_THROW(stratified_split(stories, {}, 0, parse_manifest("a\ttest\n")), DataError);
  EXPECT_THROW(stratified_split(stories, {}, 0, parse_manifest("a\ttest\nb\tdev\nc\ttrain\nz\ttrain\n")), DataError);
  EXPECT_THROW(stratified_split(stories, {1, 1, 2}, 0), ValidationError);
  EXPECT_THROW(parse_manifest("a\tholdout\n"), ValidationError);
}

TEST(EmotionDistribution, AllNeutral) {
  Story s{"s", Author::HCA, {{"s", 0, "x", {{"a1", EmotionLabel::neutral}, {"a2", EmotionLabel::neutral}, {"a3", EmotionLabel::neutral}}}}};
  const auto d = emotion_distribution({s});
  EXPECT_DOUBLE_EQ(d.at("overall").at(EmotionLabel::neutral), 100.0);
  EXPECT_DOUBLE_EQ(d.at("HCA").at(EmotionLabel::anger), 0.0);
}

TEST(EmotionDistribution, SumsToHundredPerGroup) {
  Rng rng(8);
  std::vector<Story> stories;
  for (int k = 0; k < 20; ++k) {
    Story s{"s" + std::to_string(k), kAllAuthors[rng.below(3)], {}};
    for (std::size_t i = 0; i < 1 + rng.below(30); ++i) {
      AnnotatedSentence sent{s.story_id, i, "x", {}};
      sent.labels["a1"] = kAllLabels[rng.below(8)];
      sent.labels["a2"] = kAllLabels[rng.below(8)];
      if (rng.below(2)) sent.labels["a3"] = kReducedLabels[rng.below(6)];
      s.sentences.push_back(sent);
    }
    stories.push_back(s);
  }
  for (const auto& [group, dist] : emotion_distribution(stories)) {
    double sum = 0.0;
    for (const auto& [l, pct] : dist) {
      EXPECT_GE(pct, 0.0);
      sum += pct;
    }
    EXPECT_NEAR(sum, 100.0, 1e-9) << group;
  }
}
