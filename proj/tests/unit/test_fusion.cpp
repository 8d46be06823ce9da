#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "emoarc/fusion/ewe.hpp"
#include "emoarc/fusion/io.hpp"
#include "emoarc/random.hpp"

using namespace emoarc;
using namespace emoarc::fusion;

namespace {

TrajectorySignal sig(const std::string& ann, std::vector<double> v, std::vector<double> a) {
  return {"s", {SourceKind::annotator, ann}, std::move(v), std::move(a)};
}

std::vector<TrajectorySignal> random_set(Rng& rng, std::size_t k, std::size_t n) {
  // labels drawn from a small palette, like mapped categorical annotations
  const double palette[] = {0.052, 0.073, 0.167, 0.469, 0.875, 0.960};
  std::vector<TrajectorySignal> out;
  for (std::size_t a = 0; a < k; ++a) {
    TrajectorySignal s{"s", {SourceKind::annotator, "a" + std::to_string(a)}, {}, {}};
    for (std::size_t i = 0; i < n; ++i) {
      s.valence.push_back(palette[rng.below(6)]);
      s.arousal.push_back(rng.below(4) == 0 ? 0.184 : rng.uniform());
    }
    out.push_back(s);
  }
  return out;
}

// Direct weight computation, written out per annotator.
std::vector<double> oracle_weights(const std::vector<TrajectorySignal>& s, std::size_t d, const EweOptions& o) {
  const std::size_t k = s.size(), n = s[0].size();
  std::vector<double> raw(k);
  for (std::size_t a = 0; a < k; ++a) {
    std::vector<double> ref(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0;
      int cnt = 0;
      for (std::size_t b = 0; b < k; ++b)
        if (o.reference == WeightReference::mean || b != a) {
          sum += s[b].dim(d)[i];
          ++cnt;
        }
      ref[i] = sum / cnt;
    }
    double w = 0.0;
    try {
      w = o.metric == WeightMetric::ccc ? metrics::ccc(s[a].dim(d), ref) : metrics::pearson(s[a].dim(d), ref);
    } catch (const NumericError&) {
      w = 0.0;
    }
    raw[a] = std::max(w, 0.0);
  }
  const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
  for (auto& w : raw) w = total > 0 ? w / total : 1.0 / k;
  return raw;
}

}  // namespace

TEST(Ewe, IdenticalAnnotatorsReproduceInput) {
  const auto a = sig("a1", {0.1, 0.5, 0.9}, {0.3, 0.3, 0.7});
  auto b = a;
  b.source.id = "a2";
  auto c = a;
  c.source.id = "a3";
  const auto r = ewe_fuse({a, b, c});
  EXPECT_EQ(r.gold.valence, a.valence);
  EXPECT_EQ(r.gold.arousal, a.arousal);
  EXPECT_NEAR(r.weights.normalized[0][1], 1.0 / 3, 1e-15);
}

TEST(Ewe, TwoAnnotatorsGiveTheMean) {
  Rng rng(1);
  for (int t = 0; t < 200; ++t) {
    const auto set = random_set(rng, 2, 2 + rng.below(20));
    const auto r = ewe_fuse(set);
    for (std::size_t d = 0; d < 2; ++d)
      for (std::size_t i = 0; i < set[0].size(); ++i)
        ASSERT_NEAR(r.gold.dim(d)[i], (set[0].dim(d)[i] + set[1].dim(d)[i]) / 2, 1e-12);
  }
}

TEST(Ewe, AllNegativeAgreementFallsBackToUniform) {
  const auto r = ewe_fuse({sig("a1", {0, 1, 0, 1}, {0, 1, 0, 1}), sig("a2", {1, 0, 1, 0}, {0, 1, 0, 1})});
  EXPECT_TRUE(r.weights.fallback[0]);
  EXPECT_FALSE(r.weights.fallback[1]);
  EXPECT_EQ(r.gold.valence, (std::vector<double>{0.5, 0.5, 0.5, 0.5}));
}

TEST(Ewe, ConstantAnnotatorGetsZeroWeight) {
  // a3 is constant; its CCC against the others is 0 because covariance is 0
  const auto set = std::vector{sig("a1", {0.1, 0.9, 0.5}, {0.2, 0.6, 0.4}), sig("a2", {0.2, 0.8, 0.5}, {0.3, 0.5, 0.4}),
                               sig("a3", {0.469, 0.469, 0.469}, {0.184, 0.184, 0.184})};
  const auto r = ewe_fuse(set);
  for (std::size_t d = 0; d < 2; ++d) {
    EXPECT_EQ(r.weights.raw[d][2], 0.0);
    const auto w = oracle_weights(set, d, {});
    for (std::size_t a = 0; a < 3; ++a) EXPECT_NEAR(r.weights.normalized[d][a], w[a], 1e-12);
  }
}

TEST(Ewe, WeightsMatchOracleForAllVariants) {
  Rng rng(77);
  for (auto metric : {WeightMetric::ccc, WeightMetric::pearson})
    for (auto ref : {WeightReference::loo, WeightReference::mean})
      for (int t = 0; t < 100; ++t) {
        const EweOptions o{metric, ref};
        const auto set = random_set(rng, 2 + rng.below(4), 2 + rng.below(25));
        const auto r = ewe_fuse(set, o);
        for (std::size_t d = 0; d < 2; ++d) {
          const auto w = oracle_weights(set, d, o);
          for (std::size_t a = 0; a < set.size(); ++a) ASSERT_NEAR(r.weights.normalized[d][a], w[a], 1e-12);
        }
      }
}

TEST(Ewe, PermutationInvarianceAndBoundedness) {
  Rng rng(42);
  for (int t = 0; t < 1000; ++t) {
    auto set = random_set(rng, 2 + rng.below(4), 2 + rng.below(30));
    const auto r = ewe_fuse(set);
    for (std::size_t d = 0; d < 2; ++d) {
      const double sum = std::accumulate(r.weights.normalized[d].begin(), r.weights.normalized[d].end(), 0.0);
      ASSERT_NEAR(sum, 1.0, 1e-12);
      for (double w : r.weights.normalized[d]) ASSERT_GE(w, 0.0);
      for (std::size_t i = 0; i < set[0].size(); ++i) {
        double lo = 1, hi = 0;
        for (const auto& s : set) {
          lo = std::min(lo, s.dim(d)[i]);
          hi = std::max(hi, s.dim(d)[i]);
        }
        ASSERT_GE(r.gold.dim(d)[i], lo);
        ASSERT_LE(r.gold.dim(d)[i], hi);
      }
    }
    rng.shuffle(set);
    const auto p = ewe_fuse(set);
    for (std::size_t d = 0; d < 2; ++d)
      for (std::size_t i = 0; i < set[0].size(); ++i) ASSERT_NEAR(p.gold.dim(d)[i], r.gold.dim(d)[i], 1e-12);
  }
}

TEST(Ewe, InputErrors) {
  EXPECT_THROW(ewe_fuse({sig("a1", {0.1, 0.2}, {0.1, 0.2})}), ValidationError);
  EXPECT_THROW(ewe_fuse({sig("a1", {0.1, 0.2}, {0.1, 0.2}), sig("a2", {0.1}, {0.1})}), ValidationError);
  auto other = sig("a2", {0.1, 0.2}, {0.1, 0.2});
  other.story_id = "t";
  EXPECT_THROW(ewe_fuse({sig("a1", {0.1, 0.2}, {0.1, 0.2}), other}), ValidationError);
}

TEST(Ewe, SingleSentenceStoryUsesUniformWeights) {
  const auto r = ewe_fuse({sig("a1", {0.2}, {0.4}), sig("a2", {0.6}, {0.8})});
  EXPECT_TRUE(r.weights.fallback_used());
  EXPECT_NEAR(r.gold.valence[0], 0.4, 1e-15);
}

TEST(GoldStandard, PartialAnnotationIsDataError) {
  using corpus::EmotionLabel;
  corpus::Story s{"s", corpus::Author::HCA,
                  {{"s", 0, "x", {{"a1", EmotionLabel::fear}, {"a2", EmotionLabel::fear}}},
                   {"s", 1, "y", {{"a1", EmotionLabel::sadness}}}}};
  EXPECT_THROW(gold_standard({s}, mapping::LabelMap::standard()), DataError);
  s.sentences[1].labels["a2"] = EmotionLabel::anger;
  const auto gold = gold_standard({s}, mapping::LabelMap::standard());
  EXPECT_NEAR(gold.at("s").valence[1], (0.052 + 0.167) / 2, 1e-12);
}

TEST(SignalIo, RoundTripAndErrors) {
  SignalMap m;
  m["b"] = {"b", {SourceKind::gold, ""}, {0.1234567, 0.5}, {0.0, 1.0}};
  m["a"] = {"a", {SourceKind::gold, ""}, {0.25}, {0.75}};
  const auto text = format_signals(m, std::string("run7"));
  EXPECT_EQ(text.substr(0, 25), "# run_id=run7\na\t0\t0.25000");
  const auto f = parse_signals(text, SourceKind::prediction);
  EXPECT_EQ(*f.run_id, "run7");
  EXPECT_EQ(f.signals.at("b").valence[0], 0.123457);
  EXPECT_EQ(f.signals.at("b").source.id, "run7");
  EXPECT_EQ(format_signals(f.signals, f.run_id), text);

  EXPECT_THROW(parse_signals("a\t0\t0.1\t0.1\na\t2\t0.1\t0.1\n", SourceKind::gold), DataError);
  EXPECT_THROW(parse_signals("a\t0\t1.1\t0.1\n", SourceKind::gold), DataError);
  EXPECT_THROW(parse_signals("a\t0\t0.1\n", SourceKind::gold), ValidationError);
  EXPECT_THROW(parse_signals("a\t0\t0.1\t0.1\na\t0\t0.2\t0.2\n", SourceKind::gold), ValidationError);
}
