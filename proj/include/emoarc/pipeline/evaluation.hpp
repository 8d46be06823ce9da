#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "emoarc/corpus/types.hpp"
#include "emoarc/error.hpp"
#include "emoarc/fusion/ewe.hpp"
#include "emoarc/fusion/io.hpp"
#include "emoarc/metrics/correlation.hpp"
#include "emoarc/metrics/error_stats.hpp"

namespace emoarc::pipeline {

inline constexpr const char* kReportSchema = "emoarc.evaluation/1";
inline constexpr std::size_t kStoryParts = 5;

using OptScore = std::optional<double>;
using DimPair = std::array<OptScore, 2>;

/// CCC, or nothing when undefined (fewer than 2 values or 0/0).
inline OptScore try_ccc(const std::vector<double>& y, const std::vector<double>& y_hat) {
  if (y.size() < 2) return std::nullopt;
  try {
    return metrics::ccc(y, y_hat);
  } catch (const NumericError&) {
    return std::nullopt;
  }
}

/// Start index of each of the five story parts plus the end. Every part has
/// n / 5 sentences and the first n % 5 parts get one more.
inline std::array<std::size_t, kStoryParts + 1> story_part_bounds(std::size_t n) {
  std::array<std::size_t, kStoryParts + 1> b{};
  const std::size_t q = n / kStoryParts, r = n % kStoryParts;
  for (std::size_t p = 0; p <= kStoryParts; ++p) b[p] = p * q + std::min(p, r);
  return b;
}

struct DimensionScores {
  OptScore overall_ccc;
  double story_ccc_mean = 0.0;
  double story_ccc_std = 0.0;  // population
  std::size_t stories_scored = 0;
  std::map<std::string, OptScore> author_ccc;
};

struct PartitionScores {
  corpus::PartitionName name = corpus::PartitionName::dev;
  std::size_t stories = 0;
  std::size_t sentences = 0;
  std::array<DimensionScores, 2> dims;
  std::map<std::string, DimPair> story_ccc;
};

struct EvaluationReport {
  std::string run_id;
  std::string config_digest;
  std::vector<PartitionScores> partitions;
  std::array<std::array<OptScore, kStoryParts>, 2> story_parts{};  // pooled over evaluated partitions
  std::array<metrics::ErrorStats, 2> errors{};                      // pooled over evaluated partitions

  const PartitionScores& partition(corpus::PartitionName p) const {
    for (const auto& s : partitions)
      if (s.name == p) return s;
    throw ValidationError("partition not evaluated: " + std::string(corpus::to_string(p)));
  }
};

/// Scores predictions against gold for the given partitions. Overall CCC
/// concatenates stories in ascending story-id order; author CCC concatenates
/// per author; story-part CCC and error statistics pool all evaluated
/// partitions.
inline EvaluationReport evaluate_run(const fusion::SignalMap& predictions, const fusion::SignalMap& gold,
                                     const std::vector<corpus::Story>& stories,
                                     const std::vector<corpus::Partition>& partitions,
                                     const std::vector<corpus::PartitionName>& evaluate = {corpus::PartitionName::dev,
                                                                                           corpus::PartitionName::test},
                                     const std::string& run_id = "", const std::string& config_digest = "") {
  std::map<std::string, corpus::Author> author_of;
  for (const auto& s : stories) author_of[s.story_id] = s.author;

  EvaluationReport report;
  report.run_id = run_id;
  report.config_digest = config_digest;
  std::array<std::array<std::vector<double>, kStoryParts>, 2> part_gold, part_pred;
  std::array<std::vector<double>, 2> abs_err;

  for (auto pname : evaluate) {
    const corpus::Partition* part = nullptr;
    for (const auto& p : partitions)
      if (p.name == pname) part = &p;
    if (!part) throw ValidationError("no partition named " + std::string(corpus::to_string(pname)));
    std::vector<std::string> ids = part->story_ids;
    std::sort(ids.begin(), ids.end());

    PartitionScores ps;
    ps.name = pname;
    ps.stories = ids.size();
    std::array<std::vector<double>, 2> cat_gold, cat_pred;
    std::map<std::string, std::array<std::array<std::vector<double>, 2>, 2>> by_author;  // author -> dim -> (gold, pred)
    std::array<std::vector<double>, 2> story_scores;

    for (const auto& id : ids) {
      auto g = gold.find(id);
      auto p = predictions.find(id);
      if (g == gold.end()) throw DataError("no gold signal for story " + id);
      if (p == predictions.end()) throw DataError("coverage gap: no predictions for story " + id);
      if (p->second.size() != g->second.size())
        throw DataError("coverage gap: story " + id + " has " + std::to_string(p->second.size()) + " predictions for " +
                        std::to_string(g->second.size()) + " sentences");
      auto a = author_of.find(id);
      if (a == author_of.end()) throw DataError("story " + id + " not in corpus");
      const std::string author(corpus::to_string(a->second));
      const std::size_t n = g->second.size();
      ps.sentences += n;
      const auto bounds = story_part_bounds(n);
      DimPair sc;
      for (std::size_t d = 0; d < 2; ++d) {
        const auto& gy = g->second.dim(d);
        const auto& py = p->second.dim(d);
        cat_gold[d].insert(cat_gold[d].end(), gy.begin(), gy.end());
        cat_pred[d].insert(cat_pred[d].end(), py.begin(), py.end());
        auto& ab = by_author[author][d];
        ab[0].insert(ab[0].end(), gy.begin(), gy.end());
        ab[1].insert(ab[1].end(), py.begin(), py.end());
        for (std::size_t part_i = 0; part_i < kStoryParts; ++part_i)
          for (std::size_t i = bounds[part_i]; i < bounds[part_i + 1]; ++i) {
            part_gold[d][part_i].push_back(gy[i]);
            part_pred[d][part_i].push_back(py[i]);
          }
        for (std::size_t i = 0; i < n; ++i) abs_err[d].push_back(std::fabs(py[i] - gy[i]));
        sc[d] = try_ccc(gy, py);
        if (sc[d]) story_scores[d].push_back(*sc[d]);
      }
      ps.story_ccc[id] = sc;
    }

    for (std::size_t d = 0; d < 2; ++d) {
      auto& ds = ps.dims[d];
      ds.overall_ccc = try_ccc(cat_gold[d], cat_pred[d]);
      ds.stories_scored = story_scores[d].size();
      if (!story_scores[d].empty()) {
        double sum = 0.0;
        for (double v : story_scores[d]) sum += v;
        ds.story_ccc_mean = sum / static_cast<double>(story_scores[d].size());
        double ss = 0.0;
        for (double v : story_scores[d]) ss += (v - ds.story_ccc_mean) * (v - ds.story_ccc_mean);
        ds.story_ccc_std = std::sqrt(ss / static_cast<double>(story_scores[d].size()));
      }
      for (const auto& [author, dims] : by_author) ds.author_ccc[author] = try_ccc(dims[d][0], dims[d][1]);
    }
    report.partitions.push_back(std::move(ps));
  }

  for (std::size_t d = 0; d < 2; ++d) {
    for (std::size_t p = 0; p < kStoryParts; ++p) report.story_parts[d][p] = try_ccc(part_gold[d][p], part_pred[d][p]);
    if (!abs_err[d].empty()) report.errors[d] = metrics::error_stats(abs_err[d]);
  }
  return report;
}

/// Per-story human agreement per dimension: mean CCC over annotator pairs
/// whose CCC is defined.
inline std::map<std::string, DimPair> human_agreement(
    const std::map<std::string, std::vector<fusion::TrajectorySignal>>& annotator_signals) {
  std::map<std::string, DimPair> out;
  for (const auto& [id, sigs] : annotator_signals) {
    DimPair pair;
    for (std::size_t d = 0; d < 2; ++d) {
      double sum = 0.0;
      std::size_t count = 0;
      for (std::size_t a = 0; a < sigs.size(); ++a)
        for (std::size_t b = a + 1; b < sigs.size(); ++b)
          if (auto c = try_ccc(sigs[a].dim(d), sigs[b].dim(d))) {
            sum += *c;
            ++count;
          }
      if (count > 0) pair[d] = sum / static_cast<double>(count);
    }
    out[id] = pair;
  }
  return out;
}

struct StoryCorrelations {
  double valence_vs_arousal = 0.0;         // per-story model CCC, V against A
  std::array<double, 2> model_vs_human{};  // per dimension
  std::size_t stories = 0;
};

/// Pearson correlations over the stories of all evaluated partitions that
/// have every score defined.
inline StoryCorrelations story_correlation_analysis(const EvaluationReport& report,
                                                    const std::map<std::string, DimPair>& human) {
  std::vector<double> mv, ma, hv, ha;
  for (const auto& part : report.partitions)
    for (const auto& [id, sc] : part.story_ccc) {
      auto h = human.find(id);
      if (!sc[0] || !sc[1] || h == human.end() || !h->second[0] || !h->second[1]) continue;
      mv.push_back(*sc[0]);
      ma.push_back(*sc[1]);
      hv.push_back(*h->second[0]);
      ha.push_back(*h->second[1]);
    }
  if (mv.size() < 3) throw ValidationError("story correlation analysis needs at least 3 scored stories");
  StoryCorrelations r;
  r.stories = mv.size();
  r.valence_vs_arousal = metrics::pearson(mv, ma);
  r.model_vs_human = {metrics::pearson(mv, hv), metrics::pearson(ma, ha)};
  return r;
}

inline nlohmann::ordered_json opt_json(const OptScore& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr); }

inline nlohmann::ordered_json to_json(const metrics::ErrorStats& s) {
  return {{"mean", s.mean}, {"std", s.std}, {"median", s.median}, {"p90", s.p90}, {"p95", s.p95}, {"n", s.n}};
}

inline nlohmann::ordered_json to_json(const EvaluationReport& r) {
  nlohmann::ordered_json j;
  j["schema"] = kReportSchema;
  j["run_id"] = r.run_id;
  j["config_digest"] = r.config_digest;
  auto& parts = j["partitions"] = nlohmann::ordered_json::object();
  for (const auto& p : r.partitions) {
    nlohmann::ordered_json pj;
    pj["stories"] = p.stories;
    pj["sentences"] = p.sentences;
    for (std::size_t d = 0; d < 2; ++d) {
      const auto& ds = p.dims[d];
      nlohmann::ordered_json dj;
      dj["overall_ccc"] = opt_json(ds.overall_ccc);
      dj["story_ccc_mean"] = ds.story_ccc_mean;
      dj["story_ccc_std"] = ds.story_ccc_std;
      dj["stories_scored"] = ds.stories_scored;
      dj["author_ccc"] = nlohmann::ordered_json::object();
      for (const auto& [a, v] : ds.author_ccc) dj["author_ccc"][a] = opt_json(v);
      pj[fusion::kDimensionNames[d]] = dj;
    }
    pj["story_ccc"] = nlohmann::ordered_json::object();
    for (const auto& [id, sc] : p.story_ccc) pj["story_ccc"][id] = {opt_json(sc[0]), opt_json(sc[1])};
    parts[std::string(corpus::to_string(p.name))] = pj;
  }
  for (std::size_t d = 0; d < 2; ++d) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& v : r.story_parts[d]) arr.push_back(opt_json(v));
    j["story_parts"][fusion::kDimensionNames[d]] = arr;
    j["error_stats"][fusion::kDimensionNames[d]] = to_json(r.errors[d]);
  }
  return j;
}

/// Structural check of an emitted evaluation report.
inline void validate_report_json(const nlohmann::ordered_json& j) {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw ValidationError("report schema violation: " + what);
  };
  need(j.is_object(), "root must be an object");
  need(j.value("schema", "") == kReportSchema, "schema must be " + std::string(kReportSchema));
  need(j.contains("run_id") && j["run_id"].is_string(), "run_id");
  need(j.contains("config_digest") && j["config_digest"].is_string(), "config_digest");
  need(j.contains("partitions") && j["partitions"].is_object(), "partitions");
  auto score = [](const nlohmann::ordered_json& v) { return v.is_null() || (v.is_number() && v >= -1.0 && v <= 1.0); };
  for (const auto& [name, p] : j["partitions"].items()) {
    need(corpus::parse_partition(name).has_value(), "unknown partition " + name);
    for (const char* dim : {"valence", "arousal"}) {
      need(p.contains(dim), name + "." + dim);
      const auto& d = p[dim];
      need(d.contains("overall_ccc") && score(d["overall_ccc"]), name + "." + dim + ".overall_ccc");
      need(d.contains("story_ccc_mean") && d["story_ccc_mean"].is_number(), name + "." + dim + ".story_ccc_mean");
      need(d.contains("story_ccc_std") && d["story_ccc_std"].is_number() && d["story_ccc_std"] >= 0.0,
           name + "." + dim + ".story_ccc_std");
      need(d.contains("author_ccc") && d["author_ccc"].is_object(), name + "." + dim + ".author_ccc");
    }
    need(p.contains("story_ccc") && p["story_ccc"].is_object(), name + ".story_ccc");
  }
  for (const char* dim : {"valence", "arousal"}) {
    need(j.contains("story_parts") && j["story_parts"].contains(dim) && j["story_parts"][dim].is_array() &&
             j["story_parts"][dim].size() == kStoryParts,
         std::string("story_parts.") + dim);
    need(j.contains("error_stats") && j["error_stats"].contains(dim), std::string("error_stats.") + dim);
    const auto& e = j["error_stats"][dim];
    for (const char* f : {"mean", "std", "median", "p90", "p95", "n"})
      need(e.contains(f) && e[f].is_number(), std::string("error_stats.") + dim + "." + f);
    need(e["median"] <= e["p90"] && e["p90"] <= e["p95"], std::string("error_stats.") + dim + " percentile order");
  }
}

}  // namespace emoarc::pipeline
