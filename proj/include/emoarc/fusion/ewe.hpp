#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "emoarc/corpus/types.hpp"
#include "emoarc/error.hpp"
#include "emoarc/fusion/signal.hpp"
#include "emoarc/mapping/va.hpp"
#include "emoarc/metrics/correlation.hpp"

namespace emoarc::fusion {

enum class WeightMetric { ccc, pearson };
enum class WeightReference { loo, mean };

/// Evaluator-weighted-estimator variant. The default weighs each annotator
/// by the CCC between its signal and the mean of the other annotators.
struct EweOptions {
  WeightMetric metric = WeightMetric::ccc;
  WeightReference reference = WeightReference::loo;
};

struct FusionWeights {
  std::vector<std::string> annotators;            // source ids, input order
  std::array<std::vector<double>, 2> normalized;  // [dimension][annotator]
  std::array<std::vector<double>, 2> raw;         // clipped raw weights
  std::array<bool, 2> fallback{false, false};     // uniform weights used

  bool fallback_used() const { return fallback[0] || fallback[1]; }
};

struct FusionResult {
  TrajectorySignal gold;
  FusionWeights weights;
};

namespace detail {

inline double agreement(WeightMetric metric, const std::vector<double>& x, const std::vector<double>& ref) {
  if (x.size() < 2) return 0.0;
  try {
    return metric == WeightMetric::ccc ? metrics::ccc(x, ref) : metrics::pearson(x, ref);
  } catch (const NumericError&) {
    return 0.0;  // undefined agreement carries no weight
  }
}

}  // namespace detail

/// Fuses annotator signals of one story into a gold trajectory, separately
/// per dimension. Raw weight of annotator k is the agreement between its
/// signal and the reference (leave-one-out mean or plain mean), clipped at
/// zero; undefined agreement counts as zero. If every raw weight is zero the
/// weights fall back to uniform. Gold values are the normalized weighted sum,
/// kept inside the pointwise [min, max] of the inputs.
inline FusionResult ewe_fuse(const std::vector<TrajectorySignal>& signals, const EweOptions& options = {}) {
  if (signals.size() < 2) throw ValidationError("ewe_fuse: need at least 2 signals");
  const auto& first = signals.front();
  for (const auto& s : signals) {
    if (s.story_id != first.story_id) throw ValidationError("ewe_fuse: signals from different stories");
    if (s.valence.size() != first.size() || s.arousal.size() != first.size())
      throw ValidationError("ewe_fuse: length mismatch in story " + first.story_id);
  }
  const std::size_t k = signals.size();
  const std::size_t n = first.size();

  FusionResult r;
  r.gold.story_id = first.story_id;
  r.gold.source = {SourceKind::gold, ""};
  for (const auto& s : signals) r.weights.annotators.push_back(s.source.id);

  for (std::size_t d = 0; d < 2; ++d) {
    auto& raw = r.weights.raw[d];
    raw.assign(k, 0.0);
    const bool loo = options.reference == WeightReference::loo;
    std::vector<double> ref(n);
    for (std::size_t a = 0; a < k; ++a) {
      // Summed directly rather than as total minus own signal, so a constant
      // set of other annotators gives an exactly constant reference.
      std::fill(ref.begin(), ref.end(), 0.0);
      for (std::size_t b = 0; b < k; ++b)
        if (!loo || b != a)
          for (std::size_t i = 0; i < n; ++i) ref[i] += signals[b].dim(d)[i];
      const double count = static_cast<double>(loo ? k - 1 : k);
      for (auto& v : ref) v /= count;
      raw[a] = std::max(0.0, detail::agreement(options.metric, signals[a].dim(d), ref));
    }
    double sum = 0.0;
    for (double w : raw) sum += w;
    auto& w = r.weights.normalized[d];
    if (sum > 0.0) {
      w.resize(k);
      for (std::size_t a = 0; a < k; ++a) w[a] = raw[a] / sum;
    } else {
      w.assign(k, 1.0 / static_cast<double>(k));
      r.weights.fallback[d] = true;
    }

    auto& out = r.gold.dim(d);
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      double v = 0.0, lo = signals[0].dim(d)[i], hi = lo;
      for (std::size_t a = 0; a < k; ++a) {
        const double x = signals[a].dim(d)[i];
        v += w[a] * x;
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
      out[i] = std::clamp(v, lo, hi);
    }
  }
  return r;
}

/// Fuses every story independently. Input: story_id -> annotator signals.
inline std::map<std::string, FusionResult> fuse_corpus(const std::map<std::string, std::vector<TrajectorySignal>>& signals,
                                                       const EweOptions& options = {}) {
  std::map<std::string, FusionResult> out;
  for (const auto& [id, sigs] : signals) out.emplace(id, ewe_fuse(sigs, options));
  return out;
}

/// Annotator signals for each story from the label table. An annotator is
/// used for a story when it labeled every sentence of it; a partial
/// annotation is an error.
inline std::map<std::string, std::vector<TrajectorySignal>> annotator_signals(const std::vector<corpus::Story>& stories,
                                                                              const mapping::LabelMap& table) {
  std::map<std::string, std::vector<TrajectorySignal>> out;
  for (const auto& st : stories) {
    std::map<corpus::AnnotatorId, std::size_t> seen;
    for (const auto& s : st.sentences)
      for (const auto& [a, l] : s.labels) ++seen[a];
    auto& sigs = out[st.story_id];
    for (const auto& [a, count] : seen) {
      if (count != st.size())
        throw DataError("annotator " + a + " labeled only " + std::to_string(count) + " of " +
                        std::to_string(st.size()) + " sentences in story " + st.story_id);
      sigs.push_back(mapping::build_annotator_signal(st, a, table));
    }
  }
  return out;
}

/// Gold signals for a labeled corpus.
inline std::map<std::string, TrajectorySignal> gold_standard(const std::vector<corpus::Story>& stories,
                                                             const mapping::LabelMap& table,
                                                             const EweOptions& options = {}) {
  std::map<std::string, TrajectorySignal> gold;
  for (auto& [id, r] : fuse_corpus(annotator_signals(stories, table), options)) gold.emplace(id, std::move(r.gold));
  return gold;
}

}  // namespace emoarc::fusion
