#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "emoarc/corpus/types.hpp"
#include "emoarc/error.hpp"
#include "emoarc/random.hpp"

namespace emoarc::corpus {

struct LowAgreementResult {
  std::vector<Story> kept;
  std::vector<std::string> removed;
  double threshold = 0.0;
  double mean = 0.0;
  double std = 0.0;  // population
};

/// Drops stories whose agreement is strictly below mean - k * std.
inline LowAgreementResult remove_low_agreement(const std::vector<Story>& stories,
                                               const std::map<std::string, double>& alphas, double k) {
  if (!(k > 0.0)) throw ValidationError("low-agreement k must be positive");
  if (stories.empty()) return {};
  for (const auto& s : stories)
    if (!alphas.count(s.story_id)) throw DataError("missing alpha for story " + s.story_id);

  LowAgreementResult r;
  double sum = 0.0;
  for (const auto& s : stories) sum += alphas.at(s.story_id);
  r.mean = sum / static_cast<double>(stories.size());
  double ss = 0.0;
  for (const auto& s : stories) {
    const double d = alphas.at(s.story_id) - r.mean;
    ss += d * d;
  }
  r.std = std::sqrt(ss / static_cast<double>(stories.size()));
  const double first = alphas.at(stories.front().story_id);
  if (std::all_of(stories.begin(), stories.end(), [&](const Story& s) { return alphas.at(s.story_id) == first; })) {
    r.mean = first;  // exact, so equal alphas never fall below the threshold
    r.std = 0.0;
  }
  r.threshold = r.mean - k * r.std;
  for (const auto& s : stories) {
    if (alphas.at(s.story_id) < r.threshold)
      r.removed.push_back(s.story_id);
    else
      r.kept.push_back(s);
  }
  return r;
}

struct SplitTargets {
  std::size_t train = 0;
  std::size_t dev = 0;
  std::size_t test = 0;

  std::size_t at(std::size_t p) const { return p == 0 ? train : p == 1 ? dev : test; }
  std::size_t total() const { return train + dev + test; }
};

namespace detail {

inline std::vector<Partition> partitions_from_assignment(const std::map<std::string, PartitionName>& assign) {
  std::vector<Partition> parts;
  for (auto p : kAllPartitions) parts.push_back(Partition{p, {}});
  for (const auto& [id, p] : assign) parts[static_cast<std::size_t>(p)].story_ids.push_back(id);
  return parts;  // map iteration keeps ids sorted
}

/// Integer per-(author, partition) quotas within one of the proportional
/// share n_a * t_p / N, preserving both margins. Cells with a fractional
/// share are rounded up or down by exhaustive search, preferring the largest
/// total fractional part; the search space is at most 2^12.
inline std::vector<std::array<std::size_t, 3>> controlled_rounding(const std::vector<std::size_t>& author_counts,
                                                                   const SplitTargets& targets) {
  const std::size_t total = targets.total();
  const std::size_t na = author_counts.size();
  std::vector<std::array<std::size_t, 3>> quota(na);
  std::vector<std::array<std::uint64_t, 3>> rem(na);
  std::vector<std::pair<std::size_t, std::size_t>> frac_cells;
  std::vector<long long> row_def(na), col_def(3);
  for (std::size_t p = 0; p < 3; ++p) col_def[p] = static_cast<long long>(targets.at(p));
  for (std::size_t a = 0; a < na; ++a) {
    row_def[a] = static_cast<long long>(author_counts[a]);
    for (std::size_t p = 0; p < 3; ++p) {
      const std::uint64_t num = static_cast<std::uint64_t>(author_counts[a]) * targets.at(p);
      quota[a][p] = static_cast<std::size_t>(num / total);
      rem[a][p] = num % total;
      row_def[a] -= static_cast<long long>(quota[a][p]);
      col_def[p] -= static_cast<long long>(quota[a][p]);
      if (rem[a][p] != 0) frac_cells.emplace_back(a, p);
    }
  }
  const std::size_t m = frac_cells.size();
  if (m > 20) throw ValidationError("too many author groups for stratified split");
  std::optional<std::uint64_t> best_mask;
  std::uint64_t best_score = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    std::vector<long long> r = row_def, c = col_def;
    std::uint64_t score = 0;
    for (std::size_t b = 0; b < m; ++b) {
      if (mask >> b & 1U) {
        const auto [a, p] = frac_cells[b];
        --r[a];
        --c[p];
        score += rem[a][p];
      }
    }
    if (std::all_of(r.begin(), r.end(), [](long long x) { return x == 0; }) &&
        std::all_of(c.begin(), c.end(), [](long long x) { return x == 0; }) && (!best_mask || score > best_score)) {
      best_mask = mask;
      best_score = score;
    }
  }
  if (!best_mask) throw ValidationError("split targets infeasible for the author counts");
  for (std::size_t b = 0; b < m; ++b)
    if (*best_mask >> b & 1U) ++quota[frac_cells[b].first][frac_cells[b].second];
  return quota;
}

}  // namespace detail

/// Story-level train/dev/test split stratified by author. When a manifest
/// (story_id -> partition) is supplied it must cover the corpus exactly and
/// is returned verbatim. Otherwise each author's stories are shuffled with
/// the seed and dealt round-robin to the partitions until each partition's
/// per-author quota is met.
inline std::vector<Partition> stratified_split(const std::vector<Story>& stories, const SplitTargets& targets,
                                               std::uint64_t seed,
                                               const std::optional<std::map<std::string, PartitionName>>& manifest = {}) {
  std::set<std::string> ids;
  for (const auto& s : stories)
    if (!ids.insert(s.story_id).second) throw ValidationError("duplicate story_id " + s.story_id);

  if (manifest) {
    for (const auto& [id, p] : *manifest)
      if (!ids.count(id)) throw DataError("manifest names unknown story " + id);
    for (const auto& id : ids)
      if (!manifest->count(id)) throw DataError("manifest does not assign story " + id);
    return detail::partitions_from_assignment(*manifest);
  }

  if (targets.total() != stories.size())
    throw ValidationError("split targets sum to " + std::to_string(targets.total()) + " but corpus has " +
                          std::to_string(stories.size()) + " stories");
  if (stories.empty()) return detail::partitions_from_assignment({});

  std::vector<std::vector<std::string>> by_author(kAllAuthors.size());
  for (const auto& s : stories) by_author[static_cast<std::size_t>(s.author)].push_back(s.story_id);
  std::vector<std::size_t> counts;
  std::vector<std::size_t> present;
  for (std::size_t a = 0; a < by_author.size(); ++a) {
    if (by_author[a].empty()) continue;
    present.push_back(a);
    counts.push_back(by_author[a].size());
  }
  const auto quota = detail::controlled_rounding(counts, targets);

  Rng rng(seed);
  std::map<std::string, PartitionName> assign;
  for (std::size_t k = 0; k < present.size(); ++k) {
    auto pool = by_author[present[k]];
    std::sort(pool.begin(), pool.end());
    rng.shuffle(pool);
    auto left = quota[k];
    std::size_t p = 0;
    for (const auto& id : pool) {
      while (left[p] == 0) p = (p + 1) % 3;
      assign[id] = kAllPartitions[p];
      --left[p];
      p = (p + 1) % 3;
    }
  }
  return detail::partitions_from_assignment(assign);
}

inline std::vector<Story> select_stories(const std::vector<Story>& stories, const std::vector<std::string>& ids) {
  std::set<std::string> wanted(ids.begin(), ids.end());
  std::vector<Story> out;
  for (const auto& s : stories)
    if (wanted.count(s.story_id)) out.push_back(s);
  return out;
}

using LabelDistribution = std::map<EmotionLabel, double>;

/// Percentage of each label among all annotator labels, pooled over
/// annotators, for the whole corpus ("overall") and per author.
inline std::map<std::string, LabelDistribution> emotion_distribution(const std::vector<Story>& stories) {
  std::map<std::string, std::array<std::size_t, 8>> counts;
  auto& overall = counts["overall"];
  overall.fill(0);
  for (const auto& st : stories) {
    auto [it, fresh] = counts.try_emplace(std::string(to_string(st.author)));
    if (fresh) it->second.fill(0);
    for (const auto& s : st.sentences)
      for (const auto& [a, l] : s.labels) {
        ++it->second[label_index(l)];
        ++overall[label_index(l)];
      }
  }
  std::map<std::string, LabelDistribution> out;
  for (const auto& [group, c] : counts) {
    std::size_t total = 0;
    for (auto v : c) total += v;
    auto& dist = out[group];
    for (auto l : kAllLabels)
      dist[l] = total == 0 ? 0.0 : 100.0 * static_cast<double>(c[label_index(l)]) / static_cast<double>(total);
  }
  return out;
}

struct CorpusSize {
  std::size_t stories = 0;
  std::size_t sentences = 0;
};

inline std::map<std::string, CorpusSize> corpus_sizes(const std::vector<Story>& stories) {
  std::map<std::string, CorpusSize> out;
  for (const auto& st : stories) {
    for (const auto& key : {std::string("overall"), std::string(to_string(st.author))}) {
      ++out[key].stories;
      out[key].sentences += st.size();
    }
  }
  return out;
}

}  // namespace emoarc::corpus
