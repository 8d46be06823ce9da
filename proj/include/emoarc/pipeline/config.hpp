#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "emoarc/corpus/types.hpp"
#include "emoarc/error.hpp"
#include "emoarc/fusion/ewe.hpp"
#include "emoarc/predict/windows.hpp"
#include "emoarc/util.hpp"

namespace emoarc::pipeline {

enum class Backend { lexicon, linear };

inline std::string_view to_string(Backend b) { return b == Backend::lexicon ? "lexicon" : "linear"; }

/// Run configuration. Text form, one setting per line:
///
///   # comment
///   key = value
///
/// Keys are case-sensitive; unknown or repeated keys are errors. List values
/// (l2, anchor, half_life, unlabeled_corpus) are comma-separated. Relative
/// paths resolve against the config file's directory.
struct PipelineConfig {
  std::string labeled_corpus;
  std::vector<std::string> unlabeled_corpus;
  std::string lexicon;
  std::optional<std::string> gold;
  std::optional<std::string> split_manifest;
  std::optional<std::string> label_table;
  std::optional<std::array<std::size_t, 3>> split_counts;
  std::uint64_t seed = 0;
  Backend backend = Backend::linear;
  predict::WindowSpec window;
  std::vector<double> l2 = {1.0};
  std::optional<double> pseudo_l2;
  std::vector<double> anchor = {1.0};
  std::vector<double> half_life = {0.0};
  fusion::EweOptions ewe;
  double low_agreement_k = 0.0;  // 0 disables filtering
  std::optional<corpus::Author> exclude_author;
  std::string run_id = "pipeline";
  std::string out_dir = "emoarc-run";

  /// Canonical key = value listing, sorted by key.
  std::map<std::string, std::string> echo;

  std::string digest() const {
    std::string canon;
    for (const auto& [k, v] : echo) canon += k + "=" + v + "\n";
    return hex64(fnv1a64(canon));
  }
};

inline constexpr std::array<const char*, 23> kConfigKeys = {
    "labeled_corpus", "unlabeled_corpus", "lexicon", "gold", "split_manifest", "label_table", "train", "dev",
    "test", "seed", "backend", "context", "max_tokens", "l2", "pseudo_l2", "anchor", "half_life", "ewe_weight",
    "ewe_ref", "low_agreement_k", "exclude_author", "run_id", "out"};

namespace detail {

inline std::vector<double> parse_reals(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& part : split_char(v, ',')) {
    double x = 0;
    if (!parse_double(part, x)) throw ValidationError("config: " + key + ": bad number '" + part + "'");
    out.push_back(x);
  }
  return out;
}

inline std::size_t parse_count(const std::string& key, const std::string& v) {
  long long x = 0;
  if (!parse_int(v, x) || x < 0) throw ValidationError("config: " + key + ": expected a non-negative integer");
  return static_cast<std::size_t>(x);
}

}  // namespace detail

inline PipelineConfig parse_config(const std::string& content, const std::filesystem::path& base_dir = ".",
                                   bool check_paths = true) {
  std::map<std::string, std::string> kv;
  const auto lines = split_lines(content);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const auto line = trim(lines[ln]);
    if (line.empty() || line[0] == '#') continue;
    const auto at = "config:" + std::to_string(ln + 1) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ValidationError(at + "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (std::find_if(kConfigKeys.begin(), kConfigKeys.end(), [&](const char* k) { return key == k; }) ==
        kConfigKeys.end())
      throw ValidationError(at + "unknown key '" + key + "'");
    if (!kv.emplace(key, value).second) throw ValidationError(at + "key '" + key + "' set twice");
  }

  PipelineConfig c;
  c.echo = kv;
  auto path = [&](const std::string& v) {
    std::filesystem::path p(v);
    return (p.is_absolute() ? p : base_dir / p).lexically_normal().string();
  };
  auto get = [&](const char* k) -> std::optional<std::string> {
    auto it = kv.find(k);
    if (it == kv.end()) return std::nullopt;
    return it->second;
  };

  if (auto v = get("labeled_corpus")) c.labeled_corpus = path(*v);
  else throw ValidationError("config: labeled_corpus is required");
  if (auto v = get("unlabeled_corpus"))
    for (const auto& p : split_char(*v, ',')) c.unlabeled_corpus.push_back(path(std::string(trim(p))));
  else throw ValidationError("config: unlabeled_corpus is required");
  if (auto v = get("lexicon")) c.lexicon = path(*v);
  else throw ValidationError("config: lexicon is required");
  if (auto v = get("gold")) c.gold = path(*v);
  if (auto v = get("split_manifest")) c.split_manifest = path(*v);
  if (auto v = get("label_table")) c.label_table = path(*v);

  const auto tr = get("train"), dv = get("dev"), te = get("test");
  if (tr || dv || te) {
    if (!(tr && dv && te)) throw ValidationError("config: train, dev and test must be given together");
    c.split_counts = std::array<std::size_t, 3>{detail::parse_count("train", *tr), detail::parse_count("dev", *dv),
                                                detail::parse_count("test", *te)};
  }
  if (auto v = get("seed")) {
    long long s = 0;
    if (!parse_int(*v, s) || s < 0) throw ValidationError("config: seed must be a non-negative integer");
    c.seed = static_cast<std::uint64_t>(s);
  }
  if (auto v = get("backend")) {
    if (*v == "lexicon") c.backend = Backend::lexicon;
    else if (*v == "linear") c.backend = Backend::linear;
    else throw ValidationError("config: backend must be lexicon or linear");
  }
  if (auto v = get("context")) c.window.context_size = detail::parse_count("context", *v);
  if (auto v = get("max_tokens")) {
    c.window.max_tokens = detail::parse_count("max_tokens", *v);
    if (c.window.max_tokens == 0) throw ValidationError("config: max_tokens must be positive");
  }
  if (auto v = get("l2")) c.l2 = detail::parse_reals("l2", *v);
  if (auto v = get("pseudo_l2")) c.pseudo_l2 = detail::parse_reals("pseudo_l2", *v).front();
  if (auto v = get("anchor")) c.anchor = detail::parse_reals("anchor", *v);
  if (auto v = get("half_life")) c.half_life = detail::parse_reals("half_life", *v);
  for (double x : c.l2)
    if (!(x > 0.0)) throw ValidationError("config: l2 values must be positive");
  if (c.pseudo_l2 && !(*c.pseudo_l2 > 0.0)) throw ValidationError("config: pseudo_l2 must be positive");
  for (double x : c.anchor)
    if (!(x >= 0.0)) throw ValidationError("config: anchor values must be non-negative");
  for (double x : c.half_life)
    if (!(x >= 0.0)) throw ValidationError("config: half_life values must be non-negative");
  if (auto v = get("ewe_weight")) {
    if (*v == "ccc") c.ewe.metric = fusion::WeightMetric::ccc;
    else if (*v == "pearson") c.ewe.metric = fusion::WeightMetric::pearson;
    else throw ValidationError("config: ewe_weight must be ccc or pearson");
  }
  if (auto v = get("ewe_ref")) {
    if (*v == "loo") c.ewe.reference = fusion::WeightReference::loo;
    else if (*v == "mean") c.ewe.reference = fusion::WeightReference::mean;
    else throw ValidationError("config: ewe_ref must be loo or mean");
  }
  if (auto v = get("low_agreement_k")) {
    if (!parse_double(*v, c.low_agreement_k) || c.low_agreement_k < 0.0)
      throw ValidationError("config: low_agreement_k must be a non-negative number");
  }
  if (auto v = get("exclude_author")) {
    c.exclude_author = corpus::parse_author(*v);
    if (!c.exclude_author) throw ValidationError("config: unknown author '" + *v + "'");
  }
  if (auto v = get("run_id")) c.run_id = *v;
  if (auto v = get("out")) c.out_dir = path(*v);

  if (check_paths) {
    std::vector<std::string> paths = {c.labeled_corpus, c.lexicon};
    paths.insert(paths.end(), c.unlabeled_corpus.begin(), c.unlabeled_corpus.end());
    for (const auto& opt : {c.gold, c.split_manifest, c.label_table})
      if (opt) paths.push_back(*opt);
    for (const auto& p : paths)
      if (!std::filesystem::exists(p)) throw ValidationError("config: path does not exist: " + p);
  }
  return c;
}

inline PipelineConfig load_config(const std::string& path) {
  return parse_config(read_file(path), std::filesystem::path(path).parent_path());
}

}  // namespace emoarc::pipeline
