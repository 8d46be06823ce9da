#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "emoarc/error.hpp"
#include "emoarc/fusion/signal.hpp"
#include "emoarc/mapping/lexicon.hpp"
#include "emoarc/predict/features.hpp"
#include "emoarc/predict/windows.hpp"
#include "emoarc/util.hpp"

namespace emoarc::predict {

/// Boundary gold values are clamped into [eps, 1 - eps] before the logit.
inline constexpr double kLogitEpsilon = 1e-4;

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double clamped_logit(double p) {
  p = std::clamp(p, kLogitEpsilon, 1.0 - kLogitEpsilon);
  return std::log(p / (1.0 - p));
}

/// Linear regression head in logit space with a logistic output, one weight
/// column per dimension (valence, arousal) and an unpenalized bias.
struct LinearModel {
  std::uint32_t feature_dim = kFeatureDim;
  std::vector<std::array<double, 2>> weights = std::vector<std::array<double, 2>>(kFeatureDim, {0.0, 0.0});
  std::array<double, 2> bias{0.0, 0.0};
  double l2 = 1.0;
  WindowSpec window;
  std::string lexicon;

  /// Pre-squash score of one feature vector.
  std::array<double, 2> score(const FeatureVector& f) const {
    std::array<double, 2> s = bias;
    for (const auto& [j, x] : f) {
      if (j >= feature_dim) throw ValidationError("feature index beyond model dimension");
      s[0] += weights[j][0] * x;
      s[1] += weights[j][1] * x;
    }
    return s;
  }

  std::string serialize() const {
    std::string out = "emoarc-linear-model 1\n";
    out += "feature_dim " + std::to_string(feature_dim) + "\n";
    out += "l2 " + format_exact(l2) + "\n";
    out += "context_size " + std::to_string(window.context_size) + "\n";
    out += "max_tokens " + std::to_string(window.max_tokens) + "\n";
    out += "separator " + window.separator + "\n";
    out += "lexicon " + lexicon + "\n";
    out += "bias " + format_exact(bias[0]) + " " + format_exact(bias[1]) + "\n";
    for (std::uint32_t j = 0; j < feature_dim; ++j)
      if (weights[j][0] != 0.0 || weights[j][1] != 0.0)
        out += "w " + std::to_string(j) + " " + format_exact(weights[j][0]) + " " + format_exact(weights[j][1]) + "\n";
    return out;
  }

  std::string digest() const { return hex64(fnv1a64(serialize())); }

  static LinearModel deserialize(const std::string& text, const std::string& path = "<model>") {
    LinearModel m;
    const auto lines = split_lines(text);
    if (lines.empty() || lines[0] != "emoarc-linear-model 1") throw ValidationError(path + ": not a linear model file");
    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
      if (lines[ln].empty()) continue;
      const auto at = path + ":" + std::to_string(ln + 1) + ": ";
      const auto sp = lines[ln].find(' ');
      const std::string key = lines[ln].substr(0, sp);
      const std::string rest = sp == std::string::npos ? "" : lines[ln].substr(sp + 1);
      const auto parts = split_char(rest, ' ');
      long long iv = 0;
      double a = 0, b = 0;
      if (key == "feature_dim" && parse_int(rest, iv) && iv > 0) {
        m.feature_dim = static_cast<std::uint32_t>(iv);
        m.weights.assign(m.feature_dim, {0.0, 0.0});
      } else if (key == "l2" && parse_double(rest, a)) {
        m.l2 = a;
      } else if (key == "context_size" && parse_int(rest, iv) && iv >= 0) {
        m.window.context_size = static_cast<std::size_t>(iv);
      } else if (key == "max_tokens" && parse_int(rest, iv) && iv > 0) {
        m.window.max_tokens = static_cast<std::size_t>(iv);
      } else if (key == "separator") {
        m.window.separator = rest;
      } else if (key == "lexicon") {
        m.lexicon = rest;
      } else if (key == "bias" && parts.size() == 2 && parse_double(parts[0], a) && parse_double(parts[1], b)) {
        m.bias = {a, b};
      } else if (key == "w" && parts.size() == 3 && parse_int(parts[0], iv) && iv >= 0 && iv < m.feature_dim &&
                 parse_double(parts[1], a) && parse_double(parts[2], b)) {
        m.weights[static_cast<std::size_t>(iv)] = {a, b};
      } else {
        throw ValidationError(at + "malformed model line");
      }
    }
    return m;
  }
};

/// Optional pull toward a previous model: adds anchor * ||theta - theta_prior||^2
/// over all weights and the bias.
struct Anchor {
  const LinearModel* prior = nullptr;
  double strength = 0.0;
};

/// Regularized objective in logit space:
///   sum_i sum_d (x_i . w_d + b_d - logit(y_id))^2 + l2 ||w||^2 [+ anchor term]
inline double objective(const LinearModel& m, std::span<const FeatureVector> features,
                        std::span<const std::array<double, 2>> targets, const Anchor& anchor = {}) {
  double loss = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto s = m.score(features[i]);
    for (std::size_t d = 0; d < 2; ++d) {
      const double r = s[d] - clamped_logit(targets[i][d]);
      loss += r * r;
    }
  }
  for (const auto& w : m.weights) loss += m.l2 * (w[0] * w[0] + w[1] * w[1]);
  if (anchor.prior && anchor.strength > 0.0) {
    for (std::size_t j = 0; j < m.weights.size(); ++j)
      for (std::size_t d = 0; d < 2; ++d) {
        const double diff = m.weights[j][d] - anchor.prior->weights[j][d];
        loss += anchor.strength * diff * diff;
      }
    for (std::size_t d = 0; d < 2; ++d) {
      const double diff = m.bias[d] - anchor.prior->bias[d];
      loss += anchor.strength * diff * diff;
    }
  }
  return loss;
}

/// Closed-form ridge solve of the objective above via the regularized normal
/// equations over the columns that occur in the data, factored with a sparse
/// LDL^T. Columns that never occur have the closed-form value
/// anchor * prior / (l2 + anchor), i.e. zero without an anchor.
inline LinearModel train_linear(std::span<const FeatureVector> features, std::span<const std::array<double, 2>> targets,
                                double l2, std::uint32_t feature_dim = kFeatureDim, const Anchor& anchor = {}) {
  if (features.empty()) throw ValidationError("train_linear: no training sentences");
  if (features.size() != targets.size()) throw ValidationError("train_linear: features/targets length mismatch");
  if (!(l2 > 0.0)) throw ValidationError("train_linear: l2 must be positive");
  const double lambda = anchor.prior ? anchor.strength : 0.0;
  if (!(lambda >= 0.0)) throw ValidationError("train_linear: anchor strength must be non-negative");
  if (anchor.prior && anchor.prior->feature_dim != feature_dim)
    throw ValidationError("train_linear: anchor model has a different feature dimension");

  std::vector<std::uint32_t> active;
  std::unordered_map<std::uint32_t, int> column;
  for (const auto& f : features)
    for (const auto& [j, x] : f) {
      if (j >= feature_dim) throw ValidationError("train_linear: feature index beyond dimension");
      if (column.emplace(j, 0).second) active.push_back(j);
    }
  std::sort(active.begin(), active.end());
  for (std::size_t c = 0; c < active.size(); ++c) column[active[c]] = static_cast<int>(c);
  const int m = static_cast<int>(active.size());
  const int bias_col = m;

  using SpMat = Eigen::SparseMatrix<double>;
  std::vector<Eigen::Triplet<double>> trips;
  for (std::size_t i = 0; i < features.size(); ++i) {
    for (const auto& [j, x] : features[i]) trips.emplace_back(static_cast<int>(i), column[j], x);
    trips.emplace_back(static_cast<int>(i), bias_col, 1.0);
  }
  SpMat X(static_cast<int>(features.size()), m + 1);
  X.setFromTriplets(trips.begin(), trips.end());

  Eigen::MatrixXd z(static_cast<Eigen::Index>(features.size()), 2);
  for (std::size_t i = 0; i < targets.size(); ++i)
    for (int d = 0; d < 2; ++d) z(static_cast<Eigen::Index>(i), d) = clamped_logit(targets[i][static_cast<std::size_t>(d)]);

  SpMat A = SpMat(X.transpose()) * X;
  Eigen::MatrixXd rhs = X.transpose() * z;
  std::vector<Eigen::Triplet<double>> reg;
  for (int c = 0; c < m; ++c) reg.emplace_back(c, c, l2 + lambda);
  if (lambda > 0.0) reg.emplace_back(bias_col, bias_col, lambda);
  SpMat R(m + 1, m + 1);
  R.setFromTriplets(reg.begin(), reg.end());
  A += R;
  if (lambda > 0.0) {
    for (int c = 0; c < m; ++c)
      for (int d = 0; d < 2; ++d) rhs(c, d) += lambda * anchor.prior->weights[active[static_cast<std::size_t>(c)]][static_cast<std::size_t>(d)];
    for (int d = 0; d < 2; ++d) rhs(bias_col, d) += lambda * anchor.prior->bias[static_cast<std::size_t>(d)];
  }

  Eigen::SimplicialLDLT<SpMat> solver;
  solver.compute(A);
  if (solver.info() != Eigen::Success) throw NumericError("train_linear: factorization failed");
  const Eigen::MatrixXd theta = solver.solve(rhs);
  if (solver.info() != Eigen::Success || !theta.allFinite()) throw NumericError("train_linear: solve failed");

  LinearModel model;
  model.feature_dim = feature_dim;
  model.weights.assign(feature_dim, {0.0, 0.0});
  model.l2 = l2;
  if (lambda > 0.0) {
    const double shrink = lambda / (l2 + lambda);
    for (std::uint32_t j = 0; j < feature_dim; ++j)
      model.weights[j] = {shrink * anchor.prior->weights[j][0], shrink * anchor.prior->weights[j][1]};
  }
  for (int c = 0; c < m; ++c)
    model.weights[active[static_cast<std::size_t>(c)]] = {theta(c, 0), theta(c, 1)};
  model.bias = {theta(bias_col, 0), theta(bias_col, 1)};
  return model;
}

/// Per-sentence predictions for one story; the window spec must be the one
/// the model was trained with.
inline fusion::TrajectorySignal predict_linear(const LinearModel& model, const std::string& story_id,
                                               std::span<const std::string> sentences, const mapping::VadLexicon& lexicon,
                                               const WindowSpec& spec, const std::string& run_id = "linear") {
  if (!(spec == model.window)) throw ValidationError("predict_linear: window spec differs from the model's");
  if (model.feature_dim != kFeatureDim) throw ValidationError("predict_linear: model feature dimension mismatch");
  fusion::TrajectorySignal sig;
  sig.story_id = story_id;
  sig.source = {fusion::SourceKind::prediction, run_id};
  for (const auto& f : sequence_features(sentences, spec, lexicon)) {
    const auto s = model.score(f);
    sig.valence.push_back(logistic(s[0]));
    sig.arousal.push_back(logistic(s[1]));
  }
  return sig;
}

}  // namespace emoarc::predict
