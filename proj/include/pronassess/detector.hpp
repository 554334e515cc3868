// Copyright 2026 The Pronassess Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Word-level pronunciation error detection and its training losses.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "pronassess/align.hpp"
#include "pronassess/error.hpp"
#include "pronassess/phonemes.hpp"
#include "pronassess/pronmodel.hpp"

namespace pronassess {

enum class DecisionMode {
  /// Flag iff every hypothesis has e > t (min over hypotheses > t).
  kAllHypotheses,
  /// Flag iff the top hypothesis has e > t.
  kTopHypothesis,
  /// Flag iff every hypothesis has e < t. This inverts the threshold and is
  /// kept only for auditing.
  kLiteralAllBelow,
};

struct DetectorConfig {
  double threshold = 0.5;
  std::size_t n = 4;
  DecisionMode mode = DecisionMode::kAllHypotheses;

  void Validate() const {
    if (!(threshold >= 0.0 && threshold <= 1.0)) {
      Fail(ErrorCode::kInvalidArgument, "threshold must lie in [0, 1]");
    }
    if (n < 1) Fail(ErrorCode::kInvalidArgument, "N must be >= 1");
  }
};

struct WordErrorProbs {
  std::vector<double> e;
  /// Canonical position with the lowest likelihood among the word's
  /// mismatched positions; empty for fully matched words.
  std::vector<std::optional<std::size_t>> position;

  std::size_t size() const { return e.size(); }
};

/// e_k = 0 when every op charged to word k is a MATCH, else 1 - pi_j for the
/// mismatched position j of the word with the lowest pi. Insertions are
/// charged to the preceding canonical position.
inline WordErrorProbs ComputeWordErrorProbs(const Alignment& a, const LikelihoodSeq& pi,
                                            const SentencePhonemes& sent) {
  const std::size_t n = sent.flattened().size();
  if (pi.size() != n || a.canonical_length() != n) {
    Fail(ErrorCode::kLengthMismatch,
         "likelihoods (" + std::to_string(pi.size()) + ") and alignment (" +
             std::to_string(a.canonical_length()) + ") must match the sentence (" +
             std::to_string(n) + ")");
  }
  WordErrorProbs out;
  out.e.assign(sent.num_words(), 0.0);
  out.position.assign(sent.num_words(), std::nullopt);
  const auto hosts = HostPositions(a);
  for (std::size_t i = 0; i < a.ops.size(); ++i) {
    if (a.ops[i].op == EditOp::kMatch || !hosts[i]) continue;
    const std::size_t j = *hosts[i];
    const std::size_t k = sent.word_of_position()[j];
    if (!out.position[k] || pi[j] < pi[*out.position[k]]) out.position[k] = j;
  }
  for (std::size_t k = 0; k < out.e.size(); ++k) {
    if (out.position[k]) out.e[k] = std::clamp(1.0 - pi[*out.position[k]], 0.0, 1.0);
  }
  return out;
}

/// Per-word 0/1 flags from the error probabilities of up to cfg.n hypotheses
/// (ordered best first).
inline std::vector<int> Detect(const std::vector<WordErrorProbs>& per_hypothesis,
                               const DetectorConfig& cfg) {
  cfg.Validate();
  if (per_hypothesis.empty()) Fail(ErrorCode::kInvalidArgument, "no hypotheses");
  const std::size_t words = per_hypothesis.front().size();
  const std::size_t used = std::min(cfg.n, per_hypothesis.size());
  for (std::size_t h = 0; h < used; ++h) {
    if (per_hypothesis[h].size() != words) {
      Fail(ErrorCode::kLengthMismatch, "hypotheses disagree on the number of words");
    }
  }
  std::vector<int> flags(words, 0);
  for (std::size_t k = 0; k < words; ++k) {
    switch (cfg.mode) {
      case DecisionMode::kTopHypothesis:
        flags[k] = per_hypothesis.front().e[k] > cfg.threshold;
        break;
      case DecisionMode::kAllHypotheses: {
        bool all = true;
        for (std::size_t h = 0; h < used; ++h) all = all && per_hypothesis[h].e[k] > cfg.threshold;
        flags[k] = all;
        break;
      }
      case DecisionMode::kLiteralAllBelow: {
        bool all = true;
        for (std::size_t h = 0; h < used; ++h) all = all && per_hypothesis[h].e[k] < cfg.threshold;
        flags[k] = all;
        break;
      }
    }
  }
  return flags;
}

namespace internal {
inline constexpr double kLogClamp = 1e-12;
inline double SafeLog(double p) { return std::log(std::clamp(p, kLogClamp, 1.0 - kLogClamp)); }
}  // namespace internal

/// Summed binary cross-entropy over words plus summed categorical
/// cross-entropy over recognized phonemes. Without phoneme labels (speech
/// that was never transcribed) only the word term is returned.
inline double MultitaskLoss(const std::vector<double>& word_probs,
                            const std::vector<int>& word_labels,
                            const Eigen::MatrixXd& phoneme_posteriors,
                            const std::optional<std::vector<std::size_t>>& phoneme_labels) {
  if (word_probs.size() != word_labels.size()) {
    Fail(ErrorCode::kShapeMismatch, "word probabilities and labels differ in length");
  }
  double loss = 0.0;
  for (std::size_t k = 0; k < word_probs.size(); ++k) {
    if (word_labels[k] != 0 && word_labels[k] != 1) {
      Fail(ErrorCode::kInvalidArgument, "word labels must be 0 or 1");
    }
    loss -= word_labels[k] == 1 ? internal::SafeLog(word_probs[k])
                                : internal::SafeLog(1.0 - word_probs[k]);
  }
  if (!phoneme_labels) return loss;
  if (static_cast<std::size_t>(phoneme_posteriors.rows()) != phoneme_labels->size()) {
    Fail(ErrorCode::kShapeMismatch, "one phoneme label per posterior row is required");
  }
  for (std::size_t j = 0; j < phoneme_labels->size(); ++j) {
    const std::size_t c = (*phoneme_labels)[j];
    if (c >= static_cast<std::size_t>(phoneme_posteriors.cols())) {
      Fail(ErrorCode::kShapeMismatch, "phoneme label outside the posterior columns");
    }
    loss -= internal::SafeLog(
        phoneme_posteriors(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)));
  }
  return loss;
}

/// alpha * ce + (1 - alpha) * reconstruction.
inline double WeightedJointLoss(double ce, double reconstruction_l2, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) Fail(ErrorCode::kInvalidArgument, "alpha must lie in [0, 1]");
  return alpha * ce + (1.0 - alpha) * reconstruction_l2;
}

/// Exact posterior P(e | s, r) over a small enumerable error space.
/// prior[r][e] = P(e | r); likelihood[r][e][s] = P(s | e, r).
inline std::vector<double> BayesErrorPosterior(
    const std::vector<std::vector<double>>& prior,
    const std::vector<std::vector<std::vector<double>>>& likelihood, std::size_t r,
    std::size_t s) {
  if (r >= prior.size() || r >= likelihood.size()) {
    Fail(ErrorCode::kInvalidArgument, "r is outside the tables");
  }
  const auto& p = prior[r];
  const auto& l = likelihood[r];
  if (l.size() != p.size()) Fail(ErrorCode::kShapeMismatch, "prior and likelihood disagree on e");
  std::vector<double> post(p.size(), 0.0);
  double evidence = 0.0;
  for (std::size_t e = 0; e < p.size(); ++e) {
    if (s >= l[e].size()) Fail(ErrorCode::kInvalidArgument, "s is outside the likelihood table");
    if (p[e] < 0.0 || l[e][s] < 0.0) Fail(ErrorCode::kInvalidArgument, "negative probability");
    post[e] = p[e] * l[e][s];
    evidence += post[e];
  }
  if (!(evidence > 0.0)) Fail(ErrorCode::kZeroEvidence, "P(s | r) = 0");
  for (double& v : post) v /= evidence;
  return post;
}

}  // namespace pronassess
