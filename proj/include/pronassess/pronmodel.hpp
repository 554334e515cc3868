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

// Native pronunciation model: a position-factored confusion model
// p(realized | canonical) with deletion and insertion events, plus the
// N-best likelihood combiner.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pronassess/align.hpp"
#include "pronassess/error.hpp"
#include "pronassess/phonemes.hpp"
#include "pronassess/recognizer.hpp"

namespace pronassess {

inline constexpr const char* kDeletionEvent = "<del>";
inline constexpr const char* kNoInsertionEvent = "<none>";

/// Per canonical position likelihood that a native speaker realizes it the
/// way the student did. Values lie in (0, 1].
struct LikelihoodSeq {
  std::vector<double> pi;

  std::size_t size() const { return pi.size(); }
  double operator[](std::size_t j) const { return pi[j]; }
};

/// Smallest positive value a likelihood is clamped to. 1 - kMinLikelihood
/// rounds to exactly 1.
inline constexpr double kMinLikelihood = std::numeric_limits<double>::min();

class PronunciationModel {
 public:
  /// Rows: canonical symbols. Columns: realized symbols, then deletion.
  /// insertion has one entry per symbol followed by "no insertion".
  PronunciationModel(const PhonemeInventory& inv, Eigen::MatrixXd conditional,
                     Eigen::VectorXd insertion, double alpha)
      : inv_(&inv),
        conditional_(std::move(conditional)),
        insertion_(std::move(insertion)),
        alpha_(alpha) {
    Validate();
  }

  /// P(c -> c) = 1, no insertions.
  static PronunciationModel Identity(const PhonemeInventory& inv = PhonemeInventory::Default()) {
    const auto n = static_cast<Eigen::Index>(inv.size());
    Eigen::MatrixXd cond = Eigen::MatrixXd::Zero(n, n + 1);
    cond.leftCols(n).setIdentity();
    Eigen::VectorXd ins = Eigen::VectorXd::Zero(n + 1);
    ins(n) = 1.0;
    return PronunciationModel(inv, std::move(cond), std::move(ins), 0.0);
  }

  const PhonemeInventory& inventory() const { return *inv_; }
  double alpha() const { return alpha_; }
  std::size_t num_events() const { return inv_->size() + 1; }
  std::size_t deletion_event() const { return inv_->size(); }

  double Prob(SymbolId canonical, std::size_t event) const {
    return conditional_(canonical, static_cast<Eigen::Index>(event));
  }
  double InsertionProb(SymbolId symbol) const { return insertion_(symbol); }
  double NoInsertionProb() const { return insertion_(insertion_.size() - 1); }

  const Eigen::MatrixXd& conditional() const { return conditional_; }

  nlohmann::json ToJson() const {
    nlohmann::json j = nlohmann::json::object();
    const std::size_t n = inv_->size();
    for (std::size_t c = 0; c < n; ++c) {
      nlohmann::json row = nlohmann::json::object();
      for (std::size_t e = 0; e <= n; ++e) {
        row[e == n ? kDeletionEvent : inv_->symbol(static_cast<SymbolId>(e))] =
            conditional_(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(e));
      }
      j[inv_->symbol(static_cast<SymbolId>(c))] = std::move(row);
    }
    nlohmann::json ins = nlohmann::json::object();
    for (std::size_t e = 0; e <= n; ++e) {
      ins[e == n ? kNoInsertionEvent : inv_->symbol(static_cast<SymbolId>(e))] =
          insertion_(static_cast<Eigen::Index>(e));
    }
    j["insertion_rate"] = std::move(ins);
    j["alpha"] = alpha_;
    return j;
  }

  /// Every canonical symbol and event of the inventory must be present and
  /// each distribution must sum to 1 within 1e-9.
  static PronunciationModel FromJson(const nlohmann::json& j, const PhonemeInventory& inv) {
    const std::size_t n = inv.size();
    const auto ni = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd cond(ni, ni + 1);
    Eigen::VectorXd ins(ni + 1);
    try {
      auto read_event = [&inv](const nlohmann::json& row, std::size_t e, const char* last) {
        const std::string key =
            e == inv.size() ? std::string(last) : inv.symbol(static_cast<SymbolId>(e));
        return row.at(key).get<double>();
      };
      for (std::size_t c = 0; c < n; ++c) {
        const auto& row = j.at(inv.symbol(static_cast<SymbolId>(c)));
        for (std::size_t e = 0; e <= n; ++e) {
          cond(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(e)) =
              read_event(row, e, kDeletionEvent);
        }
      }
      for (std::size_t e = 0; e <= n; ++e) {
        ins(static_cast<Eigen::Index>(e)) = read_event(j.at("insertion_rate"), e, kNoInsertionEvent);
      }
      return PronunciationModel(inv, std::move(cond), std::move(ins), j.at("alpha").get<double>());
    } catch (const nlohmann::json::exception& e) {
      Fail(ErrorCode::kParseError, std::string("pronunciation model: ") + e.what());
    }
  }

 private:
  void Validate() const {
    const auto n = static_cast<Eigen::Index>(inv_->size());
    if (conditional_.rows() != n || conditional_.cols() != n + 1 || insertion_.size() != n + 1) {
      Fail(ErrorCode::kShapeMismatch, "pronunciation model does not match the inventory");
    }
    if (!(alpha_ >= 0.0)) Fail(ErrorCode::kInvalidArgument, "alpha must be >= 0");
    auto check = [](double sum, double min, const std::string& what) {
      if (std::abs(sum - 1.0) > 1e-9 || min < 0.0) {
        Fail(ErrorCode::kInvalidArgument, what + " is not a probability distribution");
      }
    };
    for (Eigen::Index c = 0; c < n; ++c) {
      check(conditional_.row(c).sum(), conditional_.row(c).minCoeff(),
            "row '" + inv_->symbol(static_cast<SymbolId>(c)) + "'");
    }
    check(insertion_.sum(), insertion_.minCoeff(), "insertion distribution");
  }

  const PhonemeInventory* inv_;
  Eigen::MatrixXd conditional_;
  Eigen::VectorXd insertion_;
  double alpha_;
};

struct PronunciationPair {
  PhonemeSeq canonical;
  PhonemeSeq realized;
};

/// Counts canonical -> realized events over Levenshtein alignments and
/// normalizes with additive smoothing. With alpha = 0 a canonical symbol that
/// never occurs keeps an identity row.
inline PronunciationModel TrainPronunciationModel(
    const std::vector<PronunciationPair>& pairs, double alpha,
    const PhonemeInventory& inv = PhonemeInventory::Default()) {
  if (pairs.empty()) Fail(ErrorCode::kEmptyTrainingSet, "no training pairs");
  if (!(alpha >= 0.0)) Fail(ErrorCode::kInvalidArgument, "alpha must be >= 0");
  const auto n = static_cast<Eigen::Index>(inv.size());
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(n, n + 1);
  Eigen::VectorXd ins_counts = Eigen::VectorXd::Zero(n + 1);

  for (const auto& pair : pairs) {
    const Alignment a = Align(pair.canonical, pair.realized);
    std::vector<bool> followed_by_insertion(pair.canonical.size(), false);
    const auto hosts = HostPositions(a);
    for (std::size_t i = 0; i < a.ops.size(); ++i) {
      const auto& op = a.ops[i];
      switch (op.op) {
        case EditOp::kMatch:
        case EditOp::kSub:
          counts(pair.canonical[*op.canonical].id, pair.realized[*op.recognized].id) += 1;
          break;
        case EditOp::kDel:
          counts(pair.canonical[*op.canonical].id, n) += 1;
          break;
        case EditOp::kIns:
          ins_counts(pair.realized[*op.recognized].id) += 1;
          if (hosts[i]) followed_by_insertion[*hosts[i]] = true;
          break;
      }
    }
    for (bool f : followed_by_insertion) {
      if (!f) ins_counts(n) += 1;
    }
  }

  Eigen::MatrixXd cond(n, n + 1);
  for (Eigen::Index c = 0; c < n; ++c) {
    const double total = counts.row(c).sum();
    if (total == 0.0 && alpha == 0.0) {
      cond.row(c).setZero();
      cond(c, c) = 1.0;
    } else {
      cond.row(c) = (counts.row(c).array() + alpha) / (total + alpha * static_cast<double>(n + 1));
    }
  }
  Eigen::VectorXd ins(n + 1);
  const double ins_total = ins_counts.sum();
  if (ins_total == 0.0 && alpha == 0.0) {
    ins.setZero();
    ins(n) = 1.0;
  } else {
    ins = (ins_counts.array() + alpha) / (ins_total + alpha * static_cast<double>(n + 1));
  }
  return PronunciationModel(inv, std::move(cond), std::move(ins), alpha);
}

/// pi_j = P(canonical_j -> aligned realized event). Each inserted phoneme
/// multiplies the likelihood of its host position (the preceding canonical
/// phoneme) by its insertion probability.
inline LikelihoodSeq PmLikelihood(const PronunciationModel& pm, const PhonemeSeq& canonical,
                                  const PhonemeSeq& realized) {
  LikelihoodSeq out;
  out.pi.assign(canonical.size(), 1.0);
  if (canonical.empty()) return out;
  const Alignment a = Align(canonical, realized);
  const auto hosts = HostPositions(a);
  for (std::size_t i = 0; i < a.ops.size(); ++i) {
    const auto& op = a.ops[i];
    switch (op.op) {
      case EditOp::kMatch:
      case EditOp::kSub:
        out.pi[*op.canonical] *= pm.Prob(canonical[*op.canonical].id, realized[*op.recognized].id);
        break;
      case EditOp::kDel:
        out.pi[*op.canonical] *= pm.Prob(canonical[*op.canonical].id, pm.deletion_event());
        break;
      case EditOp::kIns:
        out.pi[*hosts[i]] *= pm.InsertionProb(realized[*op.recognized].id);
        break;
    }
  }
  return out;
}

/// Expectation of the per-hypothesis likelihoods under the (normalized)
/// hypothesis weights, clamped to (0, 1].
inline LikelihoodSeq Combine(const NBestResult& nbest, const PronunciationModel& pm,
                             const PhonemeSeq& canonical) {
  if (nbest.hypotheses.empty()) Fail(ErrorCode::kEmptyNBest, "no hypotheses");
  double total_weight = 0.0;
  for (const auto& h : nbest.hypotheses) {
    if (!(h.weight >= 0.0)) Fail(ErrorCode::kInvalidArgument, "negative hypothesis weight");
    total_weight += h.weight;
  }
  if (!(total_weight > 0.0)) Fail(ErrorCode::kInvalidArgument, "hypothesis weights sum to 0");
  LikelihoodSeq out;
  out.pi.assign(canonical.size(), 0.0);
  for (const auto& h : nbest.hypotheses) {
    const LikelihoodSeq lik = PmLikelihood(pm, canonical, h.phones);
    const double w = h.weight / total_weight;
    for (std::size_t j = 0; j < canonical.size(); ++j) out.pi[j] += w * lik.pi[j];
  }
  for (double& v : out.pi) v = std::clamp(v, kMinLikelihood, 1.0);
  return out;
}

}  // namespace pronassess
