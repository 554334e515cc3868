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

// Needleman-Wunsch global alignment of canonical against recognized phonemes.

#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pronassess/error.hpp"
#include "pronassess/phonemes.hpp"

namespace pronassess {

/// Costs are minimized. The defaults give plain Levenshtein distance.
struct AlignmentCosts {
  double match = 0.0;
  double substitution = 1.0;
  double insertion = 1.0;
  double deletion = 1.0;

  void Validate() const {
    if (!(substitution > 0 && insertion > 0 && deletion > 0)) {
      Fail(ErrorCode::kInvalidArgument, "edit costs must be positive");
    }
    if (!(match <= 0)) Fail(ErrorCode::kInvalidArgument, "match score must be <= 0");
  }
};

/// DEL consumes a canonical phoneme only, INS a recognized phoneme only.
enum class EditOp { kMatch, kSub, kIns, kDel };

inline std::string_view EditOpName(EditOp op) {
  switch (op) {
    case EditOp::kMatch: return "MATCH";
    case EditOp::kSub: return "SUB";
    case EditOp::kIns: return "INS";
    case EditOp::kDel: return "DEL";
  }
  return "?";
}

struct AlignedPair {
  EditOp op;
  std::optional<std::size_t> canonical;
  std::optional<std::size_t> recognized;

  friend bool operator==(const AlignedPair&, const AlignedPair&) = default;
};

struct Alignment {
  std::vector<AlignedPair> ops;
  double total_cost = 0.0;

  std::size_t canonical_length() const {
    std::size_t n = 0;
    for (const auto& p : ops) n += p.canonical.has_value();
    return n;
  }
  std::size_t recognized_length() const {
    std::size_t n = 0;
    for (const auto& p : ops) n += p.recognized.has_value();
    return n;
  }
};

/// Minimum-cost global alignment. Only symbol identity is compared; stress
/// digits are ignored. Among equal-cost paths the backtrace prefers
/// MATCH/SUB, then DEL, then INS.
inline Alignment Align(const PhonemeSeq& canonical, const PhonemeSeq& recognized,
                       const AlignmentCosts& costs = {}) {
  costs.Validate();
  const std::size_t n = canonical.size();
  const std::size_t m = recognized.size();
  const std::size_t width = m + 1;
  enum class Back : unsigned char { kNone, kDiag, kUp, kLeft };
  std::vector<double> cost((n + 1) * width, 0.0);
  std::vector<Back> back((n + 1) * width, Back::kNone);
  auto at = [width](std::size_t i, std::size_t j) { return i * width + j; };

  for (std::size_t i = 1; i <= n; ++i) {
    cost[at(i, 0)] = cost[at(i - 1, 0)] + costs.deletion;
    back[at(i, 0)] = Back::kUp;
  }
  for (std::size_t j = 1; j <= m; ++j) {
    cost[at(0, j)] = cost[at(0, j - 1)] + costs.insertion;
    back[at(0, j)] = Back::kLeft;
  }
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const bool same = canonical[i - 1].id == recognized[j - 1].id;
      const double diag = cost[at(i - 1, j - 1)] + (same ? costs.match : costs.substitution);
      const double up = cost[at(i - 1, j)] + costs.deletion;
      const double left = cost[at(i, j - 1)] + costs.insertion;
      double best = diag;
      Back dir = Back::kDiag;
      if (up < best) {
        best = up;
        dir = Back::kUp;
      }
      if (left < best) {
        best = left;
        dir = Back::kLeft;
      }
      cost[at(i, j)] = best;
      back[at(i, j)] = dir;
    }
  }

  Alignment out;
  out.total_cost = cost[at(n, m)];
  std::size_t i = n;
  std::size_t j = m;
  while (i > 0 || j > 0) {
    switch (back[at(i, j)]) {
      case Back::kDiag: {
        const bool same = canonical[i - 1].id == recognized[j - 1].id;
        out.ops.push_back({same ? EditOp::kMatch : EditOp::kSub, i - 1, j - 1});
        --i;
        --j;
        break;
      }
      case Back::kUp:
        out.ops.push_back({EditOp::kDel, i - 1, std::nullopt});
        --i;
        break;
      case Back::kLeft:
        out.ops.push_back({EditOp::kIns, std::nullopt, j - 1});
        --j;
        break;
      case Back::kNone:
        Fail(ErrorCode::kInvalidArgument, "alignment backtrace reached an empty cell");
    }
  }
  std::reverse(out.ops.begin(), out.ops.end());
  return out;
}

/// For each op, the canonical position it is charged to: its own canonical
/// index, or for INS the nearest preceding canonical index (0 when the
/// insertion precedes every canonical phoneme). Empty optional only when the
/// canonical side is empty.
inline std::vector<std::optional<std::size_t>> HostPositions(const Alignment& a) {
  std::vector<std::optional<std::size_t>> hosts;
  hosts.reserve(a.ops.size());
  std::optional<std::size_t> last;
  std::optional<std::size_t> first;
  for (const auto& p : a.ops) {
    if (p.canonical && !first) first = p.canonical;
  }
  for (const auto& p : a.ops) {
    if (p.canonical) last = p.canonical;
    hosts.push_back(p.canonical ? p.canonical : (last ? last : first));
  }
  return hosts;
}

struct WordEditSummary {
  std::size_t word = 0;
  std::size_t matches = 0;
  std::size_t substitutions = 0;
  std::size_t insertions = 0;
  std::size_t deletions = 0;

  std::size_t phoneme_distance() const { return substitutions + insertions + deletions; }
};

inline std::vector<WordEditSummary> WordEditSummaries(const Alignment& a,
                                                      const SentencePhonemes& sent) {
  if (a.canonical_length() != sent.flattened().size()) {
    Fail(ErrorCode::kLengthMismatch,
         "alignment covers " + std::to_string(a.canonical_length()) +
             " canonical phonemes, sentence has " +
             std::to_string(sent.flattened().size()));
  }
  std::vector<WordEditSummary> out(sent.num_words());
  for (std::size_t k = 0; k < out.size(); ++k) out[k].word = k;
  if (out.empty()) return out;
  const auto hosts = HostPositions(a);
  for (std::size_t i = 0; i < a.ops.size(); ++i) {
    const std::size_t k = hosts[i] ? sent.word_of_position()[*hosts[i]] : 0;
    auto& s = out[k];
    switch (a.ops[i].op) {
      case EditOp::kMatch: ++s.matches; break;
      case EditOp::kSub: ++s.substitutions; break;
      case EditOp::kIns: ++s.insertions; break;
      case EditOp::kDel: ++s.deletions; break;
    }
  }
  return out;
}

enum class DistanceSeverity { kLow, kMedium, kHigh, kVeryHigh };

inline std::string_view DistanceSeverityName(DistanceSeverity s) {
  switch (s) {
    case DistanceSeverity::kLow: return "LOW";
    case DistanceSeverity::kMedium: return "MEDIUM";
    case DistanceSeverity::kHigh: return "HIGH";
    case DistanceSeverity::kVeryHigh: return "VERY_HIGH";
  }
  return "?";
}

/// 1 -> LOW, 2 -> MEDIUM, 3 -> HIGH, 4 and above -> VERY_HIGH.
inline DistanceSeverity SeverityFromDistance(std::size_t distance) {
  switch (distance) {
    case 0: Fail(ErrorCode::kNotAnError, "phoneme distance 0 is a correct pronunciation");
    case 1: return DistanceSeverity::kLow;
    case 2: return DistanceSeverity::kMedium;
    case 3: return DistanceSeverity::kHigh;
    default: return DistanceSeverity::kVeryHigh;
  }
}

}  // namespace pronassess
