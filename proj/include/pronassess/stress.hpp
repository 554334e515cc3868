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

// Lexical stress. Syllable features are pooled with attention and compared
// with their neighbours; a prominence heuristic stands in for a classifier.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "pronassess/error.hpp"
#include "pronassess/phonemes.hpp"
#include "pronassess/random.hpp"

namespace pronassess {

struct AttentionResult {
  Eigen::MatrixXd output;   // n_q x d_v
  Eigen::MatrixXd weights;  // n_q x n_kv
};

namespace internal {

// Sum in ascending order so the result does not depend on the order of the
// terms.
inline double OrderFreeSum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += t;
  return s;
}

}  // namespace internal

/// Scaled dot-product attention: softmax(Q K^T / sqrt(d_k)) V.
inline AttentionResult Attention(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k,
                                 const Eigen::MatrixXd& v) {
  if (q.cols() < 1 || k.rows() < 1) Fail(ErrorCode::kShapeMismatch, "empty keys or d_k = 0");
  if (q.cols() != k.cols()) Fail(ErrorCode::kShapeMismatch, "Q and K differ in d_k");
  if (k.rows() != v.rows()) Fail(ErrorCode::kShapeMismatch, "K and V differ in rows");
  const Eigen::Index nq = q.rows();
  const Eigen::Index nkv = k.rows();
  const Eigen::Index dv = v.cols();
  const double scale = 1.0 / std::sqrt(static_cast<double>(q.cols()));

  AttentionResult out{Eigen::MatrixXd(nq, dv), Eigen::MatrixXd(nq, nkv)};
  const Eigen::RowVectorXd v_min = v.colwise().minCoeff();
  const Eigen::RowVectorXd v_max = v.colwise().maxCoeff();
  std::vector<double> terms(static_cast<std::size_t>(nkv));
  for (Eigen::Index i = 0; i < nq; ++i) {
    Eigen::RowVectorXd logits(nkv);
    for (Eigen::Index j = 0; j < nkv; ++j) logits(j) = q.row(i).dot(k.row(j)) * scale;
    const double max_logit = logits.maxCoeff();
    for (Eigen::Index j = 0; j < nkv; ++j) {
      terms[static_cast<std::size_t>(j)] = std::exp(logits(j) - max_logit);
    }
    std::vector<double> sorted = terms;
    const double denom = internal::OrderFreeSum(sorted);
    for (Eigen::Index j = 0; j < nkv; ++j) {
      out.weights(i, j) = terms[static_cast<std::size_t>(j)] / denom;
    }
    for (Eigen::Index c = 0; c < dv; ++c) {
      for (Eigen::Index j = 0; j < nkv; ++j) {
        terms[static_cast<std::size_t>(j)] = out.weights(i, j) * v(j, c);
      }
      sorted = terms;
      // A convex combination lies in [min, max]; clamp away rounding excursions.
      out.output(i, c) = std::clamp(internal::OrderFreeSum(sorted), v_min(c), v_max(c));
    }
  }
  return out;
}

/// Fixed (seeded) Gaussian projection, used in place of learned embeddings.
inline Eigen::MatrixXd RandomProjection(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      // Box-Muller; 1 - Uniform() lies in (0, 1].
      const double u1 = 1.0 - rng.Uniform();
      const double u2 = rng.Uniform();
      m(r, c) = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2) /
                std::sqrt(static_cast<double>(cols));
    }
  }
  return m;
}

/// Pools frame-level features into one vector per syllable. Queries are the
/// one-hot syllable indices projected by a seeded matrix; keys are the frames
/// projected by another. Returns the pooled values and the attention weights.
inline AttentionResult SyllableAttentionPool(const Eigen::MatrixXd& frames,
                                             std::size_t num_syllables, Eigen::Index d_k,
                                             std::uint64_t seed) {
  if (frames.rows() < 1) Fail(ErrorCode::kShapeMismatch, "no frames");
  const auto k = static_cast<Eigen::Index>(num_syllables);
  const Eigen::MatrixXd queries = RandomProjection(k, d_k, seed);  // one-hot rows times W_q
  const Eigen::MatrixXd keys = frames * RandomProjection(frames.cols(), d_k, seed + 1);
  return Attention(queries, keys, frames);
}

/// Per syllable: mean F0 and intensity (z-scores within the word) and nucleus
/// duration in seconds.
struct SyllableFeatures {
  std::vector<double> f0_z;
  std::vector<double> intensity_z;
  std::vector<double> duration_s;

  std::size_t size() const { return duration_s.size(); }

  void Validate() const {
    if (f0_z.size() != duration_s.size() || intensity_z.size() != duration_s.size()) {
      Fail(ErrorCode::kShapeMismatch, "feature columns differ in length");
    }
  }
};

/// Shift that moves z-scores onto positive support before taking ratios.
inline double PositiveZ(double z) { return std::max(z + 3.0, 0.1); }

/// K x 6 matrix: for F0, intensity and duration in turn, the ratio of the
/// syllable's value to its left neighbour and to its right neighbour. A
/// missing neighbour gives ratio 1.
inline Eigen::MatrixXd DifferentialRatios(const SyllableFeatures& f) {
  f.Validate();
  const std::size_t n = f.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!(f.duration_s[i] > 0.0)) {
      Fail(ErrorCode::kNonPositiveDuration, "syllable " + std::to_string(i));
    }
  }
  std::vector<std::vector<double>> columns(3, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    columns[0][i] = PositiveZ(f.f0_z[i]);
    columns[1][i] = PositiveZ(f.intensity_z[i]);
    columns[2][i] = f.duration_s[i];
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(n), 6);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    for (std::size_t c = 0; c < 3; ++c) {
      const auto col = static_cast<Eigen::Index>(2 * c);
      if (i > 0) out(r, col) = columns[c][i] / columns[c][i - 1];
      if (i + 1 < n) out(r, col + 1) = columns[c][i] / columns[c][i + 1];
    }
  }
  return out;
}

namespace internal {
inline std::vector<double> ZScores(const std::vector<double>& x) {
  std::vector<double> z(x.size(), 0.0);
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (x.empty() || *lo == *hi) return z;
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = (x[i] - mean) / sd;
  return z;
}
}  // namespace internal

/// Prominence heuristic standing in for a trained classifier: softmax over
/// syllables of z(duration) + z(intensity) + z(F0), each z taken within the
/// word.
inline std::vector<double> HeuristicStressProbs(const SyllableFeatures& f) {
  f.Validate();
  if (f.size() == 0) Fail(ErrorCode::kInvalidArgument, "word has no syllables");
  const auto zd = internal::ZScores(f.duration_s);
  const auto zi = internal::ZScores(f.intensity_z);
  const auto zf = internal::ZScores(f.f0_z);
  std::vector<double> score(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) score[i] = zd[i] + zi[i] + zf[i];
  const double m = *std::max_element(score.begin(), score.end());
  double total = 0.0;
  for (double& s : score) total += (s = std::exp(s - m));
  for (double& s : score) s /= total;
  return score;
}

/// The estimate stresses the argmax syllable only. A syllable is flagged when
/// its estimated class differs from the canonical one and the probability of
/// the estimated class (p for stressed, 1 - p for unstressed) exceeds t.
inline std::vector<int> DetectStressErrors(const StressPattern& canonical,
                                           const std::vector<double>& probs, double t) {
  if (canonical.size() != probs.size()) {
    Fail(ErrorCode::kLengthMismatch, "stress pattern and probabilities differ in length");
  }
  std::vector<int> flags(probs.size(), 0);
  if (probs.empty()) return flags;
  const auto argmax = static_cast<std::size_t>(
      std::max_element(probs.begin(), probs.end()) - probs.begin());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const bool estimated = i == argmax;
    const double p_estimated = estimated ? probs[i] : 1.0 - probs[i];
    flags[i] = estimated != canonical.stressed[i] && p_estimated > t;
  }
  return flags;
}

/// Reads `syllable_index,f0_z,intensity_z,duration_s` rows. An optional
/// header line is skipped; rows are placed by syllable index.
inline SyllableFeatures ReadSyllableFeaturesCsv(std::istream& in) {
  struct Row {
    long index;
    double f0, intensity, duration;
  };
  std::vector<Row> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    try {
      if (cells.size() != 4) throw std::invalid_argument("expected 4 columns");
      std::size_t used = 0;
      Row r{std::stol(cells[0], &used), std::stod(cells[1]), std::stod(cells[2]),
            std::stod(cells[3])};
      rows.push_back(r);
    } catch (const std::exception&) {
      if (line_no == 1 && rows.empty()) continue;  // header
      Fail(ErrorCode::kParseError, "feature CSV line " + std::to_string(line_no));
    }
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.index < b.index; });
  SyllableFeatures f;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && rows[i].index == rows[i - 1].index) {
      Fail(ErrorCode::kParseError, "duplicate syllable index " + std::to_string(rows[i].index));
    }
    f.f0_z.push_back(rows[i].f0);
    f.intensity_z.push_back(rows[i].intensity);
    f.duration_s.push_back(rows[i].duration);
  }
  return f;
}

inline SyllableFeatures ReadSyllableFeaturesCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIoError, "cannot open feature CSV " + path);
  return ReadSyllableFeaturesCsv(in);
}

}  // namespace pronassess
