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

// Detection metrics. Point metrics come from a confusion table; the PR curve
// and its area summarize a whole score ranking. Listening-test aggregation
// lives here too.

#pragma once

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <ostream>
#include <vector>

#include <json.hpp>

#include "pronassess/error.hpp"
#include "pronassess/random.hpp"

namespace pronassess {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }

  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

inline ConfusionCounts Confusion(const std::vector<int>& flags, const std::vector<int>& labels) {
  if (flags.size() != labels.size()) {
    Fail(ErrorCode::kLengthMismatch, "flags and labels differ in length");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (flags[i]) {
      labels[i] ? ++c.tp : ++c.fp;
    } else {
      labels[i] ? ++c.fn : ++c.tn;
    }
  }
  return c;
}

namespace internal {
inline double Ratio(std::size_t num, std::size_t den, const char* name) {
  if (den == 0) Fail(ErrorCode::kUndefinedMetric, std::string(name) + " has a zero denominator");
  return static_cast<double>(num) / static_cast<double>(den);
}
}  // namespace internal

inline double Precision(const ConfusionCounts& c) { return internal::Ratio(c.tp, c.tp + c.fp, "precision"); }
inline double Recall(const ConfusionCounts& c) { return internal::Ratio(c.tp, c.tp + c.fn, "recall"); }
inline double FalsePositiveRate(const ConfusionCounts& c) { return internal::Ratio(c.fp, c.fp + c.tn, "FPR"); }
/// fn / (fn + tp), evaluated as 1 - recall so the identity holds bit for bit.
inline double FalseNegativeRate(const ConfusionCounts& c) { return 1.0 - internal::Ratio(c.tp, c.tp + c.fn, "FNR"); }
inline double Accuracy(const ConfusionCounts& c) { return internal::Ratio(c.tp + c.tn, c.total(), "accuracy"); }

/// 2PR / (P + R), evaluated as 2tp / (2tp + fp + fn) so that it is one
/// correctly rounded division. It is 0 when tp = 0 and anything was scored.
inline double F1(const ConfusionCounts& c) {
  if (c.tp + c.fp + c.fn == 0) Fail(ErrorCode::kUndefinedMetric, "F1 has no positives");
  return internal::Ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn, "F1");
}

struct PRPoint {
  double recall;
  double precision;
  double threshold;
  /// Counts when predicting positive for score >= threshold.
  ConfusionCounts counts;
};

struct PRCurve {
  std::vector<PRPoint> points;
};

/// One point per distinct score, thresholds in descending order; a score is
/// predicted positive when it is >= the threshold.
inline PRCurve ComputePRCurve(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) Fail(ErrorCode::kLengthMismatch, "scores and labels differ in length");
  const std::size_t positives =
      static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), [](int l) { return l != 0; }));
  if (positives == 0) Fail(ErrorCode::kNoPositives, "no positive labels");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&scores](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  PRCurve curve;
  ConfusionCounts c;
  c.fn = positives;
  c.tn = scores.size() - positives;
  for (std::size_t i = 0; i < order.size();) {
    const double t = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == t; ++i) {
      if (labels[order[i]]) {
        ++c.tp;
        --c.fn;
      } else {
        ++c.fp;
        --c.tn;
      }
    }
    curve.points.push_back({Recall(c), Precision(c), t, c});
  }
  return curve;
}

/// Average-precision style area: sum over points of (recall step) times the
/// point's precision, starting from recall 0.
inline double Auc(const PRCurve& curve) {
  if (curve.points.empty()) Fail(ErrorCode::kInvalidArgument, "empty curve");
  double area = 0.0;
  double prev_recall = 0.0;
  for (const auto& p : curve.points) {
    area += (p.recall - prev_recall) * p.precision;
    prev_recall = p.recall;
  }
  return std::clamp(area, 0.0, 1.0);
}

/// The first point (largest threshold) whose recall reaches the anchor.
inline const PRPoint& PointAtRecall(const PRCurve& curve, double recall_anchor) {
  for (const auto& p : curve.points) {
    if (p.recall >= recall_anchor) return p;
  }
  return curve.points.back();
}

/// Wilson score interval for a binomial proportion.
inline std::pair<double, double> WilsonInterval(std::size_t successes, std::size_t trials,
                                                double confidence = 0.95) {
  if (trials == 0 || successes > trials) {
    Fail(ErrorCode::kInvalidArgument, "need 0 <= successes <= trials and trials > 0");
  }
  if (!(confidence > 0.0 && confidence < 1.0)) {
    Fail(ErrorCode::kInvalidArgument, "confidence must lie in (0, 1)");
  }
  const double z = std::sqrt(2.0) * boost::math::erf_inv(confidence);
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double center = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z / (1 + z2 / n) * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n));
  double lo = center - half;
  double hi = center + half;
  if (successes == 0) lo = 0.0;
  if (successes == trials) hi = 1.0;
  return {std::max(0.0, lo), std::min(1.0, hi)};
}

enum class AgreementBand { kLow, kMedium, kHigh };

inline std::string_view AgreementBandName(AgreementBand b) {
  switch (b) {
    case AgreementBand::kLow: return "LOW";
    case AgreementBand::kMedium: return "MEDIUM";
    case AgreementBand::kHigh: return "HIGH";
  }
  return "?";
}

/// Agreement below 40% is LOW, 40% to 80% inclusive MEDIUM, above 80% HIGH.
inline AgreementBand SeverityBand(int votes_mispronounced, int votes_total) {
  if (votes_total <= 0 || votes_mispronounced < 0 || votes_mispronounced > votes_total) {
    Fail(ErrorCode::kInvalidArgument, "votes must satisfy 0 <= m <= n, n > 0");
  }
  // Integer cross-multiplication keeps the 0.40 and 0.80 boundaries exact.
  const long m = votes_mispronounced;
  const long n = votes_total;
  if (5 * m < 2 * n) return AgreementBand::kLow;
  if (5 * m <= 4 * n) return AgreementBand::kMedium;
  return AgreementBand::kHigh;
}

inline AgreementBand SeverityBand(double agreement) {
  if (!(agreement >= 0.0 && agreement <= 1.0)) {
    Fail(ErrorCode::kInvalidArgument, "agreement must lie in [0, 1]");
  }
  if (agreement < 0.40) return AgreementBand::kLow;
  if (agreement <= 0.80) return AgreementBand::kMedium;
  return AgreementBand::kHigh;
}

struct MushraSummary {
  double mean = 0.0;
  double median = 0.0;
  int rank = 0;
};

/// Scores pooled over listeners per system. Ranks are dense, by median,
/// highest first; equal medians share a rank.
inline std::map<std::string, MushraSummary> MushraAggregate(
    const std::map<std::string, std::map<std::string, std::vector<double>>>& scores) {
  std::map<std::string, MushraSummary> out;
  for (const auto& [system, listeners] : scores) {
    std::vector<double> pooled;
    for (const auto& [listener, values] : listeners) {
      for (double v : values) {
        if (!(v >= 0.0 && v <= 100.0)) {
          Fail(ErrorCode::kScoreOutOfRange, system + "/" + listener + ": " + std::to_string(v));
        }
        pooled.push_back(v);
      }
    }
    if (pooled.empty()) Fail(ErrorCode::kInvalidArgument, "system " + system + " has no scores");
    std::sort(pooled.begin(), pooled.end());
    MushraSummary s;
    s.mean = std::accumulate(pooled.begin(), pooled.end(), 0.0) / static_cast<double>(pooled.size());
    const std::size_t mid = pooled.size() / 2;
    s.median = pooled.size() % 2 ? pooled[mid] : 0.5 * (pooled[mid - 1] + pooled[mid]);
    out[system] = s;
  }
  std::vector<double> medians;
  for (const auto& [_, s] : out) medians.push_back(s.median);
  std::sort(medians.begin(), medians.end(), std::greater<>());
  medians.erase(std::unique(medians.begin(), medians.end()), medians.end());
  for (auto& [_, s] : out) {
    s.rank = static_cast<int>(std::find(medians.begin(), medians.end(), s.median) - medians.begin()) + 1;
  }
  return out;
}

/// Indices of a subsample in which positives make up `target_prevalence`,
/// obtained by randomly dropping negatives. Keeps everything when the data
/// already has that prevalence or less negatives than needed.
inline std::vector<std::size_t> DownsampleNegatives(const std::vector<int>& labels,
                                                    double target_prevalence, std::uint64_t seed) {
  if (!(target_prevalence > 0.0 && target_prevalence <= 1.0)) {
    Fail(ErrorCode::kInvalidArgument, "target prevalence must lie in (0, 1]");
  }
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] ? pos : neg).push_back(i);
  const auto wanted = static_cast<std::size_t>(std::llround(
      static_cast<double>(pos.size()) * (1.0 - target_prevalence) / target_prevalence));
  if (wanted < neg.size()) {
    // Partial Fisher-Yates; the first `wanted` entries are the sample.
    Rng rng(seed);
    for (std::size_t i = 0; i < wanted; ++i) {
      std::swap(neg[i], neg[i + rng.Index(neg.size() - i)]);
    }
    neg.resize(wanted);
  }
  std::vector<std::size_t> keep = pos;
  keep.insert(keep.end(), neg.begin(), neg.end());
  std::sort(keep.begin(), keep.end());
  return keep;
}

/// Metrics of one scored system at an anchored operating point, plus the
/// threshold-free area.
struct EvalReport {
  std::string system;
  std::size_t n = 0;
  std::size_t positives = 0;
  double auc = 0.0;
  double recall_anchor = 0.4;
  double threshold = 0.0;
  ConfusionCounts counts;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> fpr;
  std::optional<double> fnr;
  std::optional<double> f1;
  std::optional<double> accuracy;
  std::optional<std::pair<double, double>> precision_ci;
  std::optional<std::pair<double, double>> recall_ci;
  PRCurve curve;
  /// Per agreement band ("LOW", "MEDIUM", "HIGH") when annotator votes exist.
  std::map<std::string, EvalReport> bands;
};

namespace internal {
template <typename F>
std::optional<double> Defined(F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kUndefinedMetric) throw;
    return std::nullopt;
  }
}
}  // namespace internal

inline EvalReport Evaluate(const std::vector<double>& scores, const std::vector<int>& labels,
                           double recall_anchor = 0.4) {
  EvalReport r;
  r.curve = ComputePRCurve(scores, labels);
  r.n = scores.size();
  r.positives = static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), [](int l) { return l != 0; }));
  r.auc = Auc(r.curve);
  r.recall_anchor = recall_anchor;
  const PRPoint& at = PointAtRecall(r.curve, recall_anchor);
  r.threshold = at.threshold;
  r.counts = at.counts;
  const ConfusionCounts c = at.counts;
  r.precision = internal::Defined([&] { return Precision(c); });
  r.recall = internal::Defined([&] { return Recall(c); });
  r.fpr = internal::Defined([&] { return FalsePositiveRate(c); });
  r.fnr = internal::Defined([&] { return FalseNegativeRate(c); });
  r.f1 = internal::Defined([&] { return F1(c); });
  r.accuracy = internal::Defined([&] { return Accuracy(c); });
  if (c.tp + c.fp > 0) r.precision_ci = WilsonInterval(c.tp, c.tp + c.fp);
  if (c.tp + c.fn > 0) r.recall_ci = WilsonInterval(c.tp, c.tp + c.fn);
  return r;
}

inline nlohmann::json ToJson(const EvalReport& r) {
  auto opt = [](const std::optional<double>& v) -> nlohmann::json {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  auto ci = [](const std::optional<std::pair<double, double>>& v) -> nlohmann::json {
    return v ? nlohmann::json::array({v->first, v->second}) : nlohmann::json(nullptr);
  };
  nlohmann::json j;
  if (!r.system.empty()) j["system"] = r.system;
  j["n"] = r.n;
  j["positives"] = r.positives;
  j["auc"] = r.auc;
  j["recall_anchor"] = r.recall_anchor;
  j["threshold"] = r.threshold;
  j["counts"] = {{"tp", r.counts.tp}, {"fp", r.counts.fp}, {"tn", r.counts.tn}, {"fn", r.counts.fn}};
  j["precision"] = opt(r.precision);
  j["recall"] = opt(r.recall);
  j["fpr"] = opt(r.fpr);
  j["fnr"] = opt(r.fnr);
  j["f1"] = opt(r.f1);
  j["accuracy"] = opt(r.accuracy);
  j["ci_method"] = "wilson-95";
  j["precision_ci"] = ci(r.precision_ci);
  j["recall_ci"] = ci(r.recall_ci);
  j["curve_points"] = r.curve.points.size();
  if (!r.bands.empty()) {
    nlohmann::json bands = nlohmann::json::object();
    for (const auto& [name, b] : r.bands) bands[name] = ToJson(b);
    j["bands"] = std::move(bands);
  }
  return j;
}

/// `recall,precision,threshold` rows, header first.
inline void WriteCurveCsv(std::ostream& out, const PRCurve& curve) {
  out << "recall,precision,threshold\n";
  std::ostringstream row;
  row.precision(17);
  for (const auto& p : curve.points) {
    row.str("");
    row << p.recall << ',' << p.precision << ',' << p.threshold << '\n';
    out << row.str();
  }
}

}  // namespace pronassess
