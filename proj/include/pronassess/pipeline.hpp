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

// End-to-end scoring: recognizer -> alignment -> likelihoods -> word error
// probabilities, and the harness that compares detector variants on a
// labelled corpus.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pronassess/align.hpp"
#include "pronassess/detector.hpp"
#include "pronassess/error.hpp"
#include "pronassess/metrics.hpp"
#include "pronassess/phonemes.hpp"
#include "pronassess/pronmodel.hpp"
#include "pronassess/random.hpp"
#include "pronassess/recognizer.hpp"

namespace pronassess {

enum class SystemVariant {
  /// Top hypothesis only, posteriors forced to one-hot, no pronunciation model.
  kPrNoLik,
  /// Recognizer posteriors of the canonical phonemes, no pronunciation model.
  kPrLik,
  /// N-best hypotheses combined through the pronunciation model.
  kPrPm,
};

inline std::string_view SystemVariantName(SystemVariant v) {
  switch (v) {
    case SystemVariant::kPrNoLik: return "PR_NOLIK";
    case SystemVariant::kPrLik: return "PR_LIK";
    case SystemVariant::kPrPm: return "PR_PM";
  }
  return "?";
}

struct SystemConfig {
  SystemVariant variant = SystemVariant::kPrPm;
  DetectorConfig detector;
  std::optional<PronunciationModel> pm;

  void Validate() const {
    detector.Validate();
    if (variant == SystemVariant::kPrPm && !pm) {
      Fail(ErrorCode::kInvalidArgument, "PR_PM needs a pronunciation model");
    }
  }
};

struct UtteranceScore {
  std::vector<WordErrorProbs> per_hypothesis;
  /// Min over hypotheses (all-hypotheses mode), the top hypothesis (top
  /// mode) or the max (literal mode). Thresholding it gives the flags.
  WordErrorProbs aggregated;
  std::vector<int> flags;
};

/// Likelihood of the canonical phonemes under one hypothesis' posteriors:
/// the posterior mass of the canonical symbol on the aligned row. Deleted
/// positions get the floor; an inserted row scales its host position by the
/// mass not on the inserted symbol.
inline LikelihoodSeq PosteriorLikelihood(const Hypothesis& h, const PhonemeSeq& canonical,
                                         const Alignment& a) {
  LikelihoodSeq out;
  out.pi.assign(canonical.size(), 1.0);
  const auto hosts = HostPositions(a);
  for (std::size_t i = 0; i < a.ops.size(); ++i) {
    const auto& op = a.ops[i];
    switch (op.op) {
      case EditOp::kMatch:
      case EditOp::kSub:
        out.pi[*op.canonical] *= h.posteriors(static_cast<Eigen::Index>(*op.recognized),
                                              canonical[*op.canonical].id);
        break;
      case EditOp::kDel:
        out.pi[*op.canonical] = 0.0;
        break;
      case EditOp::kIns:
        if (hosts[i]) {
          out.pi[*hosts[i]] *= 1.0 - h.posteriors(static_cast<Eigen::Index>(*op.recognized),
                                                  h.phones[*op.recognized].id);
        }
        break;
    }
  }
  for (double& v : out.pi) v = std::clamp(v, kMinLikelihood, 1.0);
  return out;
}

inline Hypothesis OneHot(const Hypothesis& h) {
  Hypothesis out = h;
  out.posteriors.setZero();
  for (std::size_t j = 0; j < h.phones.size(); ++j) {
    out.posteriors(static_cast<Eigen::Index>(j), h.phones[j].id) = 1.0;
  }
  out.weight = 1.0;
  return out;
}

inline UtteranceScore ScoreUtterance(const Utterance& u, const Recognizer& producer,
                                     const SystemConfig& sys) {
  sys.Validate();
  const PhonemeSeq canonical = StripStress(u.sentence.flattened());
  const std::size_t n = sys.variant == SystemVariant::kPrNoLik ? 1 : sys.detector.n;
  NBestResult nbest = producer.Recognize(u, n);
  if (nbest.hypotheses.empty()) Fail(ErrorCode::kProducerFailure, "no hypotheses for " + u.id);
  if (nbest.hypotheses.size() > n) nbest.hypotheses.resize(n);

  UtteranceScore out;
  std::optional<LikelihoodSeq> combined;
  if (sys.variant == SystemVariant::kPrPm) combined = Combine(nbest, *sys.pm, canonical);
  for (const auto& raw : nbest.hypotheses) {
    const Hypothesis h = sys.variant == SystemVariant::kPrNoLik ? OneHot(raw) : raw;
    const Alignment a = Align(canonical, h.phones);
    const LikelihoodSeq pi = combined ? *combined : PosteriorLikelihood(h, canonical, a);
    out.per_hypothesis.push_back(ComputeWordErrorProbs(a, pi, u.sentence));
  }

  out.aggregated = out.per_hypothesis.front();
  if (sys.detector.mode != DecisionMode::kTopHypothesis) {
    const bool take_min = sys.detector.mode == DecisionMode::kAllHypotheses;
    for (const auto& wp : out.per_hypothesis) {
      for (std::size_t k = 0; k < wp.size(); ++k) {
        const bool better = take_min ? wp.e[k] < out.aggregated.e[k] : wp.e[k] > out.aggregated.e[k];
        if (better) {
          out.aggregated.e[k] = wp.e[k];
          out.aggregated.position[k] = wp.position[k];
        }
      }
    }
  }
  DetectorConfig cfg = sys.detector;
  cfg.n = out.per_hypothesis.size();
  out.flags = Detect(out.per_hypothesis, cfg);
  return out;
}

/// Scores and labels of every labelled word, in corpus order.
struct ScoredWords {
  std::vector<double> scores;
  std::vector<int> labels;
  /// Agreement band of each word when votes exist.
  std::vector<std::optional<AgreementBand>> bands;
};

/// Overall report plus, when votes are present, one report per agreement
/// band. A band's report keeps every negative word and only the positives of
/// that band; with `band_prevalence` the negatives are randomly thinned so
/// positives make up that fraction.
inline EvalReport EvaluateWords(const ScoredWords& words, double recall_anchor,
                                std::optional<double> band_prevalence = std::nullopt,
                                std::uint64_t seed = 0) {
  EvalReport report = Evaluate(words.scores, words.labels, recall_anchor);
  for (AgreementBand band : {AgreementBand::kLow, AgreementBand::kMedium, AgreementBand::kHigh}) {
    std::vector<int> labels;
    std::vector<std::size_t> index;
    for (std::size_t i = 0; i < words.scores.size(); ++i) {
      const bool in_band = i < words.bands.size() && words.bands[i] == band;
      if (words.labels[i] == 0 || (words.labels[i] == 1 && in_band)) {
        index.push_back(i);
        labels.push_back(words.labels[i]);
      }
    }
    if (std::find(labels.begin(), labels.end(), 1) == labels.end()) continue;
    std::vector<std::size_t> keep(labels.size());
    for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = i;
    if (band_prevalence) {
      keep = DownsampleNegatives(labels, *band_prevalence, MixSeed(seed, static_cast<std::uint64_t>(band)));
    }
    std::vector<double> s;
    std::vector<int> l;
    for (std::size_t i : keep) {
      s.push_back(words.scores[index[i]]);
      l.push_back(labels[i]);
    }
    report.bands[std::string(AgreementBandName(band))] = Evaluate(s, l, recall_anchor);
  }
  return report;
}

inline ScoredWords ScoreCorpus(const std::vector<Utterance>& corpus, const Recognizer& producer,
                               const SystemConfig& sys) {
  ScoredWords out;
  for (const auto& u : corpus) {
    const UtteranceScore score = ScoreUtterance(u, producer, sys);
    for (std::size_t k = 0; k < u.sentence.num_words(); ++k) {
      const auto label = u.WordLabel(k);
      if (!label) continue;
      out.scores.push_back(score.aggregated.e[k]);
      out.labels.push_back(*label);
      std::optional<AgreementBand> band;
      if (k < u.votes.size() && u.votes[k] && u.votes[k]->total > 0 && *label == 1) {
        band = SeverityBand(u.votes[k]->mispronounced, u.votes[k]->total);
      }
      out.bands.push_back(band);
    }
  }
  if (out.scores.empty()) Fail(ErrorCode::kNoLabels, "corpus has no word-level labels");
  return out;
}

/// One report per system, each at the largest threshold reaching
/// `recall_anchor`.
inline std::vector<EvalReport> RunExperiment(const std::vector<Utterance>& corpus,
                                             const Recognizer& producer,
                                             const std::vector<SystemConfig>& systems,
                                             double recall_anchor = 0.4) {
  std::vector<EvalReport> out;
  for (const auto& sys : systems) {
    EvalReport r = EvaluateWords(ScoreCorpus(corpus, producer, sys), recall_anchor);
    r.system = std::string(SystemVariantName(sys.variant));
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic corpus with legitimate pronunciation variants, for comparing the
// variants of the detector offline.

struct VariantCorpusConfig {
  std::size_t utterances = 300;
  /// Short sentences keep the number of noisy positions per utterance within
  /// reach of a 4-best list.
  std::size_t words_per_utterance = 4;
  /// Words whose `ih` a native speaker realizes as `ih` or `ax`, 50/50.
  double variant_fraction = 0.3;
  /// Words with one phoneme replaced by a different one.
  double error_fraction = 0.2;
  std::uint64_t seed = 0;
};

struct VariantCorpus {
  /// Labelled learner utterances.
  std::vector<Utterance> test;
  /// Native (canonical, realized) pairs for training the pronunciation model.
  std::vector<PronunciationPair> native_pairs;
};

namespace internal {

struct VariantWord {
  SentencePhonemes::Word word;
  PhonemeSeq realized;
  int label = 0;
};

inline VariantWord MakeVariantWord(Rng& rng, const PhonemeInventory& inv, bool native,
                                   double variant_fraction, double error_fraction) {
  const SymbolId ih = *inv.Find("ih");
  const SymbolId ax = *inv.Find("ax");
  std::vector<SymbolId> vowels;
  std::vector<SymbolId> consonants;
  for (SymbolId s : inv.RegularSymbols()) {
    if (s == ih || s == ax) continue;
    (inv.is_vowel(s) ? vowels : consonants).push_back(s);
  }
  // CVC or CVCVC.
  const std::size_t syllables = 1 + rng.Index(2);
  PhonemeSeq phones;
  for (std::size_t s = 0; s < syllables; ++s) {
    phones.push_back({consonants[rng.Index(consonants.size())], std::nullopt});
    phones.push_back({vowels[rng.Index(vowels.size())], static_cast<std::uint8_t>(s == 0 ? 1 : 0)});
  }
  phones.push_back({consonants[rng.Index(consonants.size())], std::nullopt});

  VariantWord out;
  const double u = rng.Uniform();
  if (u < variant_fraction) {
    const std::size_t v = 1 + 2 * rng.Index(syllables);
    phones[v].id = ih;
    out.realized = phones;
    if (rng.Bernoulli(0.5)) out.realized[v].id = ax;
  } else if (!native && u < variant_fraction + error_fraction) {
    out.realized = phones;
    const std::size_t j = rng.Index(phones.size());
    std::vector<SymbolId> pool = inv.RegularSymbols();
    pool.erase(std::remove(pool.begin(), pool.end(), phones[j].id), pool.end());
    out.realized[j] = {pool[rng.Index(pool.size())], std::nullopt};
    out.label = 1;
  } else {
    out.realized = phones;
  }
  out.word.phones = phones;
  out.word.text = ToString(StripStress(phones), inv);
  return out;
}

}  // namespace internal

inline VariantCorpus MakeVariantCorpus(const VariantCorpusConfig& cfg,
                                       const PhonemeInventory& inv = PhonemeInventory::Default()) {
  if (!inv.Find("ih") || !inv.Find("ax")) {
    Fail(ErrorCode::kInvalidArgument, "inventory needs 'ih' and 'ax'");
  }
  Rng rng(cfg.seed);
  VariantCorpus out;
  for (std::size_t i = 0; i < cfg.utterances; ++i) {
    for (const bool native : {true, false}) {
      std::vector<SentencePhonemes::Word> words;
      PhonemeSeq realized;
      std::vector<std::optional<int>> labels;
      for (std::size_t k = 0; k < cfg.words_per_utterance; ++k) {
        auto w = internal::MakeVariantWord(rng, inv, native, cfg.variant_fraction, cfg.error_fraction);
        realized.insert(realized.end(), w.realized.begin(), w.realized.end());
        labels.push_back(w.label);
        words.push_back(std::move(w.word));
      }
      SentencePhonemes sentence(std::move(words));
      if (native) {
        out.native_pairs.push_back({StripStress(sentence.flattened()), StripStress(realized)});
        continue;
      }
      Utterance u;
      u.id = "syn" + std::to_string(i);
      u.speaker = "learner";
      u.sentence = std::move(sentence);
      u.realized = std::move(realized);
      u.labels = std::move(labels);
      out.test.push_back(std::move(u));
    }
  }
  return out;
}

}  // namespace pronassess
