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

// Phoneme-level perturbation of canonical transcriptions, used to synthesize
// mispronounced training data with known error labels.

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pronassess/align.hpp"
#include "pronassess/error.hpp"
#include "pronassess/phonemes.hpp"
#include "pronassess/random.hpp"

namespace pronassess {

struct PerturbConfig {
  double p_replace = 0.2;
  double p_insert = 0.0;
  double p_delete = 0.0;
  std::uint64_t seed = 0;
  const PhonemeInventory* inventory = &PhonemeInventory::Default();

  void Validate() const {
    for (double p : {p_replace, p_insert, p_delete}) {
      if (!(p >= 0.0 && p <= 1.0)) {
        Fail(ErrorCode::kInvalidArgument, "perturbation probabilities must lie in [0, 1]");
      }
    }
    if (inventory == nullptr) Fail(ErrorCode::kInvalidArgument, "no inventory");
  }
};

struct LabeledPerturbation {
  PhonemeSeq original;
  PhonemeSeq perturbed;
  /// Indexed by original position: 1 if the phoneme was replaced or deleted,
  /// or if an insertion follows it.
  std::vector<int> phoneme_labels;
  /// Filled by PerturbSentence only.
  std::vector<int> word_labels;
  /// True once any insertion or deletion happened; positions of original and
  /// perturbed no longer correspond one to one.
  bool shifted = false;
};

namespace internal {

inline SymbolId DrawOther(Rng& rng, const std::vector<SymbolId>& pool, SymbolId exclude) {
  // Pool is sorted; skip over the excluded symbol if it is in the pool.
  const bool excluded_in_pool =
      std::binary_search(pool.begin(), pool.end(), exclude);
  const std::size_t n = pool.size() - (excluded_in_pool ? 1 : 0);
  std::size_t idx = rng.Index(n);
  if (excluded_in_pool) {
    const auto pos = static_cast<std::size_t>(
        std::lower_bound(pool.begin(), pool.end(), exclude) - pool.begin());
    if (idx >= pos) ++idx;
  }
  return pool[idx];
}

}  // namespace internal

/// Per position, independently: delete with p_delete, otherwise replace with
/// p_replace by a uniformly drawn different regular symbol; then insert a
/// uniformly drawn regular symbol after the position with p_insert.
/// Replacement vowels keep the original stress digit when the original was a
/// stressed vowel.
inline LabeledPerturbation Perturb(const PhonemeSeq& r, const PerturbConfig& cfg) {
  cfg.Validate();
  const PhonemeInventory& inv = *cfg.inventory;
  const std::vector<SymbolId> pool = inv.RegularSymbols();
  if (pool.size() < 2) {
    Fail(ErrorCode::kDegenerateInventory, "need at least two non-special symbols");
  }
  Rng rng(cfg.seed);
  LabeledPerturbation out;
  out.original = r;
  out.phoneme_labels.assign(r.size(), 0);
  for (std::size_t j = 0; j < r.size(); ++j) {
    if (rng.Bernoulli(cfg.p_delete)) {
      out.phoneme_labels[j] = 1;
      out.shifted = true;
    } else if (rng.Bernoulli(cfg.p_replace)) {
      Phoneme p{internal::DrawOther(rng, pool, r[j].id), std::nullopt};
      if (inv.is_vowel(p.id) && r[j].stress) p.stress = r[j].stress;
      out.perturbed.push_back(p);
      out.phoneme_labels[j] = 1;
    } else {
      out.perturbed.push_back(r[j]);
    }
    if (rng.Bernoulli(cfg.p_insert)) {
      out.perturbed.push_back({pool[rng.Index(pool.size())], std::nullopt});
      out.phoneme_labels[j] = 1;
      out.shifted = true;
    }
  }
  return out;
}

/// A word is flagged when any of its phonemes mismatch. Positions are compared
/// directly when no insertion or deletion happened; otherwise the pair is
/// aligned and words with a non-zero phoneme distance are flagged.
inline std::vector<int> WordLabels(const LabeledPerturbation& p, const SentencePhonemes& sent) {
  if (p.original.size() != sent.flattened().size()) {
    Fail(ErrorCode::kLengthMismatch, "perturbation does not cover the sentence");
  }
  std::vector<int> labels(sent.num_words(), 0);
  if (!p.shifted && p.perturbed.size() == p.original.size()) {
    for (std::size_t j = 0; j < p.original.size(); ++j) {
      if (p.original[j].id != p.perturbed[j].id) labels[sent.word_of_position()[j]] = 1;
    }
    return labels;
  }
  const auto summaries = WordEditSummaries(Align(p.original, p.perturbed), sent);
  for (std::size_t k = 0; k < summaries.size(); ++k) {
    labels[k] = summaries[k].phoneme_distance() > 0 ? 1 : 0;
  }
  return labels;
}

inline LabeledPerturbation PerturbSentence(const SentencePhonemes& sent,
                                           const PerturbConfig& cfg) {
  LabeledPerturbation out = Perturb(sent.flattened(), cfg);
  out.word_labels = WordLabels(out, sent);
  return out;
}

/// Returns a pattern with exactly one stressed syllable, drawn uniformly from
/// the syllables that are not stressed in the input.
inline StressPattern PerturbStress(const StressPattern& sp, std::uint64_t seed) {
  if (sp.size() < 2) {
    Fail(ErrorCode::kMonosyllableInput, "stress needs at least two syllables");
  }
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < sp.size(); ++i) {
    if (!sp.stressed[i]) candidates.push_back(i);
  }
  if (candidates.empty()) {
    Fail(ErrorCode::kInvalidArgument, "every syllable is already stressed");
  }
  Rng rng(seed);
  StressPattern out;
  out.stressed.assign(sp.size(), false);
  out.stressed[candidates[rng.Index(candidates.size())]] = true;
  return out;
}

enum class ErrorRole { kNoError, kError };

struct AugmentationTuple {
  ErrorRole role;
  std::string audio_ref;
  PhonemeSeq phonemes;
};

/// Placeholder audio reference for speech an external synthesizer should
/// produce from the given phonemes.
inline std::string SynthRef(const PhonemeSeq& phonemes, const PhonemeInventory& inv) {
  return "SYNTH(" + ToString(phonemes, inv) + ")";
}

/// The four combinations of real or synthesized audio with correct or
/// incorrect phoneme transcriptions.
inline std::array<AugmentationTuple, 4> AugmentationPlan(
    const std::string& audio_ref, const PhonemeSeq& r, const PhonemeSeq& r_perturbed,
    const PhonemeInventory& inv = PhonemeInventory::Default()) {
  if (r == r_perturbed) {
    Fail(ErrorCode::kNoPerturbation, "perturbed sequence equals the original");
  }
  const std::string synth = SynthRef(r_perturbed, inv);
  return {{
      {ErrorRole::kNoError, audio_ref, r},
      {ErrorRole::kError, audio_ref, r_perturbed},
      {ErrorRole::kNoError, synth, r_perturbed},
      {ErrorRole::kError, synth, r},
  }};
}

}  // namespace pronassess
