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

// Phoneme inventory, ARPAbet parsing and the sentence/word data model.

#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pronassess/error.hpp"

namespace pronassess {

using SymbolId = std::uint16_t;

/// Ordered set of phoneme symbols. Index i is also column i of a recognizer
/// posterior matrix; the blank column sits at index size() and has no symbol.
///
/// The reserved names `pau` (pause) and `eos` (end of sentence) are treated
/// as special symbols: they belong to the inventory but are never drawn as
/// random replacement phonemes.
class PhonemeInventory {
 public:
  struct Entry {
    std::string symbol;
    bool vowel = false;
  };

  PhonemeInventory() = default;

  explicit PhonemeInventory(std::vector<Entry> entries) {
    for (auto& e : entries) Add(std::move(e));
  }

  /// 43 ARPAbet phones (the 39 CMUdict phones plus ax, axr, ix, dx) and the
  /// two specials, 45 symbols in total.
  static const PhonemeInventory& Default() {
    static const PhonemeInventory inv = [] {
      static constexpr std::pair<const char*, bool> kSymbols[] = {
          {"aa", true},  {"ae", true},  {"ah", true},  {"ao", true},
          {"aw", true},  {"ax", true},  {"axr", true}, {"ay", true},
          {"eh", true},  {"er", true},  {"ey", true},  {"ih", true},
          {"ix", true},  {"iy", true},  {"ow", true},  {"oy", true},
          {"uh", true},  {"uw", true},  {"b", false},  {"ch", false},
          {"d", false},  {"dh", false}, {"dx", false}, {"f", false},
          {"g", false},  {"hh", false}, {"jh", false}, {"k", false},
          {"l", false},  {"m", false},  {"n", false},  {"ng", false},
          {"p", false},  {"r", false},  {"s", false},  {"sh", false},
          {"t", false},  {"th", false}, {"v", false},  {"w", false},
          {"y", false},  {"z", false},  {"zh", false}, {"pau", false},
          {"eos", false},
      };
      std::vector<Entry> entries;
      for (const auto& [sym, vowel] : kSymbols) entries.push_back({sym, vowel});
      return PhonemeInventory(std::move(entries));
    }();
    return inv;
  }

  /// Reads `<symbol> <vowel:0|1>` lines; `#` starts a comment line.
  static PhonemeInventory FromStream(std::istream& in) {
    PhonemeInventory inv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::istringstream fields(line);
      std::string symbol;
      if (!(fields >> symbol) || symbol[0] == '#') continue;
      int vowel = -1;
      std::string extra;
      if (!(fields >> vowel) || (vowel != 0 && vowel != 1) || (fields >> extra)) {
        Fail(ErrorCode::kParseError, "inventory line " + std::to_string(line_no) +
                                         ": expected '<symbol> <0|1>'");
      }
      inv.Add({Lower(symbol), vowel == 1});
    }
    return inv;
  }

  static PhonemeInventory FromFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) Fail(ErrorCode::kIoError, "cannot open inventory file " + path);
    return FromStream(in);
  }

  /// l_s: number of symbols, blank excluded.
  std::size_t size() const { return entries_.size(); }
  std::size_t blank_column() const { return entries_.size(); }

  const std::string& symbol(SymbolId id) const { return entries_.at(id).symbol; }
  bool is_vowel(SymbolId id) const { return entries_.at(id).vowel; }
  bool is_special(SymbolId id) const {
    const auto& s = entries_.at(id).symbol;
    return s == "pau" || s == "eos";
  }

  std::optional<SymbolId> Find(std::string_view symbol) const {
    auto it = index_.find(std::string(symbol));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// Symbols eligible as random substitutes (specials excluded).
  std::vector<SymbolId> RegularSymbols() const {
    std::vector<SymbolId> out;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (!is_special(static_cast<SymbolId>(i))) out.push_back(static_cast<SymbolId>(i));
    }
    return out;
  }

  static std::string Lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
  }

 private:
  void Add(Entry e) {
    if (e.symbol.empty()) Fail(ErrorCode::kInvalidArgument, "empty phoneme symbol");
    if (e.symbol == "<blank>") {
      Fail(ErrorCode::kInvalidArgument, "blank is implicit and cannot be listed");
    }
    if (index_.count(e.symbol)) {
      Fail(ErrorCode::kInvalidArgument, "duplicate phoneme symbol '" + e.symbol + "'");
    }
    index_.emplace(e.symbol, static_cast<SymbolId>(entries_.size()));
    entries_.push_back(std::move(e));
  }

  std::vector<Entry> entries_;
  std::unordered_map<std::string, SymbolId> index_;
};

struct Phoneme {
  SymbolId id = 0;
  /// 0, 1 or 2 on vowels only.
  std::optional<std::uint8_t> stress;

  friend bool operator==(const Phoneme&, const Phoneme&) = default;
};

using PhonemeSeq = std::vector<Phoneme>;

/// Parses whitespace-delimited ARPAbet, e.g. "k ae1 t". Symbols are
/// case-insensitive; a trailing 0/1/2 is read as a stress digit.
inline PhonemeSeq ParsePhonemeSeq(std::string_view text, const PhonemeInventory& inv) {
  PhonemeSeq out;
  std::istringstream tokens{std::string(text)};
  std::string token;
  std::size_t position = 0;
  while (tokens >> token) {
    std::string sym = PhonemeInventory::Lower(token);
    std::optional<std::uint8_t> stress;
    auto id = inv.Find(sym);
    if (!id && sym.size() > 1) {
      const char last = sym.back();
      if (last == '0' || last == '1' || last == '2') {
        id = inv.Find(std::string_view(sym).substr(0, sym.size() - 1));
        if (id) stress = static_cast<std::uint8_t>(last - '0');
      }
    }
    if (!id) {
      Fail(ErrorCode::kUnknownSymbol,
           "'" + token + "' at position " + std::to_string(position));
    }
    if (stress && !inv.is_vowel(*id)) {
      Fail(ErrorCode::kStressOnConsonant,
           "'" + token + "' at position " + std::to_string(position));
    }
    out.push_back({*id, stress});
    ++position;
  }
  return out;
}

inline std::string ToString(const PhonemeSeq& seq, const PhonemeInventory& inv) {
  std::string out;
  for (const auto& p : seq) {
    if (!out.empty()) out += ' ';
    out += inv.symbol(p.id);
    if (p.stress) out += static_cast<char>('0' + *p.stress);
  }
  return out;
}

inline PhonemeSeq StripStress(PhonemeSeq seq) {
  for (auto& p : seq) p.stress.reset();
  return seq;
}

/// One flag per vowel nucleus; true means primary stress.
struct StressPattern {
  std::vector<bool> stressed;

  std::size_t size() const { return stressed.size(); }
  friend bool operator==(const StressPattern&, const StressPattern&) = default;
};

/// Secondary stress (2) collapses to unstressed.
inline StressPattern GetStressPattern(const PhonemeSeq& word, const PhonemeInventory& inv) {
  StressPattern out;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (!inv.is_vowel(word[i].id)) continue;
    if (!word[i].stress) {
      Fail(ErrorCode::kMissingStressDigit, "vowel at position " + std::to_string(i));
    }
    out.stressed.push_back(*word[i].stress == 1);
  }
  return out;
}

/// A sentence as a list of words plus the flattened phoneme view used for
/// alignment. word_of_position maps each flattened index to its word.
class SentencePhonemes {
 public:
  struct Word {
    std::string text;
    PhonemeSeq phones;
  };

  SentencePhonemes() = default;

  explicit SentencePhonemes(std::vector<Word> words) : words_(std::move(words)) {
    for (std::size_t k = 0; k < words_.size(); ++k) {
      word_start_.push_back(flattened_.size());
      for (const auto& p : words_[k].phones) {
        flattened_.push_back(p);
        word_of_position_.push_back(k);
      }
    }
    word_start_.push_back(flattened_.size());
  }

  const std::vector<Word>& words() const { return words_; }
  std::size_t num_words() const { return words_.size(); }
  const PhonemeSeq& flattened() const { return flattened_; }
  const std::vector<std::size_t>& word_of_position() const { return word_of_position_; }

  /// Flattened index range [begin, end) of word k.
  std::pair<std::size_t, std::size_t> WordSpan(std::size_t k) const {
    return {word_start_.at(k), word_start_.at(k + 1)};
  }

 private:
  std::vector<Word> words_;
  PhonemeSeq flattened_;
  std::vector<std::size_t> word_of_position_;
  std::vector<std::size_t> word_start_;
};

}  // namespace pronassess
