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

// Phoneme recognizers that need no audio model, plus corpus I/O.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pronassess/error.hpp"
#include "pronassess/phonemes.hpp"
#include "pronassess/random.hpp"

namespace pronassess {

inline constexpr std::size_t kFeatureDim = 80;

struct WordVotes {
  int mispronounced = 0;
  int total = 0;
};

struct Utterance {
  std::string id;
  std::string speaker;
  SentencePhonemes sentence;
  std::optional<PhonemeSeq> realized;
  /// Per word; empty when the corpus carries no annotator votes.
  std::vector<std::optional<WordVotes>> votes;
  /// Per word 0/1 ground truth; empty when absent.
  std::vector<std::optional<int>> labels;
  std::optional<Eigen::MatrixXf> features;
  /// Side-car path as written in the corpus, kept for round-tripping.
  std::string features_path;

  /// Word label from an explicit `label` field, else from votes (any
  /// annotator vote marks the word mispronounced).
  std::optional<int> WordLabel(std::size_t k) const {
    if (k < labels.size() && labels[k]) return labels[k];
    if (k < votes.size() && votes[k] && votes[k]->total > 0) {
      return votes[k]->mispronounced > 0 ? 1 : 0;
    }
    return std::nullopt;
  }
};

/// One decoded phoneme sequence. posteriors has one row per recognized
/// phoneme and inventory-size + 1 columns; the last column is the blank.
struct Hypothesis {
  PhonemeSeq phones;
  Eigen::MatrixXd posteriors;
  double weight = 1.0;
};

struct NBestResult {
  std::vector<Hypothesis> hypotheses;

  std::size_t size() const { return hypotheses.size(); }
  const Hypothesis& top() const { return hypotheses.front(); }
};

class Recognizer {
 public:
  virtual ~Recognizer() = default;
  /// Up to n hypotheses ordered by descending weight, weights summing to 1.
  virtual NBestResult Recognize(const Utterance& u, std::size_t n) const = 0;
};

/// The phonemes a producer pretends to hear: the realized pronunciation when
/// known, else the canonical one. Stress is dropped.
inline PhonemeSeq SpokenPhonemes(const Utterance& u) {
  return StripStress(u.realized ? *u.realized : u.sentence.flattened());
}

/// Emits exactly the spoken phonemes with one-hot posteriors.
class OracleRecognizer : public Recognizer {
 public:
  explicit OracleRecognizer(const PhonemeInventory& inv = PhonemeInventory::Default())
      : inv_(&inv) {}

  NBestResult Recognize(const Utterance& u, std::size_t n) const override {
    if (n < 1) Fail(ErrorCode::kInvalidArgument, "N must be >= 1");
    Hypothesis h;
    h.phones = SpokenPhonemes(u);
    h.posteriors = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(h.phones.size()),
                                         static_cast<Eigen::Index>(inv_->size() + 1));
    for (std::size_t j = 0; j < h.phones.size(); ++j) {
      h.posteriors(static_cast<Eigen::Index>(j), h.phones[j].id) = 1.0;
    }
    h.weight = 1.0;
    NBestResult out;
    out.hypotheses.push_back(std::move(h));
    return out;
  }

 private:
  const PhonemeInventory* inv_;
};

namespace internal {

/// The k most probable paths through independent categorical rows, best
/// first. Ties go to the lexicographically smaller rank vector.
inline std::vector<std::vector<SymbolId>> KBestPaths(const Eigen::MatrixXd& rows, std::size_t k) {
  const auto len = static_cast<std::size_t>(rows.rows());
  std::vector<std::vector<SymbolId>> ranked(len);
  for (std::size_t j = 0; j < len; ++j) {
    const auto r = static_cast<Eigen::Index>(j);
    for (Eigen::Index c = 0; c < rows.cols(); ++c) {
      if (rows(r, c) > 0.0) ranked[j].push_back(static_cast<SymbolId>(c));
    }
    std::stable_sort(ranked[j].begin(), ranked[j].end(),
                     [&](SymbolId a, SymbolId b) { return rows(r, a) > rows(r, b); });
  }
  using Ranks = std::vector<std::uint16_t>;
  auto log_prob = [&](const Ranks& ranks) {
    double lp = 0.0;
    for (std::size_t j = 0; j < len; ++j) {
      lp += std::log(rows(static_cast<Eigen::Index>(j), ranked[j][ranks[j]]));
    }
    return lp;
  };
  auto better = [](const std::pair<double, Ranks>& a, const std::pair<double, Ranks>& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  };
  std::set<std::pair<double, Ranks>, decltype(better)> frontier(better);
  std::set<Ranks> visited;
  Ranks start(len, 0);
  frontier.emplace(log_prob(start), start);
  visited.insert(start);
  std::vector<std::vector<SymbolId>> out;
  while (!frontier.empty() && out.size() < k) {
    const Ranks ranks = frontier.begin()->second;
    frontier.erase(frontier.begin());
    std::vector<SymbolId> path(len);
    for (std::size_t j = 0; j < len; ++j) path[j] = ranked[j][ranks[j]];
    out.push_back(std::move(path));
    for (std::size_t j = 0; j < len; ++j) {
      if (ranks[j] + 1u >= ranked[j].size()) continue;
      Ranks next = ranks;
      ++next[j];
      if (visited.insert(next).second) frontier.emplace(log_prob(next), std::move(next));
    }
  }
  return out;
}

}  // namespace internal

/// Simulated recognizer with substitution noise and calibrated posteriors.
///
/// For each spoken phoneme t the acoustic evidence is the distribution
/// p = (1 - epsilon) on t and epsilon spread evenly over the other regular
/// symbols. A symbol s is drawn from p, and the posterior row is
/// (c * onehot(s) + p) / (c + 1) for concentration c. Wrong draws therefore
/// get less confident rows than right ones, and c = infinity gives one-hot
/// rows. The N-best list holds the N most probable symbol sequences under
/// the independent rows. A hypothesis that picks x instead of the row's
/// argmax gets the row with the masses of x and the argmax swapped, so every
/// row's argmax is the hypothesis phoneme. Weights are proportional to the
/// product of chosen-symbol probabilities.
class NoisyRecognizer : public Recognizer {
 public:
  NoisyRecognizer(double epsilon, double concentration, std::uint64_t seed,
                  const PhonemeInventory& inv = PhonemeInventory::Default())
      : epsilon_(epsilon), concentration_(concentration), seed_(seed), inv_(&inv) {
    if (!(epsilon >= 0.0 && epsilon < 1.0)) {
      Fail(ErrorCode::kInvalidArgument, "epsilon must lie in [0, 1)");
    }
    // c >= 1 keeps the drawn symbol the argmax of its row.
    if (!(concentration >= 1.0)) {
      Fail(ErrorCode::kInvalidArgument, "concentration must be >= 1");
    }
    pool_ = inv.RegularSymbols();
    if (pool_.size() < 2) Fail(ErrorCode::kDegenerateInventory, "too few symbols");
  }

  NBestResult Recognize(const Utterance& u, std::size_t n) const override {
    if (n < 1) Fail(ErrorCode::kInvalidArgument, "N must be >= 1");
    Rng rng(MixSeed(seed_, StableHash(u.id)));
    const PhonemeSeq truth = SpokenPhonemes(u);
    const auto len = static_cast<Eigen::Index>(truth.size());
    const auto cols = static_cast<Eigen::Index>(inv_->size() + 1);

    Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(len, cols);
    std::vector<SymbolId> best(truth.size());
    for (std::size_t j = 0; j < truth.size(); ++j) {
      const SymbolId t = truth[j].id;
      Eigen::RowVectorXd evidence = Eigen::RowVectorXd::Zero(cols);
      const bool t_regular = std::binary_search(pool_.begin(), pool_.end(), t);
      const double others = static_cast<double>(pool_.size() - (t_regular ? 1 : 0));
      for (SymbolId s : pool_) {
        if (s != t) evidence(s) = epsilon_ / others;
      }
      evidence(t) = 1.0 - epsilon_;
      SymbolId drawn = t;
      if (rng.Bernoulli(epsilon_)) drawn = DrawOther(rng, t);
      best[j] = drawn;
      Eigen::RowVectorXd row;
      if (std::isinf(concentration_)) {
        row = Eigen::RowVectorXd::Zero(cols);
        row(drawn) = 1.0;
      } else {
        row = evidence / (concentration_ + 1.0);
        row(drawn) += concentration_ / (concentration_ + 1.0);
      }
      rows.row(static_cast<Eigen::Index>(j)) = row / row.sum();
    }

    const std::vector<std::vector<SymbolId>> picks = internal::KBestPaths(rows, n);

    NBestResult out;
    std::vector<double> log_w;
    for (const auto& pick : picks) {
      Hypothesis h;
      h.posteriors = rows;
      double lw = 0.0;
      for (std::size_t j = 0; j < pick.size(); ++j) {
        const auto r = static_cast<Eigen::Index>(j);
        lw += std::log(rows(r, pick[j]));
        h.phones.push_back({pick[j], std::nullopt});
        if (pick[j] != best[j]) std::swap(h.posteriors(r, pick[j]), h.posteriors(r, best[j]));
      }
      log_w.push_back(lw);
      out.hypotheses.push_back(std::move(h));
    }
    const double max_lw = *std::max_element(log_w.begin(), log_w.end());
    double total = 0.0;
    for (std::size_t i = 0; i < log_w.size(); ++i) {
      out.hypotheses[i].weight = std::exp(log_w[i] - max_lw);
      total += out.hypotheses[i].weight;
    }
    for (auto& h : out.hypotheses) h.weight /= total;
    std::stable_sort(out.hypotheses.begin(), out.hypotheses.end(),
                     [](const Hypothesis& a, const Hypothesis& b) { return a.weight > b.weight; });
    return out;
  }

  double epsilon() const { return epsilon_; }

 private:
  SymbolId DrawOther(Rng& rng, SymbolId exclude) const {
    SymbolId s = exclude;
    while (s == exclude) s = pool_[rng.Index(pool_.size())];
    return s;
  }

  double epsilon_;
  double concentration_;
  std::uint64_t seed_;
  const PhonemeInventory* inv_;
  std::vector<SymbolId> pool_;
};

// ---------------------------------------------------------------------------
// Corpus I/O. One JSON object per line:
//   {"id": "...", "speaker": "...",
//    "words": [{"text": "said", "canonical": "s eh1 d", "votes": [4, 5],
//               "label": 1}],
//    "realized": "s ey1 d", "features": "utt1.f32"}
// Feature side-cars: uint32 rows, uint32 cols, then rows*cols float32, all
// little-endian, row-major.

inline Eigen::MatrixXf ReadFeatureFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIoError, "cannot open feature file " + path);
  auto read_u32 = [&in, &path]() {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) {
      Fail(ErrorCode::kParseError, "truncated feature header in " + path);
    }
    return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
           static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
  };
  const std::uint32_t rows = read_u32();
  const std::uint32_t cols = read_u32();
  Eigen::MatrixXf m(rows, cols);
  for (std::uint32_t r = 0; r < rows; ++r) {
    for (std::uint32_t c = 0; c < cols; ++c) {
      const std::uint32_t bits = read_u32();
      float v;
      std::memcpy(&v, &bits, sizeof v);
      m(r, c) = v;
    }
  }
  return m;
}

inline void WriteFeatureFile(const std::string& path, const Eigen::MatrixXf& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIoError, "cannot write feature file " + path);
  auto put_u32 = [&out](std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
  };
  put_u32(static_cast<std::uint32_t>(m.rows()));
  put_u32(static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::uint32_t bits;
      const float v = m(r, c);
      std::memcpy(&bits, &v, sizeof bits);
      put_u32(bits);
    }
  }
}

/// Parses one corpus line. base_dir resolves relative feature paths; pass an
/// empty path to skip loading side-cars.
inline Utterance ParseUtterance(const nlohmann::json& j, const PhonemeInventory& inv,
                                const std::filesystem::path& base_dir = {}) {
  if (!j.is_object()) Fail(ErrorCode::kParseError, "utterance is not a JSON object");
  Utterance u;
  u.id = j.at("id").get<std::string>();
  u.speaker = j.value("speaker", std::string());
  std::vector<SentencePhonemes::Word> words;
  for (const auto& w : j.at("words")) {
    words.push_back({w.value("text", std::string()),
                     ParsePhonemeSeq(w.at("canonical").get<std::string>(), inv)});
    std::optional<WordVotes> votes;
    if (w.contains("votes")) {
      const auto& v = w.at("votes");
      if (!v.is_array() || v.size() != 2) Fail(ErrorCode::kParseError, "votes must be [m, n]");
      WordVotes wv{v[0].get<int>(), v[1].get<int>()};
      if (wv.mispronounced < 0 || wv.total < 0 || wv.mispronounced > wv.total) {
        Fail(ErrorCode::kParseError, "votes " + std::to_string(wv.mispronounced) + " of " +
                                         std::to_string(wv.total) + " are inconsistent");
      }
      votes = wv;
    }
    u.votes.push_back(votes);
    std::optional<int> label;
    if (w.contains("label")) {
      label = w.at("label").get<int>();
      if (*label != 0 && *label != 1) Fail(ErrorCode::kParseError, "label must be 0 or 1");
    }
    u.labels.push_back(label);
  }
  u.sentence = SentencePhonemes(std::move(words));
  if (j.contains("realized") && !j.at("realized").is_null()) {
    u.realized = ParsePhonemeSeq(j.at("realized").get<std::string>(), inv);
  }
  if (j.contains("features")) {
    u.features_path = j.at("features").get<std::string>();
    if (!u.features_path.empty()) {
      std::filesystem::path p(u.features_path);
      if (p.is_relative()) p = base_dir / p;
      Eigen::MatrixXf m = ReadFeatureFile(p.string());
      if (static_cast<std::size_t>(m.cols()) != kFeatureDim) {
        Fail(ErrorCode::kParseError, "feature matrix has " + std::to_string(m.cols()) +
                                         " columns, expected 80");
      }
      u.features = std::move(m);
    }
  }
  return u;
}

inline nlohmann::json UtteranceToJson(const Utterance& u, const PhonemeInventory& inv) {
  nlohmann::json j;
  j["id"] = u.id;
  j["speaker"] = u.speaker;
  nlohmann::json words = nlohmann::json::array();
  for (std::size_t k = 0; k < u.sentence.num_words(); ++k) {
    const auto& w = u.sentence.words()[k];
    nlohmann::json jw;
    jw["text"] = w.text;
    jw["canonical"] = ToString(w.phones, inv);
    if (k < u.votes.size() && u.votes[k]) {
      jw["votes"] = {u.votes[k]->mispronounced, u.votes[k]->total};
    }
    if (k < u.labels.size() && u.labels[k]) jw["label"] = *u.labels[k];
    words.push_back(std::move(jw));
  }
  j["words"] = std::move(words);
  if (u.realized) j["realized"] = ToString(*u.realized, inv);
  if (!u.features_path.empty()) j["features"] = u.features_path;
  return j;
}

/// Reads a JSON-Lines corpus from a stream. Blank lines are skipped; errors
/// report the 1-based line number.
inline std::vector<Utterance> LoadCorpus(std::istream& in, const PhonemeInventory& inv,
                                         const std::filesystem::path& base_dir = {}) {
  std::vector<Utterance> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(ParseUtterance(nlohmann::json::parse(line), inv, base_dir));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kIoError) throw;
      Fail(ErrorCode::kParseError, "line " + std::to_string(line_no) + ": " + e.what());
    } catch (const nlohmann::json::exception& e) {
      Fail(ErrorCode::kParseError, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

inline std::vector<Utterance> LoadCorpus(const std::string& path,
                                         const PhonemeInventory& inv = PhonemeInventory::Default()) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIoError, "cannot open corpus " + path);
  return LoadCorpus(in, inv, std::filesystem::path(path).parent_path());
}

}  // namespace pronassess
