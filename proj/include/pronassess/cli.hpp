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

// The `pronassess` command line. Run() holds all of it so tests can drive
// the commands in-process.
//
// Exit codes: 0 success, 2 evaluation without positive labels, 64 bad
// flags, 65 invalid data, 66 unreadable or unwritable files.

#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pronassess/align.hpp"
#include "pronassess/error.hpp"
#include "pronassess/errorgen.hpp"
#include "pronassess/metrics.hpp"
#include "pronassess/phonemes.hpp"
#include "pronassess/pipeline.hpp"
#include "pronassess/probkit.hpp"
#include "pronassess/pronmodel.hpp"
#include "pronassess/random.hpp"
#include "pronassess/recognizer.hpp"
#include "pronassess/stress.hpp"

namespace pronassess::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNoPositives = 2;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitData = 65;
inline constexpr int kExitIo = 66;

namespace internal {

/// Writes `content` to a sibling temp file, then renames it over `path`.
inline void WriteAtomically(const std::string& path, const std::string& content) {
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) Fail(ErrorCode::kIoError, "cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) Fail(ErrorCode::kIoError, "write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    Fail(ErrorCode::kIoError, "cannot replace " + path);
  }
}

inline std::string JsonLines(const std::vector<nlohmann::json>& rows) {
  std::string out;
  for (const auto& r : rows) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

inline nlohmann::json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIoError, "cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kParseError, path + ": " + e.what());
  }
}

/// Calls `fn(line_no, json)` for every non-blank line of a JSONL file.
template <typename Fn>
void ForEachJsonLine(const std::string& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIoError, "cannot open " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      fn(line_no, j);
    } catch (const nlohmann::json::exception& e) {
      Fail(ErrorCode::kParseError, path + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

struct Options {
  std::string inventory;

  struct {
    std::string in, out;
    double p_replace = 0.2, p_insert = 0.0, p_delete = 0.0;
    std::uint64_t seed = 0;
    std::size_t sample = 0;
  } gen;

  struct {
    std::string in, out, producer = "oracle", system = "pr-pm", pm, mode = "all";
    double epsilon = 0.15, concentration = 2.0, threshold = 0.5;
    std::size_t n = 4;
    std::uint64_t seed = 0;
  } score;

  struct {
    std::string scores, labels, out, curve, system;
    double recall_anchor = 0.4;
    std::optional<double> severity_match;
    std::uint64_t seed = 0;
  } eval;

  struct {
    std::string pairs, out;
    double alpha = 0.1;
  } train;

  struct {
    std::string features, canonical;
    double t = 0.5;
  } stress;

  std::string demo;
};

inline int GenErrors(const Options& o, const PhonemeInventory& inv, std::ostream& out) {
  const auto corpus = LoadCorpus(o.gen.in, inv);
  if (corpus.empty()) Fail(ErrorCode::kInvalidArgument, "corpus " + o.gen.in + " is empty");
  PerturbConfig cfg;
  cfg.p_replace = o.gen.p_replace;
  cfg.p_insert = o.gen.p_insert;
  cfg.p_delete = o.gen.p_delete;
  cfg.inventory = &inv;
  cfg.Validate();

  // Sampling with replacement draws its indices from the base seed; each
  // output utterance is perturbed under its own derived seed.
  std::vector<std::size_t> sources;
  if (o.gen.sample > 0) {
    Rng pick(o.gen.seed);
    for (std::size_t i = 0; i < o.gen.sample; ++i) sources.push_back(pick.Index(corpus.size()));
  } else {
    for (std::size_t i = 0; i < corpus.size(); ++i) sources.push_back(i);
  }

  std::vector<nlohmann::json> rows;
  std::size_t phonemes = 0, perturbed = 0, words = 0, bad_words = 0;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    Utterance u = corpus[sources[i]];
    cfg.seed = MixSeed(o.gen.seed, i + 1);
    const LabeledPerturbation p = PerturbSentence(u.sentence, cfg);
    if (o.gen.sample > 0) u.id += "#" + std::to_string(i);
    u.realized = p.perturbed;
    u.votes.assign(u.sentence.num_words(), std::nullopt);
    u.labels.assign(p.word_labels.begin(), p.word_labels.end());
    phonemes += p.original.size();
    for (int l : p.phoneme_labels) perturbed += static_cast<std::size_t>(l);
    words += p.word_labels.size();
    for (int l : p.word_labels) bad_words += static_cast<std::size_t>(l);
    rows.push_back(UtteranceToJson(u, inv));
  }
  WriteAtomically(o.gen.out, JsonLines(rows));
  std::ostringstream rate;
  rate.precision(6);
  rate << (phonemes ? static_cast<double>(perturbed) / static_cast<double>(phonemes) : 0.0);
  out << "utterances=" << rows.size() << " phonemes=" << phonemes << " perturbed=" << perturbed
      << " rate=" << rate.str() << " words=" << words << " mispronounced_words=" << bad_words
      << '\n';
  return kExitOk;
}

inline SystemVariant ParseSystem(const std::string& s) {
  if (s == "pr" || s == "pr-nolik") return SystemVariant::kPrNoLik;
  if (s == "pr-lik") return SystemVariant::kPrLik;
  return SystemVariant::kPrPm;
}

inline DecisionMode ParseMode(const std::string& s) {
  if (s == "top") return DecisionMode::kTopHypothesis;
  if (s == "literal") return DecisionMode::kLiteralAllBelow;
  return DecisionMode::kAllHypotheses;
}

inline int Score(const Options& o, const PhonemeInventory& inv, std::ostream& out) {
  const auto corpus = LoadCorpus(o.score.in, inv);
  SystemConfig sys;
  sys.variant = ParseSystem(o.score.system);
  sys.detector.n = o.score.n;
  sys.detector.threshold = o.score.threshold;
  sys.detector.mode = ParseMode(o.score.mode);
  if (sys.variant == SystemVariant::kPrPm) {
    sys.pm = o.score.pm.empty() ? PronunciationModel::Identity(inv)
                                : PronunciationModel::FromJson(ReadJsonFile(o.score.pm), inv);
  }
  sys.Validate();

  std::unique_ptr<Recognizer> producer;
  if (o.score.producer == "noisy") {
    producer = std::make_unique<NoisyRecognizer>(o.score.epsilon, o.score.concentration,
                                                 o.score.seed, inv);
  } else {
    producer = std::make_unique<OracleRecognizer>(inv);
  }

  std::vector<nlohmann::json> rows;
  std::size_t flagged = 0;
  for (const auto& u : corpus) {
    const UtteranceScore s = ScoreUtterance(u, *producer, sys);
    for (std::size_t k = 0; k < s.aggregated.size(); ++k) {
      nlohmann::json j;
      j["id"] = u.id;
      j["word"] = k;
      j["e"] = s.aggregated.e[k];
      rows.push_back(std::move(j));
      flagged += static_cast<std::size_t>(s.flags[k]);
    }
  }
  WriteAtomically(o.score.out, JsonLines(rows));
  out << "system=" << SystemVariantName(sys.variant) << " utterances=" << corpus.size()
      << " words=" << rows.size() << " flagged=" << flagged << '\n';
  return kExitOk;
}

inline int Eval(const Options& o, const PhonemeInventory& inv, std::ostream& out) {
  std::map<std::pair<std::string, std::size_t>, double> scores;
  ForEachJsonLine(o.eval.scores, [&](std::size_t line_no, const nlohmann::json& j) {
    const auto key = std::make_pair(j.at("id").get<std::string>(), j.at("word").get<std::size_t>());
    const double e = j.at("e").get<double>();
    if (!(e >= 0.0 && e <= 1.0)) {
      Fail(ErrorCode::kParseError, o.eval.scores + " line " + std::to_string(line_no) +
                                       ": e must lie in [0, 1]");
    }
    if (!scores.emplace(key, e).second) {
      Fail(ErrorCode::kParseError, o.eval.scores + " line " + std::to_string(line_no) +
                                       ": duplicate score for " + key.first + " word " +
                                       std::to_string(key.second));
    }
  });

  const auto corpus = LoadCorpus(o.eval.labels, inv);
  ScoredWords words;
  std::size_t matched = 0;
  for (const auto& u : corpus) {
    for (std::size_t k = 0; k < u.sentence.num_words(); ++k) {
      const auto it = scores.find({u.id, k});
      if (it != scores.end()) ++matched;
      const auto label = u.WordLabel(k);
      if (!label) continue;
      if (it == scores.end()) {
        Fail(ErrorCode::kInvalidArgument, "no score for " + u.id + " word " + std::to_string(k));
      }
      words.scores.push_back(it->second);
      words.labels.push_back(*label);
      std::optional<AgreementBand> band;
      if (*label == 1 && k < u.votes.size() && u.votes[k] && u.votes[k]->total > 0) {
        band = SeverityBand(u.votes[k]->mispronounced, u.votes[k]->total);
      }
      words.bands.push_back(band);
    }
  }
  if (matched != scores.size()) {
    Fail(ErrorCode::kInvalidArgument, "scores refer to words missing from " + o.eval.labels);
  }
  if (words.scores.empty()) Fail(ErrorCode::kNoLabels, "corpus has no word-level labels");

  EvalReport report = EvaluateWords(words, o.eval.recall_anchor, o.eval.severity_match, o.eval.seed);
  report.system = o.eval.system;
  WriteAtomically(o.eval.out, ToJson(report).dump(2) + "\n");
  if (!o.eval.curve.empty()) {
    std::ostringstream csv;
    WriteCurveCsv(csv, report.curve);
    WriteAtomically(o.eval.curve, csv.str());
  }
  out << "words=" << report.n << " positives=" << report.positives << " auc=" << report.auc;
  if (report.precision) out << " precision=" << *report.precision;
  if (report.recall) out << " recall=" << *report.recall;
  out << '\n';
  return kExitOk;
}

inline int TrainPm(const Options& o, const PhonemeInventory& inv, std::ostream& out) {
  std::vector<PronunciationPair> pairs;
  ForEachJsonLine(o.train.pairs, [&](std::size_t line_no, const nlohmann::json& j) {
    const std::string where = o.train.pairs + " line " + std::to_string(line_no);
    if (j.contains("words")) {
      // A corpus line: its canonical words against its realized sequence.
      Utterance u = ParseUtterance(j, inv);
      if (!u.realized) Fail(ErrorCode::kParseError, where + ": utterance has no realized");
      pairs.push_back({StripStress(u.sentence.flattened()), StripStress(*u.realized)});
    } else {
      pairs.push_back({StripStress(ParsePhonemeSeq(j.at("canonical").get<std::string>(), inv)),
                       StripStress(ParsePhonemeSeq(j.at("realized").get<std::string>(), inv))});
    }
  });
  const PronunciationModel pm = TrainPronunciationModel(pairs, o.train.alpha, inv);
  WriteAtomically(o.train.out, pm.ToJson().dump(2) + "\n");
  out << "pairs=" << pairs.size() << " alpha=" << o.train.alpha << '\n';
  return kExitOk;
}

inline int Stress(const Options& o, std::ostream& out) {
  const SyllableFeatures f = ReadSyllableFeaturesCsv(o.stress.features);
  StressPattern canonical;
  std::istringstream ss(o.stress.canonical);
  std::string tok;
  while (ss >> tok) {
    if (tok != "0" && tok != "1") Fail(ErrorCode::kInvalidArgument, "--canonical takes 0/1 digits");
    canonical.stressed.push_back(tok == "1");
  }
  if (canonical.size() != f.size()) {
    Fail(ErrorCode::kLengthMismatch, "--canonical has " + std::to_string(canonical.size()) +
                                         " syllables, features have " + std::to_string(f.size()));
  }
  const auto probs = HeuristicStressProbs(f);
  const auto flags = DetectStressErrors(canonical, probs, o.stress.t);
  nlohmann::json j;
  j["probs"] = probs;
  j["estimated"] = std::max_element(probs.begin(), probs.end()) - probs.begin();
  j["flags"] = flags;
  out << j.dump() << '\n';
  return kExitOk;
}

inline int ProbkitDemo(const Options& o, std::ostream& out) {
  nlohmann::json j;
  j["demo"] = o.demo;
  if (o.demo == "coin") {
    const DiscreteDistribution prior({"pirate", "fair"}, {0.5, 0.5});
    const std::vector<DiscreteDistribution> cpt = {
        DiscreteDistribution({"heads", "tails"}, {0.6, 0.4}),
        DiscreteDistribution({"heads", "tails"}, {0.5, 0.5})};
    const auto post = DiscretePosterior(prior, cpt, "heads");
    j["evidence"] = "heads";
    j["posterior"] = {{"pirate", post.Prob("pirate")}, {"fair", post.Prob("fair")}};
  } else if (o.demo == "gaussian") {
    const GaussianBelief post = GaussianPosterior({0.0, 1.0}, 1.0, {2.0});
    j["posterior"] = {{"mean", post.mean}, {"variance", post.variance}};
  } else {
    const std::vector<double> xs = {-2.0, 0.0, 1.5};
    const std::vector<double> ys = {0.5, -0.3, 1.2};
    std::vector<Eigen::VectorXd> train_x;
    for (double x : xs) train_x.push_back(Eigen::VectorXd::Constant(1, x));
    const Eigen::VectorXd train_y = Eigen::Map<const Eigen::VectorXd>(ys.data(), 3);
    nlohmann::json points = nlohmann::json::array();
    for (int i = -8; i <= 8; ++i) {
      const double q = 0.5 * i;
      const auto p = GpPosterior(train_x, train_y, RbfKernel{1.0, 1.0}, 0.1,
                                 Eigen::VectorXd::Constant(1, q));
      points.push_back({{"x", q}, {"mean", p.mean}, {"variance", p.variance}});
    }
    j["posterior"] = std::move(points);
  }
  out << j.dump() << '\n';
  return kExitOk;
}

}  // namespace internal

/// Runs one command. `args` excludes the program name.
inline int Run(const std::vector<std::string>& args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  internal::Options o;
  CLI::App app{"Pronunciation error detection toolkit", "pronassess"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.add_option("--inventory", o.inventory, "Phoneme inventory file (default: built-in)");
  app.fallthrough();

  auto* gen = app.add_subcommand("gen-errors", "Perturb a corpus into labelled mispronunciations");
  gen->add_option("--in", o.gen.in, "Input corpus (JSONL)")->required();
  gen->add_option("--out", o.gen.out, "Output corpus (JSONL)")->required();
  gen->add_option("--p-replace", o.gen.p_replace, "Per-phoneme replacement probability")
      ->check(CLI::Range(0.0, 1.0));
  gen->add_option("--p-insert", o.gen.p_insert, "Per-phoneme insertion probability")
      ->check(CLI::Range(0.0, 1.0));
  gen->add_option("--p-delete", o.gen.p_delete, "Per-phoneme deletion probability")
      ->check(CLI::Range(0.0, 1.0));
  gen->add_option("--seed", o.gen.seed, "Random seed");
  gen->add_option("--sample", o.gen.sample,
                  "Draw this many utterances with replacement (0: each utterance once)");

  auto* score = app.add_subcommand("score", "Per-word mispronunciation probabilities");
  score->add_option("--in", o.score.in, "Input corpus (JSONL)")->required();
  score->add_option("--out", o.score.out, "Output scores (JSONL)")->required();
  score->add_option("--producer", o.score.producer, "Phoneme recognizer")
      ->check(CLI::IsMember({"oracle", "noisy"}));
  score->add_option("--epsilon", o.score.epsilon, "Noisy recognizer substitution rate")
      ->check(CLI::Range(0.0, 0.999999));
  score->add_option("--concentration", o.score.concentration,
                    "Noisy recognizer confidence in its top symbol (>= 1)");
  score->add_option("--seed", o.score.seed, "Noisy recognizer seed");
  score->add_option("--system", o.score.system, "Detector variant")
      ->check(CLI::IsMember({"pr", "pr-nolik", "pr-lik", "pr-pm"}));
  score->add_option("--pm", o.score.pm, "Pronunciation model JSON (pr-pm; default identity)");
  score->add_option("--n", o.score.n, "Number of hypotheses")->check(CLI::PositiveNumber);
  score->add_option("--threshold", o.score.threshold, "Decision threshold for the summary")
      ->check(CLI::Range(0.0, 1.0));
  score->add_option("--mode", o.score.mode, "Aggregation over hypotheses")
      ->check(CLI::IsMember({"all", "top", "literal"}));

  auto* eval = app.add_subcommand("eval", "Precision/recall report for scored words");
  eval->add_option("--scores", o.eval.scores, "Scores (JSONL)")->required();
  eval->add_option("--labels", o.eval.labels, "Labelled corpus (JSONL)")
      ->required();
  eval->add_option("--out", o.eval.out, "Report (JSON)")->required();
  eval->add_option("--curve", o.eval.curve, "PR curve (CSV)");
  eval->add_option("--recall-anchor", o.eval.recall_anchor, "Recall at which to report")
      ->check(CLI::Range(0.0, 1.0));
  eval->add_option("--severity-match", o.eval.severity_match,
                   "Thin negatives so each band's positives make up this fraction")
      ->check(CLI::Range(0.000001, 1.0));
  eval->add_option("--seed", o.eval.seed, "Seed for --severity-match");
  eval->add_option("--system", o.eval.system, "System name recorded in the report");

  auto* train = app.add_subcommand("train-pm", "Train a pronunciation model from aligned pairs");
  train->add_option("--pairs", o.train.pairs,
                    "Pairs (JSONL of {canonical, realized} or corpus lines with realized)")
      ->required();
  train->add_option("--alpha", o.train.alpha, "Additive smoothing")->check(CLI::NonNegativeNumber);
  train->add_option("--out", o.train.out, "Model (JSON)")->required();

  auto* stress = app.add_subcommand("stress", "Lexical stress errors of one word");
  stress->add_option("--features", o.stress.features, "Syllable features (CSV)")
      ->required();
  stress->add_option("--canonical", o.stress.canonical, "Canonical stress, e.g. \"1 0\"")->required();
  stress->add_option("--t", o.stress.t, "Detection threshold")->check(CLI::Range(0.0, 1.0));

  auto* demo = app.add_subcommand("probkit-demo", "Closed-form Bayesian inference examples");
  demo->add_option("--demo", o.demo, "Which example")
      ->required()
      ->check(CLI::IsMember({"coin", "gaussian", "gp"}));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "pronassess: " << e.what() << '\n';
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::FileError)) return kExitIo;
    return kExitUsage;
  }

  try {
    const PhonemeInventory custom =
        o.inventory.empty() ? PhonemeInventory::Default() : PhonemeInventory::FromFile(o.inventory);
    const PhonemeInventory& inv = o.inventory.empty() ? PhonemeInventory::Default() : custom;
    if (*gen) return internal::GenErrors(o, inv, out);
    if (*score) return internal::Score(o, inv, out);
    if (*eval) return internal::Eval(o, inv, out);
    if (*train) return internal::TrainPm(o, inv, out);
    if (*stress) return internal::Stress(o, out);
    return internal::ProbkitDemo(o, out);
  } catch (const Error& e) {
    err << "pronassess: " << e.what() << '\n';
    if (e.code() == ErrorCode::kIoError) return kExitIo;
    if (e.code() == ErrorCode::kNoPositives) return kExitNoPositives;
    return kExitData;
  }
}

}  // namespace pronassess::cli
