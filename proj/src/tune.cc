// src/tune.cc
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "smt/tune.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include "smt/error.h"
#include "smt/numfmt.h"

namespace smt {

namespace {

constexpr size_t kReorder = 5;

std::vector<Tokens> outputs(const std::vector<DecodeResult>& results) {
  std::vector<Tokens> out;
  out.reserve(results.size());
  for (const auto& r : results) out.push_back(r.output);
  return out;
}

}  // namespace

std::vector<double> candidate_values(size_t feature, double current) {
  double base = current == 0.0 ? 1.0 : current;
  // the reordering weight stays non-negative and is never flipped
  if (feature == kReorder) base = std::abs(base);
  std::vector<double> out;
  for (double m : {0.25, 0.5, 2.0, 4.0}) out.push_back(m * base);
  if (feature != kReorder) out.push_back(-base);
  std::erase(out, current);
  return out;
}

double dev_score(const DevSet& dev, const PhraseTable& table, const NGramModel& lm,
                 const FeatureWeights& weights, const TuneOptions& options) {
  auto hyps = outputs(decode_corpus(dev.sources, table, lm, weights, options.decoder, options.exec));
  if (options.metric == Metric::kBleu) return mean_sentence_bleu(hyps, dev.references, options.exec);
  return metric_corpus(options.metric, hyps, dev.references, options.metric_options, options.exec);
}

TuneReport tune_weights(const DevSet& dev, const PhraseTable& table, const NGramModel& lm,
                        const FeatureWeights& initial, const TuneOptions& options) {
  if (options.passes < 1) throw UsageError("tune: passes must be at least 1");
  if (dev.sources.empty()) throw DataError("tune: empty dev set");
  if (dev.sources.size() != dev.references.size())
    throw DataError("tune: " + std::to_string(dev.sources.size()) + " dev sources but " +
                    std::to_string(dev.references.size()) + " references");
  if (!initial.all_finite()) throw UsageError("tune: initial weights must be finite");

  TuneReport report;
  report.initial = initial;
  FeatureWeights current = initial;
  double score = dev_score(dev, table, lm, current, options);
  report.initial_score = score;
  report.evaluations.push_back({0, "initial", 0, 0.0, score});

  for (int sweep = 1; sweep <= options.passes; ++sweep) {
    for (size_t k = 0; k < kNumFeatures; ++k) {
      const std::string name(FeatureWeights::names()[k]);
      auto candidates = candidate_values(k, current.at(k));
      double best_score = score;
      double best_value = current.at(k);
      for (size_t c = 0; c < candidates.size(); ++c) {
        FeatureWeights trial = current;
        trial.at(k) = candidates[c];
        double s = dev_score(dev, table, lm, trial, options);
        report.evaluations.push_back({sweep, name, static_cast<int>(c + 1), candidates[c], s});
        if (s > best_score) {
          best_score = s;
          best_value = candidates[c];
        }
      }
      current.at(k) = best_value;
      score = best_score;
      report.accepted_scores.push_back(score);
    }
  }
  report.accepted = current;
  report.final_score = score;
  return report;
}

std::string TuneReport::to_text() const {
  std::string out;
  for (const auto& e : evaluations) {
    out += std::to_string(e.sweep) + " " + e.weight + " " + std::to_string(e.candidate) + " " +
           format_exact(e.value) + " " + format_exact(e.score) + "\n";
  }
  out += "accepted";
  for (double v : accepted.as_array()) out += " " + format_exact(v);
  out += "\n";
  return out;
}

void save_weights(const FeatureWeights& w, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << w.serialize();
  if (!out) throw DataError("write failed: " + path.string());
}

FeatureWeights load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return FeatureWeights::parse(ss.str());
}

}  // namespace smt
