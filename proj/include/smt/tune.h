// include/smt/tune.h
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

#ifndef SMT_TUNE_H_
#define SMT_TUNE_H_

#include <filesystem>
#include <string>
#include <vector>

#include "smt/decode.h"
#include "smt/eval.h"

namespace smt {

struct DevSet {
  std::vector<Tokens> sources;
  std::vector<Tokens> references;
};

struct TuneOptions {
  Metric metric = Metric::kBleu;  // bleu is scored as mean smoothed sentence-BLEU
  int passes = 3;
  MetricOptions metric_options;
  DecoderConfig decoder;
  Execution exec = Execution::kParallel;
};

// One dev-set evaluation. Sweep 0 is the initial weights.
struct TuneEvaluation {
  int sweep = 0;
  std::string weight;
  int candidate = 0;
  double value = 0.0;
  double score = 0.0;
};

struct TuneReport {
  std::vector<TuneEvaluation> evaluations;
  std::vector<double> accepted_scores;  // current score after each coordinate step
  double initial_score = 0.0;
  double final_score = 0.0;
  FeatureWeights initial;
  FeatureWeights accepted;

  // `sweep weight candidate value score` lines, then `accepted w1 .. w7`.
  std::string to_text() const;
};

// Candidate values for one coordinate, in evaluation order.
std::vector<double> candidate_values(size_t feature, double current);

// Dev score of the given weights under the tuning metric.
double dev_score(const DevSet& dev, const PhraseTable& table, const NGramModel& lm,
                 const FeatureWeights& weights, const TuneOptions& options);

TuneReport tune_weights(const DevSet& dev, const PhraseTable& table, const NGramModel& lm,
                        const FeatureWeights& initial, const TuneOptions& options = {});

void save_weights(const FeatureWeights& w, const std::filesystem::path& path);
FeatureWeights load_weights(const std::filesystem::path& path);

}  // namespace smt

#endif  // SMT_TUNE_H_
