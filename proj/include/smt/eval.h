// include/smt/eval.h
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

#ifndef SMT_EVAL_H_
#define SMT_EVAL_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "smt/align.h"
#include "smt/preprocess.h"

namespace smt {

struct NGramCounts {
  std::vector<size_t> matched;  // clipped, index n-1
  std::vector<size_t> total;
  size_t hyp_len = 0;
  size_t ref_len = 0;
  NGramCounts& operator+=(const NGramCounts& o);
};

NGramCounts ngram_counts(const Tokens& hyp, const Tokens& ref, int max_n = 4);

struct BleuReport {
  double score = 0.0;
  std::vector<double> precisions;
  double brevity_penalty = 0.0;
  size_t hyp_len = 0;
  size_t ref_len = 0;
};

// 1 when hyp_len > ref_len, else exp(1 - ref_len / hyp_len); 0 for an empty hypothesis.
double brevity_penalty(size_t hyp_len, size_t ref_len);

BleuReport bleu_from_counts(const NGramCounts& counts);
BleuReport bleu_corpus(const std::vector<Tokens>& hyps, const std::vector<Tokens>& refs,
                       int max_n = 4, Execution exec = Execution::kParallel);

// Add-one on zero higher-order precisions; used for tuning.
double sentence_bleu(const Tokens& hyp, const Tokens& ref, int max_n = 4);

// Normalised to [-1, 1]; nullopt with fewer than two ranks. Ranks must be distinct.
std::optional<double> kendall_tau(std::span<const int> ranks);

struct RibesConfig {
  double alpha = 0.25;
  double beta = 0.10;
};

struct RibesReport {
  double tau = 0.0;
  double nkt = 0.0;
  double p1 = 0.0;
  double bp = 0.0;
  double score = 0.0;
  size_t matches = 0;
};

// Reference positions matched by each hypothesis word, in hypothesis order.
std::vector<int> ribes_alignment(const Tokens& hyp, const Tokens& ref);
RibesReport ribes_sentence(const Tokens& hyp, const Tokens& ref, const RibesConfig& config = {});

struct MeteorReport {
  size_t matches = 0;
  size_t chunks = 0;
  double precision = 0.0;
  double recall = 0.0;
  double fmean = 0.0;
  double penalty = 0.0;
  double score = 0.0;
  bool exact = true;  // false when the chunk search hit its node budget
};

struct MeteorConfig {
  size_t node_budget = 2'000'000;
};

MeteorReport meteor_sentence(const Tokens& hyp, const Tokens& ref, const MeteorConfig& config = {});

enum class Metric { kBleu, kRibes, kMeteor };
Metric parse_metric(std::string_view name);
std::string_view metric_name(Metric m);

struct MetricOptions {
  RibesConfig ribes;
  MeteorConfig meteor;
};

// Mean sentence score for RIBES and METEOR; corpus score for BLEU.
double metric_corpus(Metric metric, const std::vector<Tokens>& hyps,
                     const std::vector<Tokens>& refs, const MetricOptions& options = {},
                     Execution exec = Execution::kParallel);

// Mean smoothed sentence-BLEU.
double mean_sentence_bleu(const std::vector<Tokens>& hyps, const std::vector<Tokens>& refs,
                          Execution exec = Execution::kParallel);

struct EvalSummary {
  BleuReport bleu;
  double ribes = 0.0;
  double meteor = 0.0;
  RibesConfig ribes_config;
};

EvalSummary evaluate_corpus(const std::vector<Tokens>& hyps, const std::vector<Tokens>& refs,
                            const MetricOptions& options = {},
                            Execution exec = Execution::kParallel);

// `BLEU  RIBES  METEOR` with BLEU scaled by 100.
std::string format_score_row(const EvalSummary& s);
std::string format_report(const EvalSummary& s, std::string_view pair, std::string_view direction);
std::string format_csv_row(const EvalSummary& s, std::string_view pair, std::string_view direction);
inline constexpr std::string_view kCsvHeader = "pair,direction,BLEU,RIBES,METEOR";

}  // namespace smt

#endif  // SMT_EVAL_H_
