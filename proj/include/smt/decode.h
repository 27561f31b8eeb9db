// include/smt/decode.h
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

#ifndef SMT_DECODE_H_
#define SMT_DECODE_H_

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "smt/align.h"
#include "smt/lm.h"
#include "smt/phrase.h"

namespace smt {

inline constexpr size_t kNumFeatures = 7;

// Log-linear weights. With every weight at 1 the score is the plain
// log-product of language model and translation model factors.
struct FeatureWeights {
  double lm = 0.5;
  double phi_ts = 0.2;
  double phi_st = 0.2;
  double lex_ts = 0.2;
  double lex_st = 0.2;
  double reorder = 0.3;
  double word_penalty = -0.5;

  static const std::array<std::string_view, kNumFeatures>& names();
  std::array<double, kNumFeatures> as_array() const;
  static FeatureWeights from_array(const std::array<double, kNumFeatures>& values);
  double& at(size_t k);
  double at(size_t k) const;
  bool all_finite() const;

  // One `name value` line per weight.
  std::string serialize() const;
  static FeatureWeights parse(std::string_view text);

  bool operator==(const FeatureWeights&) const = default;
};

// Feature values in weight order. reorder = -(skipped source words),
// word_penalty = -(emitted target words), the rest are natural logs.
struct FeatureVector {
  double lm = 0.0;
  double phi_ts = 0.0;
  double phi_st = 0.0;
  double lex_ts = 0.0;
  double lex_st = 0.0;
  double reorder = 0.0;
  double word_penalty = 0.0;

  double dot(const FeatureWeights& w) const;
  FeatureVector& operator+=(const FeatureVector& o);
};

struct DecoderConfig {
  size_t stack_size = 100;
  int distortion_limit = 6;  // negative means unlimited
  int max_phrase_len = 7;
  double oov_log_score = -10.0;
};

// d = |S - E - 1| for a phrase starting at 1-based source position S right
// after a phrase that ended at E (0 before the first phrase).
int reordering_cost(int prev_end, int next_start);

struct DerivationStep {
  int src_begin = 0;  // 0-based, inclusive
  int src_end = 0;
  Tokens target;
  bool oov = false;
  FeatureVector delta;  // the last step also carries the end-of-sentence LM term
};

struct Derivation {
  Tokens source;
  std::vector<DerivationStep> steps;

  Tokens output() const;
  int total_reordering() const;
  bool monotone() const { return total_reordering() == 0; }
};

struct DecodeResult {
  Tokens output;
  Derivation derivation;
  FeatureVector features;
  double score = 0.0;
};

class Decoder {
 public:
  Decoder(const PhraseTable& table, const NGramModel& lm, FeatureWeights weights,
          DecoderConfig config = {});

  DecodeResult decode(const Tokens& source) const;

  const FeatureWeights& weights() const { return weights_; }
  const DecoderConfig& config() const { return config_; }

 private:
  const PhraseTable& table_;
  const NGramModel& lm_;
  FeatureWeights weights_;
  DecoderConfig config_;
};

DecodeResult decode(const Tokens& source, const PhraseTable& table, const NGramModel& lm,
                    const FeatureWeights& weights, const DecoderConfig& config = {});

std::vector<DecodeResult> decode_corpus(const std::vector<Tokens>& sources, const PhraseTable& table,
                                        const NGramModel& lm, const FeatureWeights& weights,
                                        const DecoderConfig& config = {},
                                        Execution exec = Execution::kParallel);

struct ScoredDerivation {
  FeatureVector features;
  double score = 0.0;
};

// Rescores a derivation from scratch against the models. Throws UsageError
// when the spans do not partition the source or a phrase is not in the table.
ScoredDerivation score_derivation(const Derivation& derivation, const PhraseTable& table,
                                  const NGramModel& lm, const FeatureWeights& weights,
                                  const DecoderConfig& config = {});

// One line per phrase: `[i1..i2] -> "tgt tokens" | lm=.. phi_ts=.. ...`.
std::string format_trace(const DecodeResult& result);

}  // namespace smt

#endif  // SMT_DECODE_H_
