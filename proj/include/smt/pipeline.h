// include/smt/pipeline.h
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

#ifndef SMT_PIPELINE_H_
#define SMT_PIPELINE_H_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "smt/corpus.h"
#include "smt/decode.h"
#include "smt/eval.h"
#include "smt/lm.h"
#include "smt/phrase.h"
#include "smt/preprocess.h"
#include "smt/tune.h"

namespace smt {

namespace fs = std::filesystem;

struct PipelineConfig {
  std::string src_lang = "en";
  std::string tgt_lang = "hi";
  // Corpus prefixes; files are <prefix>.<src_lang> and <prefix>.<tgt_lang>.
  fs::path corpus;
  fs::path dev;
  fs::path test;
  fs::path model_dir = "model";
  fs::path profiles;  // optional profile file

  size_t filter_max_len = 80;
  double filter_max_ratio = 9.0;
  int lm_order = 3;
  int em_iterations = 5;  // per IBM model
  std::string symmetrization = "grow-diag-final-and";
  int max_phrase_len = 7;
  size_t stack_size = 100;
  int distortion_limit = 6;
  double oov_log_score = -10.0;
  double ribes_alpha = 0.25;
  double ribes_beta = 0.10;
  std::string tune_metric = "bleu";
  int tune_passes = 3;
  bool record_timestamps = true;
  bool parallel = true;

  // Unknown keys are rejected. Missing keys keep their defaults.
  static PipelineConfig from_json(std::string_view text);
  static PipelineConfig load(const fs::path& path);
  std::string to_json() const;  // every key, two-space indent

  void validate() const;  // UsageError on out-of-range parameters
  DecoderConfig decoder_config() const;
  MetricOptions metric_options() const;
  Execution execution() const { return parallel ? Execution::kParallel : Execution::kSerial; }
};

ProfileRegistry make_registry(const PipelineConfig& config);

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const fs::path& path);

// Artifacts a translation needs, read from a model directory.
struct TrainedModel {
  PipelineConfig config;
  LanguageProfile src_profile;
  LanguageProfile tgt_profile;
  TruecaseModel src_truecase;
  TruecaseModel tgt_truecase;
  NGramModel lm;
  PhraseTable phrases;
  FeatureWeights weights;
};

// Throws DataError naming the first missing file.
TrainedModel load_model(const fs::path& model_dir, bool prefer_tuned = true);

// clean -> tokenize -> truecase
Tokens prepare_sentence(std::string_view line, const CleanConfig& clean, const LanguageProfile& profile,
                        const TruecaseModel* truecaser);
// strip redundant punctuation -> detokenize
std::string finish_sentence(const Tokens& tokens, const LanguageProfile& profile);

// Model directory file names.
inline constexpr std::string_view kLmFile = "lm.arpa";
inline constexpr std::string_view kLexS2T = "lex.s2t";
inline constexpr std::string_view kLexT2S = "lex.t2s";
inline constexpr std::string_view kPhraseFile = "phrase-table";
inline constexpr std::string_view kWeightsFile = "weights";
inline constexpr std::string_view kTunedWeightsFile = "weights.tuned";
inline constexpr std::string_view kTuneReportFile = "tune-report.txt";
inline constexpr std::string_view kConfigFile = "config.json";
inline constexpr std::string_view kManifestFile = "manifest.json";

// Cleans one file. lang selects the profile; defaults to src_lang.
void cmd_clean(const PipelineConfig& config, const fs::path& input, const fs::path& output,
               std::string_view lang = {});

// Corpus size and length ogive at 4/8/16/32/64 tokens for both sides.
std::string cmd_stats(const PipelineConfig& config, const fs::path& corpus_prefix = {});
std::string format_ogive(const std::vector<std::pair<std::string, std::map<size_t, size_t>>>& sides,
                         const std::vector<size_t>& thresholds = {4, 8, 16, 32, 64});

void cmd_train(const PipelineConfig& config, std::ostream* log = nullptr);

// Returns the tune report text; writes weights.tuned and tune-report.txt.
std::string cmd_tune(const PipelineConfig& config, std::ostream* log = nullptr);

struct TranslateOptions {
  bool trace = false;
  fs::path trace_path;  // derivation traces, one block per line
};

void cmd_translate(const PipelineConfig& config, const fs::path& input, const fs::path& output,
                   const TranslateOptions& options = {}, std::ostream* log = nullptr);

struct EvaluateOptions {
  bool per_sentence = false;
  bool stats = false;
};

std::string cmd_evaluate(const PipelineConfig& config, const fs::path& hyp_path,
                         const fs::path& ref_path, const EvaluateOptions& options = {});

}  // namespace smt

#endif  // SMT_PIPELINE_H_
