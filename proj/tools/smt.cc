// tools/smt.cc
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

// Command-line front end for the translation pipeline.

#include <omp.h>

#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "smt/error.h"
#include "smt/pipeline.h"

namespace {

struct Overrides {
  std::optional<std::string> src_lang, tgt_lang, corpus, dev, test, model_dir, profiles;
  std::optional<size_t> filter_max_len, stack_size;
  std::optional<double> filter_max_ratio, oov_log_score, ribes_alpha, ribes_beta;
  std::optional<int> lm_order, em_iterations, max_phrase_len, distortion_limit, tune_passes;
  std::optional<std::string> symmetrization, tune_metric;
  std::optional<bool> record_timestamps;
  bool serial = false;

  void add_to(CLI::App& app) {
    app.add_option("--src-lang", src_lang, "source language tag");
    app.add_option("--tgt-lang", tgt_lang, "target language tag");
    app.add_option("--corpus", corpus, "training corpus prefix");
    app.add_option("--dev", dev, "dev set prefix");
    app.add_option("--test", test, "test set prefix");
    app.add_option("--model-dir", model_dir, "model directory");
    app.add_option("--profiles", profiles, "language profile file (JSON)");
    app.add_option("--filter-max-len", filter_max_len);
    app.add_option("--filter-max-ratio", filter_max_ratio);
    app.add_option("--lm-order", lm_order);
    app.add_option("--em-iterations", em_iterations);
    app.add_option("--symmetrization", symmetrization);
    app.add_option("--max-phrase-len", max_phrase_len);
    app.add_option("--stack-size", stack_size);
    app.add_option("--distortion-limit", distortion_limit, "negative for unlimited");
    app.add_option("--oov-log-score", oov_log_score);
    app.add_option("--ribes-alpha", ribes_alpha);
    app.add_option("--ribes-beta", ribes_beta);
    app.add_option("--tune-metric", tune_metric, "bleu, ribes or meteor");
    app.add_option("--tune-passes", tune_passes);
    app.add_option("--record-timestamps", record_timestamps, "true or false");
    app.add_flag("--serial", serial, "use the serial kernels");
  }

  void apply(smt::PipelineConfig& c) const {
    if (src_lang) c.src_lang = *src_lang;
    if (tgt_lang) c.tgt_lang = *tgt_lang;
    if (corpus) c.corpus = *corpus;
    if (dev) c.dev = *dev;
    if (test) c.test = *test;
    if (model_dir) c.model_dir = *model_dir;
    if (profiles) c.profiles = *profiles;
    if (filter_max_len) c.filter_max_len = *filter_max_len;
    if (filter_max_ratio) c.filter_max_ratio = *filter_max_ratio;
    if (lm_order) c.lm_order = *lm_order;
    if (em_iterations) c.em_iterations = *em_iterations;
    if (symmetrization) c.symmetrization = *symmetrization;
    if (max_phrase_len) c.max_phrase_len = *max_phrase_len;
    if (stack_size) c.stack_size = *stack_size;
    if (distortion_limit) c.distortion_limit = *distortion_limit;
    if (oov_log_score) c.oov_log_score = *oov_log_score;
    if (ribes_alpha) c.ribes_alpha = *ribes_alpha;
    if (ribes_beta) c.ribes_beta = *ribes_beta;
    if (tune_metric) c.tune_metric = *tune_metric;
    if (tune_passes) c.tune_passes = *tune_passes;
    if (record_timestamps) c.record_timestamps = *record_timestamps;
    if (serial) c.parallel = false;
  }
};

void write_or_print(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw smt::DataError("cannot write " + path);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phrase-based statistical machine translation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  int threads = 0;
  bool quiet = false;
  Overrides over;
  app.add_option("-c,--config", config_path, "JSON config file");
  app.add_option("--threads", threads, "OpenMP threads (0 = runtime default)");
  app.add_flag("-q,--quiet", quiet, "no progress messages");
  over.add_to(app);

  std::string in_path, out_path, lang, trace_path, hyp_path, ref_path;
  bool trace = false, per_sentence = false, stats = false;

  auto* clean = app.add_subcommand("clean", "normalize a text file");
  clean->add_option("-i,--input", in_path, "input file")->required();
  clean->add_option("-o,--output", out_path, "output file")->required();
  clean->add_option("--lang", lang, "language tag (default: source language)");

  auto* stats_cmd = app.add_subcommand("stats", "corpus size and length ogive");
  stats_cmd->add_option("prefix", in_path, "corpus prefix (default: config corpus)");

  app.add_subcommand("train", "train a model directory from the corpus");
  app.add_subcommand("tune", "tune feature weights on the dev set");

  auto* translate = app.add_subcommand("translate", "translate a file");
  translate->add_option("-i,--input", in_path, "input file")->required();
  translate->add_option("-o,--output", out_path, "output file")->required();
  translate->add_flag("--trace", trace, "print derivations");
  translate->add_option("--trace-file", trace_path, "write derivations to a file");

  auto* evaluate = app.add_subcommand("evaluate", "score hypotheses against references");
  evaluate->add_option("--hyp", hyp_path, "hypothesis file")->required();
  evaluate->add_option("--ref", ref_path, "reference file")->required();
  evaluate->add_flag("--per-sentence", per_sentence, "add per-sentence scores");
  evaluate->add_flag("--stats", stats, "add the length ogive");
  evaluate->add_option("-o,--output", out_path, "write the report to a file");

  app.add_subcommand("show-config", "print the effective configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(smt::ErrorKind::kUsage);
  }

  try {
    if (threads > 0) omp_set_num_threads(threads);
    smt::PipelineConfig config;
    if (!config_path.empty()) config = smt::PipelineConfig::load(config_path);
    over.apply(config);
    std::ostream* log = quiet ? nullptr : &std::cerr;
    const std::string cmd = app.get_subcommands().front()->get_name();

    if (cmd == "show-config") {
      config.validate();
      std::cout << config.to_json();
    } else if (cmd == "clean") {
      smt::cmd_clean(config, in_path, out_path, lang);
    } else if (cmd == "stats") {
      std::cout << smt::cmd_stats(config, in_path);
    } else if (cmd == "train") {
      smt::cmd_train(config, log);
    } else if (cmd == "tune") {
      smt::cmd_tune(config, log);
    } else if (cmd == "translate") {
      smt::TranslateOptions opts;
      opts.trace = trace || !trace_path.empty();
      opts.trace_path = trace_path;
      smt::cmd_translate(config, in_path, out_path, opts, trace ? &std::cerr : log);
    } else if (cmd == "evaluate") {
      smt::EvaluateOptions opts;
      opts.per_sentence = per_sentence;
      opts.stats = stats;
      write_or_print(smt::cmd_evaluate(config, hyp_path, ref_path, opts), out_path);
    }
  } catch (const smt::Error& e) {
    std::cerr << "smt: " << e.what() << '\n';
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "smt: internal error: " << e.what() << '\n';
    return static_cast<int>(smt::ErrorKind::kInternal);
  }
  return 0;
}
