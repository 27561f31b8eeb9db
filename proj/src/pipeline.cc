// src/pipeline.cc
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

#include "smt/pipeline.h"

#include <openssl/evp.h>

#include <chrono>
#include <ctime>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "smt/align.h"
#include "smt/error.h"
#include "smt/numfmt.h"

namespace smt {

using Json = nlohmann::ordered_json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw DataError("write failed: " + path.string());
}

void require_file(const fs::path& path, std::string_view what) {
  if (!fs::is_regular_file(path))
    throw DataError(std::string(what) + " not found: " + path.string());
}

fs::path side_path(const fs::path& prefix, std::string_view lang) {
  return fs::path(prefix.string() + "." + std::string(lang));
}

void note(std::ostream* log, const std::string& msg) {
  if (log) *log << msg << '\n';
}

// Runs one stage; failures are re-raised with the stage name.
template <class F>
auto stage(std::string_view cmd, std::string_view name, std::ostream* log, F&& f) {
  note(log, "[" + std::string(cmd) + "] " + std::string(name));
  try {
    return f();
  } catch (const Error& e) {
    throw_error(e.kind(), std::string(cmd) + ": stage " + std::string(name) + ": " + e.what());
  } catch (const std::bad_alloc&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorKind::kInternal,
                std::string(cmd) + ": stage " + std::string(name) + ": " + e.what());
  }
}

std::string utc_now() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class StageRecord {
 public:
  StageRecord(std::string name, const PipelineConfig& config) : config_(config) {
    json_["stage"] = std::move(name);
    json_["parameters"] = Json::parse(config.to_json());
    json_["inputs"] = Json::array();
    json_["outputs"] = Json::array();
    if (config_.record_timestamps) json_["started"] = utc_now();
  }
  void input(const fs::path& path) { json_["inputs"].push_back(entry(path)); }
  void output(const fs::path& path) { json_["outputs"].push_back(entry(path)); }

  // Replaces any earlier record of the same stage in the manifest.
  void commit(const fs::path& manifest_path) {
    if (config_.record_timestamps) json_["finished"] = utc_now();
    Json doc = {{"stages", Json::array()}};
    if (fs::exists(manifest_path)) {
      try {
        doc = Json::parse(read_file(manifest_path));
      } catch (const Json::exception& e) {
        throw DataError("corrupt manifest " + manifest_path.string() + ": " + e.what());
      }
    }
    Json stages = Json::array();
    bool replaced = false;
    for (auto& s : doc["stages"]) {
      if (s.value("stage", "") == json_["stage"]) {
        stages.push_back(json_);
        replaced = true;
      } else {
        stages.push_back(s);
      }
    }
    if (!replaced) stages.push_back(json_);
    doc["stages"] = std::move(stages);
    write_file(manifest_path, doc.dump(2) + "\n");
  }

 private:
  static Json entry(const fs::path& path) {
    return Json{{"file", path.filename().string()}, {"sha256", sha256_file(path)}};
  }
  const PipelineConfig& config_;
  Json json_;
};

std::vector<Tokens> prepare_all(const std::vector<std::string>& lines, const CleanConfig& clean,
                                const LanguageProfile& profile, const TruecaseModel* truecaser,
                                Execution exec) {
  std::vector<Tokens> out(lines.size());
  const long n = static_cast<long>(lines.size());
  if (exec == Execution::kSerial) {
    for (long i = 0; i < n; ++i) out[i] = prepare_sentence(lines[i], clean, profile, truecaser);
  } else {
#pragma omp parallel for schedule(dynamic, 16)
    for (long i = 0; i < n; ++i) out[i] = prepare_sentence(lines[i], clean, profile, truecaser);
  }
  return out;
}

void check_positive(long long v, const char* name) {
  if (v < 1) throw UsageError(std::string("config: ") + name + " must be at least 1");
}

}  // namespace

// ---------------------------------------------------------------- config

PipelineConfig PipelineConfig::from_json(std::string_view text) {
  PipelineConfig c;
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  if (!doc.is_object()) throw UsageError("config: top level must be an object");
  try {
    for (auto& [key, v] : doc.items()) {
      if (key == "src_lang") c.src_lang = v.get<std::string>();
      else if (key == "tgt_lang") c.tgt_lang = v.get<std::string>();
      else if (key == "corpus") c.corpus = v.get<std::string>();
      else if (key == "dev") c.dev = v.get<std::string>();
      else if (key == "test") c.test = v.get<std::string>();
      else if (key == "model_dir") c.model_dir = v.get<std::string>();
      else if (key == "profiles") c.profiles = v.get<std::string>();
      else if (key == "filter_max_len") c.filter_max_len = v.get<size_t>();
      else if (key == "filter_max_ratio") c.filter_max_ratio = v.get<double>();
      else if (key == "lm_order") c.lm_order = v.get<int>();
      else if (key == "em_iterations") c.em_iterations = v.get<int>();
      else if (key == "symmetrization") c.symmetrization = v.get<std::string>();
      else if (key == "max_phrase_len") c.max_phrase_len = v.get<int>();
      else if (key == "stack_size") c.stack_size = v.get<size_t>();
      else if (key == "distortion_limit") c.distortion_limit = v.get<int>();
      else if (key == "oov_log_score") c.oov_log_score = v.get<double>();
      else if (key == "ribes_alpha") c.ribes_alpha = v.get<double>();
      else if (key == "ribes_beta") c.ribes_beta = v.get<double>();
      else if (key == "tune_metric") c.tune_metric = v.get<std::string>();
      else if (key == "tune_passes") c.tune_passes = v.get<int>();
      else if (key == "record_timestamps") c.record_timestamps = v.get<bool>();
      else if (key == "parallel") c.parallel = v.get<bool>();
      else if (key == "deterministic") {
        if (!v.get<bool>()) throw UsageError("config: deterministic cannot be turned off");
      } else {
        throw UsageError("config: unknown key '" + key + "'");
      }
    }
  } catch (const Json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  return c;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw UsageError("config file not found: " + path.string());
  return from_json(read_file(path));
}

std::string PipelineConfig::to_json() const {
  Json j;
  j["src_lang"] = src_lang;
  j["tgt_lang"] = tgt_lang;
  j["corpus"] = corpus.string();
  j["dev"] = dev.string();
  j["test"] = test.string();
  j["model_dir"] = model_dir.string();
  j["profiles"] = profiles.string();
  j["filter_max_len"] = filter_max_len;
  j["filter_max_ratio"] = filter_max_ratio;
  j["lm_order"] = lm_order;
  j["em_iterations"] = em_iterations;
  j["symmetrization"] = symmetrization;
  j["max_phrase_len"] = max_phrase_len;
  j["stack_size"] = stack_size;
  j["distortion_limit"] = distortion_limit;
  j["oov_log_score"] = oov_log_score;
  j["ribes_alpha"] = ribes_alpha;
  j["ribes_beta"] = ribes_beta;
  j["tune_metric"] = tune_metric;
  j["tune_passes"] = tune_passes;
  j["record_timestamps"] = record_timestamps;
  j["parallel"] = parallel;
  j["deterministic"] = true;
  return j.dump(2) + "\n";
}

void PipelineConfig::validate() const {
  check_positive(static_cast<long long>(filter_max_len), "filter_max_len");
  if (!(filter_max_ratio >= 1.0)) throw UsageError("config: filter_max_ratio must be at least 1");
  check_positive(lm_order, "lm_order");
  check_positive(em_iterations, "em_iterations");
  check_positive(max_phrase_len, "max_phrase_len");
  check_positive(static_cast<long long>(stack_size), "stack_size");
  check_positive(tune_passes, "tune_passes");
  if (!(oov_log_score <= 0.0)) throw UsageError("config: oov_log_score must be <= 0");
  if (!(ribes_alpha >= 0 && ribes_alpha <= 1 && ribes_beta >= 0 && ribes_beta <= 1))
    throw UsageError("config: ribes_alpha and ribes_beta must lie in [0, 1]");
  parse_symmetrization(symmetrization);
  parse_metric(tune_metric);
  if (src_lang == tgt_lang) throw UsageError("config: src_lang and tgt_lang must differ");
}

DecoderConfig PipelineConfig::decoder_config() const {
  DecoderConfig d;
  d.stack_size = stack_size;
  d.distortion_limit = distortion_limit;
  d.max_phrase_len = max_phrase_len;
  d.oov_log_score = oov_log_score;
  return d;
}

MetricOptions PipelineConfig::metric_options() const {
  MetricOptions m;
  m.ribes.alpha = ribes_alpha;
  m.ribes.beta = ribes_beta;
  return m;
}

ProfileRegistry make_registry(const PipelineConfig& config) {
  ProfileRegistry reg;
  if (!config.profiles.empty()) reg.load_file(config.profiles);
  return reg;
}

// ---------------------------------------------------------------- digests

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorKind::kInternal, "sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_file(path)); }

// ---------------------------------------------------------------- sentences

Tokens prepare_sentence(std::string_view line, const CleanConfig& clean, const LanguageProfile& profile,
                        const TruecaseModel* truecaser) {
  Tokens toks = tokenize(clean_line(line, clean), profile);
  if (truecaser) toks = truecase(toks, *truecaser);
  return toks;
}

std::string finish_sentence(const Tokens& tokens, const LanguageProfile& profile) {
  return detokenize(strip_redundant_punct(tokens), profile);
}

TrainedModel load_model(const fs::path& dir, bool prefer_tuned) {
  if (!fs::is_directory(dir)) throw DataError("model directory not found: " + dir.string());
  TrainedModel m;
  require_file(dir / kConfigFile, "model file");
  m.config = PipelineConfig::load(dir / kConfigFile);
  auto registry = make_registry(m.config);
  m.src_profile = registry.at(m.config.src_lang);
  m.tgt_profile = registry.at(m.config.tgt_lang);
  const fs::path src_tc = dir / ("truecase." + m.config.src_lang);
  const fs::path tgt_tc = dir / ("truecase." + m.config.tgt_lang);
  for (const fs::path& p : {src_tc, tgt_tc, dir / kLmFile, dir / kPhraseFile, dir / kWeightsFile})
    require_file(p, "model file");
  m.src_truecase = TruecaseModel::load(src_tc);
  m.tgt_truecase = TruecaseModel::load(tgt_tc);
  m.lm = NGramModel::load(dir / kLmFile);
  m.phrases = PhraseTable::load(dir / kPhraseFile);
  fs::path weights = dir / kWeightsFile;
  if (prefer_tuned && fs::is_regular_file(dir / kTunedWeightsFile)) weights = dir / kTunedWeightsFile;
  m.weights = load_weights(weights);
  return m;
}

// ---------------------------------------------------------------- commands

void cmd_clean(const PipelineConfig& config, const fs::path& input, const fs::path& output,
               std::string_view lang) {
  auto registry = make_registry(config);
  const auto& profile = registry.at(lang.empty() ? config.src_lang : lang);
  require_file(input, "input file");
  auto lines = read_lines(input);
  write_lines(output, clean_lines(lines, default_clean_config(profile)));
}

std::string format_ogive(const std::vector<std::pair<std::string, std::map<size_t, size_t>>>& sides,
                         const std::vector<size_t>& thresholds) {
  std::vector<size_t> rows = thresholds;
  size_t longest = 0;
  for (const auto& [_, hist] : sides)
    if (!hist.empty()) longest = std::max(longest, hist.rbegin()->first);
  if (rows.empty() || rows.back() <= longest) rows.push_back(longest + 1);
  std::string out = "tokens<";
  for (const auto& [name, _] : sides) out += " " + name;
  out += "\n";
  for (size_t t : rows) {
    out += std::to_string(t);
    for (const auto& [_, hist] : sides) out += " " + format_sig(length_ogive(hist, t), 4);
    out += "\n";
  }
  return out;
}

std::string cmd_stats(const PipelineConfig& config, const fs::path& corpus_prefix) {
  auto registry = make_registry(config);
  const auto& sp = registry.at(config.src_lang);
  const auto& tp = registry.at(config.tgt_lang);
  fs::path prefix = corpus_prefix.empty() ? config.corpus : corpus_prefix;
  if (prefix.empty()) throw UsageError("stats: no corpus given");
  require_file(side_path(prefix, config.src_lang), "corpus file");
  require_file(side_path(prefix, config.tgt_lang), "corpus file");
  auto corpus = load_parallel_prefix(prefix, sp, tp);
  if (corpus.empty()) throw DataError("stats: empty corpus");
  auto stats = compute_stats(corpus);
  std::string out = "pairs " + std::to_string(stats.pair_count) + "\n";
  out += format_ogive({{config.src_lang, stats.source_lengths}, {config.tgt_lang, stats.target_lengths}});
  return out;
}

void cmd_train(const PipelineConfig& config, std::ostream* log) {
  config.validate();
  const Execution exec = config.execution();
  auto registry = make_registry(config);
  const auto& sp = registry.at(config.src_lang);
  const auto& tp = registry.at(config.tgt_lang);
  if (config.corpus.empty()) throw UsageError("train: no corpus given");
  const fs::path src_file = side_path(config.corpus, config.src_lang);
  const fs::path tgt_file = side_path(config.corpus, config.tgt_lang);
  require_file(src_file, "corpus file");
  require_file(tgt_file, "corpus file");
  const fs::path dir = config.model_dir;

  StageRecord record("train", config);
  record.input(src_file);
  record.input(tgt_file);

  auto raw = stage("train", "load", log, [&] { return load_parallel(src_file, tgt_file, sp, tp); });

  auto cleaned = stage("train", "clean", log, [&] {
    std::vector<std::string> s, t;
    for (const auto& p : raw.pairs) {
      s.push_back(p.source);
      t.push_back(p.target);
    }
    s = clean_lines(s, default_clean_config(sp));
    t = clean_lines(t, default_clean_config(tp));
    ParallelCorpus c = raw;
    for (size_t i = 0; i < c.pairs.size(); ++i) {
      c.pairs[i].source = std::move(s[i]);
      c.pairs[i].target = std::move(t[i]);
    }
    return c;
  });

  auto filtered = stage("train", "filter", log, [&] {
    auto f = filter_pairs(cleaned, {config.filter_max_len, config.filter_max_ratio});
    if (f.empty()) throw DataError("no sentence pairs left after filtering");
    note(log, "  kept " + std::to_string(f.size()) + " of " + std::to_string(raw.size()) + " pairs");
    return f;
  });

  struct Sides {
    std::vector<Tokens> src, tgt;
  };
  auto tokens = stage("train", "tokenize", log, [&] {
    Sides s;
    for (const auto& p : filtered.pairs) {
      s.src.push_back(tokenize(p.source, sp));
      s.tgt.push_back(tokenize(p.target, tp));
    }
    return s;
  });

  TruecaseModel src_tc, tgt_tc;
  TokenizedCorpus corpus = stage("train", "truecase", log, [&] {
    src_tc = train_truecaser(tokens.src);
    tgt_tc = train_truecaser(tokens.tgt);
    TokenizedCorpus c;
    for (size_t i = 0; i < tokens.src.size(); ++i)
      c.push_back({truecase(tokens.src[i], src_tc), truecase(tokens.tgt[i], tgt_tc)});
    return c;
  });

  NGramModel lm = stage("train", "lm", log, [&] {
    std::vector<Tokens> tgt;
    for (const auto& p : corpus) tgt.push_back(p.target);
    return train_lm(tgt, config.lm_order);
  });

  const TokenizedCorpus reversed = swap_sides(corpus);
  auto ibm1 = stage("train", "ibm1", log, [&] {
    return std::pair{train_ibm1(corpus, config.em_iterations, exec),
                     train_ibm1(reversed, config.em_iterations, exec)};
  });
  auto ibm2 = stage("train", "ibm2", log, [&] {
    return std::pair{train_ibm2(corpus, config.em_iterations, ibm1.first.table, exec),
                     train_ibm2(reversed, config.em_iterations, ibm1.second.table, exec)};
  });

  auto alignments = stage("train", "align", log, [&] {
    AlignmentModel fwd{ibm2.first.table, ibm2.first.distortion};
    AlignmentModel rev{ibm2.second.table, ibm2.second.distortion};
    auto a = viterbi_align_corpus(fwd, corpus, exec);
    auto b = viterbi_align_corpus(rev, reversed, exec);
    auto heuristic = parse_symmetrization(config.symmetrization);
    std::vector<AlignmentMatrix> sym;
    sym.reserve(a.size());
    for (size_t i = 0; i < a.size(); ++i) sym.push_back(symmetrize(a[i], b[i].transposed(), heuristic));
    return sym;
  });

  PhraseTable phrases = stage("train", "phrases", log, [&] {
    ExtractOptions opts;
    opts.max_len = config.max_phrase_len;
    return build_phrase_table(corpus, alignments, ibm2.first.table, ibm2.second.table, opts, exec);
  });
  note(log, "  " + std::to_string(phrases.size()) + " phrase pairs");

  stage("train", "write", log, [&] {
    fs::create_directories(dir);
    const fs::path src_tc_path = dir / ("truecase." + config.src_lang);
    const fs::path tgt_tc_path = dir / ("truecase." + config.tgt_lang);
    const fs::path aligned_path = dir / ("aligned." + config.symmetrization);
    src_tc.save(src_tc_path);
    tgt_tc.save(tgt_tc_path);
    lm.save(dir / kLmFile);
    ibm2.first.table.save(dir / kLexS2T);
    ibm2.second.table.save(dir / kLexT2S);
    std::vector<std::string> lines;
    for (const auto& a : alignments) lines.push_back(to_pharaoh(a));
    write_lines(aligned_path, lines);
    phrases.save(dir / kPhraseFile);
    save_weights(FeatureWeights{}, dir / kWeightsFile);
    write_file(dir / kConfigFile, config.to_json());
    // a fresh model invalidates earlier tuning
    fs::remove(dir / kTunedWeightsFile);
    fs::remove(dir / kTuneReportFile);
    fs::remove(dir / kManifestFile);
    for (const fs::path& p : {src_tc_path, tgt_tc_path, dir / kLmFile, dir / kLexS2T, dir / kLexT2S,
                              aligned_path, dir / kPhraseFile, dir / kWeightsFile, dir / kConfigFile})
      record.output(p);
    record.commit(dir / kManifestFile);
    return 0;
  });
}

std::string cmd_tune(const PipelineConfig& config, std::ostream* log) {
  config.validate();
  TrainedModel model = stage("tune", "load model", log, [&] { return load_model(config.model_dir, false); });
  if (config.dev.empty()) throw UsageError("tune: no dev set given");
  const fs::path src_file = side_path(config.dev, model.config.src_lang);
  const fs::path tgt_file = side_path(config.dev, model.config.tgt_lang);
  require_file(src_file, "dev file");
  require_file(tgt_file, "dev file");

  StageRecord record("tune", config);
  record.input(src_file);
  record.input(tgt_file);
  record.input(config.model_dir / kWeightsFile);

  DevSet dev = stage("tune", "prepare dev", log, [&] {
    auto corpus = load_parallel(src_file, tgt_file, model.src_profile, model.tgt_profile);
    if (corpus.empty()) throw DataError("empty dev set");
    std::vector<std::string> s, t;
    for (const auto& p : corpus.pairs) {
      s.push_back(p.source);
      t.push_back(p.target);
    }
    DevSet d;
    d.sources = prepare_all(s, default_clean_config(model.src_profile), model.src_profile,
                            &model.src_truecase, config.execution());
    d.references = prepare_all(t, default_clean_config(model.tgt_profile), model.tgt_profile,
                               &model.tgt_truecase, config.execution());
    return d;
  });

  TuneReport report = stage("tune", "search", log, [&] {
    TuneOptions opts;
    opts.metric = parse_metric(config.tune_metric);
    opts.passes = config.tune_passes;
    opts.metric_options = config.metric_options();
    opts.decoder = config.decoder_config();
    opts.exec = config.execution();
    return tune_weights(dev, model.phrases, model.lm, model.weights, opts);
  });
  note(log, "  dev " + std::string(config.tune_metric) + " " + format_sig(report.initial_score, 6) +
                " -> " + format_sig(report.final_score, 6));

  std::string text = report.to_text();
  stage("tune", "write", log, [&] {
    save_weights(report.accepted, config.model_dir / kTunedWeightsFile);
    write_file(config.model_dir / kTuneReportFile, text);
    record.output(config.model_dir / kTunedWeightsFile);
    record.output(config.model_dir / kTuneReportFile);
    record.commit(config.model_dir / kManifestFile);
    return 0;
  });
  return text;
}

void cmd_translate(const PipelineConfig& config, const fs::path& input, const fs::path& output,
                   const TranslateOptions& options, std::ostream* log) {
  config.validate();
  TrainedModel model = stage("translate", "load model", log, [&] { return load_model(config.model_dir); });
  require_file(input, "input file");
  auto lines = stage("translate", "read", log, [&] { return read_lines(input); });
  auto sources = stage("translate", "prepare", log, [&] {
    return prepare_all(lines, default_clean_config(model.src_profile), model.src_profile,
                       &model.src_truecase, config.execution());
  });
  auto results = stage("translate", "decode", log, [&] {
    return decode_corpus(sources, model.phrases, model.lm, model.weights, config.decoder_config(),
                         config.execution());
  });
  stage("translate", "write", log, [&] {
    std::vector<std::string> out;
    out.reserve(results.size());
    for (const auto& r : results) out.push_back(finish_sentence(r.output, model.tgt_profile));
    write_lines(output, out);
    if (options.trace) {
      std::string trace;
      for (size_t i = 0; i < results.size(); ++i) {
        trace += "# " + std::to_string(i + 1) + " score=" + format_sig(results[i].score, 10) + "\n";
        trace += format_trace(results[i]);
      }
      if (options.trace_path.empty())
        note(log, trace);
      else
        write_file(options.trace_path, trace);
    }
    StageRecord record("translate", config);
    record.input(input);
    record.output(output);
    record.commit(config.model_dir / kManifestFile);
    return 0;
  });
}

std::string cmd_evaluate(const PipelineConfig& config, const fs::path& hyp_path,
                         const fs::path& ref_path, const EvaluateOptions& options) {
  config.validate();
  auto registry = make_registry(config);
  const auto& tp = registry.at(config.tgt_lang);
  require_file(hyp_path, "hypothesis file");
  require_file(ref_path, "reference file");
  auto hyp_lines = read_lines(hyp_path);
  auto ref_lines = read_lines(ref_path);
  if (hyp_lines.size() != ref_lines.size())
    throw DataError("evaluate: line count mismatch " + std::to_string(hyp_lines.size()) + " vs " +
                    std::to_string(ref_lines.size()) + " (" + hyp_path.string() + ", " +
                    ref_path.string() + ")");
  if (hyp_lines.empty()) throw DataError("evaluate: empty input");
  auto clean = default_clean_config(tp);
  auto hyps = prepare_all(hyp_lines, clean, tp, nullptr, config.execution());
  auto refs = prepare_all(ref_lines, clean, tp, nullptr, config.execution());
  auto opts = config.metric_options();
  auto summary = evaluate_corpus(hyps, refs, opts, config.execution());

  const std::string pair = config.src_lang + "-" + config.tgt_lang;
  const std::string direction = config.src_lang + "->" + config.tgt_lang;
  std::string out = format_report(summary, pair, direction);
  out += std::string(kCsvHeader) + "\n" + format_csv_row(summary, pair, direction) + "\n";
  if (options.per_sentence) {
    out += "sentence BLEU RIBES METEOR\n";
    for (size_t i = 0; i < hyps.size(); ++i) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "%zu %.2f %.4f %.4f\n", i + 1,
                    sentence_bleu(hyps[i], refs[i]) * 100.0,
                    ribes_sentence(hyps[i], refs[i], opts.ribes).score,
                    meteor_sentence(hyps[i], refs[i], opts.meteor).score);
      out += buf;
    }
  }
  if (options.stats) {
    std::map<size_t, size_t> h, r;
    for (const auto& t : hyps) ++h[t.size()];
    for (const auto& t : refs) ++r[t.size()];
    out += format_ogive({{"hyp", h}, {"ref", r}});
  }
  return out;
}

}  // namespace smt
