// src/decode.cc
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

#include "smt/decode.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <sstream>
#include <unordered_map>

#include "smt/error.h"
#include "smt/numfmt.h"

namespace smt {

const std::array<std::string_view, kNumFeatures>& FeatureWeights::names() {
  static const std::array<std::string_view, kNumFeatures> n = {
      "lm", "phi_ts", "phi_st", "lex_ts", "lex_st", "reorder", "word_penalty"};
  return n;
}

std::array<double, kNumFeatures> FeatureWeights::as_array() const {
  return {lm, phi_ts, phi_st, lex_ts, lex_st, reorder, word_penalty};
}

FeatureWeights FeatureWeights::from_array(const std::array<double, kNumFeatures>& v) {
  return FeatureWeights{v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
}

double& FeatureWeights::at(size_t k) {
  switch (k) {
    case 0: return lm;
    case 1: return phi_ts;
    case 2: return phi_st;
    case 3: return lex_ts;
    case 4: return lex_st;
    case 5: return reorder;
    case 6: return word_penalty;
  }
  throw UsageError("feature index out of range: " + std::to_string(k));
}

double FeatureWeights::at(size_t k) const { return const_cast<FeatureWeights*>(this)->at(k); }

bool FeatureWeights::all_finite() const {
  for (double v : as_array())
    if (!std::isfinite(v)) return false;
  return true;
}

std::string FeatureWeights::serialize() const {
  std::string out;
  auto v = as_array();
  for (size_t k = 0; k < kNumFeatures; ++k) {
    out += names()[k];
    out += ' ';
    out += format_exact(v[k]);
    out += '\n';
  }
  return out;
}

FeatureWeights FeatureWeights::parse(std::string_view text) {
  FeatureWeights w;
  std::array<bool, kNumFeatures> seen{};
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string name, value, extra;
    if (!(fields >> name >> value) || (fields >> extra))
      throw DataError("weights line " + std::to_string(line_no) + ": expected `name value`");
    auto it = std::find(names().begin(), names().end(), name);
    if (it == names().end())
      throw DataError("weights line " + std::to_string(line_no) + ": unknown weight '" + name + "'");
    size_t k = static_cast<size_t>(it - names().begin());
    w.at(k) = parse_double(value, "weights line " + std::to_string(line_no));
    seen[k] = true;
  }
  for (size_t k = 0; k < kNumFeatures; ++k)
    if (!seen[k]) throw DataError("weights: missing '" + std::string(names()[k]) + "'");
  return w;
}

double FeatureVector::dot(const FeatureWeights& w) const {
  return w.lm * lm + w.phi_ts * phi_ts + w.phi_st * phi_st + w.lex_ts * lex_ts +
         w.lex_st * lex_st + w.reorder * reorder + w.word_penalty * word_penalty;
}

FeatureVector& FeatureVector::operator+=(const FeatureVector& o) {
  lm += o.lm;
  phi_ts += o.phi_ts;
  phi_st += o.phi_st;
  lex_ts += o.lex_ts;
  lex_st += o.lex_st;
  reorder += o.reorder;
  word_penalty += o.word_penalty;
  return *this;
}

int reordering_cost(int prev_end, int next_start) { return std::abs(next_start - prev_end - 1); }

Tokens Derivation::output() const {
  Tokens out;
  for (const auto& s : steps) out.insert(out.end(), s.target.begin(), s.target.end());
  return out;
}

int Derivation::total_reordering() const {
  int total = 0, prev_end = 0;
  for (const auto& s : steps) {
    total += reordering_cost(prev_end, s.src_begin + 1);
    prev_end = s.src_end + 1;
  }
  return total;
}

namespace {

struct Option {
  int begin = 0;  // 0-based inclusive
  int end = 0;
  const Tokens* target = nullptr;
  std::vector<NGramModel::WordId> ids;
  FeatureVector tm;  // phrase features plus word penalty
  bool oov = false;
};

FeatureVector phrase_features(const PhraseScores& s, size_t tgt_len) {
  FeatureVector f;
  f.phi_ts = std::log(s.phi_t_given_s);
  f.phi_st = std::log(s.phi_s_given_t);
  f.lex_ts = std::log(s.lex_t_given_s);
  f.lex_st = std::log(s.lex_s_given_t);
  f.word_penalty = -static_cast<double>(tgt_len);
  return f;
}

FeatureVector oov_features(double oov_log_score) {
  FeatureVector f;
  f.phi_ts = f.phi_st = f.lex_ts = f.lex_st = oov_log_score;
  f.word_penalty = -1.0;
  return f;
}

bool has_single_entry(const PhraseTable& table, const std::string& tok) {
  const auto* e = table.find(std::span<const std::string>(&tok, 1));
  return e && !e->empty();
}

// Translation options per start position.
std::vector<std::vector<Option>> collect_options(const Tokens& source, const PhraseTable& table,
                                                 const NGramModel& lm, const DecoderConfig& cfg,
                                                 std::vector<Tokens>& oov_storage) {
  const int n = static_cast<int>(source.size());
  std::vector<std::vector<Option>> by_start(n);
  oov_storage.assign(n, {});
  int max_len = std::min(cfg.max_phrase_len, table.max_source_len());
  for (int b = 0; b < n; ++b) {
    for (int e = b; e < n && e - b < max_len; ++e) {
      std::span<const std::string> src(source.data() + b, static_cast<size_t>(e - b + 1));
      const auto* entries = table.find(src);
      if (!entries) continue;
      for (const auto& entry : *entries) {
        Option o;
        o.begin = b;
        o.end = e;
        o.target = &entry.tgt;
        for (const auto& w : entry.tgt) o.ids.push_back(lm.id(w));
        o.tm = phrase_features(entry.scores, entry.tgt.size());
        by_start[b].push_back(std::move(o));
      }
    }
    if (!has_single_entry(table, source[b])) {
      oov_storage[b] = Tokens{source[b]};
      Option o;
      o.begin = o.end = b;
      o.target = &oov_storage[b];
      o.ids.push_back(lm.id(source[b]));
      o.tm = oov_features(cfg.oov_log_score);
      o.oov = true;
      by_start[b].push_back(std::move(o));
    }
  }
  return by_start;
}

class Coverage {
 public:
  explicit Coverage(int n = 0) : n_(n), bits_((n + 63) / 64, 0) {}
  bool test(int i) const { return (bits_[i >> 6] >> (i & 63)) & 1u; }
  void set(int i) { bits_[i >> 6] |= uint64_t{1} << (i & 63); }
  bool any_in(int b, int e) const {
    for (int i = b; i <= e; ++i)
      if (test(i)) return true;
    return false;
  }
  int first_gap() const {
    for (size_t w = 0; w < bits_.size(); ++w) {
      uint64_t inv = ~bits_[w];
      if (inv) {
        int i = static_cast<int>(w * 64) + __builtin_ctzll(inv);
        return i < n_ ? i : -1;
      }
    }
    return -1;
  }
  void append_key(std::string& key) const {
    key.append(reinterpret_cast<const char*>(bits_.data()), bits_.size() * sizeof(uint64_t));
  }

 private:
  int n_;
  std::vector<uint64_t> bits_;
};

struct Hyp {
  Coverage coverage;
  int covered = 0;
  int last_end = 0;  // 1-based end of the last phrase, 0 at the start
  std::vector<NGramModel::WordId> state;
  double score = 0.0;
  FeatureVector features;
  FeatureVector delta;  // contribution of the last phrase
  const Option* option = nullptr;
  int back = -1;
  std::vector<const std::string*> output;
};

bool output_less(const Hyp& a, const Hyp& b) {
  return std::lexicographical_compare(a.output.begin(), a.output.end(), b.output.begin(),
                                      b.output.end(),
                                      [](const std::string* x, const std::string* y) { return *x < *y; });
}

bool better(const Hyp& a, const Hyp& b) {
  if (a.score != b.score) return a.score > b.score;
  return output_less(a, b);
}

std::string recombination_key(const Hyp& h) {
  std::string key;
  h.coverage.append_key(key);
  key.append(reinterpret_cast<const char*>(&h.last_end), sizeof h.last_end);
  key.append(reinterpret_cast<const char*>(h.state.data()),
             h.state.size() * sizeof(NGramModel::WordId));
  return key;
}

bool distortion_ok(const DecoderConfig& cfg, int prev_end, const Option& o, const Coverage& after,
                   int new_end) {
  if (cfg.distortion_limit < 0) return true;
  if (reordering_cost(prev_end, o.begin + 1) > cfg.distortion_limit) return false;
  // the first untranslated word must remain reachable from the new end
  int gap = after.first_gap();
  if (gap >= 0 && reordering_cost(new_end, gap + 1) > cfg.distortion_limit) return false;
  return true;
}

}  // namespace

Decoder::Decoder(const PhraseTable& table, const NGramModel& lm, FeatureWeights weights,
                 DecoderConfig config)
    : table_(table), lm_(lm), weights_(weights), config_(config) {
  if (config_.stack_size == 0) throw UsageError("decoder: stack_size must be positive");
  if (config_.max_phrase_len < 1) throw UsageError("decoder: max_phrase_len must be positive");
  if (!weights_.all_finite()) throw UsageError("decoder: weights must be finite");
}

DecodeResult Decoder::decode(const Tokens& source) const {
  const int n = static_cast<int>(source.size());
  std::vector<Tokens> oov_storage;
  auto options = collect_options(source, table_, lm_, config_, oov_storage);

  std::vector<Hyp> arena;
  std::vector<std::vector<int>> stacks(n + 1);
  {
    Hyp h;
    h.coverage = Coverage(n);
    h.state = lm_.start_state();
    arena.push_back(std::move(h));
    stacks[0].push_back(0);
  }

  // recombination map per stack
  std::vector<std::unordered_map<std::string, int>> seen(n + 1);
  for (int k = 0; k < n; ++k) {
    auto& stack = stacks[k];
    std::sort(stack.begin(), stack.end(),
              [&](int a, int b) { return better(arena[a], arena[b]); });
    if (stack.size() > config_.stack_size) stack.resize(config_.stack_size);

    for (int hi : stack) {
      for (int b = 0; b < n; ++b) {
        if (arena[hi].coverage.test(b)) continue;
        for (const Option& o : options[b]) {
          const Hyp& prev = arena[hi];
          if (prev.coverage.any_in(o.begin, o.end)) continue;
          Coverage cov = prev.coverage;
          for (int i = o.begin; i <= o.end; ++i) cov.set(i);
          if (!distortion_ok(config_, prev.last_end, o, cov, o.end + 1)) continue;

          Hyp h;
          h.covered = prev.covered + (o.end - o.begin + 1);
          h.coverage = std::move(cov);
          h.last_end = o.end + 1;
          h.state = prev.state;
          h.delta = o.tm;
          for (auto id : o.ids) h.delta.lm += lm_.score_word(h.state, id);
          h.delta.reorder = static_cast<double>(-reordering_cost(prev.last_end, o.begin + 1));
          if (h.covered == n) h.delta.lm += lm_.score_end(h.state);
          h.features = prev.features;
          h.features += h.delta;
          h.score = prev.score + h.delta.dot(weights_);
          h.option = &o;
          h.back = hi;
          h.output = prev.output;
          for (const auto& w : *o.target) h.output.push_back(&w);

          auto key = recombination_key(h);
          auto& bucket = seen[h.covered];
          auto it = bucket.find(key);
          if (it == bucket.end()) {
            bucket.emplace(std::move(key), static_cast<int>(arena.size()));
            stacks[h.covered].push_back(static_cast<int>(arena.size()));
            arena.push_back(std::move(h));
          } else if (better(h, arena[it->second])) {
            arena[it->second] = std::move(h);
          }
        }
      }
    }
  }

  DecodeResult result;
  result.derivation.source = source;
  auto& final_stack = stacks[n];
  if (n == 0) {
    auto st = lm_.start_state();
    result.features.lm = lm_.score_end(st);
    result.score = result.features.dot(weights_);
    return result;
  }
  if (final_stack.empty()) throw Error(ErrorKind::kInternal, "decoder: no complete hypothesis");
  int best = *std::min_element(final_stack.begin(), final_stack.end(),
                               [&](int a, int b) { return better(arena[a], arena[b]); });
  const Hyp& top = arena[best];
  result.score = top.score;
  result.features = top.features;
  for (const auto* w : top.output) result.output.push_back(*w);
  for (int hi = best; arena[hi].back >= 0; hi = arena[hi].back) {
    const Hyp& h = arena[hi];
    DerivationStep step;
    step.src_begin = h.option->begin;
    step.src_end = h.option->end;
    step.target = *h.option->target;
    step.oov = h.option->oov;
    step.delta = h.delta;
    result.derivation.steps.push_back(std::move(step));
  }
  std::reverse(result.derivation.steps.begin(), result.derivation.steps.end());
  return result;
}

DecodeResult decode(const Tokens& source, const PhraseTable& table, const NGramModel& lm,
                    const FeatureWeights& weights, const DecoderConfig& config) {
  return Decoder(table, lm, weights, config).decode(source);
}

std::vector<DecodeResult> decode_corpus(const std::vector<Tokens>& sources, const PhraseTable& table,
                                        const NGramModel& lm, const FeatureWeights& weights,
                                        const DecoderConfig& config, Execution exec) {
  Decoder decoder(table, lm, weights, config);
  std::vector<DecodeResult> out(sources.size());
  const long n = static_cast<long>(sources.size());
  if (exec == Execution::kSerial) {
    for (long i = 0; i < n; ++i) out[i] = decoder.decode(sources[i]);
    return out;
  }
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < n; ++i) {
    try {
      out[i] = decoder.decode(sources[i]);
    } catch (...) {
#pragma omp critical(smt_decode_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

ScoredDerivation score_derivation(const Derivation& d, const PhraseTable& table,
                                  const NGramModel& lm, const FeatureWeights& weights,
                                  const DecoderConfig& config) {
  const int n = static_cast<int>(d.source.size());
  std::vector<bool> covered(n, false);
  ScoredDerivation out;
  auto state = lm.start_state();
  int prev_end = 0;
  for (const auto& s : d.steps) {
    if (s.src_begin < 0 || s.src_end < s.src_begin || s.src_end >= n)
      throw UsageError("score_derivation: span out of range");
    for (int i = s.src_begin; i <= s.src_end; ++i) {
      if (covered[i]) throw UsageError("score_derivation: source word covered twice");
      covered[i] = true;
    }
    FeatureVector f;
    if (s.oov) {
      if (s.src_begin != s.src_end || s.target != Tokens{d.source[s.src_begin]} ||
          has_single_entry(table, d.source[s.src_begin]))
        throw UsageError("score_derivation: invalid copy-through step");
      f = oov_features(config.oov_log_score);
    } else {
      std::span<const std::string> src(d.source.data() + s.src_begin,
                                       static_cast<size_t>(s.src_end - s.src_begin + 1));
      const auto* entries = table.find(src);
      const PhraseEntry* hit = nullptr;
      if (entries)
        for (const auto& e : *entries)
          if (e.tgt == s.target) hit = &e;
      if (!hit) throw UsageError("score_derivation: phrase pair not in table");
      f = phrase_features(hit->scores, hit->tgt.size());
    }
    for (const auto& w : s.target) f.lm += lm.score_word(state, lm.id(w));
    f.reorder = static_cast<double>(-reordering_cost(prev_end, s.src_begin + 1));
    prev_end = s.src_end + 1;
    out.features += f;
  }
  for (int i = 0; i < n; ++i)
    if (!covered[i]) throw UsageError("score_derivation: source word " + std::to_string(i) + " not covered");
  out.features.lm += lm.score_end(state);
  out.score = out.features.dot(weights);
  return out;
}

std::string format_trace(const DecodeResult& result) {
  std::string out;
  for (const auto& s : result.derivation.steps) {
    std::string tgt;
    for (size_t i = 0; i < s.target.size(); ++i) {
      if (i) tgt.push_back(' ');
      tgt += s.target[i];
    }
    const auto& f = s.delta;
    out += "[" + std::to_string(s.src_begin) + ".." + std::to_string(s.src_end) + "] -> \"" + tgt +
           "\" | lm=" + format_sig(f.lm, 6) + " phi_ts=" + format_sig(f.phi_ts, 6) +
           " phi_st=" + format_sig(f.phi_st, 6) + " lex_ts=" + format_sig(f.lex_ts, 6) +
           " lex_st=" + format_sig(f.lex_st, 6) + " reorder=" + format_sig(f.reorder, 6) +
           " wp=" + format_sig(f.word_penalty, 6) + (s.oov ? " oov" : "") + "\n";
  }
  return out;
}

}  // namespace smt
