// src/eval.cc
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

#include "smt/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <unordered_map>

#include "smt/error.h"

namespace smt {

namespace {

using NGram = std::vector<std::string_view>;

std::map<NGram, size_t> ngrams_of(const Tokens& toks, int n) {
  std::map<NGram, size_t> out;
  for (size_t i = 0; i + n <= toks.size(); ++i) {
    NGram g(toks.begin() + i, toks.begin() + i + n);
    ++out[std::move(g)];
  }
  return out;
}

void check_sizes(size_t hyps, size_t refs, const char* what) {
  if (hyps != refs)
    throw DataError(std::string(what) + ": " + std::to_string(hyps) + " hypotheses but " +
                    std::to_string(refs) + " references");
}

template <class F>
std::vector<double> per_sentence(size_t n, Execution exec, F&& f) {
  std::vector<double> out(n);
  const long count = static_cast<long>(n);
  if (exec == Execution::kSerial) {
    for (long i = 0; i < count; ++i) out[i] = f(i);
  } else {
#pragma omp parallel for schedule(dynamic, 8)
    for (long i = 0; i < count; ++i) out[i] = f(i);
  }
  return out;
}

double mean_in_order(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

// Inversions of v, sorting it as a side effect.
long long count_inversions(std::vector<int>& v, std::vector<int>& tmp, size_t lo, size_t hi) {
  if (hi - lo < 2) return 0;
  size_t mid = lo + (hi - lo) / 2;
  long long inv = count_inversions(v, tmp, lo, mid) + count_inversions(v, tmp, mid, hi);
  size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      inv += static_cast<long long>(mid - i);
      tmp[k++] = v[j++];
    } else {
      tmp[k++] = v[i++];
    }
  }
  while (i < mid) tmp[k++] = v[i++];
  while (j < hi) tmp[k++] = v[j++];
  std::copy(tmp.begin() + lo, tmp.begin() + hi, v.begin() + lo);
  return inv;
}

}  // namespace

NGramCounts& NGramCounts::operator+=(const NGramCounts& o) {
  if (matched.size() < o.matched.size()) {
    matched.resize(o.matched.size(), 0);
    total.resize(o.total.size(), 0);
  }
  for (size_t n = 0; n < o.matched.size(); ++n) {
    matched[n] += o.matched[n];
    total[n] += o.total[n];
  }
  hyp_len += o.hyp_len;
  ref_len += o.ref_len;
  return *this;
}

NGramCounts ngram_counts(const Tokens& hyp, const Tokens& ref, int max_n) {
  if (max_n < 1) throw UsageError("bleu: max_n must be at least 1");
  NGramCounts c;
  c.matched.assign(max_n, 0);
  c.total.assign(max_n, 0);
  c.hyp_len = hyp.size();
  c.ref_len = ref.size();
  for (int n = 1; n <= max_n; ++n) {
    auto h = ngrams_of(hyp, n);
    auto r = ngrams_of(ref, n);
    for (const auto& [g, cnt] : h) {
      c.total[n - 1] += cnt;
      auto it = r.find(g);
      if (it != r.end()) c.matched[n - 1] += std::min(cnt, it->second);
    }
  }
  return c;
}

double brevity_penalty(size_t hyp_len, size_t ref_len) {
  if (hyp_len == 0) return 0.0;
  if (hyp_len > ref_len) return 1.0;
  return std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len));
}

BleuReport bleu_from_counts(const NGramCounts& c) {
  BleuReport r;
  r.hyp_len = c.hyp_len;
  r.ref_len = c.ref_len;
  r.brevity_penalty = brevity_penalty(c.hyp_len, c.ref_len);
  double log_sum = 0.0;
  bool zero = false;
  for (size_t n = 0; n < c.matched.size(); ++n) {
    double p = c.total[n] ? static_cast<double>(c.matched[n]) / static_cast<double>(c.total[n]) : 0.0;
    r.precisions.push_back(p);
    if (p == 0.0)
      zero = true;
    else
      log_sum += std::log(p);
  }
  if (zero || r.brevity_penalty == 0.0) {
    r.score = 0.0;
  } else if (r.brevity_penalty == 1.0 && log_sum == 0.0) {
    r.score = 1.0;
  } else {
    r.score = r.brevity_penalty * std::exp(log_sum / static_cast<double>(c.matched.size()));
  }
  return r;
}

BleuReport bleu_corpus(const std::vector<Tokens>& hyps, const std::vector<Tokens>& refs, int max_n,
                       Execution exec) {
  check_sizes(hyps.size(), refs.size(), "bleu");
  if (max_n < 1) throw UsageError("bleu: max_n must be at least 1");
  std::vector<NGramCounts> parts(hyps.size());
  const long n = static_cast<long>(hyps.size());
  if (exec == Execution::kSerial) {
    for (long i = 0; i < n; ++i) parts[i] = ngram_counts(hyps[i], refs[i], max_n);
  } else {
#pragma omp parallel for schedule(dynamic, 8)
    for (long i = 0; i < n; ++i) parts[i] = ngram_counts(hyps[i], refs[i], max_n);
  }
  NGramCounts total;
  total.matched.assign(max_n, 0);
  total.total.assign(max_n, 0);
  for (const auto& p : parts) total += p;
  return bleu_from_counts(total);
}

double sentence_bleu(const Tokens& hyp, const Tokens& ref, int max_n) {
  NGramCounts c = ngram_counts(hyp, ref, max_n);
  double bp = brevity_penalty(c.hyp_len, c.ref_len);
  if (bp == 0.0 || c.matched[0] == 0) return 0.0;
  double log_sum = 0.0;
  for (int n = 0; n < max_n; ++n) {
    double num = static_cast<double>(c.matched[n]);
    double den = static_cast<double>(c.total[n]);
    if (n > 0 && c.matched[n] == 0) {
      num += 1.0;
      den += 1.0;
    }
    log_sum += std::log(num / den);
  }
  if (bp == 1.0 && log_sum == 0.0) return 1.0;
  return bp * std::exp(log_sum / max_n);
}

std::optional<double> kendall_tau(std::span<const int> ranks) {
  if (ranks.size() < 2) return std::nullopt;
  std::vector<int> v(ranks.begin(), ranks.end()), tmp(v.size());
  long long inv = count_inversions(v, tmp, 0, v.size());
  for (size_t i = 1; i < v.size(); ++i)
    if (v[i] == v[i - 1]) throw UsageError("kendall_tau: ranks must be distinct");
  double pairs = static_cast<double>(ranks.size()) * static_cast<double>(ranks.size() - 1) / 2.0;
  double discordant = static_cast<double>(inv);
  return (pairs - 2.0 * discordant) / pairs;
}

std::vector<int> ribes_alignment(const Tokens& hyp, const Tokens& ref) {
  std::unordered_map<std::string_view, int> hyp_count, ref_count;
  for (const auto& w : hyp) ++hyp_count[w];
  for (const auto& w : ref) ++ref_count[w];

  using Bigram = std::pair<std::string_view, std::string_view>;
  std::map<Bigram, int> hyp_bi, ref_bi, ref_bi_pos;
  for (size_t i = 0; i + 1 < hyp.size(); ++i) ++hyp_bi[{hyp[i], hyp[i + 1]}];
  for (size_t i = 0; i + 1 < ref.size(); ++i) {
    Bigram b{ref[i], ref[i + 1]};
    ++ref_bi[b];
    ref_bi_pos[b] = static_cast<int>(i);
  }
  auto unique_bigram = [&](const Bigram& b) {
    auto h = hyp_bi.find(b);
    auto r = ref_bi.find(b);
    return h != hyp_bi.end() && h->second == 1 && r != ref_bi.end() && r->second == 1;
  };

  std::vector<bool> used(ref.size(), false);
  std::vector<int> out;
  for (size_t i = 0; i < hyp.size(); ++i) {
    const auto& w = hyp[i];
    auto rc = ref_count.find(w);
    if (rc == ref_count.end()) continue;
    int pos = -1;
    if (hyp_count[w] == 1 && rc->second == 1) {
      pos = static_cast<int>(std::find(ref.begin(), ref.end(), w) - ref.begin());
    } else {
      if (i > 0) {
        Bigram left{hyp[i - 1], w};
        if (unique_bigram(left)) pos = ref_bi_pos[left] + 1;
      }
      if (pos < 0 && i + 1 < hyp.size()) {
        Bigram right{w, hyp[i + 1]};
        if (unique_bigram(right)) pos = ref_bi_pos[right];
      }
    }
    if (pos >= 0 && !used[pos]) {
      used[pos] = true;
      out.push_back(pos);
    }
  }
  return out;
}

RibesReport ribes_sentence(const Tokens& hyp, const Tokens& ref, const RibesConfig& cfg) {
  if (cfg.alpha < 0 || cfg.alpha > 1 || cfg.beta < 0 || cfg.beta > 1)
    throw UsageError("ribes: alpha and beta must lie in [0, 1]");
  RibesReport r;
  auto ranks = ribes_alignment(hyp, ref);
  r.matches = ranks.size();
  r.bp = brevity_penalty(hyp.size(), ref.size());
  r.p1 = hyp.empty() ? 0.0 : static_cast<double>(ranks.size()) / static_cast<double>(hyp.size());
  auto tau = kendall_tau(ranks);
  if (!tau) {
    r.tau = -1.0;
    r.nkt = 0.0;
    r.score = 0.0;
    return r;
  }
  r.tau = *tau;
  r.nkt = (r.tau + 1.0) / 2.0;
  r.score = r.nkt * std::pow(r.p1, cfg.alpha) * std::pow(r.bp, cfg.beta);
  return r;
}

namespace {

class ChunkSearch {
 public:
  ChunkSearch(const Tokens& hyp, const Tokens& ref, size_t budget)
      : hyp_(hyp), budget_(budget), used_(ref.size(), false) {
    std::unordered_map<std::string_view, int> ids;
    for (const auto& w : hyp) ids.emplace(w, static_cast<int>(ids.size()));
    hyp_id_.resize(hyp.size());
    for (size_t i = 0; i < hyp.size(); ++i) hyp_id_[i] = ids[hyp[i]];
    positions_.resize(ids.size());
    for (size_t r = 0; r < ref.size(); ++r) {
      auto it = ids.find(ref[r]);
      if (it != ids.end()) positions_[it->second].push_back(static_cast<int>(r));
    }
    std::vector<int> hyp_count(ids.size(), 0);
    for (int id : hyp_id_) ++hyp_count[id];
    remaining_.resize(ids.size());
    for (size_t t = 0; t < ids.size(); ++t) {
      remaining_[t] = std::min<int>(hyp_count[t], static_cast<int>(positions_[t].size()));
      matches_ += remaining_[t];
    }
    // occurrences of each type at positions >= i
    std::vector<int> counts(ids.size(), 0);
    later_.assign(hyp.size(), 0);
    for (size_t i = hyp.size(); i-- > 0;) {
      ++counts[hyp_id_[i]];
      later_[i] = counts[hyp_id_[i]] - 1;
    }
  }

  size_t matches() const { return static_cast<size_t>(matches_); }

  size_t run() {
    if (matches_ == 0) return 0;
    dfs(0, -2, 0);
    return best_;
  }

  bool exact() const { return !truncated_; }

 private:
  void dfs(size_t i, int prev_ref, size_t chunks) {
    if (chunks >= best_) return;
    if (found_ && ++nodes_ > budget_) {
      truncated_ = true;
      return;
    }
    if (i == hyp_.size()) {
      best_ = chunks;
      found_ = true;
      return;
    }
    int t = hyp_id_[i];
    if (remaining_[t] > 0) {
      --remaining_[t];
      const auto& pos = positions_[t];
      // try the continuing position first for a tight early bound
      auto cont = std::find(pos.begin(), pos.end(), prev_ref + 1);
      if (prev_ref >= 0 && cont != pos.end() && !used_[*cont]) {
        used_[*cont] = true;
        dfs(i + 1, *cont, chunks);
        used_[*cont] = false;
      }
      for (int r : pos) {
        if (used_[r] || (prev_ref >= 0 && r == prev_ref + 1)) continue;
        used_[r] = true;
        dfs(i + 1, r, chunks + 1);
        used_[r] = false;
        if (truncated_) break;
      }
      ++remaining_[t];
    }
    if (later_[i] >= remaining_[t]) dfs(i + 1, -2, chunks);
  }

  const Tokens& hyp_;
  size_t budget_;
  std::vector<int> hyp_id_;
  std::vector<std::vector<int>> positions_;
  std::vector<int> remaining_;
  std::vector<int> later_;
  std::vector<bool> used_;
  int matches_ = 0;
  size_t best_ = SIZE_MAX;
  bool found_ = false;
  bool truncated_ = false;
  size_t nodes_ = 0;
};

}  // namespace

MeteorReport meteor_sentence(const Tokens& hyp, const Tokens& ref, const MeteorConfig& cfg) {
  MeteorReport r;
  ChunkSearch search(hyp, ref, cfg.node_budget);
  r.matches = search.matches();
  if (r.matches == 0) return r;
  r.chunks = search.run();
  r.exact = search.exact();
  double m = static_cast<double>(r.matches);
  r.precision = m / static_cast<double>(hyp.size());
  r.recall = m / static_cast<double>(ref.size());
  r.fmean = 10.0 * r.precision * r.recall / (r.recall + 9.0 * r.precision);
  r.penalty = r.chunks > 1 ? 0.5 * std::pow(static_cast<double>(r.chunks) / m, 3.0) : 0.0;
  r.score = r.fmean * (1.0 - r.penalty);
  return r;
}

Metric parse_metric(std::string_view name) {
  if (name == "bleu") return Metric::kBleu;
  if (name == "ribes") return Metric::kRibes;
  if (name == "meteor") return Metric::kMeteor;
  throw UsageError("unknown metric '" + std::string(name) + "' (expected bleu, ribes or meteor)");
}

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::kBleu: return "bleu";
    case Metric::kRibes: return "ribes";
    case Metric::kMeteor: return "meteor";
  }
  return "?";
}

double metric_corpus(Metric metric, const std::vector<Tokens>& hyps,
                     const std::vector<Tokens>& refs, const MetricOptions& options,
                     Execution exec) {
  check_sizes(hyps.size(), refs.size(), metric_name(metric).data());
  if (hyps.empty()) throw DataError(std::string(metric_name(metric)) + ": empty corpus");
  switch (metric) {
    case Metric::kBleu:
      return bleu_corpus(hyps, refs, 4, exec).score;
    case Metric::kRibes:
      return mean_in_order(per_sentence(hyps.size(), exec, [&](long i) {
        return ribes_sentence(hyps[i], refs[i], options.ribes).score;
      }));
    case Metric::kMeteor:
      return mean_in_order(per_sentence(hyps.size(), exec, [&](long i) {
        return meteor_sentence(hyps[i], refs[i], options.meteor).score;
      }));
  }
  throw Error(ErrorKind::kInternal, "metric_corpus: unhandled metric");
}

double mean_sentence_bleu(const std::vector<Tokens>& hyps, const std::vector<Tokens>& refs,
                          Execution exec) {
  check_sizes(hyps.size(), refs.size(), "sentence bleu");
  if (hyps.empty()) throw DataError("sentence bleu: empty corpus");
  return mean_in_order(
      per_sentence(hyps.size(), exec, [&](long i) { return sentence_bleu(hyps[i], refs[i]); }));
}

EvalSummary evaluate_corpus(const std::vector<Tokens>& hyps, const std::vector<Tokens>& refs,
                            const MetricOptions& options, Execution exec) {
  check_sizes(hyps.size(), refs.size(), "evaluate");
  if (hyps.empty()) throw DataError("evaluate: empty corpus");
  EvalSummary s;
  s.bleu = bleu_corpus(hyps, refs, 4, exec);
  s.ribes = metric_corpus(Metric::kRibes, hyps, refs, options, exec);
  s.meteor = metric_corpus(Metric::kMeteor, hyps, refs, options, exec);
  s.ribes_config = options.ribes;
  return s;
}

std::string format_score_row(const EvalSummary& s) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.2f  %.2f  %.2f", s.bleu.score * 100.0, s.ribes, s.meteor);
  return buf;
}

std::string format_report(const EvalSummary& s, std::string_view pair, std::string_view direction) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "# %.*s %.*s RIBES alpha=%g beta=%g\n", static_cast<int>(pair.size()),
                pair.data(), static_cast<int>(direction.size()), direction.data(),
                s.ribes_config.alpha, s.ribes_config.beta);
  return std::string(buf) + "BLEU   RIBES  METEOR\n" + format_score_row(s) + "\n";
}

std::string format_csv_row(const EvalSummary& s, std::string_view pair, std::string_view direction) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%.*s,%.*s,%.2f,%.4f,%.4f", static_cast<int>(pair.size()),
                pair.data(), static_cast<int>(direction.size()), direction.data(),
                s.bleu.score * 100.0, s.ribes, s.meteor);
  return buf;
}

}  // namespace smt
