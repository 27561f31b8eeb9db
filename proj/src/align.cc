// src/align.cc
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

#include "smt/align.h"

#include <cfloat>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "smt/align_kernels.h"
#include "smt/error.h"
#include "smt/numfmt.h"

namespace smt {

TokenizedCorpus swap_sides(const TokenizedCorpus& corpus) {
  TokenizedCorpus out;
  out.reserve(corpus.size());
  for (const auto& p : corpus) out.push_back({p.target, p.source});
  return out;
}

// ---------------------------------------------------------------- tables

double LexicalTable::prob(std::string_view source, std::string_view target) const {
  auto row = rows_.find(source);
  if (row == rows_.end()) return 0.0;
  auto it = row->second.find(target);
  return it == row->second.end() ? 0.0 : it->second;
}

void LexicalTable::set(const std::string& source, const std::string& target, double p) {
  rows_[source][target] = p;
}

size_t LexicalTable::size() const {
  size_t n = 0;
  for (const auto& [src, row] : rows_) n += row.size();
  return n;
}

std::string LexicalTable::serialize() const {
  std::string out;
  for (const auto& [src, row] : rows_) {
    for (const auto& [tgt, p] : row) {
      out += src;
      out += '\t';
      out += tgt;
      out += '\t';
      out += format_exact(p);
      out += '\n';
    }
  }
  return out;
}

LexicalTable LexicalTable::parse(std::string_view text) {
  LexicalTable table;
  size_t start = 0;
  size_t line_no = 0;
  while (start < text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;
    const size_t t1 = line.find('\t');
    const size_t t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string_view::npos)
      throw DataError("lexical table line " + std::to_string(line_no) + ": expected 3 fields");
    table.set(std::string(line.substr(0, t1)), std::string(line.substr(t1 + 1, t2 - t1 - 1)),
              parse_double(line.substr(t2 + 1), "lexical table"));
  }
  return table;
}

void LexicalTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << serialize();
}

LexicalTable LexicalTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

double Ibm2Distortion::prob(int src_pos, int tgt_pos, int src_len, int tgt_len) const {
  auto it = tables_.find({src_len, tgt_len});
  if (it == tables_.end()) return 1.0 / (src_len + 1);
  return it->second[static_cast<size_t>(tgt_pos) * (src_len + 1) + (src_pos + 1)];
}

// ---------------------------------------------------------------- EM kernels

namespace em {

AlignmentIndex::AlignmentIndex(const TokenizedCorpus& corpus) {
  std::unordered_map<std::string, uint32_t> src_ids, tgt_ids;
  std::unordered_map<uint64_t, uint32_t> slot_ids;
  std::map<std::pair<int, int>, int> groups;
  source_words_.emplace_back(kNullWord);
  src_ids.emplace(std::string(kNullWord), 0);
  auto src_id = [&](const std::string& w) {
    auto [it, inserted] = src_ids.try_emplace(w, static_cast<uint32_t>(source_words_.size()));
    if (inserted) source_words_.push_back(w);
    return it->second;
  };
  auto tgt_id = [&](const std::string& w) {
    auto [it, inserted] = tgt_ids.try_emplace(w, static_cast<uint32_t>(target_words_.size()));
    if (inserted) target_words_.push_back(w);
    return it->second;
  };

  pairs_.reserve(corpus.size());
  std::vector<uint32_t> e_ids;
  for (const auto& tp : corpus) {
    Pair p;
    p.src_len = static_cast<int>(tp.source.size());
    p.tgt_len = static_cast<int>(tp.target.size());
    auto [git, ginserted] = groups.try_emplace({p.src_len, p.tgt_len}, static_cast<int>(length_groups_.size()));
    if (ginserted) length_groups_.push_back({p.src_len, p.tgt_len});
    p.length_group = git->second;
    e_ids.assign(1, 0);
    for (const auto& w : tp.source) e_ids.push_back(src_id(w));
    const size_t width = e_ids.size();
    p.slots.resize(width * tp.target.size());
    for (size_t j = 0; j < tp.target.size(); ++j) {
      const uint32_t f = tgt_id(tp.target[j]);
      for (size_t i = 0; i < width; ++i) {
        const uint64_t key = (static_cast<uint64_t>(e_ids[i]) << 32) | f;
        auto [it, inserted] = slot_ids.try_emplace(key, static_cast<uint32_t>(slot_source_.size()));
        if (inserted) {
          slot_source_.push_back(e_ids[i]);
          slot_target_.push_back(f);
        }
        p.slots[j * width + i] = it->second;
      }
    }
    pairs_.push_back(std::move(p));
  }
}

std::vector<double> AlignmentIndex::uniform_lexical() const {
  std::vector<double> per_source(source_words_.size(), 0.0);
  for (uint32_t e : slot_source_) per_source[e] += 1.0;
  std::vector<double> t(num_slots());
  for (size_t s = 0; s < t.size(); ++s) t[s] = 1.0 / per_source[slot_source_[s]];
  return t;
}

std::vector<double> AlignmentIndex::lexical_from(const LexicalTable& table) const {
  std::vector<double> t(num_slots());
  for (size_t s = 0; s < t.size(); ++s)
    t[s] = table.prob(source_words_[slot_source_[s]], target_words_[slot_target_[s]]);
  return t;
}

LexicalTable AlignmentIndex::to_table(const std::vector<double>& t) const {
  LexicalTable table;
  for (size_t s = 0; s < t.size(); ++s)
    table.set(source_words_[slot_source_[s]], target_words_[slot_target_[s]], t[s]);
  return table;
}

std::vector<std::vector<double>> AlignmentIndex::uniform_distortion() const {
  std::vector<std::vector<double>> a;
  a.reserve(length_groups_.size());
  for (auto [l, m] : length_groups_)
    a.emplace_back(static_cast<size_t>(l + 1) * m, 1.0 / (l + 1));
  return a;
}

Ibm2Distortion AlignmentIndex::to_distortion(const std::vector<std::vector<double>>& a) const {
  Ibm2Distortion d;
  for (size_t g = 0; g < length_groups_.size(); ++g) d.tables()[length_groups_[g]] = a[g];
  return d;
}

namespace {

ExpectedCounts zero_counts(const AlignmentIndex& index,
                           const std::vector<std::vector<double>>* distortion) {
  ExpectedCounts c;
  c.lexical.assign(index.num_slots(), 0.0);
  if (distortion) {
    c.distortion.reserve(distortion->size());
    for (const auto& g : *distortion) c.distortion.emplace_back(g.size(), 0.0);
  }
  return c;
}

// Posteriors of one pair laid out like Pair::slots; returns the pair's
// log-likelihood contribution.
double pair_posteriors(const AlignmentIndex::Pair& p, const std::vector<double>& t,
                       const std::vector<double>* a, std::vector<double>& post) {
  const size_t width = static_cast<size_t>(p.src_len) + 1;
  post.resize(p.slots.size());
  double ll = 0.0;
  const double log_width = std::log(static_cast<double>(width));
  for (int j = 0; j < p.tgt_len; ++j) {
    const size_t row = j * width;
    double denom = 0.0;
    for (size_t i = 0; i < width; ++i) {
      const double w = t[p.slots[row + i]] * (a ? (*a)[row + i] : 1.0);
      post[row + i] = w;
      denom += w;
    }
    if (denom > 0.0) {
      for (size_t i = 0; i < width; ++i) post[row + i] /= denom;
      ll += std::log(denom);
    } else {
      for (size_t i = 0; i < width; ++i) post[row + i] = 1.0 / static_cast<double>(width);
      ll += std::log(DBL_MIN);
    }
    if (!a) ll -= log_width;
  }
  return ll;
}

void accumulate(const AlignmentIndex::Pair& p, const std::vector<double>& post, ExpectedCounts& c) {
  for (size_t k = 0; k < p.slots.size(); ++k) c.lexical[p.slots[k]] += post[k];
  if (!c.distortion.empty()) {
    auto& d = c.distortion[p.length_group];
    for (size_t k = 0; k < post.size(); ++k) d[k] += post[k];
  }
}

}  // namespace

ExpectedCounts estep_serial(const AlignmentIndex& index, const std::vector<double>& t,
                            const std::vector<std::vector<double>>* distortion) {
  ExpectedCounts c = zero_counts(index, distortion);
  std::vector<double> post;
  for (const auto& p : index.pairs()) {
    const std::vector<double>* a = distortion ? &(*distortion)[p.length_group] : nullptr;
    c.log_likelihood += pair_posteriors(p, t, a, post);
    accumulate(p, post, c);
  }
  return c;
}

ExpectedCounts estep_parallel(const AlignmentIndex& index, const std::vector<double>& t,
                              const std::vector<std::vector<double>>* distortion,
                              size_t block_size) {
  if (block_size == 0) block_size = 1;
  ExpectedCounts c = zero_counts(index, distortion);
  const auto& pairs = index.pairs();
  std::vector<std::vector<double>> posts(std::min(block_size, pairs.size()));
  std::vector<double> lls(posts.size());
  for (size_t begin = 0; begin < pairs.size(); begin += block_size) {
    const size_t end = std::min(pairs.size(), begin + block_size);
    const auto n = static_cast<std::ptrdiff_t>(end - begin);
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t k = 0; k < n; ++k) {
      const auto& p = pairs[begin + k];
      const std::vector<double>* a = distortion ? &(*distortion)[p.length_group] : nullptr;
      lls[k] = pair_posteriors(p, t, a, posts[k]);
    }
    // reduce in pair order
    for (std::ptrdiff_t k = 0; k < n; ++k) {
      c.log_likelihood += lls[k];
      accumulate(pairs[begin + k], posts[k], c);
    }
  }
  return c;
}

std::vector<double> normalize_lexical(const AlignmentIndex& index, const std::vector<double>& counts) {
  std::vector<double> total(index.num_sources(), 0.0);
  std::vector<double> fanout(index.num_sources(), 0.0);
  for (size_t s = 0; s < counts.size(); ++s) {
    total[index.slot_source(s)] += counts[s];
    fanout[index.slot_source(s)] += 1.0;
  }
  std::vector<double> t(counts.size());
  for (size_t s = 0; s < counts.size(); ++s) {
    const uint32_t e = index.slot_source(s);
    t[s] = total[e] > 0.0 ? counts[s] / total[e] : 1.0 / fanout[e];
  }
  return t;
}

std::vector<std::vector<double>> normalize_distortion(const AlignmentIndex& index,
                                                      const std::vector<std::vector<double>>& counts) {
  std::vector<std::vector<double>> a(counts.size());
  for (size_t g = 0; g < counts.size(); ++g) {
    const auto [l, m] = index.length_groups()[g];
    const size_t width = static_cast<size_t>(l) + 1;
    a[g].resize(counts[g].size());
    for (int j = 0; j < m; ++j) {
      double sum = 0.0;
      for (size_t i = 0; i < width; ++i) sum += counts[g][j * width + i];
      for (size_t i = 0; i < width; ++i)
        a[g][j * width + i] = sum > 0.0 ? counts[g][j * width + i] / sum : 1.0 / width;
    }
  }
  return a;
}

}  // namespace em

// ---------------------------------------------------------------- training

namespace {

em::ExpectedCounts run_estep(Execution exec, const em::AlignmentIndex& index,
                             const std::vector<double>& t,
                             const std::vector<std::vector<double>>* a) {
  return exec == Execution::kSerial ? em::estep_serial(index, t, a)
                                    : em::estep_parallel(index, t, a);
}

void check_training_args(const TokenizedCorpus& corpus, int iterations) {
  if (iterations < 1) throw UsageError("EM iterations must be >= 1");
  if (corpus.empty()) throw DataError("cannot train alignment on an empty corpus");
}

}  // namespace

Ibm1Result train_ibm1(const TokenizedCorpus& corpus, int iterations, Execution exec) {
  check_training_args(corpus, iterations);
  em::AlignmentIndex index(corpus);
  auto t = index.uniform_lexical();
  Ibm1Result result;
  for (int it = 0; it < iterations; ++it) {
    auto counts = run_estep(exec, index, t, nullptr);
    result.log_likelihood.push_back(counts.log_likelihood);
    t = em::normalize_lexical(index, counts.lexical);
  }
  result.table = index.to_table(t);
  return result;
}

Ibm2Result train_ibm2(const TokenizedCorpus& corpus, int iterations, const LexicalTable& init,
                      Execution exec) {
  check_training_args(corpus, iterations);
  em::AlignmentIndex index(corpus);
  auto t = index.lexical_from(init);
  auto a = index.uniform_distortion();
  Ibm2Result result;
  for (int it = 0; it < iterations; ++it) {
    auto counts = run_estep(exec, index, t, &a);
    result.log_likelihood.push_back(counts.log_likelihood);
    t = em::normalize_lexical(index, counts.lexical);
    a = em::normalize_distortion(index, counts.distortion);
  }
  result.table = index.to_table(t);
  result.distortion = index.to_distortion(a);
  return result;
}

// ---------------------------------------------------------------- alignment

void AlignmentMatrix::add(int i, int j) {
  if (i < 0 || i >= src_len || j < 0 || j >= tgt_len)
    throw UsageError("alignment link " + std::to_string(i) + "-" + std::to_string(j) +
                     " outside " + std::to_string(src_len) + "x" + std::to_string(tgt_len));
  links.insert({i, j});
}

AlignmentMatrix AlignmentMatrix::transposed() const {
  AlignmentMatrix t{tgt_len, src_len, {}};
  for (auto [i, j] : links) t.links.insert({j, i});
  return t;
}

AlignmentMatrix viterbi_align(const AlignmentModel& model, const TokenizedPair& pair) {
  const int l = static_cast<int>(pair.source.size());
  const int m = static_cast<int>(pair.target.size());
  AlignmentMatrix out{l, m, {}};
  std::vector<const LexicalTable::Row*> rows(l + 1, nullptr);
  for (int i = -1; i < l; ++i) {
    const std::string_view e = i < 0 ? kNullWord : std::string_view(pair.source[i]);
    auto it = model.lexical.rows().find(e);
    if (it != model.lexical.rows().end()) rows[i + 1] = &it->second;
  }
  for (int j = 0; j < m; ++j) {
    int best_i = -1;
    double best = -1.0;
    for (int i = -1; i < l; ++i) {
      double t = 0.0;
      if (const auto* row = rows[i + 1]) {
        auto it = row->find(pair.target[j]);
        if (it != row->end()) t = it->second;
      }
      const double v = model.distortion ? t * model.distortion->prob(i, j, l, m) : t;
      if (v > best) {
        best = v;
        best_i = i;
      }
    }
    if (best_i >= 0) out.links.insert({best_i, j});
  }
  return out;
}

std::vector<AlignmentMatrix> viterbi_align_corpus(const AlignmentModel& model,
                                                  const TokenizedCorpus& corpus, Execution exec) {
  std::vector<AlignmentMatrix> out(corpus.size());
  const auto n = static_cast<std::ptrdiff_t>(corpus.size());
  if (exec == Execution::kSerial) {
    for (std::ptrdiff_t k = 0; k < n; ++k) out[k] = viterbi_align(model, corpus[k]);
  } else {
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t k = 0; k < n; ++k) out[k] = viterbi_align(model, corpus[k]);
  }
  return out;
}

Symmetrization parse_symmetrization(std::string_view name) {
  if (name == "intersection") return Symmetrization::kIntersection;
  if (name == "union") return Symmetrization::kUnion;
  if (name == "grow-diag") return Symmetrization::kGrowDiag;
  if (name == "grow-diag-final") return Symmetrization::kGrowDiagFinal;
  if (name == "grow-diag-final-and") return Symmetrization::kGrowDiagFinalAnd;
  throw UsageError("unknown symmetrization heuristic '" + std::string(name) + "'");
}

std::string_view symmetrization_name(Symmetrization h) {
  switch (h) {
    case Symmetrization::kIntersection: return "intersection";
    case Symmetrization::kUnion: return "union";
    case Symmetrization::kGrowDiag: return "grow-diag";
    case Symmetrization::kGrowDiagFinal: return "grow-diag-final";
    case Symmetrization::kGrowDiagFinalAnd: return "grow-diag-final-and";
  }
  return "?";
}

AlignmentMatrix symmetrize(const AlignmentMatrix& fwd, const AlignmentMatrix& rev,
                           Symmetrization heuristic) {
  if (fwd.src_len != rev.src_len || fwd.tgt_len != rev.tgt_len)
    throw UsageError("symmetrize: alignment dimensions differ (" + std::to_string(fwd.src_len) +
                     "x" + std::to_string(fwd.tgt_len) + " vs " + std::to_string(rev.src_len) +
                     "x" + std::to_string(rev.tgt_len) + ")");
  AlignmentMatrix inter{fwd.src_len, fwd.tgt_len, {}};
  AlignmentMatrix uni = inter;
  for (const auto& link : fwd.links) {
    uni.links.insert(link);
    if (rev.links.count(link)) inter.links.insert(link);
  }
  for (const auto& link : rev.links) uni.links.insert(link);
  if (heuristic == Symmetrization::kIntersection) return inter;
  if (heuristic == Symmetrization::kUnion) return uni;

  AlignmentMatrix out = inter;
  std::vector<bool> src_aligned(out.src_len, false), tgt_aligned(out.tgt_len, false);
  for (auto [i, j] : out.links) {
    src_aligned[i] = true;
    tgt_aligned[j] = true;
  }
  auto add = [&](int i, int j) {
    out.links.insert({i, j});
    src_aligned[i] = true;
    tgt_aligned[j] = true;
  };

  // N, S, E, W, NE, NW, SE, SW
  static constexpr int kNeighbors[8][2] = {{-1, 0}, {1, 0}, {0, 1}, {0, -1},
                                           {-1, 1}, {-1, -1}, {1, 1}, {1, -1}};
  bool added = true;
  while (added) {
    added = false;
    const std::vector<std::pair<int, int>> current(out.links.begin(), out.links.end());
    for (auto [i, j] : current) {
      for (const auto& d : kNeighbors) {
        const int ni = i + d[0];
        const int nj = j + d[1];
        if (ni < 0 || nj < 0 || ni >= out.src_len || nj >= out.tgt_len) continue;
        if (out.contains(ni, nj) || !uni.contains(ni, nj)) continue;
        if (!src_aligned[ni] || !tgt_aligned[nj]) {
          add(ni, nj);
          added = true;
        }
      }
    }
  }
  if (heuristic == Symmetrization::kGrowDiag) return out;

  const bool both = heuristic == Symmetrization::kGrowDiagFinalAnd;
  for (auto [i, j] : uni.links) {
    if (out.contains(i, j)) continue;
    const bool ok = both ? (!src_aligned[i] && !tgt_aligned[j]) : (!src_aligned[i] || !tgt_aligned[j]);
    if (ok) add(i, j);
  }
  return out;
}

std::string to_pharaoh(const AlignmentMatrix& a) {
  std::string out;
  for (auto [i, j] : a.links) {
    if (!out.empty()) out.push_back(' ');
    out += std::to_string(i);
    out.push_back('-');
    out += std::to_string(j);
  }
  return out;
}

AlignmentMatrix parse_pharaoh(std::string_view line, int src_len, int tgt_len) {
  AlignmentMatrix a{src_len, tgt_len, {}};
  for (const auto& tok : split_whitespace(line)) {
    const size_t dash = tok.find('-');
    if (dash == std::string::npos || dash == 0 || dash + 1 == tok.size())
      throw DataError("bad alignment point '" + tok + "'");
    int i = 0, j = 0;
    try {
      size_t ui = 0, uj = 0;
      i = std::stoi(tok.substr(0, dash), &ui);
      j = std::stoi(tok.substr(dash + 1), &uj);
      if (ui != dash || uj != tok.size() - dash - 1) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw DataError("bad alignment point '" + tok + "'");
    }
    if (i < 0 || j < 0 || i >= src_len || j >= tgt_len)
      throw DataError("alignment point '" + tok + "' outside sentence");
    a.links.insert({i, j});
  }
  return a;
}

}  // namespace smt
