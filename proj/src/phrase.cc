// src/phrase.cc
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

#include "smt/phrase.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "smt/error.h"
#include "smt/numfmt.h"

namespace smt {

namespace {

constexpr double kLexFloor = 1e-7;

std::string join(const Tokens& toks) {
  std::string out;
  for (size_t i = 0; i < toks.size(); ++i) {
    if (i) out.push_back(' ');
    out += toks[i];
  }
  return out;
}

Tokens slice(const Tokens& toks, int begin, int end) {
  return Tokens(toks.begin() + begin, toks.begin() + end + 1);
}

}  // namespace

std::vector<ExtractedPhrase> extract_phrases(const TokenizedPair& pair,
                                             const AlignmentMatrix& alignment,
                                             const ExtractOptions& options) {
  const int l = static_cast<int>(pair.source.size());
  const int m = static_cast<int>(pair.target.size());
  if (alignment.src_len != l || alignment.tgt_len != m)
    throw UsageError("extract_phrases: alignment is " + std::to_string(alignment.src_len) + "x" +
                     std::to_string(alignment.tgt_len) + " but sentence pair is " +
                     std::to_string(l) + "x" + std::to_string(m));
  const int max_len = options.max_len;
  std::vector<std::vector<int>> src_links(l);  // target positions per source word
  std::vector<int> tgt_count(m, 0);
  for (auto [i, j] : alignment.links) {
    src_links[i].push_back(j);
    ++tgt_count[j];
  }

  std::vector<ExtractedPhrase> out;
  for (int s1 = 0; s1 < l; ++s1) {
    for (int s2 = s1; s2 < l && s2 - s1 < max_len; ++s2) {
      int t1 = m, t2 = -1;
      for (int i = s1; i <= s2; ++i) {
        for (int j : src_links[i]) {
          t1 = std::min(t1, j);
          t2 = std::max(t2, j);
        }
      }
      if (t2 < 0) continue;
      if (t2 - t1 >= max_len) continue;
      // no link from inside the target span may leave the source span
      bool consistent = true;
      for (auto [i, j] : alignment.links) {
        if (j >= t1 && j <= t2 && (i < s1 || i > s2)) {
          consistent = false;
          break;
        }
      }
      if (!consistent) continue;
      for (int b = t1; b >= 0; --b) {
        if (b < t1 && (!options.expand_unaligned || tgt_count[b] > 0)) break;
        for (int e = t2; e < m && e - b < max_len; ++e) {
          if (e > t2 && (!options.expand_unaligned || tgt_count[e] > 0)) break;
          ExtractedPhrase ph;
          ph.span = {s1, s2, b, e};
          ph.pair.src = slice(pair.source, s1, s2);
          ph.pair.tgt = slice(pair.target, b, e);
          for (auto [i, j] : alignment.links) {
            if (i >= s1 && i <= s2 && j >= b && j <= e) ph.links.push_back({i - s1, j - b});
          }
          out.push_back(std::move(ph));
        }
      }
    }
  }
  std::sort(out.begin(), out.end(),
            [](const ExtractedPhrase& a, const ExtractedPhrase& b) { return a.span < b.span; });
  return out;
}

double lexical_weight(const Tokens& src, const Tokens& tgt,
                      const std::vector<std::pair<int, int>>& links, const LexicalTable& table) {
  std::vector<std::vector<int>> by_target(tgt.size());
  for (auto [i, j] : links) by_target[j].push_back(i);
  double w = 1.0;
  for (size_t j = 0; j < tgt.size(); ++j) {
    double factor;
    if (by_target[j].empty()) {
      factor = std::max(kLexFloor, table.prob(kNullWord, tgt[j]));
    } else {
      double sum = 0.0;
      for (int i : by_target[j]) sum += std::max(kLexFloor, table.prob(src[i], tgt[j]));
      factor = sum / static_cast<double>(by_target[j].size());
    }
    w *= factor;
  }
  return w;
}

void PhraseTable::add(Tokens src, PhraseEntry entry) {
  max_src_len_ = std::max(max_src_len_, static_cast<int>(src.size()));
  auto& list = entries_[std::move(src)];
  auto pos = std::lower_bound(list.begin(), list.end(), entry.tgt,
                              [](const PhraseEntry& e, const Tokens& t) { return e.tgt < t; });
  if (pos != list.end() && pos->tgt == entry.tgt) {
    *pos = std::move(entry);
  } else {
    list.insert(pos, std::move(entry));
  }
}

const std::vector<PhraseEntry>* PhraseTable::find(std::span<const std::string> src) const {
  auto it = entries_.find(src);
  return it == entries_.end() ? nullptr : &it->second;
}

size_t PhraseTable::size() const {
  size_t n = 0;
  for (const auto& [src, list] : entries_) n += list.size();
  return n;
}

std::string PhraseTable::serialize() const {
  std::string out;
  for (const auto& [src, list] : entries_) {
    const std::string s = join(src);
    for (const auto& e : list) {
      out += s;
      out += " ||| ";
      out += join(e.tgt);
      out += " ||| ";
      out += format_sig(e.scores.phi_t_given_s, 6) + " " + format_sig(e.scores.phi_s_given_t, 6) +
             " " + format_sig(e.scores.lex_t_given_s, 6) + " " +
             format_sig(e.scores.lex_s_given_t, 6);
      out += '\n';
    }
  }
  return out;
}

PhraseTable PhraseTable::parse(std::string_view text) {
  PhraseTable table;
  size_t start = 0;
  size_t line_no = 0;
  while (start < text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;
    const size_t a = line.find(" ||| ");
    const size_t b = a == std::string_view::npos ? a : line.find(" ||| ", a + 5);
    if (b == std::string_view::npos)
      throw DataError("phrase table line " + std::to_string(line_no) + ": expected 3 fields");
    Tokens src = split_whitespace(line.substr(0, a));
    Tokens tgt = split_whitespace(line.substr(a + 5, b - a - 5));
    const auto nums = split_whitespace(line.substr(b + 5));
    if (src.empty() || tgt.empty() || nums.size() != 4)
      throw DataError("phrase table line " + std::to_string(line_no) + ": malformed entry");
    PhraseScores sc{parse_double(nums[0], "phrase table"), parse_double(nums[1], "phrase table"),
                    parse_double(nums[2], "phrase table"), parse_double(nums[3], "phrase table")};
    for (double v : {sc.phi_t_given_s, sc.phi_s_given_t, sc.lex_t_given_s, sc.lex_s_given_t}) {
      if (!(v > 0.0 && v <= 1.0))
        throw DataError("phrase table line " + std::to_string(line_no) + ": score outside (0,1]");
    }
    table.add(std::move(src), PhraseEntry{std::move(tgt), sc});
  }
  return table;
}

void PhraseTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << serialize();
}

PhraseTable PhraseTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

PhraseTable build_phrase_table(const TokenizedCorpus& corpus,
                               const std::vector<AlignmentMatrix>& alignments,
                               const LexicalTable& lexical_fwd, const LexicalTable& lexical_rev,
                               const ExtractOptions& options, Execution exec) {
  if (alignments.size() != corpus.size())
    throw UsageError("build_phrase_table: " + std::to_string(alignments.size()) +
                     " alignments for " + std::to_string(corpus.size()) + " sentence pairs");
  struct Scored {
    PhrasePair pair;
    double lex_ts;
    double lex_st;
  };
  std::vector<std::vector<Scored>> per_pair(corpus.size());
  auto work = [&](size_t k) {
    for (auto& ph : extract_phrases(corpus[k], alignments[k], options)) {
      std::vector<std::pair<int, int>> flipped;
      flipped.reserve(ph.links.size());
      for (auto [i, j] : ph.links) flipped.push_back({j, i});
      const double ts = lexical_weight(ph.pair.src, ph.pair.tgt, ph.links, lexical_fwd);
      const double st = lexical_weight(ph.pair.tgt, ph.pair.src, flipped, lexical_rev);
      per_pair[k].push_back({std::move(ph.pair), ts, st});
    }
  };
  const auto n = static_cast<std::ptrdiff_t>(corpus.size());
  if (exec == Execution::kSerial) {
    for (std::ptrdiff_t k = 0; k < n; ++k) work(k);
  } else {
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t k = 0; k < n; ++k) work(k);
  }

  struct Stats {
    size_t count = 0;
    double lex_ts = 0.0;
    double lex_st = 0.0;
  };
  std::map<PhrasePair, Stats> joint;
  std::map<Tokens, size_t> src_count, tgt_count;
  for (auto& list : per_pair) {
    for (auto& sc : list) {
      auto& st = joint[sc.pair];
      ++st.count;
      // the best-scoring internal alignment represents the pair
      st.lex_ts = std::max(st.lex_ts, sc.lex_ts);
      st.lex_st = std::max(st.lex_st, sc.lex_st);
      ++src_count[sc.pair.src];
      ++tgt_count[sc.pair.tgt];
    }
  }
  PhraseTable table;
  for (const auto& [pp, st] : joint) {
    PhraseScores scores;
    scores.phi_t_given_s = static_cast<double>(st.count) / static_cast<double>(src_count.at(pp.src));
    scores.phi_s_given_t = static_cast<double>(st.count) / static_cast<double>(tgt_count.at(pp.tgt));
    scores.lex_t_given_s = st.lex_ts;
    scores.lex_s_given_t = st.lex_st;
    table.add(pp.src, PhraseEntry{pp.tgt, scores});
  }
  return table;
}

}  // namespace smt
