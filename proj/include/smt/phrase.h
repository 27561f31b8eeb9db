// include/smt/phrase.h
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

#ifndef SMT_PHRASE_H_
#define SMT_PHRASE_H_

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "smt/align.h"

namespace smt {

struct PhrasePair {
  Tokens src;
  Tokens tgt;
  auto operator<=>(const PhrasePair&) const = default;
};

// Inclusive, 0-based spans.
struct PhraseSpan {
  int src_begin = 0;
  int src_end = 0;
  int tgt_begin = 0;
  int tgt_end = 0;
  auto operator<=>(const PhraseSpan&) const = default;
};

struct ExtractedPhrase {
  PhrasePair pair;
  PhraseSpan span;
  std::vector<std::pair<int, int>> links;  // relative to (src_begin, tgt_begin)
};

struct ExtractOptions {
  int max_len = 7;
  bool expand_unaligned = true;  // grow target spans over unaligned edge words
};

// All alignment-consistent phrase pairs, ordered by span.
std::vector<ExtractedPhrase> extract_phrases(const TokenizedPair& pair,
                                             const AlignmentMatrix& alignment,
                                             const ExtractOptions& options = {});

struct PhraseScores {
  double phi_t_given_s = 1.0;
  double phi_s_given_t = 1.0;
  double lex_t_given_s = 1.0;
  double lex_s_given_t = 1.0;
  bool operator==(const PhraseScores&) const = default;
};

struct PhraseEntry {
  Tokens tgt;
  PhraseScores scores;
  bool operator==(const PhraseEntry&) const = default;
};

struct TokensLess {
  using is_transparent = void;
  bool operator()(std::span<const std::string> a, std::span<const std::string> b) const {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
  }
};

class PhraseTable {
 public:
  using Entries = std::map<Tokens, std::vector<PhraseEntry>, TokensLess>;

  void add(Tokens src, PhraseEntry entry);  // keeps targets sorted
  const std::vector<PhraseEntry>* find(std::span<const std::string> src) const;
  const Entries& entries() const { return entries_; }
  size_t size() const;
  int max_source_len() const { return max_src_len_; }

  // `src ||| tgt ||| phi(t|s) phi(s|t) lex(t|s) lex(s|t)`, 6 significant digits.
  std::string serialize() const;
  static PhraseTable parse(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static PhraseTable load(const std::filesystem::path& path);

  bool operator==(const PhraseTable& other) const { return entries_ == other.entries_; }

 private:
  Entries entries_;
  int max_src_len_ = 0;
};

// Lexical weight of `tgt` given `src` under the within-phrase links;
// unaligned target words are scored against NULL.
double lexical_weight(const Tokens& src, const Tokens& tgt,
                      const std::vector<std::pair<int, int>>& links, const LexicalTable& table);

PhraseTable build_phrase_table(const TokenizedCorpus& corpus,
                               const std::vector<AlignmentMatrix>& alignments,
                               const LexicalTable& lexical_fwd, const LexicalTable& lexical_rev,
                               const ExtractOptions& options = {},
                               Execution exec = Execution::kParallel);

}  // namespace smt

#endif  // SMT_PHRASE_H_
