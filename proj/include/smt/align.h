// include/smt/align.h
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

#ifndef SMT_ALIGN_H_
#define SMT_ALIGN_H_

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "smt/preprocess.h"

namespace smt {

// Reserved source word every target word may align to. Tokenization splits
// angle brackets off, so no corpus token can collide with it.
inline constexpr std::string_view kNullWord = "<null>";

struct TokenizedPair {
  Tokens source;
  Tokens target;
};
using TokenizedCorpus = std::vector<TokenizedPair>;

TokenizedCorpus swap_sides(const TokenizedCorpus& corpus);

enum class Execution { kSerial, kParallel };

// t(target | source), source may be kNullWord.
class LexicalTable {
 public:
  using Row = std::map<std::string, double, std::less<>>;

  double prob(std::string_view source, std::string_view target) const;  // 0 when absent
  void set(const std::string& source, const std::string& target, double p);
  const std::map<std::string, Row, std::less<>>& rows() const { return rows_; }
  size_t size() const;

  // `source<TAB>target<TAB>prob`, rows sorted, probabilities exact.
  std::string serialize() const;
  static LexicalTable parse(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static LexicalTable load(const std::filesystem::path& path);

  bool operator==(const LexicalTable&) const = default;

 private:
  std::map<std::string, Row, std::less<>> rows_;
};

// a(i | j, l, m) with i = -1 for NULL; unseen length pairs are uniform.
class Ibm2Distortion {
 public:
  double prob(int src_pos, int tgt_pos, int src_len, int tgt_len) const;
  // Layout per (l, m): [j * (l + 1) + (i + 1)].
  std::map<std::pair<int, int>, std::vector<double>>& tables() { return tables_; }
  const std::map<std::pair<int, int>, std::vector<double>>& tables() const { return tables_; }

 private:
  std::map<std::pair<int, int>, std::vector<double>> tables_;
};

struct Ibm1Result {
  LexicalTable table;
  std::vector<double> log_likelihood;  // natural log, one per E-step
};

struct Ibm2Result {
  LexicalTable table;
  Ibm2Distortion distortion;
  std::vector<double> log_likelihood;
};

// IBM Model 1 by EM from t0(f|e) = 1/|targets co-occurring with e|.
Ibm1Result train_ibm1(const TokenizedCorpus& corpus, int iterations,
                      Execution exec = Execution::kParallel);

// IBM Model 2 seeded with a Model 1 table and uniform distortion.
Ibm2Result train_ibm2(const TokenizedCorpus& corpus, int iterations, const LexicalTable& init,
                      Execution exec = Execution::kParallel);

struct AlignmentMatrix {
  int src_len = 0;
  int tgt_len = 0;
  std::set<std::pair<int, int>> links;  // (source index, target index)

  bool contains(int i, int j) const { return links.count({i, j}) > 0; }
  void add(int i, int j);  // throws UsageError when out of range
  AlignmentMatrix transposed() const;
  bool operator==(const AlignmentMatrix&) const = default;
};

struct AlignmentModel {
  LexicalTable lexical;
  std::optional<Ibm2Distortion> distortion;
};

// Each target word links to its best source word, or to nothing when NULL
// wins. Ties go to NULL, then to the smallest source index.
AlignmentMatrix viterbi_align(const AlignmentModel& model, const TokenizedPair& pair);

std::vector<AlignmentMatrix> viterbi_align_corpus(const AlignmentModel& model,
                                                  const TokenizedCorpus& corpus,
                                                  Execution exec = Execution::kParallel);

enum class Symmetrization {
  kIntersection,
  kUnion,
  kGrowDiag,
  kGrowDiagFinal,     // final step adds union points with either word unaligned
  kGrowDiagFinalAnd,  // final step requires both words unaligned
};

Symmetrization parse_symmetrization(std::string_view name);
std::string_view symmetrization_name(Symmetrization h);

// `rev` must already be in source-target orientation.
AlignmentMatrix symmetrize(const AlignmentMatrix& fwd, const AlignmentMatrix& rev,
                           Symmetrization heuristic);

// Pharaoh format: space-separated `i-j` pairs, 0-based, source-target.
std::string to_pharaoh(const AlignmentMatrix& a);
AlignmentMatrix parse_pharaoh(std::string_view line, int src_len, int tgt_len);

}  // namespace smt

#endif  // SMT_ALIGN_H_
