// include/smt/corpus.h
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

#ifndef SMT_CORPUS_H_
#define SMT_CORPUS_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace smt {

enum class Direction { kLeftToRight, kRightToLeft };

struct CodepointRange {
  char32_t first;
  char32_t last;  // inclusive
  bool contains(char32_t cp) const { return cp >= first && cp <= last; }
  bool operator==(const CodepointRange&) const = default;
};

// Script data for one language: which characters survive cleaning and
// which digit run numbers are normalized into.
struct LanguageProfile {
  std::string code;  // two-letter tag, lowercase
  std::string name;
  std::vector<CodepointRange> script_blocks;  // sorted, non-overlapping
  char32_t digit_zero = U'0';
  Direction direction = Direction::kLeftToRight;
  bool latin_side = false;

  bool in_script(char32_t cp) const;
  bool operator==(const LanguageProfile&) const = default;
};

// Throws UsageError when the block list or digit run is malformed.
void validate_profile(const LanguageProfile& profile);

// The sixteen built-in profiles (fifteen Indic languages and English).
const std::vector<LanguageProfile>& builtin_profiles();

class ProfileRegistry {
 public:
  ProfileRegistry();  // seeded with builtin_profiles()

  // Adds or replaces profiles from a JSON profile file.
  void load_file(const std::filesystem::path& path);
  void add(LanguageProfile profile);

  bool contains(std::string_view code) const;
  const LanguageProfile& at(std::string_view code) const;  // UsageError if unknown

 private:
  std::map<std::string, LanguageProfile, std::less<>> profiles_;
};

LanguageProfile parse_profile_json(std::string_view json_text, std::string_view code);

struct SentencePair {
  std::string source;
  std::string target;
  size_t line_no = 0;  // 1-based
};

struct ParallelCorpus {
  std::vector<SentencePair> pairs;
  LanguageProfile src_profile;
  LanguageProfile tgt_profile;

  size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
};

enum class Side { kSource, kTarget };

std::vector<std::string> split_whitespace(std::string_view line);
size_t count_tokens(std::string_view line);

// Reads one sentence per line. A final line without a newline counts; a
// trailing "\r" is dropped. Throws DataError on unreadable files, invalid
// UTF-8 (with file and line number) or mismatched line counts.
std::vector<std::string> read_lines(const std::filesystem::path& path);
void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines);

ParallelCorpus load_parallel(const std::filesystem::path& src_path,
                             const std::filesystem::path& tgt_path,
                             const LanguageProfile& src_profile,
                             const LanguageProfile& tgt_profile);

// Paired files "<prefix>.<src>" and "<prefix>.<tgt>".
ParallelCorpus load_parallel_prefix(const std::filesystem::path& prefix,
                                    const LanguageProfile& src_profile,
                                    const LanguageProfile& tgt_profile);

void write_parallel(const ParallelCorpus& corpus, const std::filesystem::path& src_path,
                    const std::filesystem::path& tgt_path);

struct FilterOptions {
  size_t max_len = 80;
  double max_ratio = 9.0;
};

// Drops pairs with an empty side, a side longer than max_len tokens, or a
// token-count ratio above max_ratio. Order is preserved.
ParallelCorpus filter_pairs(const ParallelCorpus& corpus, const FilterOptions& options = {});

struct CorpusStats {
  size_t pair_count = 0;
  std::map<size_t, size_t> source_lengths;  // token count -> frequency
  std::map<size_t, size_t> target_lengths;
};

CorpusStats compute_stats(const ParallelCorpus& corpus);

// Fraction of sentences on `side` with strictly fewer than `threshold` tokens.
double length_ogive(const ParallelCorpus& corpus, size_t threshold, Side side);
double length_ogive(const std::map<size_t, size_t>& histogram, size_t threshold);

}  // namespace smt

#endif  // SMT_CORPUS_H_
