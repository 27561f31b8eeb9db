// include/smt/preprocess.h
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

#ifndef SMT_PREPROCESS_H_
#define SMT_PREPROCESS_H_

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "smt/corpus.h"

namespace smt {

using Tokens = std::vector<std::string>;

enum class DigitScript { kNative, kLatin };

struct CleanConfig {
  LanguageProfile profile;
  DigitScript normalize_digits_to = DigitScript::kNative;
  std::map<char32_t, char32_t> punct_map;
  bool deaccent = true;
};

// Nonstandard -> standard punctuation: curly and angle quotes to ASCII
// quotes, the dash family and minus sign to '-', fullwidth ASCII
// punctuation to ASCII, double danda to danda.
const std::map<char32_t, char32_t>& default_punct_map();

// Indic profiles normalize digits into their own script, English into ASCII.
CleanConfig default_clean_config(const LanguageProfile& profile);

// Characters clean_line may emit for this config.
bool clean_allows(const CleanConfig& config, char32_t cp);

std::string clean_line(std::string_view line, const CleanConfig& config);

std::vector<std::string> clean_lines(const std::vector<std::string>& lines,
                                     const CleanConfig& config);

Tokens tokenize(std::string_view line, const LanguageProfile& profile);
std::string detokenize(const Tokens& tokens, const LanguageProfile& profile);

// Quotation marks, apostrophes and commas standing alone.
bool is_redundant_punct(std::string_view token);
Tokens strip_redundant_punct(const Tokens& tokens);

class TruecaseModel {
 public:
  // lowercased type -> surface form -> count (non-initial counts when any
  // exist, otherwise the sentence-initial ones)
  using FormCounts = std::map<std::string, size_t>;

  static TruecaseModel train(const std::vector<Tokens>& sentences);

  // Most frequent surface form; ties go to the lexicographically smallest.
  const std::string* best_form(std::string_view lowered) const;
  const std::map<std::string, FormCounts, std::less<>>& forms() const { return forms_; }
  bool empty() const { return forms_.empty(); }

  // `surface<TAB>count` lines grouped by lowercased type, best form first.
  std::string serialize() const;
  static TruecaseModel parse(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static TruecaseModel load(const std::filesystem::path& path);

  bool operator==(const TruecaseModel&) const = default;

 private:
  void rebuild_best();

  std::map<std::string, FormCounts, std::less<>> forms_;
  std::map<std::string, std::string, std::less<>> best_;
};

TruecaseModel train_truecaser(const std::vector<Tokens>& sentences);

// Rewrites the first token containing a letter to its best form. Tokens
// without Latin letters are never touched.
Tokens truecase(const Tokens& tokens, const TruecaseModel& model);

}  // namespace smt

#endif  // SMT_PREPROCESS_H_
