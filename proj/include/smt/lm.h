// include/smt/lm.h
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

#ifndef SMT_LM_H_
#define SMT_LM_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "smt/preprocess.h"

namespace smt {

inline constexpr std::string_view kBos = "<s>";
inline constexpr std::string_view kEos = "</s>";
inline constexpr std::string_view kUnk = "<unk>";

enum class Smoothing { kNone, kWittenBell };

// n-gram language model. Witten-Bell models are held in backoff form:
// every observed n-gram stores its interpolated probability and every
// observed context its backoff weight T(h) / (c(h) + T(h)). Unseen words
// share the single <unk> type at the bottom of the recursion.
class NGramModel {
 public:
  using WordId = uint32_t;
  static constexpr WordId kUnkId = 0;
  static constexpr WordId kBosId = 1;
  static constexpr WordId kEosId = 2;

  NGramModel() = default;  // empty; use train() or load()

  static NGramModel train(const std::vector<Tokens>& sentences, int order,
                          Smoothing smoothing = Smoothing::kWittenBell);

  int order() const { return order_; }
  Smoothing smoothing() const { return smoothing_; }

  // Observed tokens plus </s>; excludes <s> and <unk>.
  std::vector<std::string> vocabulary() const;

  WordId id(std::string_view word) const;  // kUnkId when unknown
  const std::string& word(WordId id) const { return words_[id]; }

  // P(word | context). The context is cut to its last order-1 tokens and
  // left-padded with <s> when shorter.
  double prob(std::string_view word, std::span<const std::string> context) const;
  double prob(WordId word, std::span<const WordId> context) const;

  // Natural-log probability of the sentence and its end marker.
  double logprob_sentence(const Tokens& tokens) const;

  // Decoder interface: a state is the last order-1 word ids.
  std::vector<WordId> start_state() const;
  double score_word(std::vector<WordId>& state, WordId word) const;  // ln P, advances state
  double score_end(const std::vector<WordId>& state) const;

  std::string to_arpa() const;
  static NGramModel from_arpa(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static NGramModel load(const std::filesystem::path& path);

  // Observed counts (trained models only).
  size_t count(std::span<const std::string> ngram) const;

 private:
  struct Entry {
    double log10_prob = 0.0;
    double log10_backoff = 0.0;
  };
  struct ContextStats {
    size_t total = 0;
    size_t types = 0;
  };
  using Key = std::string;  // packed word ids

  WordId intern(std::string_view word);
  static Key pack(std::span<const WordId> ids);
  std::vector<WordId> full_context(std::span<const WordId> context) const;
  double backoff_prob(WordId word, std::span<const WordId> context) const;
  double ml_prob(WordId word, std::span<const WordId> context) const;
  void compile_witten_bell();

  int order_ = 1;
  Smoothing smoothing_ = Smoothing::kWittenBell;
  std::vector<std::string> words_;
  std::unordered_map<std::string, WordId> ids_;
  // Index n-1 holds n-grams of order n.
  std::vector<std::unordered_map<Key, size_t>> counts_;
  std::vector<std::unordered_map<Key, ContextStats>> contexts_;
  std::vector<std::unordered_map<Key, Entry>> table_;
};

NGramModel train_lm(const std::vector<Tokens>& sentences, int order,
                    Smoothing smoothing = Smoothing::kWittenBell);

}  // namespace smt

#endif  // SMT_LM_H_
