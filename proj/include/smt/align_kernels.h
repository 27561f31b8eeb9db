// include/smt/align_kernels.h
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

#ifndef SMT_ALIGN_KERNELS_H_
#define SMT_ALIGN_KERNELS_H_

#include <cstdint>
#include <vector>

#include "smt/align.h"

namespace smt::em {

// Integer view of a tokenized corpus for EM. Every co-occurring
// (source word, target word) pair, NULL included, owns one parameter slot.
class AlignmentIndex {
 public:
  explicit AlignmentIndex(const TokenizedCorpus& corpus);

  struct Pair {
    int src_len = 0;  // excluding NULL
    int tgt_len = 0;
    int length_group = 0;
    // slot of (source position i, target position j) at [j * (src_len + 1) + i],
    // i = 0 is NULL
    std::vector<uint32_t> slots;
  };

  const std::vector<Pair>& pairs() const { return pairs_; }
  size_t num_slots() const { return slot_source_.size(); }
  uint32_t slot_source(size_t slot) const { return slot_source_[slot]; }
  uint32_t slot_target(size_t slot) const { return slot_target_[slot]; }
  size_t num_sources() const { return source_words_.size(); }
  const std::vector<std::string>& source_words() const { return source_words_; }
  const std::vector<std::string>& target_words() const { return target_words_; }
  // Distinct (src_len, tgt_len) combinations, indexed by Pair::length_group.
  const std::vector<std::pair<int, int>>& length_groups() const { return length_groups_; }

  std::vector<double> uniform_lexical() const;
  std::vector<double> lexical_from(const LexicalTable& table) const;
  LexicalTable to_table(const std::vector<double>& t) const;
  std::vector<std::vector<double>> uniform_distortion() const;
  Ibm2Distortion to_distortion(const std::vector<std::vector<double>>& a) const;

 private:
  std::vector<Pair> pairs_;
  std::vector<uint32_t> slot_source_;
  std::vector<uint32_t> slot_target_;
  std::vector<std::string> source_words_;  // id 0 is NULL
  std::vector<std::string> target_words_;
  std::vector<std::pair<int, int>> length_groups_;
};

struct ExpectedCounts {
  std::vector<double> lexical;                  // per slot
  std::vector<std::vector<double>> distortion;  // per length group, empty for Model 1
  double log_likelihood = 0.0;
};

// One E-step. `distortion` null means Model 1 (uniform 1/(l+1) alignment).
// The serial kernel is the reference; the parallel one computes per-pair
// posteriors concurrently and reduces them in pair order, so both return
// bit-identical counts.
ExpectedCounts estep_serial(const AlignmentIndex& index, const std::vector<double>& t,
                            const std::vector<std::vector<double>>* distortion);
ExpectedCounts estep_parallel(const AlignmentIndex& index, const std::vector<double>& t,
                              const std::vector<std::vector<double>>* distortion,
                              size_t block_size = 512);

// M-step: normalize expected counts into t(f|e) and a(i|j,l,m).
std::vector<double> normalize_lexical(const AlignmentIndex& index, const std::vector<double>& counts);
std::vector<std::vector<double>> normalize_distortion(const AlignmentIndex& index,
                                                      const std::vector<std::vector<double>>& counts);

}  // namespace smt::em

#endif  // SMT_ALIGN_KERNELS_H_
