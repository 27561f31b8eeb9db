// bench/bench_kernels.cc
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

// Serial against OpenMP kernels on synthetic data. Thread count follows
// OMP_NUM_THREADS.
#include <benchmark/benchmark.h>

#include <random>

#include "smt/align.h"
#include "smt/align_kernels.h"
#include "smt/decode.h"
#include "smt/eval.h"
#include "smt/lm.h"
#include "smt/phrase.h"
#include "synthetic.h"

using namespace smt;

namespace {

TokenizedCorpus synthetic_corpus(size_t n) {
  std::mt19937 rng(5);
  TokenizedCorpus c;
  for (size_t k = 0; k < n; ++k) {
    auto s = synth::generate(rng);
    c.push_back({s.src, s.tgt});
  }
  return c;
}

Execution exec_of(const benchmark::State& state) {
  return state.range(1) ? Execution::kParallel : Execution::kSerial;
}

void BM_EStep(benchmark::State& state) {
  const auto corpus = synthetic_corpus(static_cast<size_t>(state.range(0)));
  em::AlignmentIndex index(corpus);
  const auto t = index.uniform_lexical();
  for (auto _ : state) {
    auto counts = state.range(1) ? em::estep_parallel(index, t, nullptr) : em::estep_serial(index, t, nullptr);
    benchmark::DoNotOptimize(counts.log_likelihood);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EStep)->ArgsProduct({{1000, 10000}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_EStepModel2(benchmark::State& state) {
  const auto corpus = synthetic_corpus(static_cast<size_t>(state.range(0)));
  em::AlignmentIndex index(corpus);
  const auto t = index.uniform_lexical();
  const auto a = index.uniform_distortion();
  for (auto _ : state) {
    auto counts = state.range(1) ? em::estep_parallel(index, t, &a) : em::estep_serial(index, t, &a);
    benchmark::DoNotOptimize(counts.log_likelihood);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EStepModel2)->ArgsProduct({{10000}, {0, 1}})->Unit(benchmark::kMillisecond);

// A small trained system shared by the decoding benchmarks.
struct System {
  PhraseTable table;
  NGramModel lm;
  std::vector<Tokens> sources;

  System() {
    const auto corpus = synthetic_corpus(500);
    auto fwd = train_ibm1(corpus, 5);
    auto rev_corpus = swap_sides(corpus);
    auto rev = train_ibm1(rev_corpus, 5);
    auto a_fwd = viterbi_align_corpus({fwd.table, std::nullopt}, corpus);
    auto a_rev = viterbi_align_corpus({rev.table, std::nullopt}, rev_corpus);
    std::vector<AlignmentMatrix> sym;
    for (size_t k = 0; k < corpus.size(); ++k)
      sym.push_back(symmetrize(a_fwd[k], a_rev[k].transposed(), Symmetrization::kGrowDiagFinalAnd));
    table = build_phrase_table(corpus, sym, fwd.table, rev.table);
    std::vector<Tokens> targets;
    for (const auto& p : corpus) targets.push_back(p.target);
    lm = train_lm(targets, 3);
    std::mt19937 rng(77);
    for (int k = 0; k < 200; ++k) sources.push_back(synth::generate(rng).src);
  }
};

const System& system_once() {
  static const System s;
  return s;
}

void BM_DecodeCorpus(benchmark::State& state) {
  const auto& s = system_once();
  DecoderConfig c;
  c.stack_size = static_cast<size_t>(state.range(0));
  for (auto _ : state) {
    auto r = decode_corpus(s.sources, s.table, s.lm, FeatureWeights{}, c, exec_of(state));
    benchmark::DoNotOptimize(r.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(s.sources.size()));
}
BENCHMARK(BM_DecodeCorpus)->ArgsProduct({{10, 100}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_Metrics(benchmark::State& state) {
  std::mt19937 rng(9);
  std::vector<Tokens> hyps, refs;
  for (int k = 0; k < 2000; ++k) {
    auto s = synth::generate(rng);
    refs.push_back(s.tgt);
    std::shuffle(s.tgt.begin(), s.tgt.end(), rng);
    hyps.push_back(s.tgt);
  }
  for (auto _ : state) {
    auto r = evaluate_corpus(hyps, refs, {}, exec_of(state));
    benchmark::DoNotOptimize(r.meteor);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(hyps.size()));
}
BENCHMARK(BM_Metrics)->ArgsProduct({{2000}, {0, 1}})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
