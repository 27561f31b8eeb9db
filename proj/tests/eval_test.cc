// tests/eval_test.cc
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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>

#include "oracles.h"
#include "smt/error.h"

using namespace smt;

namespace {

Tokens toks(const char* s) { return split_whitespace(s); }

Tokens random_sentence(std::mt19937& rng, int max_len, int vocab) {
  Tokens s;
  for (int n = static_cast<int>(rng() % (max_len + 1)); n > 0; --n) s.push_back("w" + std::to_string(rng() % vocab));
  return s;
}

// A hypothesis that shares material with the reference: shuffled, with
// insertions and deletions.
Tokens perturb(std::mt19937& rng, const Tokens& ref, int vocab, int max_len) {
  Tokens h = ref;
  if (!h.empty() && rng() % 2) std::swap(h[rng() % h.size()], h[rng() % h.size()]);
  if (!h.empty() && rng() % 3 == 0) h.erase(h.begin() + rng() % h.size());
  if (rng() % 3 == 0) h.insert(h.begin() + (h.empty() ? 0 : rng() % h.size()), "w" + std::to_string(rng() % vocab));
  if (rng() % 4 == 0) std::reverse(h.begin(), h.end());
  if (static_cast<int>(h.size()) > max_len) h.resize(max_len);
  return h;
}

}  // namespace

TEST(Bleu, Examples) {
  EXPECT_DOUBLE_EQ(bleu_corpus({toks("a b c d")}, {toks("a b c d")}).score, 1.0);
  auto clipped = bleu_corpus({toks("the the the the")}, {toks("the cat")}, 1);
  EXPECT_DOUBLE_EQ(clipped.precisions[0], 0.25);
  auto short_hyp = bleu_corpus({toks("a b")}, {toks("a b c d")}, 2);
  EXPECT_DOUBLE_EQ(short_hyp.precisions[0], 1.0);
  EXPECT_DOUBLE_EQ(short_hyp.precisions[1], 1.0);
  EXPECT_DOUBLE_EQ(short_hyp.brevity_penalty, std::exp(-1.0));
  EXPECT_NEAR(short_hyp.score, 0.3679, 5e-5);
}

TEST(Bleu, EdgeCases) {
  EXPECT_THROW(bleu_corpus({toks("a")}, {}), DataError);
  EXPECT_EQ(bleu_corpus({Tokens{}}, {toks("a b")}).score, 0.0);
  EXPECT_EQ(bleu_corpus({toks("x y z w")}, {toks("a b c d")}).score, 0.0);
  EXPECT_EQ(brevity_penalty(0, 3), 0.0);
  EXPECT_EQ(brevity_penalty(5, 3), 1.0);
  EXPECT_EQ(brevity_penalty(3, 3), 1.0);
}

TEST(Bleu, MatchesNaiveOracle) {
  std::mt19937 rng(71);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Tokens> hyps, refs;
    for (int k = 0; k < 1 + trial % 8; ++k) {
      refs.push_back(random_sentence(rng, 12, 5));
      hyps.push_back(perturb(rng, refs.back(), 5, 12));
    }
    for (int n = 1; n <= 4; ++n) {
      auto r = bleu_corpus(hyps, refs, n);
      EXPECT_NEAR(r.score, oracle::bleu(hyps, refs, n), 1e-12);
      EXPECT_GE(r.score, 0.0);
      EXPECT_LE(r.score, 1.0);
    }
    auto shuffled_h = hyps, shuffled_r = refs;
    std::vector<size_t> order(hyps.size());
    for (size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::shuffle(order.begin(), order.end(), rng);
    for (size_t k = 0; k < order.size(); ++k) {
      shuffled_h[k] = hyps[order[k]];
      shuffled_r[k] = refs[order[k]];
    }
    EXPECT_EQ(bleu_corpus(shuffled_h, shuffled_r).score, bleu_corpus(hyps, refs).score);
    EXPECT_EQ(bleu_corpus(hyps, refs, 4, Execution::kSerial).score, bleu_corpus(hyps, refs).score);
  }
}

TEST(Bleu, ClippingNeverExceedsReferenceCounts) {
  std::mt19937 rng(73);
  for (int trial = 0; trial < 200; ++trial) {
    auto ref = random_sentence(rng, 12, 3);
    auto hyp = random_sentence(rng, 12, 3);
    auto c = ngram_counts(hyp, ref, 4);
    for (size_t n = 1; n <= 4; ++n) {
      size_t cap = 0;
      auto rg = oracle::grams(ref, n), hg = oracle::grams(hyp, n);
      for (const auto& [g, cnt] : hg) cap += std::min(cnt, rg.count(g) ? rg[g] : 0);
      EXPECT_EQ(c.matched[n - 1], cap);
      EXPECT_LE(c.matched[n - 1], c.total[n - 1]);
    }
  }
}

TEST(SentenceBleu, SmoothsHigherOrders) {
  // p1 = 1, the rest are 0 -> each smoothed to 1/(total+1)
  const double expect = std::exp((std::log(1.0) + std::log(1.0 / 2.0) + std::log(1.0 / 1.0) +
                                  std::log(1.0 / 1.0)) / 4.0) * std::exp(1.0 - 4.0 / 2.0);
  EXPECT_NEAR(sentence_bleu(toks("b a"), toks("a b c d")), expect, 1e-12);
  EXPECT_DOUBLE_EQ(sentence_bleu(toks("a b c d"), toks("a b c d")), 1.0);
  EXPECT_EQ(sentence_bleu(toks("x"), toks("a")), 0.0);  // unigram precision is never smoothed
  EXPECT_GT(sentence_bleu(toks("a x"), toks("a b")), 0.0);
}

TEST(Kendall, Examples) {
  std::vector<int> a{1, 2, 3}, b{3, 2, 1}, c{1, 3, 2}, one{4};
  EXPECT_DOUBLE_EQ(*kendall_tau(a), 1.0);
  EXPECT_DOUBLE_EQ(*kendall_tau(b), -1.0);
  EXPECT_DOUBLE_EQ(*kendall_tau(c), 1.0 / 3.0);
  EXPECT_FALSE(kendall_tau(one).has_value());
  EXPECT_FALSE(kendall_tau(std::vector<int>{}).has_value());
}

TEST(Kendall, MatchesQuadraticOracle) {
  std::mt19937 rng(75);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<int> v(2 + trial % 60);
    for (size_t k = 0; k < v.size(); ++k) v[k] = static_cast<int>(k * 3);
    std::shuffle(v.begin(), v.end(), rng);
    const double t = *kendall_tau(v);
    EXPECT_NEAR(t, oracle::kendall_tau(v), 1e-12);
    std::reverse(v.begin(), v.end());
    EXPECT_NEAR(*kendall_tau(v), -t, 1e-12);
  }
}

TEST(Ribes, Examples) {
  auto same = ribes_sentence(toks("a b c d"), toks("a b c d"));
  EXPECT_DOUBLE_EQ(same.score, 1.0);
  EXPECT_DOUBLE_EQ(same.tau, 1.0);
  auto rev = ribes_sentence(toks("c b a"), toks("a b c"));
  EXPECT_DOUBLE_EQ(rev.tau, -1.0);
  EXPECT_DOUBLE_EQ(rev.score, 0.0);
  auto gap = ribes_sentence(toks("a c"), toks("a b c"));
  EXPECT_DOUBLE_EQ(gap.nkt, 1.0);
  EXPECT_DOUBLE_EQ(gap.p1, 1.0);
  EXPECT_DOUBLE_EQ(gap.bp, std::exp(-0.5));
  EXPECT_NEAR(gap.score, 0.9512, 5e-5);
  EXPECT_EQ(ribes_sentence(toks("a"), toks("a")).score, 0.0);  // one match is not enough
  EXPECT_THROW(ribes_sentence(toks("a"), toks("a"), {1.5, 0.1}), UsageError);
}

TEST(Ribes, DuplicatesUseBigramContext) {
  // the first "the" is placed by its right bigram "the cat"; the second one
  // resolves through "saw the" to the same reference slot and is dropped
  EXPECT_EQ(ribes_alignment(toks("the cat saw the dog"), toks("the dog saw the cat")),
            (std::vector<int>{3, 4, 2, 1}));
  EXPECT_EQ(ribes_alignment(toks("a a"), toks("a a")), (std::vector<int>{0, 1}));
  // no disambiguating context: every duplicate is skipped
  EXPECT_EQ(ribes_alignment(toks("a a a"), toks("a a a")), std::vector<int>{});
}

TEST(Ribes, MatchesOracleAndIdentities) {
  std::mt19937 rng(77);
  for (int trial = 0; trial < 500; ++trial) {
    auto ref = random_sentence(rng, 12, 4 + trial % 10);
    auto hyp = perturb(rng, ref, 14, 12);
    const RibesConfig cfg{0.25 * (trial % 5), 0.1 * (trial % 11)};
    auto r = ribes_sentence(hyp, ref, cfg);
    EXPECT_EQ(ribes_alignment(hyp, ref), oracle::ribes_alignment(hyp, ref));
    EXPECT_NEAR(r.score, oracle::ribes(hyp, ref, cfg.alpha, cfg.beta), 1e-12);
    EXPECT_DOUBLE_EQ(r.nkt, (r.tau + 1) / 2);
    if (r.matches >= 2)
      EXPECT_NEAR(r.score, r.nkt * std::pow(r.p1, cfg.alpha) * std::pow(r.bp, cfg.beta), 1e-15);
    EXPECT_GE(r.score, 0.0);
    EXPECT_LE(r.score, 1.0);
  }
}

TEST(Meteor, Examples) {
  auto same = meteor_sentence(toks("a b a c"), toks("a b a c"));
  EXPECT_EQ(same.chunks, 1u);
  EXPECT_EQ(same.penalty, 0.0);
  EXPECT_DOUBLE_EQ(same.score, 1.0);
  EXPECT_EQ(meteor_sentence(toks("x y"), toks("a b")).score, 0.0);
  auto part = meteor_sentence(toks("the cat"), toks("the cat sat"));
  EXPECT_DOUBLE_EQ(part.precision, 1.0);
  EXPECT_DOUBLE_EQ(part.recall, 2.0 / 3.0);
  EXPECT_EQ(part.chunks, 1u);
  EXPECT_NEAR(part.score, 10 * (2.0 / 3.0) / (2.0 / 3.0 + 9), 1e-15);
  EXPECT_NEAR(part.score, 0.6897, 5e-5);
  auto swapped = meteor_sentence(toks("b a"), toks("a b"));
  EXPECT_EQ(swapped.chunks, 2u);
  EXPECT_DOUBLE_EQ(swapped.penalty, 0.5);
  EXPECT_EQ(meteor_sentence({}, {}).score, 0.0);
}

TEST(Meteor, MinimizesChunksLikeExhaustiveSearch) {
  std::mt19937 rng(79);
  for (int trial = 0; trial < 400; ++trial) {
    auto ref = random_sentence(rng, 10, 3 + trial % 6);
    auto hyp = perturb(rng, ref, 8, 10);
    size_t chunks = 0;
    const double expect = oracle::meteor(hyp, ref, &chunks);
    auto m = meteor_sentence(hyp, ref);
    EXPECT_TRUE(m.exact);
    EXPECT_NEAR(m.score, expect, 1e-12) << trial;
    if (m.matches) EXPECT_EQ(m.chunks, chunks);
    EXPECT_LE(m.chunks, m.matches);
    EXPECT_NEAR(m.score, m.fmean * (1 - m.penalty), 1e-15);
  }
}

TEST(Metrics, FiftyRandomPairsAgainstOracles) {
  std::mt19937 rng(81);
  for (int k = 0; k < 50; ++k) {
    auto ref = random_sentence(rng, 12, 6);
    auto hyp = perturb(rng, ref, 6, 12);
    EXPECT_NEAR(bleu_corpus({hyp}, {ref}).score, oracle::bleu({hyp}, {ref}, 4), 1e-9);
    EXPECT_NEAR(ribes_sentence(hyp, ref).score, oracle::ribes(hyp, ref, 0.25, 0.10), 1e-9);
    EXPECT_NEAR(meteor_sentence(hyp, ref).score, oracle::meteor(hyp, ref), 1e-9);
  }
}

TEST(Metrics, CorpusAggregation) {
  std::vector<Tokens> refs{toks("a b c"), toks("d e f")};
  EXPECT_DOUBLE_EQ(metric_corpus(Metric::kRibes, refs, refs), 1.0);
  EXPECT_DOUBLE_EQ(metric_corpus(Metric::kMeteor, {toks("a b c"), toks("x y")}, refs), 0.5);
  EXPECT_DOUBLE_EQ(metric_corpus(Metric::kRibes, {toks("a b c"), toks("x y")}, refs), 0.5);
  EXPECT_DOUBLE_EQ(metric_corpus(Metric::kMeteor, {toks("x y"), toks("a b c")}, {refs[1], refs[0]}), 0.5);
  EXPECT_THROW(metric_corpus(Metric::kMeteor, {}, {}), DataError);
  EXPECT_THROW(metric_corpus(Metric::kRibes, {toks("a")}, refs), DataError);
  EXPECT_EQ(parse_metric("ribes"), Metric::kRibes);
  EXPECT_EQ(metric_name(Metric::kMeteor), "meteor");
  EXPECT_THROW(parse_metric("ter"), UsageError);
}

TEST(Metrics, IdentityScoresOne) {
  std::vector<Tokens> refs{toks("the cat sat on a mat"), toks("one two three four five")};
  auto s = evaluate_corpus(refs, refs);
  EXPECT_DOUBLE_EQ(s.bleu.score, 1.0);
  EXPECT_DOUBLE_EQ(s.ribes, 1.0);
  EXPECT_DOUBLE_EQ(s.meteor, 1.0);
  EXPECT_EQ(format_score_row(s), "100.00  1.00  1.00");
}

TEST(Report, Formats) {
  EvalSummary s;
  s.bleu.score = 0.12345;
  s.ribes = 0.5;
  s.meteor = 0.25;
  EXPECT_EQ(format_csv_row(s, "en-hi", "en->hi"), "en-hi,en->hi,12.35,0.5000,0.2500");
  const auto report = format_report(s, "en-hi", "en->hi");
  EXPECT_NE(report.find("alpha=0.25 beta=0.1"), std::string::npos) << report;
  EXPECT_NE(report.find("BLEU"), std::string::npos);
  EXPECT_NE(report.find("12.35"), std::string::npos);
}
