// tests/phrase_test.cc
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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "oracles.h"
#include "smt/error.h"
#include "test_util.h"

using namespace smt;

namespace {

AlignmentMatrix matrix(int l, int m, std::initializer_list<std::pair<int, int>> links) {
  AlignmentMatrix a{l, m, {}};
  for (auto [i, j] : links) a.add(i, j);
  return a;
}

TokenizedPair pair_of(const char* s, const char* t) {
  return {split_whitespace(s), split_whitespace(t)};
}

std::set<PhrasePair> pairs_of(const std::vector<ExtractedPhrase>& v) {
  std::set<PhrasePair> out;
  for (const auto& p : v) out.insert(p.pair);
  return out;
}

TokenizedPair random_pair(std::mt19937& rng, int max_len, int vocab) {
  std::uniform_int_distribution<int> len(1, max_len), w(0, vocab - 1);
  TokenizedPair p;
  for (int i = len(rng); i > 0; --i) p.source.push_back("s" + std::to_string(w(rng)));
  for (int i = len(rng); i > 0; --i) p.target.push_back("t" + std::to_string(w(rng)));
  return p;
}

AlignmentMatrix random_alignment(std::mt19937& rng, const TokenizedPair& p, double density) {
  std::bernoulli_distribution on(density);
  AlignmentMatrix a{static_cast<int>(p.source.size()), static_cast<int>(p.target.size()), {}};
  for (int i = 0; i < a.src_len; ++i)
    for (int j = 0; j < a.tgt_len; ++j)
      if (on(rng)) a.add(i, j);
  return a;
}

LexicalTable random_lexicon(std::mt19937& rng, const std::string& sp, const std::string& tp,
                            int vocab) {
  std::uniform_real_distribution<double> u(0.01, 1.0);
  LexicalTable t;
  for (int e = -1; e < vocab; ++e)
    for (int f = 0; f < vocab; ++f) {
      if (rng() % 3 == 0) continue;  // leave holes so the floor is exercised
      t.set(e < 0 ? std::string(kNullWord) : sp + std::to_string(e), tp + std::to_string(f), u(rng));
    }
  return t;
}

// Koehn lexical weight written out independently.
double lex_oracle(const Tokens& src, const Tokens& tgt, const std::set<std::pair<int, int>>& links,
                  const LexicalTable& table) {
  double w = 1.0;
  for (size_t j = 0; j < tgt.size(); ++j) {
    std::vector<double> ps;
    for (auto [i, jj] : links)
      if (jj == static_cast<int>(j)) ps.push_back(std::max(1e-7, table.prob(src[i], tgt[j])));
    if (ps.empty()) {
      w *= std::max(1e-7, table.prob(kNullWord, tgt[j]));
    } else {
      double s = 0.0;
      for (double p : ps) s += p;
      w *= s / static_cast<double>(ps.size());
    }
  }
  return w;
}

}  // namespace

TEST(Extract, MonotoneExample) {
  auto out = extract_phrases(pair_of("a b", "x y"), matrix(2, 2, {{0, 0}, {1, 1}}), {2, true});
  EXPECT_EQ(pairs_of(out), (std::set<PhrasePair>{{{"a"}, {"x"}}, {{"b"}, {"y"}},
                                                 {{"a", "b"}, {"x", "y"}}}));
}

TEST(Extract, CrossedExample) {
  auto out = extract_phrases(pair_of("a b", "x y"), matrix(2, 2, {{0, 1}, {1, 0}}), {2, true});
  EXPECT_EQ(pairs_of(out), (std::set<PhrasePair>{{{"a"}, {"y"}}, {{"b"}, {"x"}},
                                                 {{"a", "b"}, {"x", "y"}}}));
}

TEST(Extract, EmptyAlignmentAndMismatch) {
  EXPECT_TRUE(extract_phrases(pair_of("a b", "x y"), matrix(2, 2, {})).empty());
  EXPECT_THROW(extract_phrases(pair_of("a b", "x y"), matrix(3, 2, {})), UsageError);
}

TEST(Extract, UnalignedTargetEdgeExpansion) {
  auto p = pair_of("a", "x y");
  auto a = matrix(1, 2, {{0, 0}});
  EXPECT_EQ(pairs_of(extract_phrases(p, a)),
            (std::set<PhrasePair>{{{"a"}, {"x"}}, {{"a"}, {"x", "y"}}}));
  EXPECT_EQ(pairs_of(extract_phrases(p, a, {7, false})), (std::set<PhrasePair>{{{"a"}, {"x"}}}));
}

TEST(Extract, MatchesExhaustiveEnumeration) {
  std::mt19937 rng(51);
  for (int trial = 0; trial < 600; ++trial) {
    auto p = random_pair(rng, 10, 6);
    auto a = random_alignment(rng, p, trial % 2 ? 0.15 : 0.3);
    const int max_len = 1 + trial % 7;
    for (bool expand : {true, false}) {
      auto got = extract_phrases(p, a, {max_len, expand});
      std::set<PhraseSpan> spans;
      for (const auto& ph : got) {
        EXPECT_TRUE(spans.insert(ph.span).second) << "duplicate span";
        EXPECT_EQ(ph.pair.src.size(), static_cast<size_t>(ph.span.src_end - ph.span.src_begin + 1));
        EXPECT_EQ(ph.pair.tgt.size(), static_cast<size_t>(ph.span.tgt_end - ph.span.tgt_begin + 1));
        EXPECT_FALSE(ph.links.empty());
        for (auto [i, j] : ph.links)
          EXPECT_TRUE(a.contains(i + ph.span.src_begin, j + ph.span.tgt_begin));
      }
      EXPECT_EQ(spans, oracle::consistent_spans(a, max_len, !expand)) << "trial " << trial;
      EXPECT_TRUE(std::is_sorted(got.begin(), got.end(),
                                 [](const auto& x, const auto& y) { return x.span < y.span; }));
    }
  }
}

TEST(PhraseTable, ExampleScores) {
  TokenizedCorpus corpus{pair_of("a b", "x y")};
  std::vector<AlignmentMatrix> al{matrix(2, 2, {{0, 0}, {1, 1}})};
  LexicalTable fwd, rev;
  fwd.set("a", "x", 0.7);
  fwd.set("b", "y", 0.4);
  rev.set("x", "a", 0.6);
  rev.set("y", "b", 0.9);
  auto table = build_phrase_table(corpus, al, fwd, rev);
  const auto* ax = table.find(Tokens{"a"});
  ASSERT_NE(ax, nullptr);
  ASSERT_EQ(ax->size(), 1u);
  EXPECT_EQ((*ax)[0].tgt, Tokens{"x"});
  EXPECT_DOUBLE_EQ((*ax)[0].scores.phi_t_given_s, 1.0);
  EXPECT_DOUBLE_EQ((*ax)[0].scores.lex_t_given_s, 0.7);
  EXPECT_DOUBLE_EQ((*ax)[0].scores.lex_s_given_t, 0.6);
  const auto* ab = table.find(Tokens{"a", "b"});
  ASSERT_NE(ab, nullptr);
  EXPECT_DOUBLE_EQ((*ab)[0].scores.phi_t_given_s, 1.0);
  EXPECT_DOUBLE_EQ((*ab)[0].scores.phi_s_given_t, 1.0);
  EXPECT_DOUBLE_EQ((*ab)[0].scores.lex_t_given_s, 0.7 * 0.4);
  EXPECT_EQ(table.max_source_len(), 2);
  EXPECT_EQ(table.find(Tokens{"q"}), nullptr);
}

TEST(PhraseTable, CountRatios) {
  TokenizedCorpus corpus{pair_of("a", "x"), pair_of("a", "x"), pair_of("a", "z")};
  std::vector<AlignmentMatrix> al(3, matrix(1, 1, {{0, 0}}));
  auto table = build_phrase_table(corpus, al, {}, {});
  const auto* e = table.find(Tokens{"a"});
  ASSERT_NE(e, nullptr);
  ASSERT_EQ(e->size(), 2u);
  EXPECT_EQ((*e)[0].tgt, Tokens{"x"});
  EXPECT_DOUBLE_EQ((*e)[0].scores.phi_t_given_s, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ((*e)[1].scores.phi_t_given_s, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ((*e)[1].scores.phi_s_given_t, 1.0);
  // empty lexicons fall to the floor
  EXPECT_DOUBLE_EQ((*e)[0].scores.lex_t_given_s, 1e-7);
}

TEST(PhraseTable, LexicalWeightAveragesAndUsesNull) {
  LexicalTable t;
  t.set("a", "x", 0.2);
  t.set("b", "x", 0.6);
  t.set(std::string(kNullWord), "y", 0.5);
  EXPECT_DOUBLE_EQ(lexical_weight({"a", "b"}, {"x", "y"}, {{0, 0}, {1, 0}}, t), 0.4 * 0.5);
  EXPECT_DOUBLE_EQ(lexical_weight({"a"}, {"x"}, {{0, 0}}, t), 0.2);
}

TEST(PhraseTable, MatchesOracleOnRandomCorpora) {
  std::mt19937 rng(53);
  for (int trial = 0; trial < 8; ++trial) {
    TokenizedCorpus corpus;
    std::vector<AlignmentMatrix> als;
    for (int k = 0; k < 25; ++k) {
      corpus.push_back(random_pair(rng, 6, 4));
      als.push_back(random_alignment(rng, corpus.back(), 0.3));
    }
    auto fwd = random_lexicon(rng, "s", "t", 4);
    auto rev = random_lexicon(rng, "t", "s", 4);
    const int max_len = 3;
    std::map<PhrasePair, size_t> joint;
    std::map<Tokens, size_t> cs, ct;
    std::map<PhrasePair, std::pair<double, double>> lex;
    for (size_t k = 0; k < corpus.size(); ++k) {
      for (const auto& sp : oracle::consistent_spans(als[k], max_len, false)) {
        PhrasePair pp;
        pp.src.assign(corpus[k].source.begin() + sp.src_begin, corpus[k].source.begin() + sp.src_end + 1);
        pp.tgt.assign(corpus[k].target.begin() + sp.tgt_begin, corpus[k].target.begin() + sp.tgt_end + 1);
        std::set<std::pair<int, int>> in, flipped;
        for (auto [i, j] : als[k].links)
          if (i >= sp.src_begin && i <= sp.src_end && j >= sp.tgt_begin && j <= sp.tgt_end) {
            in.insert({i - sp.src_begin, j - sp.tgt_begin});
            flipped.insert({j - sp.tgt_begin, i - sp.src_begin});
          }
        ++joint[pp];
        ++cs[pp.src];
        ++ct[pp.tgt];
        auto& [ts, st] = lex[pp];
        ts = std::max(ts, lex_oracle(pp.src, pp.tgt, in, fwd));
        st = std::max(st, lex_oracle(pp.tgt, pp.src, flipped, rev));
      }
    }
    auto table = build_phrase_table(corpus, als, fwd, rev, {max_len, true});
    EXPECT_EQ(table.size(), joint.size());
    for (const auto& [pp, c] : joint) {
      const auto* list = table.find(pp.src);
      ASSERT_NE(list, nullptr);
      auto it = std::find_if(list->begin(), list->end(), [&](const auto& e) { return e.tgt == pp.tgt; });
      ASSERT_NE(it, list->end());
      EXPECT_NEAR(it->scores.phi_t_given_s, double(c) / double(cs[pp.src]), 1e-15);
      EXPECT_NEAR(it->scores.phi_s_given_t, double(c) / double(ct[pp.tgt]), 1e-15);
      EXPECT_NEAR(it->scores.lex_t_given_s, lex[pp].first, 1e-15);
      EXPECT_NEAR(it->scores.lex_s_given_t, lex[pp].second, 1e-15);
    }
    for (const auto& [src, list] : table.entries()) {
      double sum = 0.0;
      for (const auto& e : list) {
        sum += e.scores.phi_t_given_s;
        for (double v : {e.scores.phi_t_given_s, e.scores.phi_s_given_t, e.scores.lex_t_given_s,
                         e.scores.lex_s_given_t}) {
          EXPECT_GT(v, 0.0);
          EXPECT_LE(v, 1.0);
        }
      }
      EXPECT_NEAR(sum, 1.0, 1e-9);
      EXPECT_TRUE(std::is_sorted(list.begin(), list.end(),
                                 [](const auto& a, const auto& b) { return a.tgt < b.tgt; }));
    }
    // pair order and execution mode do not matter
    std::vector<size_t> order(corpus.size());
    for (size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::shuffle(order.begin(), order.end(), rng);
    TokenizedCorpus c2;
    std::vector<AlignmentMatrix> a2;
    for (size_t k : order) {
      c2.push_back(corpus[k]);
      a2.push_back(als[k]);
    }
    EXPECT_EQ(build_phrase_table(c2, a2, fwd, rev, {max_len, true}, Execution::kSerial), table);
  }
}

TEST(PhraseTable, SerializeFormatAndRoundTrip) {
  TokenizedCorpus corpus{pair_of("a b", "x y"), pair_of("a", "z")};
  std::vector<AlignmentMatrix> al{matrix(2, 2, {{0, 0}, {1, 1}}), matrix(1, 1, {{0, 0}})};
  LexicalTable fwd;
  fwd.set("a", "x", 1.0 / 3.0);
  auto table = build_phrase_table(corpus, al, fwd, fwd);
  const std::string text = table.serialize();
  EXPECT_NE(text.find("a ||| x ||| 0.5 1 0.333333 1e-07\n"), std::string::npos) << text;
  auto back = PhraseTable::parse(text);
  EXPECT_EQ(back.serialize(), text);
  testutil::TempDir dir;
  table.save(dir / "pt");
  EXPECT_EQ(PhraseTable::load(dir / "pt").serialize(), text);
  EXPECT_THROW(PhraseTable::parse("a ||| x ||| 1 1 1\n"), DataError);
  EXPECT_THROW(PhraseTable::parse("a ||| ||| 1 1 1 1\n"), DataError);
  EXPECT_THROW(PhraseTable::parse("a ||| x ||| 1 1 1 0\n"), DataError);
}

TEST(PhraseTable, AlignmentCountMismatch) {
  EXPECT_THROW(build_phrase_table({pair_of("a", "x")}, {}, {}, {}), UsageError);
}
