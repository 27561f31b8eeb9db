// tests/corpus_test.cc
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

#include "smt/corpus.h"

#include <gtest/gtest.h>

#include <random>

#include "smt/error.h"
#include "test_util.h"

using namespace smt;
using testutil::TempDir;
using testutil::write_text;
using testutil::read_text;

namespace {

ParallelCorpus make_corpus(const std::vector<std::pair<std::string, std::string>>& pairs) {
  ParallelCorpus c;
  size_t n = 0;
  for (const auto& [s, t] : pairs) c.pairs.push_back({s, t, ++n});
  return c;
}

std::string words(size_t n) {
  std::string out;
  for (size_t i = 0; i < n; ++i) out += (i ? " w" : "w") + std::to_string(i);
  return out;
}

}  // namespace

TEST(Profiles, BuiltinsAreValid) {
  const auto& all = builtin_profiles();
  ASSERT_EQ(all.size(), 16u);
  int latin = 0;
  for (const auto& p : all) {
    EXPECT_NO_THROW(validate_profile(p)) << p.code;
    EXPECT_EQ(p.code.size(), 2u);
    if (p.latin_side) ++latin;
  }
  EXPECT_EQ(latin, 1);
  ProfileRegistry reg;
  EXPECT_EQ(reg.at("hi").digit_zero, U'०');
  EXPECT_EQ(reg.at("ur").direction, Direction::kRightToLeft);
  EXPECT_EQ(reg.at("en").digit_zero, U'0');
  EXPECT_TRUE(reg.at("ta").in_script(U'க'));
  EXPECT_FALSE(reg.at("ta").in_script(U'a'));
  EXPECT_THROW(reg.at("xx"), UsageError);
}

TEST(Profiles, ValidationRejectsBadData) {
  LanguageProfile p{"zz", "Test", {{0x100, 0x1FF}, {0x180, 0x2FF}}, U'0'};
  EXPECT_THROW(validate_profile(p), UsageError);  // overlapping
  p.script_blocks = {};
  EXPECT_THROW(validate_profile(p), UsageError);
  p.script_blocks = {{0x100, 0x1FF}};
  p.digit_zero = U'5';  // not the start of a digit run
  EXPECT_THROW(validate_profile(p), UsageError);
}

TEST(Profiles, LoadFromFile) {
  TempDir dir;
  write_text(dir / "p.json", R"({"profiles":[{"code":"zz","name":"Test",
    "script_blocks":[["0900","097F"]],"digit_zero":"0966","direction":"rtl","latin_side":false}]})");
  ProfileRegistry reg;
  reg.load_file(dir / "p.json");
  ASSERT_TRUE(reg.contains("zz"));
  EXPECT_EQ(reg.at("zz").direction, Direction::kRightToLeft);
  EXPECT_EQ(reg.at("zz").script_blocks.front().first, 0x0900u);
  write_text(dir / "bad.json", R"({"profiles":[{"code":"zz"}]})");
  EXPECT_THROW(reg.load_file(dir / "bad.json"), UsageError);
}

TEST(LoadParallel, ZipsLines) {
  TempDir dir;
  write_text(dir / "c.en", "a b\nc d\n");
  write_text(dir / "c.hi", "x\ny z\n");
  ProfileRegistry reg;
  auto c = load_parallel(dir / "c.en", dir / "c.hi", reg.at("en"), reg.at("hi"));
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.pairs[1].source, "c d");
  EXPECT_EQ(c.pairs[1].target, "y z");
  EXPECT_EQ(c.pairs[0].line_no, 1u);
  EXPECT_EQ(c.pairs[1].line_no, 2u);
}

TEST(LoadParallel, LineCountMismatchNamesCounts) {
  TempDir dir;
  write_text(dir / "c.en", "a\nb\n");
  write_text(dir / "c.hi", "x\ny\nz\n");
  ProfileRegistry reg;
  try {
    load_parallel(dir / "c.en", dir / "c.hi", reg.at("en"), reg.at("hi"));
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line count mismatch 2 vs 3"), std::string::npos) << e.what();
  }
}

TEST(LoadParallel, EmptyFilesGiveEmptyCorpus) {
  TempDir dir;
  write_text(dir / "c.en", "");
  write_text(dir / "c.hi", "");
  ProfileRegistry reg;
  auto c = load_parallel(dir / "c.en", dir / "c.hi", reg.at("en"), reg.at("hi"));
  EXPECT_TRUE(c.empty());
}

TEST(LoadParallel, InvalidUtf8ReportsLine) {
  TempDir dir;
  write_text(dir / "c.en", "ok\nbad \xC3\x28 here\n");
  write_text(dir / "c.hi", "x\ny\n");
  ProfileRegistry reg;
  try {
    load_parallel(dir / "c.en", dir / "c.hi", reg.at("en"), reg.at("hi"));
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(LoadParallel, MissingFileIsDataError) {
  TempDir dir;
  ProfileRegistry reg;
  EXPECT_THROW(load_parallel(dir / "no.en", dir / "no.hi", reg.at("en"), reg.at("hi")), DataError);
}

TEST(LoadParallel, WriteBackReproducesBytes) {
  TempDir dir;
  const std::string src = "one two\n\nthree  four\n", tgt = "x\ny\nz\n";
  write_text(dir / "c.en", src);
  write_text(dir / "c.hi", tgt);
  ProfileRegistry reg;
  auto c = load_parallel(dir / "c.en", dir / "c.hi", reg.at("en"), reg.at("hi"));
  write_parallel(c, dir / "o.en", dir / "o.hi");
  EXPECT_EQ(read_text(dir / "o.en"), src);
  EXPECT_EQ(read_text(dir / "o.hi"), tgt);
  // a missing final newline is normalized
  write_text(dir / "d.en", "a\nb");
  write_text(dir / "d.hi", "x\ny");
  auto d = load_parallel(dir / "d.en", dir / "d.hi", reg.at("en"), reg.at("hi"));
  ASSERT_EQ(d.size(), 2u);
  write_parallel(d, dir / "p.en", dir / "p.hi");
  EXPECT_EQ(read_text(dir / "p.en"), "a\nb\n");
}

TEST(Filter, EmptySideDropped) {
  auto c = make_corpus({{"a b", ""}, {"a", "x"}});
  auto f = filter_pairs(c);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_EQ(f.pairs[0].source, "a");
}

TEST(Filter, LengthRule) {
  auto c = make_corpus({{words(81), words(10)}, {words(80), words(10)}});
  auto f = filter_pairs(c, {80, 9.0});
  ASSERT_EQ(f.size(), 1u);
  EXPECT_EQ(f.pairs[0].line_no, 2u);
}

TEST(Filter, RatioBoundary) {
  auto c = make_corpus({{words(10), words(1)}, {words(9), words(1)}, {words(1), words(10)}});
  auto f = filter_pairs(c, {80, 9.0});
  ASSERT_EQ(f.size(), 1u);
  EXPECT_EQ(f.pairs[0].line_no, 2u);
}

TEST(Filter, IdempotentAndOrderPreserving) {
  std::mt19937 rng(7);
  ParallelCorpus c;
  for (size_t i = 0; i < 200; ++i)
    c.pairs.push_back({words(rng() % 30), words(rng() % 30), i + 1});
  auto once = filter_pairs(c, {20, 3.0});
  auto twice = filter_pairs(once, {20, 3.0});
  ASSERT_EQ(once.size(), twice.size());
  for (size_t i = 0; i < once.size(); ++i) EXPECT_EQ(once.pairs[i].line_no, twice.pairs[i].line_no);
  for (size_t i = 1; i < once.size(); ++i) EXPECT_LT(once.pairs[i - 1].line_no, once.pairs[i].line_no);
}

TEST(Filter, BadParameters) {
  auto c = make_corpus({{"a", "b"}});
  EXPECT_THROW(filter_pairs(c, {0, 9.0}), UsageError);
  EXPECT_THROW(filter_pairs(c, {80, 0.5}), UsageError);
}

TEST(Ogive, Examples) {
  auto c = make_corpus({{words(2), "x"}, {words(3), "x"}, {words(3), "x"}, {words(5), "x"}});
  EXPECT_DOUBLE_EQ(length_ogive(c, 4, Side::kSource), 0.75);
  EXPECT_DOUBLE_EQ(length_ogive(c, 6, Side::kSource), 1.0);
  EXPECT_DOUBLE_EQ(length_ogive(c, 2, Side::kTarget), 1.0);
  EXPECT_DOUBLE_EQ(length_ogive(c, 1, Side::kTarget), 0.0);
  EXPECT_THROW(length_ogive(ParallelCorpus{}, 4, Side::kSource), DataError);
}

TEST(Ogive, MonotoneAndReachesOne) {
  std::mt19937 rng(11);
  ParallelCorpus c;
  size_t longest = 0;
  for (size_t i = 0; i < 100; ++i) {
    size_t n = 1 + rng() % 40;
    longest = std::max(longest, n);
    c.pairs.push_back({words(n), "x", i + 1});
  }
  double prev = 0.0;
  for (size_t t = 0; t <= longest + 1; ++t) {
    double v = length_ogive(c, t, Side::kSource);
    EXPECT_GE(v, prev);
    prev = v;
  }
  EXPECT_DOUBLE_EQ(prev, 1.0);
  EXPECT_LT(length_ogive(c, longest, Side::kSource), 1.0);
}

TEST(Stats, HistogramsSumToPairCount) {
  auto c = make_corpus({{"a b", "x"}, {"a", "x y z"}, {"a b c", "x"}});
  auto s = compute_stats(c);
  EXPECT_EQ(s.pair_count, 3u);
  size_t src = 0, tgt = 0;
  for (auto [len, f] : s.source_lengths) src += f;
  for (auto [len, f] : s.target_lengths) tgt += f;
  EXPECT_EQ(src, 3u);
  EXPECT_EQ(tgt, 3u);
  EXPECT_EQ(s.target_lengths.at(1), 2u);
}

TEST(Tokens, WhitespaceSplit) {
  EXPECT_EQ(split_whitespace("  a\tb  c "), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(count_tokens(""), 0u);
  EXPECT_EQ(count_tokens(" x  y "), 2u);
}
