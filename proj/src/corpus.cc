// src/corpus.cc
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

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "smt/error.h"
#include "smt/utf8.h"

namespace smt {

namespace {

using Blocks = std::vector<CodepointRange>;

const Blocks kDevanagari = {{0x0900, 0x097F}};
const Blocks kBengali = {{0x0980, 0x09FF}};
const Blocks kArabicFull = {{0x0600, 0x06FF}, {0x0750, 0x077F},
                            {0xFB50, 0xFDFF}, {0xFE70, 0xFEFF}};

LanguageProfile make(std::string code, std::string name, Blocks blocks, char32_t zero,
                     Direction dir = Direction::kLeftToRight, bool latin = false) {
  return LanguageProfile{std::move(code), std::move(name), std::move(blocks), zero, dir, latin};
}

std::vector<LanguageProfile> make_builtins() {
  using D = Direction;
  std::vector<LanguageProfile> p;
  p.push_back(make("as", "Assamese", kBengali, 0x09E6));
  p.push_back(make("ml", "Malayalam", {{0x0D00, 0x0D7F}}, 0x0D66));
  p.push_back(make("bn", "Bengali", kBengali, 0x09E6));
  p.push_back(make("mr", "Marathi", kDevanagari, 0x0966));
  p.push_back(make("gu", "Gujarati", {{0x0A80, 0x0AFF}}, 0x0AE6));
  p.push_back(make("kn", "Kannada", {{0x0C80, 0x0CFF}}, 0x0CE6));
  p.push_back(make("hi", "Hindi", kDevanagari, 0x0966));
  p.push_back(make("or", "Oriya", {{0x0B00, 0x0B7F}}, 0x0B66));
  // Gurmukhi is the primary script; Perso-Arabic (Shahmukhi) letters are kept.
  p.push_back(make("pa", "Punjabi", {{0x0600, 0x06FF}, {0x0A00, 0x0A7F}}, 0x0A66));
  p.push_back(make("te", "Telugu", {{0x0C00, 0x0C7F}}, 0x0C66));
  p.push_back(make("sd", "Sindhi",
                   {{0x0600, 0x06FF}, {0x0750, 0x077F}, {0x0900, 0x097F},
                    {0xFB50, 0xFDFF}, {0xFE70, 0xFEFF}},
                   0x0660, D::kRightToLeft));
  p.push_back(make("si", "Sinhala", {{0x0D80, 0x0DFF}}, 0x0DE6));
  p.push_back(make("ne", "Nepali", kDevanagari, 0x0966));
  p.push_back(make("ta", "Tamil", {{0x0B80, 0x0BFF}}, 0x0BE6));
  p.push_back(make("ur", "Urdu", kArabicFull, 0x06F0, D::kRightToLeft));
  p.push_back(make("en", "English",
                   {{0x0041, 0x005A}, {0x0061, 0x007A}, {0x00C0, 0x024F}, {0x0300, 0x036F}},
                   U'0', D::kLeftToRight, true));
  for (const auto& profile : p) validate_profile(profile);
  return p;
}

char32_t parse_hex_codepoint(const nlohmann::json& j) {
  std::string s = j.get<std::string>();
  if (s.rfind("U+", 0) == 0 || s.rfind("0x", 0) == 0) s = s.substr(2);
  size_t used = 0;
  unsigned long v = std::stoul(s, &used, 16);
  if (used != s.size() || v > 0x10FFFF) throw UsageError("bad codepoint '" + s + "'");
  return static_cast<char32_t>(v);
}

LanguageProfile profile_from_json(const nlohmann::json& j) {
  LanguageProfile p;
  p.code = j.at("code").get<std::string>();
  p.name = j.value("name", p.code);
  for (const auto& block : j.at("script_blocks")) {
    if (!block.is_array() || block.size() != 2) throw UsageError("script block must be [first,last]");
    p.script_blocks.push_back({parse_hex_codepoint(block[0]), parse_hex_codepoint(block[1])});
  }
  p.digit_zero = parse_hex_codepoint(j.at("digit_zero"));
  const std::string dir = j.value("direction", "ltr");
  if (dir == "ltr") {
    p.direction = Direction::kLeftToRight;
  } else if (dir == "rtl") {
    p.direction = Direction::kRightToLeft;
  } else {
    throw UsageError("direction must be ltr or rtl, got '" + dir + "'");
  }
  p.latin_side = j.value("latin_side", false);
  validate_profile(p);
  return p;
}

}  // namespace

bool LanguageProfile::in_script(char32_t cp) const {
  auto it = std::upper_bound(script_blocks.begin(), script_blocks.end(), cp,
                             [](char32_t c, const CodepointRange& r) { return c < r.first; });
  if (it == script_blocks.begin()) return false;
  return std::prev(it)->contains(cp);
}

void validate_profile(const LanguageProfile& profile) {
  if (profile.code.empty()) throw UsageError("profile without a language code");
  const std::string who = "profile '" + profile.code + "': ";
  if (profile.script_blocks.empty()) throw UsageError(who + "no script blocks");
  for (size_t i = 0; i < profile.script_blocks.size(); ++i) {
    const auto& b = profile.script_blocks[i];
    if (b.first > b.last) throw UsageError(who + "inverted script block");
    if (i > 0 && profile.script_blocks[i - 1].last >= b.first)
      throw UsageError(who + "script blocks overlap or are unsorted");
  }
  if (utf8::digit_value(profile.digit_zero) != 0 ||
      utf8::digit_value(profile.digit_zero + 9) != 9)
    throw UsageError(who + "digit_zero does not start a known run of ten digits");
}

const std::vector<LanguageProfile>& builtin_profiles() {
  static const std::vector<LanguageProfile> profiles = make_builtins();
  return profiles;
}

ProfileRegistry::ProfileRegistry() {
  for (const auto& p : builtin_profiles()) profiles_.emplace(p.code, p);
}

void ProfileRegistry::add(LanguageProfile profile) {
  validate_profile(profile);
  std::string code = profile.code;
  profiles_.insert_or_assign(std::move(code), std::move(profile));
}

void ProfileRegistry::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open profile file " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
    for (const auto& entry : doc.at("profiles")) add(profile_from_json(entry));
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("profile file " + path.string() + ": " + e.what());
  }
}

bool ProfileRegistry::contains(std::string_view code) const {
  return profiles_.find(code) != profiles_.end();
}

const LanguageProfile& ProfileRegistry::at(std::string_view code) const {
  auto it = profiles_.find(code);
  if (it == profiles_.end())
    throw UsageError("unknown language '" + std::string(code) + "' (supply a profile file)");
  return it->second;
}

LanguageProfile parse_profile_json(std::string_view json_text, std::string_view code) {
  try {
    auto doc = nlohmann::json::parse(json_text);
    for (const auto& entry : doc.at("profiles")) {
      if (entry.at("code").get<std::string>() == code) return profile_from_json(entry);
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("profile json: ") + e.what());
  }
  throw UsageError("profile '" + std::string(code) + "' not found");
}

std::vector<std::string> split_whitespace(std::string_view line) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

size_t count_tokens(std::string_view line) {
  size_t n = 0;
  bool in_token = false;
  for (char c : line) {
    const bool sep = c == ' ' || c == '\t';
    if (!sep && !in_token) ++n;
    in_token = !sep;
  }
  return n;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string data = buf.str();
  std::vector<std::string> lines;
  size_t start = 0;
  while (start < data.size()) {
    size_t end = data.find('\n', start);
    if (end == std::string::npos) end = data.size();
    std::string line = data.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!utf8::is_valid(line))
      throw DataError(path.string() + ": invalid UTF-8 at line " + std::to_string(lines.size() + 1));
    lines.push_back(std::move(line));
    start = end + 1;
  }
  return lines;
}

void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& line : lines) out << line << '\n';
  if (!out) throw DataError("write failed: " + path.string());
}

ParallelCorpus load_parallel(const std::filesystem::path& src_path,
                             const std::filesystem::path& tgt_path,
                             const LanguageProfile& src_profile,
                             const LanguageProfile& tgt_profile) {
  auto src = read_lines(src_path);
  auto tgt = read_lines(tgt_path);
  if (src.size() != tgt.size())
    throw DataError("line count mismatch " + std::to_string(src.size()) + " vs " +
                    std::to_string(tgt.size()) + " (" + src_path.string() + ", " +
                    tgt_path.string() + ")");
  ParallelCorpus corpus{{}, src_profile, tgt_profile};
  corpus.pairs.reserve(src.size());
  for (size_t i = 0; i < src.size(); ++i)
    corpus.pairs.push_back({std::move(src[i]), std::move(tgt[i]), i + 1});
  return corpus;
}

ParallelCorpus load_parallel_prefix(const std::filesystem::path& prefix,
                                    const LanguageProfile& src_profile,
                                    const LanguageProfile& tgt_profile) {
  return load_parallel(prefix.string() + "." + src_profile.code,
                       prefix.string() + "." + tgt_profile.code, src_profile, tgt_profile);
}

void write_parallel(const ParallelCorpus& corpus, const std::filesystem::path& src_path,
                    const std::filesystem::path& tgt_path) {
  std::vector<std::string> src, tgt;
  src.reserve(corpus.size());
  tgt.reserve(corpus.size());
  for (const auto& p : corpus.pairs) {
    src.push_back(p.source);
    tgt.push_back(p.target);
  }
  write_lines(src_path, src);
  write_lines(tgt_path, tgt);
}

ParallelCorpus filter_pairs(const ParallelCorpus& corpus, const FilterOptions& options) {
  if (options.max_len < 1) throw UsageError("filter max_len must be >= 1");
  if (!(options.max_ratio >= 1.0)) throw UsageError("filter max_ratio must be >= 1");
  ParallelCorpus out{{}, corpus.src_profile, corpus.tgt_profile};
  for (const auto& pair : corpus.pairs) {
    const size_t ns = count_tokens(pair.source);
    const size_t nt = count_tokens(pair.target);
    if (ns == 0 || nt == 0) continue;
    if (ns > options.max_len || nt > options.max_len) continue;
    const double ratio = static_cast<double>(std::max(ns, nt)) / static_cast<double>(std::min(ns, nt));
    if (ratio > options.max_ratio) continue;
    out.pairs.push_back(pair);
  }
  return out;
}

CorpusStats compute_stats(const ParallelCorpus& corpus) {
  CorpusStats stats;
  stats.pair_count = corpus.size();
  for (const auto& pair : corpus.pairs) {
    ++stats.source_lengths[count_tokens(pair.source)];
    ++stats.target_lengths[count_tokens(pair.target)];
  }
  return stats;
}

double length_ogive(const std::map<size_t, size_t>& histogram, size_t threshold) {
  size_t total = 0;
  size_t below = 0;
  for (const auto& [len, freq] : histogram) {
    total += freq;
    if (len < threshold) below += freq;
  }
  if (total == 0) throw DataError("empty corpus");
  return static_cast<double>(below) / static_cast<double>(total);
}

double length_ogive(const ParallelCorpus& corpus, size_t threshold, Side side) {
  if (corpus.empty()) throw DataError("empty corpus");
  const auto stats = compute_stats(corpus);
  return length_ogive(side == Side::kSource ? stats.source_lengths : stats.target_lengths, threshold);
}

}  // namespace smt
