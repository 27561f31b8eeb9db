// src/preprocess.cc
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

#include "smt/preprocess.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "smt/error.h"
#include "smt/utf8.h"

namespace smt {

namespace {

constexpr char32_t kEllipsis = 0x2026;
constexpr char32_t kZwnj = 0x200C;
constexpr char32_t kZwj = 0x200D;

std::map<char32_t, char32_t> make_punct_map() {
  std::map<char32_t, char32_t> m;
  for (char32_t cp : {0x2018, 0x2019, 0x201A, 0x201B, 0x2032, 0x2035, 0x2039, 0x203A, 0x00B4, 0x02BC})
    m[cp] = U'\'';
  for (char32_t cp : {0x201C, 0x201D, 0x201E, 0x201F, 0x2033, 0x2036, 0x00AB, 0x00BB})
    m[cp] = U'"';
  for (char32_t cp = 0x2010; cp <= 0x2015; ++cp) m[cp] = U'-';
  for (char32_t cp : {0x2043, 0x2212, 0xFE58, 0xFE63}) m[cp] = U'-';
  // Fullwidth forms of ASCII punctuation.
  for (char32_t cp = 0xFF01; cp <= 0xFF5E; ++cp) {
    const char32_t ascii = cp - 0xFEE0;
    if (utf8::is_punct(ascii)) m[cp] = ascii;
  }
  m[0x3001] = U',';
  m[0x3002] = U'.';
  m[0x2024] = U'.';
  m[0x0965] = 0x0964;
  return m;
}

// Punctuation that survives cleaning as-is.
bool is_common_punct(char32_t cp) {
  if (cp < 0x80) return utf8::is_punct(cp);
  switch (cp) {
    case 0x0964:
    case 0x060C: case 0x061B: case 0x061F: case 0x06D4:
    case 0x066A: case 0x066B: case 0x066C: case 0x066D:
      return true;
    default:
      return false;
  }
}

bool deaccenting(const CleanConfig& config) {
  return config.deaccent && config.profile.latin_side;
}

char32_t target_digit(const CleanConfig& config, int value) {
  const char32_t zero =
      config.normalize_digits_to == DigitScript::kNative ? config.profile.digit_zero : U'0';
  return zero + static_cast<char32_t>(value);
}

bool is_opening(std::string_view tok) { return tok == "(" || tok == "[" || tok == "{"; }

bool is_closing(std::string_view tok) {
  static const char* const kClosing[] = {",", ".", "!", "?", ";", ":", ")", "]", "}",
                                          "।", "॥", "؟", "،",
                                          "؛", "۔"};
  for (const char* c : kClosing) {
    if (tok == c) return true;
  }
  return false;
}

bool keeps_digits_together(char32_t cp) {
  return cp == U'.' || cp == U',' || cp == U':' || cp == U'/' || cp == U'-';
}

bool joins_words(char32_t cp) {
  return cp == U'-' || cp == U'\'' || cp == U'_' || cp == U'@' || cp == U'&' || cp == U'/';
}

bool word_char(char32_t cp) { return utf8::is_letter(cp) || utf8::digit_value(cp).has_value(); }

bool has_letter(std::string_view token) {
  for (char32_t cp : utf8::decode_lenient(token)) {
    if (utf8::is_letter(cp)) return true;
  }
  return false;
}

bool has_latin_letter(std::string_view token) {
  for (char32_t cp : utf8::decode_lenient(token)) {
    if (utf8::is_latin_letter(cp)) return true;
  }
  return false;
}

}  // namespace

const std::map<char32_t, char32_t>& default_punct_map() {
  static const auto m = make_punct_map();
  return m;
}

CleanConfig default_clean_config(const LanguageProfile& profile) {
  CleanConfig config;
  config.profile = profile;
  config.normalize_digits_to = profile.latin_side ? DigitScript::kLatin : DigitScript::kNative;
  config.punct_map = default_punct_map();
  config.deaccent = true;
  return config;
}

bool clean_allows(const CleanConfig& config, char32_t cp) {
  if (cp == U' ') return true;
  if (config.punct_map.count(cp) || cp == kEllipsis) return false;
  if (auto d = utf8::digit_value(cp)) return cp == target_digit(config, *d);
  if (is_common_punct(cp)) return true;
  if (cp == kZwnj || cp == kZwj) return !config.profile.latin_side;
  if (!config.profile.in_script(cp) || utf8::is_control(cp) || utf8::is_space(cp)) return false;
  if (deaccenting(config)) {
    if (utf8::is_combining_mark(cp)) return false;
    if (utf8::strip_accent(cp) != cp) return false;
  }
  return true;
}

std::string clean_line(std::string_view line, const CleanConfig& config) {
  std::u32string mapped;
  for (char32_t cp : utf8::decode_lenient(line)) {
    // unprintable characters; whitespace controls become plain spaces
    if (utf8::is_space(cp)) {
      mapped.push_back(U' ');
      continue;
    }
    if (utf8::is_control(cp)) continue;
    if (cp == kZwnj || cp == kZwj) {
      if (!config.profile.latin_side) mapped.push_back(cp);
      continue;
    }
    // characters outside the language's script
    const bool keep = config.profile.in_script(cp) || is_common_punct(cp) ||
                      utf8::digit_value(cp).has_value() || config.punct_map.count(cp) ||
                      cp == kEllipsis;
    if (!keep) continue;
    if (cp == kEllipsis) {
      mapped.append(U"...");
      continue;
    }
    if (auto it = config.punct_map.find(cp); it != config.punct_map.end()) cp = it->second;
    if (deaccenting(config)) {
      if (utf8::is_combining_mark(cp)) continue;
      cp = utf8::strip_accent(cp);
    }
    if (auto d = utf8::digit_value(cp)) cp = target_digit(config, *d);
    mapped.push_back(cp);
  }
  // collapse and trim spaces
  std::u32string out;
  out.reserve(mapped.size());
  for (char32_t cp : mapped) {
    if (cp == U' ' && (out.empty() || out.back() == U' ')) continue;
    out.push_back(cp);
  }
  if (!out.empty() && out.back() == U' ') out.pop_back();
  return utf8::encode(out);
}

std::vector<std::string> clean_lines(const std::vector<std::string>& lines,
                                     const CleanConfig& config) {
  std::vector<std::string> out(lines.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(lines.size()); ++i)
    out[i] = clean_line(lines[i], config);
  return out;
}

Tokens tokenize(std::string_view line, const LanguageProfile& /*profile*/) {
  Tokens tokens;
  for (const auto& chunk : split_whitespace(line)) {
    const auto cps = utf8::decode_lenient(chunk);
    std::u32string cur;
    auto flush = [&] {
      if (!cur.empty()) tokens.push_back(utf8::encode(cur));
      cur.clear();
    };
    for (size_t k = 0; k < cps.size(); ++k) {
      const char32_t cp = cps[k];
      if (!utf8::is_punct(cp)) {
        cur.push_back(cp);
        continue;
      }
      bool attached = false;
      if (k > 0 && k + 1 < cps.size()) {
        const char32_t prev = cps[k - 1];
        const char32_t next = cps[k + 1];
        if (utf8::digit_value(prev) && utf8::digit_value(next) && keeps_digits_together(cp))
          attached = true;
        else if (word_char(prev) && word_char(next) && joins_words(cp))
          attached = true;
      }
      if (attached) {
        cur.push_back(cp);
      } else {
        flush();
        tokens.push_back(utf8::encode(std::u32string(1, cp)));
      }
    }
    flush();
  }
  return tokens;
}

std::string detokenize(const Tokens& tokens, const LanguageProfile& /*profile*/) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0 && !is_closing(tokens[i]) && !is_opening(tokens[i - 1])) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

bool is_redundant_punct(std::string_view token) {
  static const char* const kRedundant[] = {"\"", "'", ",", "`", "،",
                                            "‘", "’", "“", "”"};
  for (const char* r : kRedundant) {
    if (token == r) return true;
  }
  return false;
}

Tokens strip_redundant_punct(const Tokens& tokens) {
  Tokens out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (!is_redundant_punct(t)) out.push_back(t);
  }
  return out;
}

TruecaseModel TruecaseModel::train(const std::vector<Tokens>& sentences) {
  std::map<std::string, FormCounts, std::less<>> inner, initial;
  for (const auto& sentence : sentences) {
    bool seen_initial = false;
    for (const auto& tok : sentence) {
      const bool letter = has_letter(tok);
      const bool is_initial = letter && !seen_initial;
      if (letter) seen_initial = true;
      if (!has_latin_letter(tok)) continue;
      auto& table = is_initial ? initial : inner;
      ++table[utf8::to_lower(tok)][tok];
    }
  }
  TruecaseModel model;
  model.forms_ = std::move(inner);
  for (auto& [key, counts] : initial) model.forms_.try_emplace(key, std::move(counts));
  model.rebuild_best();
  return model;
}

void TruecaseModel::rebuild_best() {
  best_.clear();
  for (const auto& [key, counts] : forms_) {
    const std::string* best = nullptr;
    size_t best_count = 0;
    // map iteration is lexicographic, so strict > keeps the smallest on ties
    for (const auto& [form, count] : counts) {
      if (best == nullptr || count > best_count) {
        best = &form;
        best_count = count;
      }
    }
    if (best) best_.emplace(key, *best);
  }
}

const std::string* TruecaseModel::best_form(std::string_view lowered) const {
  auto it = best_.find(lowered);
  return it == best_.end() ? nullptr : &it->second;
}

std::string TruecaseModel::serialize() const {
  std::string out;
  for (const auto& [key, counts] : forms_) {
    std::vector<std::pair<std::string, size_t>> rows(counts.begin(), counts.end());
    const std::string& best = best_.at(key);
    std::stable_sort(rows.begin(), rows.end(), [&](const auto& a, const auto& b) {
      const bool ab = a.first == best, bb = b.first == best;
      if (ab != bb) return ab;
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    for (const auto& [form, count] : rows) {
      out += form;
      out += '\t';
      out += std::to_string(count);
      out += '\n';
    }
  }
  return out;
}

TruecaseModel TruecaseModel::parse(std::string_view text) {
  TruecaseModel model;
  size_t line_no = 0;
  size_t start = 0;
  while (start < text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;
    const size_t tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0)
      throw DataError("truecase model line " + std::to_string(line_no) + ": expected form<TAB>count");
    const std::string form(line.substr(0, tab));
    size_t count = 0;
    try {
      size_t used = 0;
      const std::string num(line.substr(tab + 1));
      count = std::stoul(num, &used);
      if (used != num.size() || count == 0) throw std::invalid_argument("count");
    } catch (const std::exception&) {
      throw DataError("truecase model line " + std::to_string(line_no) + ": bad count");
    }
    model.forms_[utf8::to_lower(form)][form] += count;
  }
  model.rebuild_best();
  return model;
}

void TruecaseModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << serialize();
}

TruecaseModel TruecaseModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

TruecaseModel train_truecaser(const std::vector<Tokens>& sentences) {
  return TruecaseModel::train(sentences);
}

Tokens truecase(const Tokens& tokens, const TruecaseModel& model) {
  Tokens out = tokens;
  for (auto& tok : out) {
    if (!has_letter(tok)) continue;
    if (has_latin_letter(tok)) {
      if (const std::string* best = model.best_form(utf8::to_lower(tok))) tok = *best;
    }
    break;
  }
  return out;
}

}  // namespace smt
