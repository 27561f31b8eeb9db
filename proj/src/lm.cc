// src/lm.cc
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

#include "smt/lm.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "smt/error.h"
#include "smt/numfmt.h"

namespace smt {

namespace {

constexpr double kNoProb = -99.0;

std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (size_t i = 0; i < words.size(); ++i) {
    if (i) out.push_back(' ');
    out += words[i];
  }
  return out;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string_view::npos ? line.npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

}  // namespace

NGramModel::Key NGramModel::pack(std::span<const WordId> ids) {
  Key key(ids.size() * sizeof(WordId), '\0');
  if (!ids.empty()) std::memcpy(key.data(), ids.data(), key.size());
  return key;
}

NGramModel::WordId NGramModel::intern(std::string_view word) {
  auto it = ids_.find(std::string(word));
  if (it != ids_.end()) return it->second;
  const auto id = static_cast<WordId>(words_.size());
  words_.emplace_back(word);
  ids_.emplace(std::string(word), id);
  return id;
}

NGramModel::WordId NGramModel::id(std::string_view word) const {
  auto it = ids_.find(std::string(word));
  return it == ids_.end() ? kUnkId : it->second;
}

std::vector<std::string> NGramModel::vocabulary() const {
  std::vector<std::string> out;
  for (WordId w = 0; w < words_.size(); ++w) {
    if (w != kUnkId && w != kBosId) out.push_back(words_[w]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

NGramModel NGramModel::train(const std::vector<Tokens>& sentences, int order, Smoothing smoothing) {
  if (order < 1) throw UsageError("language model order must be >= 1");
  if (sentences.empty()) throw DataError("cannot train a language model on no sentences");
  NGramModel m;
  m.order_ = order;
  m.smoothing_ = smoothing;
  m.intern(kUnk);
  m.intern(kBos);
  m.intern(kEos);
  m.counts_.resize(order);
  m.contexts_.resize(order);

  std::vector<WordId> padded;
  for (const auto& sentence : sentences) {
    padded.assign(order - 1, kBosId);
    for (const auto& tok : sentence) padded.push_back(m.intern(tok));
    padded.push_back(kEosId);
    for (size_t pos = order - 1; pos < padded.size(); ++pos) {
      for (int n = 1; n <= order; ++n) {
        std::span<const WordId> gram(padded.data() + pos + 1 - n, n);
        ++m.counts_[n - 1][pack(gram)];
      }
    }
  }
  for (int n = 1; n <= order; ++n) {
    for (const auto& [key, c] : m.counts_[n - 1]) {
      auto& ctx = m.contexts_[n - 1][key.substr(0, key.size() - sizeof(WordId))];
      ctx.total += c;
      ++ctx.types;
    }
  }
  m.compile_witten_bell();
  return m;
}

void NGramModel::compile_witten_bell() {
  table_.assign(order_, {});
  // Vocabulary for the uniform base: every word except <s> and <unk>.
  const double vocab_plus_unk = static_cast<double>(words_.size() - 2) + 1.0;
  {
    const auto& ctx = contexts_[0].at(Key());
    const double denom = static_cast<double>(ctx.total + ctx.types);
    const double base = static_cast<double>(ctx.types) / vocab_plus_unk;
    for (const auto& [key, c] : counts_[0]) {
      table_[0][key].log10_prob = std::log10((static_cast<double>(c) + base) / denom);
    }
    table_[0][pack(std::array<WordId, 1>{kUnkId})].log10_prob = std::log10(base / denom);
  }
  for (int n = 2; n <= order_; ++n) {
    // Backoff weights live on the (n-1)-gram naming the context.
    for (const auto& [hkey, ctx] : contexts_[n - 1]) {
      auto [it, inserted] = table_[n - 2].try_emplace(hkey);
      if (inserted) it->second.log10_prob = kNoProb;
      it->second.log10_backoff = std::log10(static_cast<double>(ctx.types) /
                                            static_cast<double>(ctx.total + ctx.types));
    }
    for (const auto& [key, c] : counts_[n - 1]) {
      const size_t h = key.size() - sizeof(WordId);
      const auto& ctx = contexts_[n - 1].at(key.substr(0, h));
      std::vector<WordId> ids(n);
      std::memcpy(ids.data(), key.data(), key.size());
      const double lower = backoff_prob(ids.back(), std::span<const WordId>(ids.data() + 1, n - 2));
      const double p = (static_cast<double>(c) + static_cast<double>(ctx.types) * lower) /
                       static_cast<double>(ctx.total + ctx.types);
      table_[n - 1][key].log10_prob = std::log10(p);
    }
  }
}

std::vector<NGramModel::WordId> NGramModel::full_context(std::span<const WordId> context) const {
  const size_t want = static_cast<size_t>(order_ - 1);
  std::vector<WordId> ctx;
  ctx.reserve(want);
  if (context.size() >= want) {
    ctx.assign(context.end() - want, context.end());
  } else {
    ctx.assign(want - context.size(), kBosId);
    ctx.insert(ctx.end(), context.begin(), context.end());
  }
  return ctx;
}

double NGramModel::backoff_prob(WordId word, std::span<const WordId> context) const {
  double log10_bow = 0.0;
  std::vector<WordId> gram(context.begin(), context.end());
  gram.push_back(word);
  for (size_t k = context.size() + 1; k >= 1; --k) {
    std::span<const WordId> g(gram.data() + gram.size() - k, k);
    const auto& level = table_[k - 1];
    if (auto it = level.find(pack(g)); it != level.end() && it->second.log10_prob > kNoProb)
      return std::pow(10.0, log10_bow + it->second.log10_prob);
    if (k >= 2) {
      const auto& lower = table_[k - 2];
      if (auto it = lower.find(pack(g.first(k - 1))); it != lower.end())
        log10_bow += it->second.log10_backoff;
    }
  }
  const auto& uni = table_[0];
  auto it = uni.find(pack(std::array<WordId, 1>{kUnkId}));
  if (it == uni.end()) return 0.0;
  return std::pow(10.0, log10_bow + it->second.log10_prob);
}

double NGramModel::ml_prob(WordId word, std::span<const WordId> context) const {
  const auto& ctxs = contexts_[order_ - 1];
  auto cit = ctxs.find(pack(context));
  if (cit == ctxs.end()) return 0.0;
  std::vector<WordId> gram(context.begin(), context.end());
  gram.push_back(word);
  const auto& grams = counts_[order_ - 1];
  auto git = grams.find(pack(gram));
  if (git == grams.end()) return 0.0;
  return static_cast<double>(git->second) / static_cast<double>(cit->second.total);
}

double NGramModel::prob(WordId word, std::span<const WordId> context) const {
  const auto ctx = full_context(context);
  if (smoothing_ == Smoothing::kNone) return ml_prob(word, ctx);
  return backoff_prob(word, ctx);
}

double NGramModel::prob(std::string_view word, std::span<const std::string> context) const {
  std::vector<WordId> ids;
  ids.reserve(context.size());
  for (const auto& w : context) ids.push_back(id(w));
  return prob(id(word), ids);
}

double NGramModel::logprob_sentence(const Tokens& tokens) const {
  auto state = start_state();
  double total = 0.0;
  for (const auto& tok : tokens) total += score_word(state, id(tok));
  return total + score_end(state);
}

std::vector<NGramModel::WordId> NGramModel::start_state() const {
  return std::vector<WordId>(order_ - 1, kBosId);
}

double NGramModel::score_word(std::vector<WordId>& state, WordId word) const {
  const double p = prob(word, state);
  if (!state.empty()) {
    std::rotate(state.begin(), state.begin() + 1, state.end());
    state.back() = word;
  }
  return std::log(p);
}

double NGramModel::score_end(const std::vector<WordId>& state) const {
  return std::log(prob(kEosId, state));
}

size_t NGramModel::count(std::span<const std::string> ngram) const {
  if (ngram.empty() || ngram.size() > counts_.size()) return 0;
  std::vector<WordId> ids;
  for (const auto& w : ngram) {
    auto it = ids_.find(w);
    if (it == ids_.end()) return 0;
    ids.push_back(it->second);
  }
  const auto& level = counts_[ngram.size() - 1];
  auto it = level.find(pack(ids));
  return it == level.end() ? 0 : it->second;
}

std::string NGramModel::to_arpa() const {
  if (table_.empty()) throw UsageError("model has no probability table");
  std::vector<std::vector<std::pair<std::vector<std::string>, Entry>>> sections(order_);
  for (int n = 1; n <= order_; ++n) {
    auto& rows = sections[n - 1];
    for (const auto& [key, entry] : table_[n - 1]) {
      std::vector<WordId> ids(n);
      std::memcpy(ids.data(), key.data(), key.size());
      std::vector<std::string> words;
      for (WordId w : ids) words.push_back(words_[w]);
      rows.emplace_back(std::move(words), entry);
    }
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
  }
  std::string out = "\\data\\\n";
  for (int n = 1; n <= order_; ++n)
    out += "ngram " + std::to_string(n) + "=" + std::to_string(sections[n - 1].size()) + "\n";
  for (int n = 1; n <= order_; ++n) {
    out += "\n\\" + std::to_string(n) + "-grams:\n";
    for (const auto& [words, entry] : sections[n - 1]) {
      out += format_exact(entry.log10_prob);
      out += '\t';
      out += join(words);
      if (n < order_) {
        out += '\t';
        out += format_exact(entry.log10_backoff);
      }
      out += '\n';
    }
  }
  out += "\n\\end\\\n";
  return out;
}

NGramModel NGramModel::from_arpa(std::string_view text) {
  NGramModel m;
  m.smoothing_ = Smoothing::kWittenBell;
  m.intern(kUnk);
  m.intern(kBos);
  m.intern(kEos);
  std::vector<size_t> declared;
  int section = 0;  // 0 header, n inside \n-grams:, -1 after \end\.
  bool seen_data = false;
  size_t line_no = 0;
  size_t start = 0;
  auto fail = [&](const std::string& msg) {
    throw DataError("ARPA line " + std::to_string(line_no) + ": " + msg);
  };
  while (start <= text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (line == "\\data\\") {
      seen_data = true;
      continue;
    }
    if (!seen_data) continue;
    if (line == "\\end\\") {
      section = -1;
      break;
    }
    if (line.size() > 8 && line.front() == '\\' && line.substr(line.size() - 7) == "-grams:") {
      section = std::stoi(std::string(line.substr(1, line.size() - 8)));
      if (section < 1 || section > static_cast<int>(declared.size())) fail("undeclared section");
      continue;
    }
    if (section == 0) {
      if (line.rfind("ngram ", 0) != 0) fail("expected 'ngram N=count'");
      const size_t eq = line.find('=');
      if (eq == std::string_view::npos) fail("expected 'ngram N=count'");
      const int n = std::stoi(std::string(line.substr(6, eq - 6)));
      if (n != static_cast<int>(declared.size()) + 1) fail("ngram orders out of sequence");
      declared.push_back(std::stoul(std::string(line.substr(eq + 1))));
      continue;
    }
    const auto fields = split_tabs(line);
    const bool highest = section == static_cast<int>(declared.size());
    if (fields.size() != 2 && fields.size() != 3) fail("wrong field count");
    if (highest && fields.size() == 3) fail("backoff weight on highest order");
    if (m.table_.empty()) {
      m.order_ = static_cast<int>(declared.size());
      m.table_.resize(m.order_);
    }
    std::vector<WordId> ids;
    for (const auto& w : split_whitespace(fields[1])) ids.push_back(m.intern(w));
    if (static_cast<int>(ids.size()) != section) fail("n-gram length does not match section");
    Entry e;
    e.log10_prob = parse_double(fields[0], "ARPA probability");
    if (fields.size() == 3) e.log10_backoff = parse_double(fields[2], "ARPA backoff");
    m.table_[section - 1][pack(ids)] = e;
  }
  if (section != -1) throw DataError("ARPA text has no \\end\\ marker");
  for (size_t n = 0; n < declared.size(); ++n) {
    if (m.table_[n].size() != declared[n])
      throw DataError("ARPA " + std::to_string(n + 1) + "-gram count differs from header");
  }
  return m;
}

void NGramModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_arpa();
}

NGramModel NGramModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_arpa(buf.str());
}

NGramModel train_lm(const std::vector<Tokens>& sentences, int order, Smoothing smoothing) {
  return NGramModel::train(sentences, order, smoothing);
}

}  // namespace smt
