// include/smt/utf8.h
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

#ifndef SMT_UTF8_H_
#define SMT_UTF8_H_

#include <optional>
#include <string>
#include <string_view>

namespace smt::utf8 {

// Decodes a whole string; nullopt when the bytes are not well-formed UTF-8
// (overlongs, surrogates and values above U+10FFFF are rejected).
std::optional<std::u32string> decode(std::string_view bytes);

// Decodes what it can, skipping malformed bytes.
std::u32string decode_lenient(std::string_view bytes);

// Like decode() but throws DataError.
std::u32string decode_or_throw(std::string_view bytes);

bool is_valid(std::string_view bytes);

std::string encode(std::u32string_view cps);
void append(std::string& out, char32_t cp);

// Character classes used by cleaning and tokenization. They cover the
// scripts the toolkit ships profiles for, not all of Unicode.
bool is_space(char32_t cp);
bool is_control(char32_t cp);      // Cc plus the invisible format characters
bool is_punct(char32_t cp);
bool is_combining_mark(char32_t cp);
bool is_letter(char32_t cp);       // anything word-forming that is not punct/space/digit
bool is_latin_letter(char32_t cp);

// Value 0..9 if cp belongs to one of the known decimal digit runs.
std::optional<int> digit_value(char32_t cp);

// Latin-only case mapping (Basic Latin, Latin-1, Latin Extended-A).
char32_t to_lower(char32_t cp);
std::string to_lower(std::string_view s);
bool has_uppercase(std::string_view s);

// Latin base letter of a precomposed accented letter, or cp unchanged.
char32_t strip_accent(char32_t cp);

}  // namespace smt::utf8

#endif  // SMT_UTF8_H_
