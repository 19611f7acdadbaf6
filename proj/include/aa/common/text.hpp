#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace aa::text {

// Decodes UTF-8 into code points. Invalid bytes decode as U+FFFD.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);

// Lowercase mapping for ASCII, Latin-1, Latin Extended-A, Greek and Cyrillic.
char32_t to_lower(char32_t c);

// Letters and digits: ASCII alphanumerics plus non-ASCII code points outside
// the punctuation, symbol and space blocks.
bool is_alnum(char32_t c);

// Lowercases and splits on every non-alphanumeric code point.
std::vector<std::string> word_tokens(std::string_view s);

std::string trim(std::string_view s);

// Trims, lowercases, and joins whitespace-separated parts with '_'.
std::string normalize_label(std::string_view s);

}  // namespace aa::text
