#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace hiqa::text {

/// Byte range [begin, end) of one whitespace-delimited word.
struct WordSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

bool is_valid_utf8(std::string_view s);

/// Splits on Unicode whitespace (White_Space property). Offsets are bytes.
std::vector<WordSpan> split_words(std::string_view s);

std::size_t count_words(std::string_view s);

/// Case-folded maximal runs of Unicode letters and digits.
/// "CA-IS3641" yields {"ca", "is3641"}.
std::vector<std::string> alnum_tokens(std::string_view s);

std::string casefold(std::string_view s);

bool has_letter(std::string_view s);
bool has_digit(std::string_view s);

/// Split on '\n'; a trailing '\r' on each line is kept.
std::vector<std::string_view> split_lines(std::string_view s);

std::string_view trim(std::string_view s);
std::string_view trim_right(std::string_view s);

bool starts_with_icase(std::string_view s, std::string_view prefix);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace hiqa::text
