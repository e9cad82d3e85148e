#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace deidforge {

// Counting/indexing normalization: ASCII lowercase, strip leading and
// trailing ASCII punctuation. No stemming. May return an empty string
// (e.g. for a token that is pure punctuation); callers that count or
// index skip empties.
std::string normalize_token(std::string_view token);

// Normalizes each word and joins with single spaces, dropping words
// that normalize to empty. This is the phrase form used for surrogate
// keys and privacy scans.
std::string normalize_phrase(const std::vector<std::string>& words);

std::vector<std::string> split_words(std::string_view text);
std::string join_words(const std::vector<std::string>& words);

std::string to_lower(std::string_view s);

}  // namespace deidforge
