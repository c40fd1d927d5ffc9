#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace optree {

/// Light suffix stripper: plurals, then -ing/-ed with doubled-consonant repair.
/// Input must already be lowercase.
std::string stem(std::string_view token);

/// Lowercase English function words ("i", "the", "with", ...).
bool is_stopword(std::string_view lowered);

/// Splits on every byte that is neither ASCII alphanumeric nor >= 0x80,
/// lowercases and stems. Stopwords are kept.
std::vector<std::string> tokenize(std::string_view text);

/// tokenize() without stopwords.
std::vector<std::string> content_tokens(std::string_view text);

}  // namespace optree
