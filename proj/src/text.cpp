#include "optree/text.hpp"

#include <algorithm>
#include <array>

namespace optree {
namespace {

constexpr std::array<std::string_view, 72> kStopwords = {
    "a",     "about", "after", "all",   "am",    "an",    "and",   "any",   "are",   "as",    "at",
    "be",    "been",  "before", "by",   "can",   "did",   "do",    "does",  "during", "each", "for",
    "from",  "had",   "has",   "have",  "how",   "i",     "if",    "in",    "into",  "is",    "it",
    "its",   "me",    "my",    "myself", "of",   "on",    "or",    "our",   "so",    "than",  "that",
    "the",   "their", "them",  "then",  "there", "these", "they",  "this",  "those", "to",    "up",
    "was",   "we",    "were",  "what",  "when",  "where", "which", "while", "who",   "whom",  "why",
    "will",  "with",  "you",   "your",  "many",  "often"};

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

bool has_vowel(std::string_view s) { return std::any_of(s.begin(), s.end(), is_vowel); }

// Drops one letter of a trailing doubled consonant ("runn" -> "run").
void undouble(std::string& s) {
    size_t n = s.size();
    if (n >= 3 && s[n - 1] == s[n - 2] && !is_vowel(s[n - 1]) && s[n - 1] != 'l' && s[n - 1] != 's' &&
        s[n - 1] != 'z')
        s.pop_back();
}

bool token_byte(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

}  // namespace

bool is_stopword(std::string_view lowered) {
    return std::find(kStopwords.begin(), kStopwords.end(), lowered) != kStopwords.end();
}

std::string stem(std::string_view token) {
    std::string s(token);
    if (s.size() <= 3) return s;
    auto ends = [&](std::string_view suf) { return s.size() > suf.size() && s.ends_with(suf); };
    if (ends("sses")) {
        s.resize(s.size() - 2);
    } else if (ends("ies") && s.size() > 4) {
        s.resize(s.size() - 2);
    } else if (ends("s") && !ends("ss") && !ends("us") && !ends("is")) {
        s.pop_back();
    }
    if (s.size() >= 6 && s.ends_with("ing") && has_vowel(std::string_view(s).substr(0, s.size() - 3))) {
        s.resize(s.size() - 3);
        undouble(s);
    } else if (s.size() >= 5 && s.ends_with("ed") && has_vowel(std::string_view(s).substr(0, s.size() - 2))) {
        s.resize(s.size() - 2);
        undouble(s);
    }
    // Singular and plural meet at "-i": movie/movies, party/parties.
    if (s.size() > 3 && s.ends_with("ie")) {
        s.pop_back();
    } else if (s.size() > 3 && s.back() == 'y' && !is_vowel(s[s.size() - 2])) {
        s.back() = 'i';
    }
    return s;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) out.push_back(stem(cur));
        cur.clear();
    };
    for (char ch : text) {
        auto c = static_cast<unsigned char>(ch);
        if (token_byte(c)) {
            cur += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : ch;
        } else {
            flush();
        }
    }
    flush();
    return out;
}

std::vector<std::string> content_tokens(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty() && !is_stopword(cur)) out.push_back(stem(cur));
        cur.clear();
    };
    for (char ch : text) {
        auto c = static_cast<unsigned char>(ch);
        if (token_byte(c)) {
            cur += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : ch;
        } else {
            flush();
        }
    }
    flush();
    return out;
}

}  // namespace optree
