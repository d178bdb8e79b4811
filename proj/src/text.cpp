#include "aif/text.hpp"

#include <algorithm>
#include <cctype>

namespace aif::text {

namespace {

bool is_utf8_continuation(unsigned char c) { return (c & 0xC0) == 0x80; }

bool is_space(char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
}

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

const std::unordered_set<std::string>& stop_words() {
    static const std::unordered_set<std::string> kStopWords = {
        "a",     "an",    "the",   "is",    "are",   "was",    "were",  "be",
        "been",  "being", "am",    "do",    "does",  "did",    "has",   "have",
        "had",   "of",    "in",    "on",    "at",    "to",     "for",   "with",
        "by",    "from",  "into",  "over",  "under", "about",  "after", "before",
        "between", "during", "through", "and", "or",  "nor",   "not",   "no",
        "but",   "if",    "then",  "than",  "so",    "as",     "it",    "its",
        "this",  "that",  "these", "those", "he",    "she",    "they",  "his",
        "her",   "their", "them",  "him",   "i",     "you",    "we",    "us",
        "our",   "your",  "my",    "me",    "what",  "which",  "who",   "whom",
        "how",   "when",  "where", "why",   "there", "here",
    };
    return kStopWords;
}

}  // namespace

std::size_t scalar_length(std::string_view utf8) {
    std::size_t n = 0;
    for (unsigned char c : utf8) {
        if (!is_utf8_continuation(c)) ++n;
    }
    return n;
}

std::size_t scalar_to_byte(std::string_view utf8, std::size_t scalar_pos) {
    std::size_t scalars = 0;
    std::size_t i = 0;
    while (i < utf8.size()) {
        if (!is_utf8_continuation(static_cast<unsigned char>(utf8[i]))) {
            if (scalars == scalar_pos) return i;
            ++scalars;
        }
        ++i;
    }
    return utf8.size();
}

std::string scalar_substr(std::string_view utf8, std::size_t begin, std::size_t end) {
    const std::size_t b = scalar_to_byte(utf8, begin);
    const std::size_t e = scalar_to_byte(utf8, end);
    return std::string(utf8.substr(b, e - b));
}

std::size_t whitespace_token_count(std::string_view s) {
    std::size_t count = 0;
    bool in_token = false;
    for (char c : s) {
        if (is_space(c)) {
            in_token = false;
        } else if (!in_token) {
            in_token = true;
            ++count;
        }
    }
    return count;
}

std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (is_space(c)) {
            pending_space = !out.empty();
        } else {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            out.push_back(c);
        }
    }
    return out;
}

std::vector<SentenceSpan> split_sentences(std::string_view utf8) {
    // Work in scalar coordinates; ASCII terminators and whitespace are
    // single-byte so classifying per scalar is safe.
    std::vector<char> lead;  // lead byte (or 0x80 marker) per scalar
    lead.reserve(utf8.size());
    for (unsigned char c : utf8) {
        if (!is_utf8_continuation(c)) lead.push_back(static_cast<char>(c));
    }
    const std::size_t n = lead.size();

    std::vector<SentenceSpan> spans;
    std::size_t start = 0;
    bool seen_content = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (!is_space(lead[i])) seen_content = true;
        const bool boundary =
            is_terminator(lead[i]) && (i + 1 == n || is_space(lead[i + 1]));
        if (!boundary) continue;
        // Extend through the following whitespace so spans tile the text.
        std::size_t end = i + 1;
        while (end < n && is_space(lead[end])) ++end;
        spans.push_back({start, end});
        start = end;
        seen_content = false;
    }
    if (start < n && seen_content) {
        spans.push_back({start, n});
    } else if (start < n && !spans.empty()) {
        spans.back().end = n;  // trailing whitespace joins the last sentence
    }
    return spans;
}

std::unordered_set<std::string> content_words(std::string_view s) {
    std::unordered_set<std::string> words;
    std::string current;
    auto flush = [&] {
        if (!current.empty() && !stop_words().count(current)) {
            words.insert(current);
        }
        current.clear();
    };
    for (char c : s) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            current.push_back(static_cast<char>(
                std::tolower(static_cast<unsigned char>(c))));
        } else {
            flush();
        }
    }
    flush();
    return words;
}

double jaccard(const std::unordered_set<std::string>& a,
               const std::unordered_set<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t inter = 0;
    const auto& small = a.size() <= b.size() ? a : b;
    const auto& large = a.size() <= b.size() ? b : a;
    for (const auto& w : small) {
        if (large.count(w)) ++inter;
    }
    const std::size_t uni = a.size() + b.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace aif::text
