#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace aif::text {

// Offsets throughout are counted in Unicode scalar values, not bytes:
// trace text is UTF-8 and downstream consumers reference character ranges.

/// Number of Unicode scalar values in a UTF-8 string.
std::size_t scalar_length(std::string_view utf8);

/// Byte offset of the scalar with index `scalar_pos` (== utf8.size() at the end).
std::size_t scalar_to_byte(std::string_view utf8, std::size_t scalar_pos);

/// Substring by scalar-value range [begin, end).
std::string scalar_substr(std::string_view utf8, std::size_t begin, std::size_t end);

/// Maximal non-whitespace runs.
std::size_t whitespace_token_count(std::string_view s);

/// Collapse whitespace runs to single spaces and trim the ends.
std::string collapse_whitespace(std::string_view s);

/// Half-open scalar-offset range of one sentence, including trailing
/// whitespace up to the start of the next sentence so that ranges tile
/// the whole text.
struct SentenceSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
};

/// Split on sentence terminators (. ! ?) followed by whitespace or end of
/// text. Text without any terminator is a single sentence. Whitespace-only
/// text yields no sentences.
std::vector<SentenceSpan> split_sentences(std::string_view utf8);

/// Lowercased alphanumeric tokens minus the fixed stop-list, as a set.
std::unordered_set<std::string> content_words(std::string_view s);

/// |a ∩ b| / |a ∪ b|; 0 when both sets are empty.
double jaccard(const std::unordered_set<std::string>& a,
               const std::unordered_set<std::string>& b);

}  // namespace aif::text
