#include <doctest.h>

#include "aif/text.hpp"

using namespace aif;

TEST_CASE("scalar offsets count code points, not bytes") {
    const std::string s = "né à Århus";  // multi-byte scalars
    CHECK(text::scalar_length(s) == 10);
    CHECK(text::scalar_substr(s, 0, 2) == "né");
    CHECK(text::scalar_substr(s, 5, 10) == "Århus");
}

TEST_CASE("whitespace token count") {
    CHECK(text::whitespace_token_count("Here I Am Again") == 4);
    CHECK(text::whitespace_token_count("") == 0);
    CHECK(text::whitespace_token_count("  a\t b\nc  ") == 3);
}

TEST_CASE("collapse_whitespace") {
    CHECK(text::collapse_whitespace("  a  b\n c ") == "a b c");
    CHECK(text::collapse_whitespace("abc") == "abc");
    CHECK(text::collapse_whitespace("   ") == "");
}

TEST_CASE("sentence splitting on terminators followed by whitespace") {
    auto spans = text::split_sentences("A b. C d! E?");
    CHECK(spans.size() == 3);
    // Spans tile the text.
    CHECK(spans.front().begin == 0);
    for (std::size_t i = 1; i < spans.size(); ++i) {
        CHECK(spans[i].begin == spans[i - 1].end);
    }
    CHECK(spans.back().end == 12);

    CHECK(text::split_sentences("no terminator").size() == 1);
    CHECK(text::split_sentences("").empty());
    CHECK(text::split_sentences("   ").empty());
    // Terminator not followed by whitespace does not split.
    CHECK(text::split_sentences("3.14 is pi").size() == 1);
}

TEST_CASE("content words drop stop words and case") {
    auto words = text::content_words("Paris is the capital of France!");
    CHECK(words.count("paris") == 1);
    CHECK(words.count("capital") == 1);
    CHECK(words.count("france") == 1);
    CHECK(words.count("is") == 0);
    CHECK(words.count("the") == 0);
    CHECK(words.size() == 3);
}

TEST_CASE("jaccard") {
    auto a = text::content_words("alpha beta gamma");
    auto b = text::content_words("alpha beta delta epsilon");
    CHECK(text::jaccard(a, b) == doctest::Approx(2.0 / 5.0));
    CHECK(text::jaccard(a, a) == doctest::Approx(1.0));
    CHECK(text::jaccard({}, {}) == 0.0);
}
