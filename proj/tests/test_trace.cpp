#include <doctest.h>

#include <random>

#include <json.hpp>

#include "aif/errors.hpp"
#include "aif/trace.hpp"
#include "support/fixtures.hpp"

using namespace aif;
using nlohmann::json;

TEST_CASE("parse_trace on the HotpotQA fixture yields 10 tools, ids 1..10") {
    const Trace trace = testsupport::load_hotpot_trace();
    REQUIRE(trace.tools.size() == 10);
    for (std::size_t i = 0; i < trace.tools.size(); ++i) {
        CHECK(trace.tools[i].tool_id == static_cast<int>(i) + 1);
    }
    CHECK(trace.tools[1].tool_name == "Loretta Lynn");
    CHECK(trace.query ==
          "Here I Am Again is an album by what American country singer who had a "
          "career of almost 60 years");
}

TEST_CASE("parse_trace degenerate and error cases") {
    const Trace empty = parse_trace(R"({"query":"q","response":"","tools":[]})");
    CHECK(empty.tools.empty());
    CHECK(empty.response.empty());

    CHECK_THROWS_AS(parse_trace("{not json"), ValidationError);
    CHECK_THROWS_WITH_AS(parse_trace(R"({"query":"q","tools":[]})"),
                         doctest::Contains("response"), ValidationError);

    // Knock tool_output out of element 3: the error names tools[2].tool_output.
    json root = json::parse(testsupport::read_file(testsupport::hotpot_trace_path()));
    root["tools"][2].erase("tool_output");
    CHECK_THROWS_WITH_AS(parse_trace(root.dump()),
                         doctest::Contains("tools[2].tool_output"), ValidationError);

    // Empty tool output is a validation error.
    root = json::parse(testsupport::read_file(testsupport::hotpot_trace_path()));
    root["tools"][4]["tool_output"] = "";
    CHECK_THROWS_WITH_AS(parse_trace(root.dump()),
                         doctest::Contains("tools[4].tool_output"), ValidationError);

    // An explicit tool_id that collides with another position is rejected.
    root = json::parse(testsupport::read_file(testsupport::hotpot_trace_path()));
    root["tools"][1]["tool_id"] = 1;
    CHECK_THROWS_AS(parse_trace(root.dump()), ValidationError);
}

TEST_CASE("parse after serialize is the identity on random traces") {
    std::mt19937 rng(7);
    const std::vector<std::string> snippets = {
        "alpha beta.", "gamma delta epsilon!", "zeta?", "omega psi chi phi."};
    for (int iter = 0; iter < 50; ++iter) {
        Trace trace;
        trace.trace_id = "t" + std::to_string(iter);
        trace.query = snippets[rng() % snippets.size()];
        trace.response = iter % 3 == 0 ? "" : snippets[rng() % snippets.size()];
        const int m = static_cast<int>(rng() % 5);
        for (int i = 0; i < m; ++i) {
            ToolCall call;
            call.tool_id = i + 1;
            call.tool_name = "tool " + std::to_string(i);
            call.tool_input = snippets[rng() % snippets.size()];
            call.tool_output = snippets[rng() % snippets.size()];
            call.tool_metadata = iter % 2 ? "meta" : "";
            call.tool_execution_duration = (rng() % 100) / 10.0;
            trace.tools.push_back(std::move(call));
        }
        const Trace back = parse_trace(serialize_trace(trace));
        CHECK(back.trace_id == trace.trace_id);
        CHECK(back.query == trace.query);
        CHECK(back.response == trace.response);
        REQUIRE(back.tools.size() == trace.tools.size());
        for (std::size_t i = 0; i < trace.tools.size(); ++i) {
            CHECK(back.tools[i].tool_id == trace.tools[i].tool_id);
            CHECK(back.tools[i].tool_name == trace.tools[i].tool_name);
            CHECK(back.tools[i].tool_output == trace.tools[i].tool_output);
            CHECK(back.tools[i].tool_metadata == trace.tools[i].tool_metadata);
        }
    }
}

TEST_CASE("count_tokens whitespace method") {
    CHECK(count_tokens("Here I Am Again", TokenMethod::whitespace).value == 4);
    CHECK(count_tokens("", TokenMethod::whitespace).value == 0);

    // The Here I Am Again tool output, counted by an independent script.
    const Trace trace = testsupport::load_hotpot_trace();
    CHECK(count_tokens(trace.tools[4].tool_output, TokenMethod::whitespace).value == 44);
}

TEST_CASE("count_tokens is additive over a single separating space") {
    std::mt19937 rng(11);
    const std::vector<std::string> parts = {"a", "b c", "d  e f", "ghi"};
    for (int iter = 0; iter < 30; ++iter) {
        const std::string a = parts[rng() % parts.size()];
        const std::string b = parts[rng() % parts.size()];
        CHECK(count_tokens(a + " " + b, TokenMethod::whitespace).value ==
              count_tokens(a, TokenMethod::whitespace).value +
                  count_tokens(b, TokenMethod::whitespace).value);
    }
}

TEST_CASE("custom tokenizers must be registered") {
    CHECK_THROWS_AS(count_tokens("x", TokenMethod::custom, "nope"), ConfigError);
    register_tokenizer("chars", [](const std::string& s) {
        return static_cast<std::uint64_t>(s.size());
    });
    const TokenCount tc = count_tokens("abc", TokenMethod::custom, "chars");
    CHECK(tc.value == 3);
    CHECK(token_method_name(tc) == "chars");
}
