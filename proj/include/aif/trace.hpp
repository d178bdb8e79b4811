#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace aif {

/// One tool invocation inside a trace. tool_id is the 1-based position in
/// the trace's tool list.
struct ToolCall {
    int tool_id = 0;
    std::string tool_name;
    std::string tool_input;
    std::string tool_output;
    std::string tool_metadata;
    double tool_execution_duration = 0.0;
};

/// One RAG execution: the query feeding the system, the ordered tool calls,
/// and the final response text. Immutable after construction; safe to share
/// across workers.
struct Trace {
    std::string trace_id;
    std::string query;
    std::string response;
    std::vector<ToolCall> tools;
};

enum class TokenMethod { whitespace, custom };

struct TokenCount {
    std::uint64_t value = 0;
    TokenMethod method = TokenMethod::whitespace;
    std::string custom_name;  // set when method == custom
};

std::string token_method_name(const TokenCount& tc);

/// Parse trace JSON (schema v1). tool_id is assigned by array position.
/// Throws ValidationError on malformed JSON (with byte offset), missing
/// fields (naming the field), or empty tool outputs.
Trace parse_trace(const std::string& raw_json);

/// Inverse of parse_trace on valid traces; tool order is preserved.
std::string serialize_trace(const Trace& trace);

Trace load_trace_file(const std::string& path);

/// Registry of custom tokenizers for count_tokens. The whitespace method is
/// built in; anything else must be registered before use.
void register_tokenizer(const std::string& name,
                        std::function<std::uint64_t(const std::string&)> fn);

TokenCount count_tokens(const std::string& text, TokenMethod method,
                        const std::string& custom_name = {});

}  // namespace aif
