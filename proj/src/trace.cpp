#include "aif/trace.hpp"

#include <fstream>
#include <mutex>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "aif/errors.hpp"
#include "aif/text.hpp"

namespace aif {

using nlohmann::json;

namespace {

const json& require_field(const json& obj, const char* name,
                          const std::string& where) {
    auto it = obj.find(name);
    if (it == obj.end()) {
        throw ValidationError("schema error: missing field " + where + name);
    }
    return *it;
}

std::string require_string(const json& obj, const char* name,
                           const std::string& where) {
    const json& v = require_field(obj, name, where);
    if (!v.is_string()) {
        throw ValidationError("schema error: field " + where + name +
                              " must be a string");
    }
    return v.get<std::string>();
}

std::unordered_map<std::string, std::function<std::uint64_t(const std::string&)>>&
tokenizer_registry() {
    static std::unordered_map<std::string,
                              std::function<std::uint64_t(const std::string&)>>
        registry;
    return registry;
}

std::mutex& tokenizer_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

std::string token_method_name(const TokenCount& tc) {
    return tc.method == TokenMethod::whitespace ? "whitespace" : tc.custom_name;
}

Trace parse_trace(const std::string& raw_json) {
    json root;
    try {
        root = json::parse(raw_json);
    } catch (const json::parse_error& e) {
        throw ValidationError("parse error at byte " + std::to_string(e.byte) +
                              ": " + e.what());
    }
    if (!root.is_object()) {
        throw ValidationError("schema error: trace must be a JSON object");
    }

    Trace trace;
    trace.trace_id = root.value("trace_id", std::string{});
    trace.query = require_string(root, "query", "");
    trace.response = require_string(root, "response", "");
    if (trace.query.empty()) {
        throw ValidationError("validation error: query must be non-empty");
    }

    const json& tools = require_field(root, "tools", "");
    if (!tools.is_array()) {
        throw ValidationError("schema error: field tools must be an array");
    }

    int next_id = 1;
    for (std::size_t i = 0; i < tools.size(); ++i) {
        const json& t = tools[i];
        const std::string where = "tools[" + std::to_string(i) + "].";
        if (!t.is_object()) {
            throw ValidationError("schema error: " + where.substr(0, where.size() - 1) +
                                  " must be an object");
        }
        ToolCall call;
        call.tool_id = next_id++;
        call.tool_name = require_string(t, "tool_name", where);
        call.tool_input = require_string(t, "tool_input", where);
        call.tool_output = require_string(t, "tool_output", where);
        call.tool_metadata = t.value("tool_metadata", std::string{});
        call.tool_execution_duration = t.value("tool_execution_duration", 0.0);
        if (call.tool_execution_duration < 0) {
            throw ValidationError("validation error: " + where +
                                  "tool_execution_duration must be >= 0");
        }
        if (call.tool_output.empty()) {
            throw ValidationError("validation error: " + where +
                                  "tool_output is empty");
        }
        // Explicit tool_id fields are allowed in the input but must agree
        // with the positional assignment (duplicates cannot arise otherwise).
        if (t.contains("tool_id")) {
            const int claimed = t["tool_id"].get<int>();
            if (claimed != call.tool_id) {
                throw ValidationError("validation error: " + where + "tool_id " +
                                      std::to_string(claimed) +
                                      " conflicts with position " +
                                      std::to_string(call.tool_id));
            }
        }
        trace.tools.push_back(std::move(call));
    }
    return trace;
}

std::string serialize_trace(const Trace& trace) {
    json root;
    root["trace_id"] = trace.trace_id;
    root["query"] = trace.query;
    root["response"] = trace.response;
    json tools = json::array();
    for (const auto& t : trace.tools) {
        tools.push_back({{"tool_name", t.tool_name},
                         {"tool_input", t.tool_input},
                         {"tool_output", t.tool_output},
                         {"tool_metadata", t.tool_metadata},
                         {"tool_execution_duration", t.tool_execution_duration}});
    }
    root["tools"] = std::move(tools);
    return root.dump(2) + "\n";
}

Trace load_trace_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read trace file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_trace(buf.str());
}

void register_tokenizer(const std::string& name,
                        std::function<std::uint64_t(const std::string&)> fn) {
    std::lock_guard<std::mutex> lock(tokenizer_mutex());
    tokenizer_registry()[name] = std::move(fn);
}

TokenCount count_tokens(const std::string& text, TokenMethod method,
                        const std::string& custom_name) {
    TokenCount tc;
    tc.method = method;
    if (method == TokenMethod::whitespace) {
        tc.value = text::whitespace_token_count(text);
        return tc;
    }
    tc.custom_name = custom_name;
    std::function<std::uint64_t(const std::string&)> fn;
    {
        std::lock_guard<std::mutex> lock(tokenizer_mutex());
        auto it = tokenizer_registry().find(custom_name);
        if (it == tokenizer_registry().end()) {
            throw ConfigError("unknown custom tokenizer: " + custom_name);
        }
        fn = it->second;
    }
    tc.value = fn(text);
    return tc;
}

}  // namespace aif
