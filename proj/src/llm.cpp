#include "aif/llm.hpp"

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "aif/digest.hpp"
#include "aif/errors.hpp"

namespace aif::llm {

using nlohmann::json;
namespace fs = std::filesystem;

std::string canonical_request_json(const CompletionRequest& request) {
    json root;  // nlohmann objects dump with sorted keys
    root["model"] = request.model;
    if (request.system) root["system"] = *request.system;
    root["user"] = request.user;
    root["temperature"] = request.temperature;
    root["max_output"] = request.max_output;
    if (request.seed) root["seed"] = *request.seed;
    if (!request.extra.empty()) {
        json extra = json::object();
        for (const auto& [k, v] : request.extra) extra[k] = v;
        root["extra"] = std::move(extra);
    }
    return root.dump();
}

std::string cache_key(const CompletionRequest& request) {
    return sha256_hex(canonical_request_json(request));
}

FileCache::FileCache(std::string root_dir) : root_(std::move(root_dir)) {}

std::string FileCache::path_for(const std::string& key) const {
    return root_ + "/" + key.substr(0, 2) + "/" + key.substr(2, 2) + "/" + key +
           ".json";
}

std::optional<std::string> FileCache::get(const CompletionRequest& request) const {
    const std::string key = cache_key(request);
    std::ifstream in(path_for(key), std::ios::binary);
    if (!in) return std::nullopt;
    json entry;
    try {
        in >> entry;
    } catch (const json::parse_error& e) {
        throw ValidationError("corrupt cache entry " + key + ": " + e.what());
    }
    const std::string stored_key = entry.value("key", "");
    const std::string recomputed = sha256_hex(entry.at("request").dump());
    if (stored_key != key || recomputed != key) {
        throw ValidationError("cache entry " + key +
                              " fails key recomputation (stored request digests to " +
                              recomputed + ")");
    }
    return entry.at("response_text").get<std::string>();
}

void FileCache::put(const CompletionRequest& request, const std::string& response_text,
                    const std::string& provider_metadata) const {
    const std::string canonical = canonical_request_json(request);
    const std::string key = sha256_hex(canonical);
    const fs::path target = path_for(key);
    fs::create_directories(target.parent_path());

    json entry;
    entry["key"] = key;
    entry["request"] = json::parse(canonical);
    entry["response_text"] = response_text;
    {
        const auto now = std::chrono::system_clock::now();
        const std::time_t t = std::chrono::system_clock::to_time_t(now);
        char buf[32];
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
        entry["created_at"] = buf;
    }
    entry["provider_metadata"] = provider_metadata;

    const fs::path tmp = target.string() + "." + std::to_string(::getpid()) + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        out << entry.dump(2) << "\n";
    }
    fs::rename(tmp, target);
}

struct Client::Inflight {
    std::mutex mutex;
    std::map<std::string, std::shared_future<std::string>> pending;
};

Client::Client(ClientConfig config)
    : config_(std::move(config)),
      cache_(config_.cache_dir),
      inflight_(std::make_unique<Inflight>()) {}

Client::~Client() = default;

std::string Client::complete(const CompletionRequest& request, bool bypass_cache_read) {
    if (!bypass_cache_read) {
        if (auto hit = cache_.get(request)) return *hit;
    }
    const std::string key = cache_key(request);
    if (config_.offline) {
        throw CacheMissError(key, "offline mode cache miss for key " + key);
    }

    // Collapse duplicate concurrent misses to one network call.
    std::shared_future<std::string> future;
    bool is_owner = false;
    std::promise<std::string> promise;
    {
        std::lock_guard<std::mutex> lock(inflight_->mutex);
        auto it = inflight_->pending.find(key);
        if (it != inflight_->pending.end()) {
            future = it->second;
        } else {
            future = promise.get_future().share();
            inflight_->pending.emplace(key, future);
            is_owner = true;
        }
    }
    if (!is_owner) return future.get();

    try {
        std::string text = perform(request);
        cache_.put(request, text);
        promise.set_value(text);
        std::lock_guard<std::mutex> lock(inflight_->mutex);
        inflight_->pending.erase(key);
        return text;
    } catch (...) {
        promise.set_exception(std::current_exception());
        std::lock_guard<std::mutex> lock(inflight_->mutex);
        inflight_->pending.erase(key);
        throw;
    }
}

std::string Client::perform(const CompletionRequest& request) {
    if (config_.endpoint.empty()) {
        throw TransportError("no LLM endpoint configured");
    }
    // Split an optional path prefix off the endpoint.
    std::string base = config_.endpoint;
    std::string prefix;
    const auto scheme_end = base.find("://");
    if (scheme_end != std::string::npos) {
        const auto path_start = base.find('/', scheme_end + 3);
        if (path_start != std::string::npos) {
            prefix = base.substr(path_start);
            base = base.substr(0, path_start);
            if (prefix == "/") prefix.clear();
        }
    }

    json body;
    body["model"] = request.model;
    json messages = json::array();
    if (request.system) {
        messages.push_back({{"role", "system"}, {"content", *request.system}});
    }
    messages.push_back({{"role", "user"}, {"content", request.user}});
    body["messages"] = std::move(messages);
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_output;
    if (request.seed) body["seed"] = *request.seed;
    for (const auto& [k, v] : request.extra) body[k] = v;

    httplib::Headers headers;
    if (!config_.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + config_.api_key);
    }

    std::ostringstream attempts;
    int delay_ms = config_.retry.base_delay_ms;
    for (int attempt = 0; attempt <= config_.retry.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
            delay_ms *= 2;
        }
        httplib::Client http(base);
        http.set_connection_timeout(30);
        http.set_read_timeout(120);
        auto res = http.Post(prefix + "/v1/chat/completions", headers, body.dump(),
                             "application/json");
        if (!res) {
            attempts << "attempt " << attempt + 1 << ": transport failure ("
                     << httplib::to_string(res.error()) << "); ";
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            attempts << "attempt " << attempt + 1 << ": HTTP " << res->status << "; ";
            continue;
        }
        if (res->status != 200) {
            throw TransportError("chat completion failed with HTTP " +
                                 std::to_string(res->status) + ": " + res->body);
        }
        try {
            json parsed = json::parse(res->body);
            return parsed.at("choices").at(0).at("message").at("content")
                .get<std::string>();
        } catch (const json::exception& e) {
            throw TransportError(std::string("malformed completion response: ") +
                                 e.what());
        }
    }
    throw TransportError("chat completion exhausted retries: " + attempts.str());
}

std::string render(const PromptTemplate& tmpl,
                   const std::map<std::string, std::string>& bindings) {
    std::string out = tmpl.body;
    for (const auto& name : tmpl.placeholders) {
        auto it = bindings.find(name);
        if (it == bindings.end()) {
            throw ValidationError("render error: missing binding for placeholder {" +
                                  name + "} in template " + tmpl.name);
        }
        const std::string token = "{" + name + "}";
        std::size_t pos = 0;
        while ((pos = out.find(token, pos)) != std::string::npos) {
            out.replace(pos, token.size(), it->second);
            pos += it->second.size();
        }
    }
    return out;
}

std::string format_grounding_facts(
    const std::vector<std::pair<int, std::string>>& facts) {
    json arr = json::array();
    for (const auto& [index, fact] : facts) {
        arr.push_back("Index " + std::to_string(index) + ": " + fact);
    }
    return arr.dump(2);
}

namespace {

std::string strip_code_fence(const std::string& s) {
    std::size_t begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return s;
    std::size_t end = s.find_last_not_of(" \t\r\n") + 1;
    if (s.compare(begin, 3, "```") == 0) {
        const auto line_end = s.find('\n', begin);
        if (line_end != std::string::npos) begin = line_end + 1;
        const auto closing = s.rfind("```");
        if (closing != std::string::npos && closing >= begin) end = closing;
    }
    return s.substr(begin, end - begin);
}

}  // namespace

std::vector<DecomposedFact> parse_decomposition(const std::string& completion) {
    json arr;
    try {
        arr = json::parse(strip_code_fence(completion));
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("decomposition completion is not JSON: ") +
                              e.what());
    }
    if (!arr.is_array()) {
        throw ValidationError("decomposition completion must be a JSON array");
    }
    std::vector<DecomposedFact> facts;
    for (const auto& row : arr) {
        DecomposedFact f;
        f.fact = row.at("Fact").get<std::string>();
        if (row.contains("Relevance") && !row["Relevance"].is_null()) {
            f.relevance = row["Relevance"].get<int>();
        }
        facts.push_back(std::move(f));
    }
    return facts;
}

LlmDecomposer::LlmDecomposer(Client& client, std::string model)
    : client_(client), model_(std::move(model)) {}

std::vector<DecomposedFact> LlmDecomposer::decompose(const std::string& text,
                                                     const std::string& query) {
    CompletionRequest request;
    request.model = model_;
    request.user = render(decompose_template(),
                          {{"user_query", query}, {"grounding_data", text}});
    std::string last_error;
    for (int attempt = 0; attempt < 3; ++attempt) {
        const std::string completion = client_.complete(request, attempt > 0);
        try {
            return parse_decomposition(completion);
        } catch (const ValidationError& e) {
            last_error = e.what();
        }
    }
    throw ValidationError("decomposition failed after retries: " + last_error);
}

FusedAssignResult fused_assign(Client& client, const std::string& model,
                               const std::string& query,
                               const std::string& response_text,
                               const FlatPool& pool, std::size_t partition_size) {
    if (partition_size < 1) throw ValidationError("partition_size must be >= 1");
    FusedAssignResult result;
    const std::size_t pool_size = pool.atoms.size();

    struct Row {
        std::string fact;
        std::set<int> indices;
    };

    std::vector<Row> canonical;
    bool have_canonical = false;

    const std::size_t partitions =
        pool_size == 0 ? 1 : (pool_size + partition_size - 1) / partition_size;
    for (std::size_t p = 0; p < partitions; ++p) {
        const std::size_t offset = p * partition_size;
        const std::size_t count =
            pool_size == 0 ? 0 : std::min(partition_size, pool_size - offset);
        std::vector<std::pair<int, std::string>> facts;
        facts.reserve(count);
        for (std::size_t k = 0; k < count; ++k) {
            facts.emplace_back(pool.atoms[offset + k].global_index,
                               pool.atoms[offset + k].fact);
        }

        CompletionRequest request;
        request.model = model;
        request.user = render(assign_template(),
                              {{"query", query},
                               {"response", response_text},
                               {"grounding_facts", format_grounding_facts(facts)}});

        json arr;
        bool parsed = false;
        for (int attempt = 0; attempt < 3 && !parsed; ++attempt) {
            const std::string completion = client.complete(request, attempt > 0);
            try {
                arr = json::parse(strip_code_fence(completion));
                parsed = arr.is_array();
            } catch (const json::parse_error&) {
                parsed = false;
            }
        }
        if (!parsed) {
            ++result.attribution.partition_failures;
            continue;
        }

        std::vector<Row> rows;
        for (const auto& item : arr) {
            Row row;
            row.fact = item.at("Fact").get<std::string>();
            for (const auto& idx : item.value("Assignment", json::array())) {
                const int i = idx.get<int>();
                if (i < 0 || i >= static_cast<int>(pool_size)) {
                    ++result.attribution.dropped_indices;
                    continue;
                }
                row.indices.insert(i);
            }
            rows.push_back(std::move(row));
        }

        if (!have_canonical) {
            canonical = std::move(rows);
            have_canonical = true;
            continue;
        }
        // Union later partitions into the canonical rows: exact fact-string
        // match first, order alignment as fallback.
        for (std::size_t j = 0; j < rows.size(); ++j) {
            auto match = std::find_if(canonical.begin(), canonical.end(),
                                      [&](const Row& c) { return c.fact == rows[j].fact; });
            if (match != canonical.end()) {
                match->indices.insert(rows[j].indices.begin(), rows[j].indices.end());
            } else if (rows.size() == canonical.size()) {
                canonical[j].indices.insert(rows[j].indices.begin(),
                                            rows[j].indices.end());
                ++result.attribution.row_mismatches;
            } else {
                ++result.attribution.row_mismatches;
            }
        }
    }

    int local = 0;
    for (auto& row : canonical) {
        Atom atom;
        atom.local_index = local++;
        atom.source = {SourceKind::response, 0};
        atom.fact = std::move(row.fact);
        result.response_atoms.push_back(std::move(atom));

        AttributionMap::Entry entry;
        entry.matched_indices = std::move(row.indices);
        for (int idx : entry.matched_indices) {
            entry.source_tools.insert(pool.source_map[static_cast<std::size_t>(idx)]);
        }
        result.attribution.entries.push_back(std::move(entry));
    }
    return result;
}

}  // namespace aif::llm
