#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "aif/assigner.hpp"
#include "aif/atomizer.hpp"

namespace aif::llm {

/// One chat completion. The cache key is the SHA-256 of the canonical JSON
/// of exactly these fields (absent optionals omitted), so provider response
/// metadata never perturbs replay.
struct CompletionRequest {
    std::string model;
    std::optional<std::string> system;
    std::string user;
    double temperature = 0.0;
    int max_output = 4096;
    std::optional<int> seed;
    std::map<std::string, nlohmann::json> extra;  // provider-specific passthrough
};

std::string canonical_request_json(const CompletionRequest& request);
std::string cache_key(const CompletionRequest& request);

/// Content-addressed completion cache: one JSON file per key under a
/// two-level hex fan-out. Writes are atomic (temp file + rename); safe for
/// concurrent callers.
class FileCache {
public:
    explicit FileCache(std::string root_dir);

    std::optional<std::string> get(const CompletionRequest& request) const;
    void put(const CompletionRequest& request, const std::string& response_text,
             const std::string& provider_metadata = {}) const;

    const std::string& root() const { return root_; }

private:
    std::string path_for(const std::string& key) const;
    std::string root_;
};

struct RetryPolicy {
    int max_retries = 3;
    int base_delay_ms = 250;  // doubled per attempt
};

struct ClientConfig {
    std::string endpoint;  // e.g. https://api.openai.com
    std::string api_key;
    std::string cache_dir = ".aif-cache";
    bool offline = false;
    RetryPolicy retry;
};

/// Provider-agnostic chat-completion client. Cache hits never touch the
/// network; offline misses raise CacheMissError naming the key. Concurrent
/// misses for the same key collapse to a single request.
class Client {
public:
    explicit Client(ClientConfig config);
    ~Client();

    /// bypass_cache_read re-issues the request even if cached (used for
    /// parse-failure retries); the fresh response is still stored.
    std::string complete(const CompletionRequest& request,
                         bool bypass_cache_read = false);

    const ClientConfig& config() const { return config_; }

private:
    std::string perform(const CompletionRequest& request);

    ClientConfig config_;
    FileCache cache_;
    struct Inflight;
    std::unique_ptr<Inflight> inflight_;
};

/// Prompt templates for the pipeline roles. Rendering substitutes every
/// declared placeholder literally and fails if a binding is missing.
struct PromptTemplate {
    std::string name;  // decompose | assign | answer | judge
    std::string body;
    std::vector<std::string> placeholders;
};

const PromptTemplate& decompose_template();
const PromptTemplate& assign_template();
const PromptTemplate& answer_template();
const PromptTemplate& judge_template();

std::string render(const PromptTemplate& tmpl,
                   const std::map<std::string, std::string>& bindings);

/// Candidate atoms rendered as "Index N: <fact>" lines (JSON string array),
/// indices as given.
std::string format_grounding_facts(const std::vector<std::pair<int, std::string>>& facts);

/// Parse a [{"Fact","Relevance"}] completion; tolerates markdown fences.
std::vector<DecomposedFact> parse_decomposition(const std::string& completion);

/// Decomposer backed by the decompose prompt (identity "llm:<model>").
/// A JSON parse failure retries twice (bypassing the cache read), then the
/// chunk fails.
class LlmDecomposer : public Decomposer {
public:
    LlmDecomposer(Client& client, std::string model);
    std::vector<DecomposedFact> decompose(const std::string& text,
                                          const std::string& query) override;
    std::string identity() const override { return "llm:" + model_; }

private:
    Client& client_;
    std::string model_;
};

struct FusedAssignResult {
    std::vector<Atom> response_atoms;
    AttributionMap attribution;
};

/// One-call decompose+assign over the response (the fused mode). The pool
/// is fanned out in partitions of at most partition_size candidates whose
/// lines carry pool-global indices; per-fact assignments are unioned across
/// partitions, matching rows by exact fact string with order-alignment
/// fallback. Out-of-pool indices are dropped with a warning count.
FusedAssignResult fused_assign(Client& client, const std::string& model,
                               const std::string& query,
                               const std::string& response_text,
                               const FlatPool& pool, std::size_t partition_size);

}  // namespace aif::llm
