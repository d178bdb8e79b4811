#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "aif/heuristics.hpp"
#include "aif/llm.hpp"
#include "aif/mincut.hpp"

namespace aif::eval {

/// One QA benchmark example; each context document is treated as a single
/// tool call. gold_support holds 0-based context indices.
struct QaExample {
    std::string example_id;
    std::string query;
    std::vector<std::pair<std::string, std::string>> contexts;  // (title, passage)
    std::set<int> gold_support;
    std::string reference_answer;
};

enum class Adapter { hotpotqa, msmarco, musique, wikimqa, generic };

Adapter adapter_from_name(const std::string& name);
std::vector<std::string> adapter_names();

/// Load a dataset file (a JSON array or JSONL, sniffed) through the named
/// adapter. Field-mapping failures name the missing source field.
std::vector<QaExample> load_dataset(const std::string& path, Adapter adapter);

/// Per-example attribution precision/recall. Undefined when the
/// corresponding set is empty.
struct PrfTerms {
    std::optional<double> precision;
    std::optional<double> recall;
};
PrfTerms attribution_prf(const std::set<int>& gold, const std::set<int>& predicted);

/// Macro aggregates over the defined per-example terms; exclusion counts
/// record how many examples were undefined on each side.
struct MacroPrf {
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;  // harmonic mean of the macro terms
    int n = 0;
    int excluded_precision = 0;
    int excluded_recall = 0;
};
MacroPrf macro_prf(const std::vector<PrfTerms>& terms);

/// Probability a random positive outranks a random negative, ties 0.5
/// (Mann-Whitney). Undefined with a reason on single-class input.
struct AurocResult {
    std::optional<double> value;
    std::string reason;
    int n_pos = 0;
    int n_neg = 0;
};
AurocResult auroc(const std::vector<double>& scores, const std::vector<bool>& labels);

struct ModelRoles {
    std::string decomposer = "gpt-5-nano";
    std::string matcher = "gpt-5-nano";
    std::string answer = "gpt-4.1";
    std::string judge = "gpt-4.1";
};

struct EvalConfig {
    Adapter adapter = Adapter::generic;
    std::vector<int> k_grid = {1, 2, 3, 4, 5};
    std::string decomposer_kind = "baseline";  // baseline | llm
    std::string matcher_kind = "baseline";     // baseline | llm
    double tau = 0.5;
    std::size_t partition_size = 1000000;
    std::size_t chunk_sentences = 40;
    std::string compression = "off";  // off | lossless | budgeted
    std::uint64_t budget = 0;
    CapacityProvider provider = CapacityProvider::tup;
    std::string solver = "exact";
    ModelRoles models;
    llm::ClientConfig client;
    int jobs = 0;       // 0 = hardware concurrency
    int limit = 0;      // 0 = all examples
};

/// Parse `key = value` config lines ('#' comments); unknown keys error.
EvalConfig parse_config_text(const std::string& text);
EvalConfig load_config_file(const std::string& path);

/// Fill the answer prompt with the query and the retained contexts (in
/// order) and return the model's answer.
std::string generate_answer(const QaExample& example, llm::Client& client,
                            const std::string& model,
                            const std::optional<std::set<int>>& retained = std::nullopt);

enum class JudgeVerdict { correct, incorrect, parse_failed };

/// Boolean LLM judgment of answer vs reference; unparseable completions are
/// retried once (bypassing the cache read), then bucketed as parse_failed.
JudgeVerdict judge(const std::string& answer, const std::string& reference,
                   const std::string& query, llm::Client& client,
                   const std::string& model);

struct ExampleResult {
    std::string example_id;
    std::string status;  // ok | judge_parse_failed | error
    std::optional<bool> judged;
    std::set<int> predicted_support;
    std::set<int> gold_support;
    PrfTerms prf;
    std::optional<double> rap;
    std::optional<double> factscore;
    std::map<int, std::optional<double>> rap_at_k;
    double token_reduction = 0.0;
    std::string failure;
};

struct BatchResult {
    std::vector<ExampleResult> examples;
    MacroPrf true_segment;
    MacroPrf false_segment;
    int parse_failures = 0;
    int errors = 0;
    std::map<int, AurocResult> auroc_by_k;
    std::optional<double> accuracy;         // judged-correct rate
    std::optional<double> mean_token_reduction;
};

/// The full experimental loop: per example generate, attribute, score,
/// judge (optionally through min-cut compression), then aggregate into
/// True/False segments. Per-example failures are quarantined; the batch
/// always completes.
BatchResult run_pipeline(const std::vector<QaExample>& dataset, const EvalConfig& config);

/// Deterministic report payloads (timestamps live elsewhere).
std::string results_to_json(const BatchResult& batch);
std::string segments_to_csv(const BatchResult& batch);
std::string auroc_to_csv(const BatchResult& batch);

}  // namespace aif::eval
