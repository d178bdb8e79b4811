#pragma once

// Shared fixture plumbing for the unit and acceptance suites: loads the
// HotpotQA fixture corpus and seeds completion caches so LLM-backed paths
// replay offline.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "aif/eval.hpp"
#include "aif/llm.hpp"
#include "aif/trace.hpp"

namespace testsupport {

inline std::string fixtures_dir() { return AIF_FIXTURES_DIR; }
inline std::string cli_path() { return AIF_CLI_PATH; }

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline std::string hotpot_trace_path() {
    return fixtures_dir() + "/hotpot_trace.json";
}

inline aif::Trace load_hotpot_trace() {
    return aif::load_trace_file(hotpot_trace_path());
}

// Seed a cache with the per-tool decomposition completions and the fused
// assignment completion for the HotpotQA fixture trace, keyed exactly as
// the pipeline will request them.
inline void warm_hotpot_cache(const std::string& cache_dir,
                              const std::string& model = "gpt-5-nano") {
    const aif::Trace trace = load_hotpot_trace();
    const nlohmann::json decompositions =
        nlohmann::json::parse(read_file(fixtures_dir() + "/hotpot_decompositions.json"));
    aif::llm::FileCache cache(cache_dir);

    std::vector<std::pair<int, std::string>> pool_facts;
    for (const auto& entry : decompositions) {
        const int tool_id = entry.at("tool_id").get<int>();
        const std::string& output = trace.tools.at(tool_id - 1).tool_output;

        aif::llm::CompletionRequest request;
        request.model = model;
        request.user = aif::llm::render(aif::llm::decompose_template(),
                                        {{"user_query", trace.query},
                                         {"grounding_data", output}});
        cache.put(request, entry.at("atoms").dump(2));

        for (const auto& atom : entry.at("atoms")) {
            pool_facts.emplace_back(static_cast<int>(pool_facts.size()),
                                    atom.at("Fact").get<std::string>());
        }
    }

    aif::llm::CompletionRequest assign_request;
    assign_request.model = model;
    assign_request.user = aif::llm::render(
        aif::llm::assign_template(),
        {{"query", trace.query},
         {"response", trace.response},
         {"grounding_facts", aif::llm::format_grounding_facts(pool_facts)}});
    cache.put(assign_request, read_file(fixtures_dir() + "/hotpot_assignment.json"));
}

// Seed a cache with answer + judge completions for the 3-example eval
// fixture (baseline decomposer/matcher; LLM only answers and judges).
inline void warm_eval_cache(const std::string& cache_dir) {
    const nlohmann::json completions =
        nlohmann::json::parse(read_file(fixtures_dir() + "/eval_completions.json"));
    const auto dataset = aif::eval::load_dataset(
        fixtures_dir() + "/eval_examples.jsonl", aif::eval::Adapter::generic);
    aif::llm::FileCache cache(cache_dir);

    const std::string answer_model = completions.at("answer_model").get<std::string>();
    const std::string judge_model = completions.at("judge_model").get<std::string>();
    for (const auto& example : dataset) {
        std::string grounding;
        for (const auto& [title, passage] : example.contexts) {
            if (!grounding.empty()) grounding += "\n\n";
            grounding += "Title: " + title + "\n" + passage;
        }
        const std::string answer =
            completions.at("answers").at(example.example_id).get<std::string>();

        aif::llm::CompletionRequest answer_request;
        answer_request.model = answer_model;
        answer_request.user = aif::llm::render(aif::llm::answer_template(),
                                               {{"user_query", example.query},
                                                {"grounding_context", grounding}});
        cache.put(answer_request, answer);

        aif::llm::CompletionRequest judge_request;
        judge_request.model = judge_model;
        judge_request.user = aif::llm::render(
            aif::llm::judge_template(),
            {{"query", example.query},
             {"reference_answer", example.reference_answer},
             {"actual_answer", answer}});
        cache.put(judge_request,
                  completions.at("judges").at(example.example_id).get<std::string>());
    }
}

inline std::filesystem::path fresh_temp_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() /
               ("aif_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testsupport
