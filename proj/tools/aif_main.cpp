// aif: reconstruct atomic information flow from RAG traces, score it, and
// derive context-compression decisions. Subcommands mirror the pipeline
// stages and write their outputs into a per-trace run directory so each
// stage can be re-run independently.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "aif/assigner.hpp"
#include "aif/atomizer.hpp"
#include "aif/digest.hpp"
#include "aif/errors.hpp"
#include "aif/eval.hpp"
#include "aif/flow_graph.hpp"
#include "aif/heuristics.hpp"
#include "aif/llm.hpp"
#include "aif/manifest.hpp"
#include "aif/mincut.hpp"
#include "aif/signals.hpp"
#include "aif/trace.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitTransport = 3;
constexpr int kExitInternal = 4;

struct LlmOptions {
    std::string endpoint;
    std::string api_key_env = "AIF_API_KEY";
    std::string cache_dir = ".aif-cache";
    bool offline = false;
    std::string model_decomposer = "gpt-5-nano";
    std::string model_matcher = "gpt-5-nano";

    aif::llm::ClientConfig client_config() const {
        aif::llm::ClientConfig config;
        config.endpoint = endpoint;
        if (const char* key = std::getenv(api_key_env.c_str())) config.api_key = key;
        config.cache_dir = cache_dir;
        config.offline = offline;
        return config;
    }
};

void add_llm_options(CLI::App* cmd, LlmOptions& opts) {
    cmd->add_option("--endpoint", opts.endpoint, "Chat-completions endpoint URL");
    cmd->add_option("--api-key-env", opts.api_key_env,
                    "Environment variable holding the API key");
    cmd->add_option("--cache-dir", opts.cache_dir, "Completion cache directory");
    cmd->add_flag("--offline", opts.offline,
                  "Serve completions from the cache only; misses fail");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw aif::ValidationError("cannot read file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    fs::create_directories(fs::path(path).parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw aif::ValidationError("cannot write file: " + path);
    out << content;
}

aif::Trace load_trace_with_id(const std::string& path) {
    if (!fs::exists(path)) {
        throw aif::ValidationError("trace file does not exist: " + path);
    }
    aif::Trace trace = aif::load_trace_file(path);
    if (trace.trace_id.empty()) trace.trace_id = fs::path(path).stem().string();
    return trace;
}

std::string run_dir_for(const std::string& out_dir, const aif::Trace& trace) {
    return out_dir + "/" + trace.trace_id;
}

// Rebuild the AtomMap (with relevance applied) from a run directory.
std::pair<aif::AtomMap, aif::SignalMap> load_atoms_and_signals(
    const std::string& run_dir, const aif::Trace& trace) {
    aif::AtomMap atoms;
    for (const auto& tool : trace.tools) {
        const std::string path =
            run_dir + "/atoms/tool_" + std::to_string(tool.tool_id) + ".json";
        if (!fs::exists(path)) {
            throw aif::ValidationError("missing " + path +
                                       "; run `aif decompose` first");
        }
        atoms.entries[tool.tool_id] = aif::atoms_from_json(
            read_file(path), {aif::SourceKind::tool, tool.tool_id});
    }
    const std::string signals_path = run_dir + "/signals/relevance.json";
    if (!fs::exists(signals_path)) {
        throw aif::ValidationError("missing " + signals_path +
                                   "; run `aif decompose` first");
    }
    aif::SignalMap signals = aif::signals_from_json(read_file(signals_path));
    aif::apply_signals(atoms, signals);
    return {std::move(atoms), std::move(signals)};
}

int cmd_decompose(const std::string& trace_path, const std::string& out_dir,
                  const std::string& decomposer_kind, std::size_t chunk_sentences,
                  const LlmOptions& llm_opts) {
    const aif::Trace trace = load_trace_with_id(trace_path);
    const std::string run_dir = run_dir_for(out_dir, trace);

    aif::AtomMap atoms;
    const aif::ChunkingParams chunking{chunk_sentences};
    std::unique_ptr<aif::llm::Client> client;
    if (decomposer_kind == "llm") {
        client = std::make_unique<aif::llm::Client>(llm_opts.client_config());
        aif::llm::LlmDecomposer decomposer(*client, llm_opts.model_decomposer);
        atoms = aif::decompose_tool_calls(trace, decomposer, chunking);
    } else if (decomposer_kind == "baseline") {
        aif::BaselineDecomposer decomposer;
        atoms = aif::decompose_tool_calls(trace, decomposer, chunking);
    } else {
        throw aif::ValidationError("unknown decomposer: " + decomposer_kind);
    }

    aif::BaselineScorer scorer;
    aif::SignalMap signals = aif::inject_signals(atoms, trace.query, scorer);
    aif::apply_signals(atoms, signals);

    // Stamp pool-global indices so the per-tool files carry the same Index
    // space the assignment stage will reference.
    const aif::FlatPool pool = aif::flatten(atoms);
    aif::AtomMap indexed;
    for (const auto& atom : pool.atoms) {
        indexed.entries[atom.source.tool_id].push_back(atom);
    }
    for (const auto& tool : trace.tools) indexed.entries[tool.tool_id];

    std::vector<std::string> outputs;
    write_file(run_dir + "/trace.json", aif::serialize_trace(trace));
    outputs.push_back("trace.json");
    for (const auto& [tool_id, list] : indexed.entries) {
        const std::string rel = "atoms/tool_" + std::to_string(tool_id) + ".json";
        write_file(run_dir + "/" + rel, aif::atoms_to_json(list));
        outputs.push_back(rel);
    }
    write_file(run_dir + "/signals/relevance.json", aif::signals_to_json(signals));
    outputs.push_back("signals/relevance.json");

    int warnings = signals.clamp_warnings;
    if (trace.tools.empty()) {
        ++warnings;
        std::cerr << "warning: trace has no tools; nothing to decompose\n";
    }
    for (const auto& [tool_id, error] : atoms.failures) {
        std::cerr << "warning: tool " << tool_id << " decomposition failed: " << error
                  << "\n";
    }

    aif::RunManifest manifest = aif::load_manifest(run_dir + "/manifest.json");
    manifest.trace_id = trace.trace_id;
    aif::record_stage(manifest, run_dir, "decompose", outputs,
                      {{"decomposer", decomposer_kind},
                       {"chunk_sentences", std::to_string(chunk_sentences)}},
                      warnings, static_cast<int>(atoms.failures.size()));
    aif::save_manifest(run_dir + "/manifest.json", manifest);

    std::cout << "decomposed " << trace.tools.size() << " tools into "
              << atoms.total_atoms() << " atoms -> " << run_dir << "\n";
    return kExitOk;
}

int cmd_attribute(const std::string& trace_path, const std::string& out_dir,
                  const std::string& matcher_kind, double tau,
                  std::size_t partition_size, const LlmOptions& llm_opts) {
    const aif::Trace trace = load_trace_with_id(trace_path);
    const std::string run_dir = run_dir_for(out_dir, trace);
    if (trace.response.empty()) {
        throw aif::ValidationError(
            "trace has no response text; record or generate a response before "
            "attribution");
    }

    auto [atoms, signals] = load_atoms_and_signals(run_dir, trace);
    const aif::FlatPool pool = aif::flatten(atoms);

    std::vector<aif::Atom> response_atoms;
    aif::AttributionMap attribution;
    if (matcher_kind == "llm") {
        aif::llm::Client client(llm_opts.client_config());
        auto fused =
            aif::llm::fused_assign(client, llm_opts.model_matcher, trace.query,
                                   trace.response, pool, partition_size);
        response_atoms = std::move(fused.response_atoms);
        attribution = std::move(fused.attribution);
    } else if (matcher_kind == "baseline") {
        aif::BaselineDecomposer decomposer;
        response_atoms = aif::decompose_response(trace, decomposer);
        aif::BaselineMatcher matcher(tau);
        attribution = aif::assign(response_atoms, pool, matcher, partition_size);
    } else {
        throw aif::ValidationError("unknown matcher: " + matcher_kind);
    }

    for (std::size_t j = 0; j < response_atoms.size(); ++j) {
        response_atoms[j].global_index = static_cast<int>(j);
    }
    const aif::FlowGraph graph =
        aif::build_graph(trace, atoms, response_atoms, attribution);

    write_file(run_dir + "/atoms/response.json", aif::atoms_to_json(response_atoms));
    write_file(run_dir + "/assignment.json",
               aif::assignment_to_json(response_atoms, attribution));
    write_file(run_dir + "/graph.json", aif::graph_to_json(graph));
    write_file(run_dir + "/graph.dot", aif::graph_to_dot(graph));

    const int warnings = attribution.dropped_indices + attribution.row_mismatches;
    aif::RunManifest manifest = aif::load_manifest(run_dir + "/manifest.json");
    manifest.trace_id = trace.trace_id;
    aif::record_stage(manifest, run_dir, "attribute",
                      {"atoms/response.json", "assignment.json", "graph.json",
                       "graph.dot"},
                      {{"matcher", matcher_kind},
                       {"tau", std::to_string(tau)},
                       {"partition_size", std::to_string(partition_size)}},
                      warnings, attribution.partition_failures);
    aif::save_manifest(run_dir + "/manifest.json", manifest);

    std::cout << "attributed " << response_atoms.size() << " response atoms -> "
              << run_dir << "/assignment.json\n";
    return kExitOk;
}

int cmd_metrics(const std::string& trace_path, const std::string& out_dir,
                std::vector<int> k_values) {
    const aif::Trace trace = load_trace_with_id(trace_path);
    const std::string run_dir = run_dir_for(out_dir, trace);
    if (k_values.empty()) k_values = {1, 2, 3, 4, 5};
    for (int k : k_values) {
        if (k < 1 || k > 5) {
            throw aif::ValidationError("--k values must lie in [1,5], got " +
                                       std::to_string(k));
        }
    }

    auto [atoms, signals] = load_atoms_and_signals(run_dir, trace);
    const aif::FlatPool pool = aif::flatten(atoms);
    const std::string assignment_path = run_dir + "/assignment.json";
    if (!fs::exists(assignment_path)) {
        throw aif::ValidationError("missing " + assignment_path +
                                   "; run `aif attribute` first");
    }
    auto [response_atoms, attribution] =
        aif::assignment_from_json(read_file(assignment_path), pool);

    const aif::HeuristicsReport report =
        aif::compute_report(atoms, signals, response_atoms, attribution, k_values);
    write_file(run_dir + "/heuristics.json", aif::heuristics_to_json(report));
    write_file(run_dir + "/heuristics.csv",
               aif::heuristics_to_csv(trace.trace_id, report));

    std::string ks;
    for (int k : k_values) ks += (ks.empty() ? "" : ",") + std::to_string(k);
    aif::RunManifest manifest = aif::load_manifest(run_dir + "/manifest.json");
    manifest.trace_id = trace.trace_id;
    aif::record_stage(manifest, run_dir, "metrics",
                      {"heuristics.json", "heuristics.csv"}, {{"k", ks}}, 0, 0);
    aif::save_manifest(run_dir + "/manifest.json", manifest);

    std::cout << "heuristics -> " << run_dir << "/heuristics.json\n";
    return kExitOk;
}

int cmd_compress(const std::string& trace_path, const std::string& out_dir,
                 const std::string& mode, std::uint64_t budget,
                 const std::string& provider_name, const std::string& solver) {
    const aif::Trace trace = load_trace_with_id(trace_path);
    const std::string run_dir = run_dir_for(out_dir, trace);
    const std::string heuristics_path = run_dir + "/heuristics.json";
    if (!fs::exists(heuristics_path)) {
        throw aif::ValidationError("missing " + heuristics_path +
                                   "; run `aif metrics` first");
    }
    const aif::HeuristicsReport report =
        aif::heuristics_from_json(read_file(heuristics_path));
    const aif::CapacityProvider provider =
        aif::capacity_provider_from_name(provider_name);

    aif::SignalMap signals;
    const aif::SignalMap* signals_ptr = nullptr;
    if (provider == aif::CapacityProvider::relevance_mass) {
        signals = aif::signals_from_json(read_file(run_dir + "/signals/relevance.json"));
        signals_ptr = &signals;
    }
    const aif::CapacityAssignment capacities =
        aif::assign_capacities(report, provider, nullptr, signals_ptr);

    aif::CutDecision decision;
    if (mode == "lossless") {
        decision = aif::lossless_cut(capacities);
    } else if (mode == "budgeted") {
        std::map<int, aif::TokenCount> tokens;
        for (const auto& tool : trace.tools) {
            tokens[tool.tool_id] =
                aif::count_tokens(tool.tool_output, aif::TokenMethod::whitespace);
        }
        decision = aif::budgeted_cut(capacities, tokens, budget, solver);
    } else {
        throw aif::ValidationError("unknown mode: " + mode +
                                   " (expected lossless|budgeted)");
    }
    aif::account_tokens(trace, decision, aif::TokenMethod::whitespace);
    write_file(run_dir + "/cut.json", aif::cut_to_json(decision));

    aif::RunManifest manifest = aif::load_manifest(run_dir + "/manifest.json");
    manifest.trace_id = trace.trace_id;
    aif::record_stage(manifest, run_dir, "compress", {"cut.json"},
                      {{"mode", mode},
                       {"budget", std::to_string(budget)},
                       {"provider", provider_name},
                       {"solver", solver}},
                      0, 0);
    aif::save_manifest(run_dir + "/manifest.json", manifest);

    std::cout << "cut: retained " << decision.retained.size() << " of "
              << trace.tools.size() << " tools, cut_value " << decision.cut_value
              << " -> " << run_dir << "/cut.json\n";
    return kExitOk;
}

int cmd_eval(const std::string& dataset_path, const std::string& out_dir,
             const std::string& adapter_name, const std::string& config_path,
             const LlmOptions& llm_opts, bool llm_opts_set, int jobs, int limit,
             const std::string& compression, std::uint64_t budget) {
    if (!fs::exists(dataset_path)) {
        throw aif::ValidationError("dataset file does not exist: " + dataset_path);
    }
    aif::eval::EvalConfig config;
    if (!config_path.empty()) config = aif::eval::load_config_file(config_path);
    if (!adapter_name.empty()) config.adapter = aif::eval::adapter_from_name(adapter_name);
    if (llm_opts_set) {
        auto client = llm_opts.client_config();
        if (!client.endpoint.empty()) config.client.endpoint = client.endpoint;
        if (!client.api_key.empty()) config.client.api_key = client.api_key;
        config.client.cache_dir = client.cache_dir;
        config.client.offline = config.client.offline || client.offline;
    }
    if (jobs > 0) config.jobs = jobs;
    if (limit > 0) config.limit = limit;
    if (!compression.empty()) config.compression = compression;
    if (budget > 0) config.budget = budget;

    const auto dataset = aif::eval::load_dataset(dataset_path, config.adapter);
    const auto batch = aif::eval::run_pipeline(dataset, config);

    fs::create_directories(out_dir);
    write_file(out_dir + "/results.json", aif::eval::results_to_json(batch));
    write_file(out_dir + "/segments.csv", aif::eval::segments_to_csv(batch));
    write_file(out_dir + "/auroc.csv", aif::eval::auroc_to_csv(batch));

    // Timestamps and model identifiers stay out of the deterministic payload.
    json meta;
    {
        const auto now = std::chrono::system_clock::now();
        const std::time_t t = std::chrono::system_clock::to_time_t(now);
        char buf[32];
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
        meta["finished_at"] = buf;
    }
    meta["models"] = {{"decomposer", config.models.decomposer},
                      {"matcher", config.models.matcher},
                      {"answer", config.models.answer},
                      {"judge", config.models.judge}};
    meta["endpoint"] = config.client.endpoint;
    write_file(out_dir + "/run_meta.json", meta.dump(2) + "\n");

    std::cout << "evaluated " << batch.examples.size() << " examples ("
              << batch.errors << " errors, " << batch.parse_failures
              << " judge parse failures) -> " << out_dir << "/results.json\n";
    return kExitOk;
}

int cmd_export_sft(const std::string& run_root, const std::string& out_path) {
    if (!fs::exists(run_root)) {
        throw aif::ValidationError("run directory does not exist: " + run_root);
    }
    std::vector<fs::path> trace_dirs;
    for (const auto& entry : fs::directory_iterator(run_root)) {
        if (entry.is_directory() && fs::exists(entry.path() / "trace.json")) {
            trace_dirs.push_back(entry.path());
        }
    }
    std::sort(trace_dirs.begin(), trace_dirs.end());

    std::string jsonl;
    int rows = 0;
    int skipped = 0;
    for (const auto& dir : trace_dirs) {
        const fs::path heuristics_path = dir / "heuristics.json";
        if (!fs::exists(heuristics_path)) {
            ++skipped;  // attribution/metrics never ran for this trace
            continue;
        }
        aif::Trace trace = aif::parse_trace(read_file((dir / "trace.json").string()));
        if (trace.trace_id.empty()) trace.trace_id = dir.filename().string();
        const aif::HeuristicsReport report =
            aif::heuristics_from_json(read_file(heuristics_path.string()));
        const auto example = aif::make_sft_example(trace, report);
        if (!example) {
            ++skipped;
            continue;
        }
        jsonl += aif::sft_example_to_jsonl(*example);
        ++rows;
    }
    write_file(out_path, jsonl);
    if (trace_dirs.empty()) {
        std::cerr << "warning: no trace runs found under " << run_root << "\n";
    }
    std::cout << "exported " << rows << " SFT rows (" << skipped << " skipped) -> "
              << out_path << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Atomic information flow attribution over RAG traces"};
    app.require_subcommand(1);

    // decompose
    std::string trace_path, out_dir = "runs";
    std::string decomposer_kind = "baseline";
    std::size_t chunk_sentences = 40;
    LlmOptions llm_opts;
    auto* decompose = app.add_subcommand(
        "decompose", "Decompose tool outputs into atoms and score relevance");
    decompose->add_option("trace", trace_path, "Trace JSON file")->required();
    decompose->add_option("--out", out_dir, "Run directory root");
    decompose->add_option("--decomposer", decomposer_kind, "baseline|llm");
    decompose->add_option("--chunk-sentences", chunk_sentences,
                          "Max sentences per map-reduce chunk");
    add_llm_options(decompose, llm_opts);

    // attribute
    std::string matcher_kind = "baseline";
    double tau = 0.5;
    std::size_t partition_size = 1000000;
    auto* attribute = app.add_subcommand(
        "attribute", "Assign response atoms to tool atoms and build the flow graph");
    attribute->add_option("trace", trace_path, "Trace JSON file")->required();
    attribute->add_option("--out", out_dir, "Run directory root");
    attribute->add_option("--matcher", matcher_kind, "baseline|llm");
    attribute->add_option("--tau", tau, "Baseline matcher Jaccard threshold");
    attribute->add_option("--partition", partition_size,
                          "Max candidate atoms per matcher call");
    add_llm_options(attribute, llm_opts);

    // metrics
    std::vector<int> k_values;
    auto* metrics =
        app.add_subcommand("metrics", "Compute the flow heuristics report");
    metrics->add_option("trace", trace_path, "Trace JSON file")->required();
    metrics->add_option("--out", out_dir, "Run directory root");
    metrics->add_option("--k", k_values, "Relevance thresholds (in [1,5])")
        ->delimiter(',');

    // compress
    std::string cut_mode = "lossless";
    std::uint64_t budget = 0;
    std::string provider_name = "tup";
    std::string solver = "exact";
    auto* compress =
        app.add_subcommand("compress", "Derive a retain/mask cut over the tools");
    compress->add_option("trace", trace_path, "Trace JSON file")->required();
    compress->add_option("--out", out_dir, "Run directory root");
    compress->add_option("--mode", cut_mode, "lossless|budgeted");
    compress->add_option("--budget", budget, "Retained token budget (budgeted mode)");
    compress->add_option("--provider", provider_name,
                         "contribution_count|tup|relevance_mass|external");
    compress->add_option("--solver", solver, "exact|greedy");

    // eval
    std::string dataset_path, adapter_name, config_path, eval_out = "eval-out";
    std::string compression;
    int jobs = 0, limit = 0;
    auto* eval_cmd =
        app.add_subcommand("eval", "Run the QA evaluation loop over a dataset");
    eval_cmd->add_option("dataset", dataset_path, "Dataset file")->required();
    eval_cmd->add_option("--adapter", adapter_name,
                         "hotpotqa|msmarco|musique|wikimqa|generic");
    eval_cmd->add_option("--config", config_path, "key = value config file");
    eval_cmd->add_option("--out", eval_out, "Report output directory");
    eval_cmd->add_option("--jobs", jobs, "Parallel workers (default: CPU count)");
    eval_cmd->add_option("--limit", limit, "Evaluate at most N examples");
    eval_cmd->add_option("--compression", compression, "off|lossless|budgeted");
    eval_cmd->add_option("--budget", budget, "Retained token budget");
    add_llm_options(eval_cmd, llm_opts);

    // export-sft
    std::string run_root, sft_out;
    auto* export_sft = app.add_subcommand(
        "export-sft", "Export retained-set training labels from a run directory");
    export_sft->add_option("rundir", run_root, "Run directory root")->required();
    export_sft->add_option("--out", sft_out, "Output JSONL path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (decompose->parsed()) {
            return cmd_decompose(trace_path, out_dir, decomposer_kind, chunk_sentences,
                                 llm_opts);
        }
        if (attribute->parsed()) {
            return cmd_attribute(trace_path, out_dir, matcher_kind, tau,
                                 partition_size, llm_opts);
        }
        if (metrics->parsed()) return cmd_metrics(trace_path, out_dir, k_values);
        if (compress->parsed()) {
            return cmd_compress(trace_path, out_dir, cut_mode, budget, provider_name,
                                solver);
        }
        if (eval_cmd->parsed()) {
            const bool llm_opts_set = !llm_opts.endpoint.empty() ||
                                      llm_opts.offline ||
                                      llm_opts.cache_dir != ".aif-cache";
            return cmd_eval(dataset_path, eval_out, adapter_name, config_path,
                            llm_opts, llm_opts_set, jobs, limit, compression, budget);
        }
        if (export_sft->parsed()) {
            if (sft_out.empty()) sft_out = run_root + "/sft.jsonl";
            return cmd_export_sft(run_root, sft_out);
        }
    } catch (const aif::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const aif::TransportError& e) {
        std::cerr << "transport error: " << e.what() << "\n";
        return kExitTransport;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitUsage;
}
