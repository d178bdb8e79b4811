#include "aif/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "aif/errors.hpp"
#include "aif/flow_graph.hpp"

namespace aif::eval {

using nlohmann::json;

Adapter adapter_from_name(const std::string& name) {
    if (name == "hotpotqa") return Adapter::hotpotqa;
    if (name == "msmarco") return Adapter::msmarco;
    if (name == "musique") return Adapter::musique;
    if (name == "wikimqa") return Adapter::wikimqa;
    if (name == "generic") return Adapter::generic;
    throw ConfigError("unknown adapter: " + name + " (expected one of hotpotqa, " +
                      "msmarco, musique, wikimqa, generic)");
}

std::vector<std::string> adapter_names() {
    return {"hotpotqa", "msmarco", "musique", "wikimqa", "generic"};
}

namespace {

const json& need(const json& obj, const char* field, const std::string& adapter) {
    auto it = obj.find(field);
    if (it == obj.end()) {
        throw ValidationError(adapter + " adapter: record is missing field " +
                              field);
    }
    return *it;
}

QaExample map_generic(const json& row, std::size_t ordinal) {
    QaExample ex;
    ex.example_id = row.value("example_id", "example_" + std::to_string(ordinal));
    ex.query = need(row, "query", "generic").get<std::string>();
    for (const auto& ctx : need(row, "contexts", "generic")) {
        ex.contexts.emplace_back(ctx.value("title", ""),
                                 need(ctx, "passage", "generic").get<std::string>());
    }
    for (const auto& idx : row.value("gold_support", json::array())) {
        ex.gold_support.insert(idx.get<int>());
    }
    ex.reference_answer = row.value("reference_answer", "");
    return ex;
}

// HotpotQA / 2WikiMultihopQA distractor records: context is a list of
// [title, [sentence, ...]] pairs; supporting_facts name titles.
QaExample map_hotpot_like(const json& row, std::size_t ordinal, const char* adapter) {
    QaExample ex;
    ex.example_id = row.value("_id", "example_" + std::to_string(ordinal));
    ex.query = need(row, "question", adapter).get<std::string>();
    ex.reference_answer = row.value("answer", "");
    std::map<std::string, int> title_to_index;
    for (const auto& ctx : need(row, "context", adapter)) {
        const std::string title = ctx.at(0).get<std::string>();
        std::string passage;
        for (const auto& sent : ctx.at(1)) passage += sent.get<std::string>();
        title_to_index.emplace(title, static_cast<int>(ex.contexts.size()));
        ex.contexts.emplace_back(title, passage);
    }
    for (const auto& sf : need(row, "supporting_facts", adapter)) {
        auto it = title_to_index.find(sf.at(0).get<std::string>());
        if (it != title_to_index.end()) ex.gold_support.insert(it->second);
    }
    return ex;
}

QaExample map_msmarco(const json& row, std::size_t ordinal) {
    QaExample ex;
    if (row.contains("query_id")) {
        const auto& qid = row["query_id"];
        ex.example_id = qid.is_string() ? qid.get<std::string>()
                                        : std::to_string(qid.get<long long>());
    } else {
        ex.example_id = "example_" + std::to_string(ordinal);
    }
    ex.query = need(row, "query", "msmarco").get<std::string>();
    const auto& answers = row.value("answers", json::array());
    if (!answers.empty()) ex.reference_answer = answers[0].get<std::string>();
    int index = 0;
    for (const auto& p : need(row, "passages", "msmarco")) {
        ex.contexts.emplace_back(p.value("url", "passage_" + std::to_string(index)),
                                 need(p, "passage_text", "msmarco").get<std::string>());
        if (p.value("is_selected", 0) != 0) ex.gold_support.insert(index);
        ++index;
    }
    return ex;
}

QaExample map_musique(const json& row, std::size_t ordinal) {
    QaExample ex;
    ex.example_id = row.value("id", "example_" + std::to_string(ordinal));
    ex.query = need(row, "question", "musique").get<std::string>();
    ex.reference_answer = row.value("answer", "");
    int index = 0;
    for (const auto& p : need(row, "paragraphs", "musique")) {
        ex.contexts.emplace_back(p.value("title", ""),
                                 need(p, "paragraph_text", "musique").get<std::string>());
        if (p.value("is_supporting", false)) ex.gold_support.insert(index);
        ++index;
    }
    return ex;
}

std::vector<json> read_records(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read dataset file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();

    std::vector<json> records;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return records;  // empty file, empty dataset
    if (text[first] == '[') {
        json arr = json::parse(text);
        for (auto& row : arr) records.push_back(std::move(row));
        return records;
    }
    std::istringstream lines(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(lines, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            records.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
            throw ValidationError("dataset line " + std::to_string(lineno) +
                                  " is not valid JSON: " + e.what());
        }
    }
    return records;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::string csv_opt(const std::optional<double>& v) {
    return v ? format_double(*v) : "NA";
}

}  // namespace

std::vector<QaExample> load_dataset(const std::string& path, Adapter adapter) {
    std::vector<QaExample> dataset;
    std::size_t ordinal = 0;
    for (const auto& row : read_records(path)) {
        switch (adapter) {
            case Adapter::generic: dataset.push_back(map_generic(row, ordinal)); break;
            case Adapter::hotpotqa:
                dataset.push_back(map_hotpot_like(row, ordinal, "hotpotqa"));
                break;
            case Adapter::wikimqa:
                dataset.push_back(map_hotpot_like(row, ordinal, "wikimqa"));
                break;
            case Adapter::msmarco: dataset.push_back(map_msmarco(row, ordinal)); break;
            case Adapter::musique: dataset.push_back(map_musique(row, ordinal)); break;
        }
        ++ordinal;
    }
    for (const auto& ex : dataset) {
        for (int idx : ex.gold_support) {
            if (idx < 0 || idx >= static_cast<int>(ex.contexts.size())) {
                throw ValidationError("example " + ex.example_id +
                                      ": gold_support index " + std::to_string(idx) +
                                      " is out of range");
            }
        }
    }
    return dataset;
}

PrfTerms attribution_prf(const std::set<int>& gold, const std::set<int>& predicted) {
    std::size_t inter = 0;
    for (int g : gold) {
        if (predicted.count(g)) ++inter;
    }
    PrfTerms terms;
    if (!predicted.empty()) {
        terms.precision = static_cast<double>(inter) /
                          static_cast<double>(predicted.size());
    }
    if (!gold.empty()) {
        terms.recall = static_cast<double>(inter) / static_cast<double>(gold.size());
    }
    return terms;
}

MacroPrf macro_prf(const std::vector<PrfTerms>& terms) {
    MacroPrf macro;
    macro.n = static_cast<int>(terms.size());
    double p_sum = 0.0;
    double r_sum = 0.0;
    int p_n = 0;
    int r_n = 0;
    for (const auto& t : terms) {
        if (t.precision) {
            p_sum += *t.precision;
            ++p_n;
        } else {
            ++macro.excluded_precision;
        }
        if (t.recall) {
            r_sum += *t.recall;
            ++r_n;
        } else {
            ++macro.excluded_recall;
        }
    }
    if (p_n > 0) macro.precision = p_sum / p_n;
    if (r_n > 0) macro.recall = r_sum / r_n;
    if (macro.precision && macro.recall && (*macro.precision + *macro.recall) > 0) {
        macro.f1 = 2.0 * *macro.precision * *macro.recall /
                   (*macro.precision + *macro.recall);
    } else if (macro.precision && macro.recall) {
        macro.f1 = 0.0;
    }
    return macro;
}

AurocResult auroc(const std::vector<double>& scores, const std::vector<bool>& labels) {
    if (scores.size() != labels.size()) {
        throw ValidationError("auroc: scores and labels differ in length");
    }
    AurocResult result;
    for (bool l : labels) {
        if (l) ++result.n_pos;
        else ++result.n_neg;
    }
    if (result.n_pos == 0 || result.n_neg == 0) {
        result.reason = result.n_pos == 0 ? "no positive labels" : "no negative labels";
        return result;
    }
    // Average ranks with ties, Mann-Whitney U.
    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    std::vector<double> rank(scores.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
        i = j + 1;
    }
    double pos_rank_sum = 0.0;
    for (std::size_t k = 0; k < labels.size(); ++k) {
        if (labels[k]) pos_rank_sum += rank[k];
    }
    const double n_pos = result.n_pos;
    const double n_neg = result.n_neg;
    const double u = pos_rank_sum - n_pos * (n_pos + 1.0) / 2.0;
    result.value = u / (n_pos * n_neg);
    return result;
}

EvalConfig parse_config_text(const std::string& text) {
    EvalConfig config;
    std::istringstream lines(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(lines, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected key = value");
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        if (key == "adapter") config.adapter = adapter_from_name(value);
        else if (key == "k_grid") {
            config.k_grid.clear();
            std::istringstream ks(value);
            std::string k;
            while (std::getline(ks, k, ',')) config.k_grid.push_back(std::stoi(trim(k)));
        } else if (key == "decomposer") config.decomposer_kind = value;
        else if (key == "matcher") config.matcher_kind = value;
        else if (key == "tau") config.tau = std::stod(value);
        else if (key == "partition_size") config.partition_size = std::stoull(value);
        else if (key == "chunk_sentences") config.chunk_sentences = std::stoull(value);
        else if (key == "compression") config.compression = value;
        else if (key == "budget") config.budget = std::stoull(value);
        else if (key == "provider") config.provider = capacity_provider_from_name(value);
        else if (key == "solver") config.solver = value;
        else if (key == "model_decomposer") config.models.decomposer = value;
        else if (key == "model_matcher") config.models.matcher = value;
        else if (key == "model_answer") config.models.answer = value;
        else if (key == "model_judge") config.models.judge = value;
        else if (key == "endpoint") config.client.endpoint = value;
        else if (key == "api_key") config.client.api_key = value;
        else if (key == "api_key_env") {
            const char* env = std::getenv(value.c_str());
            config.client.api_key = env ? env : "";
        } else if (key == "cache_dir") config.client.cache_dir = value;
        else if (key == "offline") config.client.offline = (value == "true" || value == "1");
        else if (key == "jobs") config.jobs = std::stoi(value);
        else if (key == "limit") config.limit = std::stoi(value);
        else throw ConfigError("unknown config key: " + key);
    }
    return config;
}

EvalConfig load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string generate_answer(const QaExample& example, llm::Client& client,
                            const std::string& model,
                            const std::optional<std::set<int>>& retained) {
    std::string grounding;
    for (std::size_t i = 0; i < example.contexts.size(); ++i) {
        if (retained && !retained->count(static_cast<int>(i))) continue;
        if (!grounding.empty()) grounding += "\n\n";
        grounding += "Title: " + example.contexts[i].first + "\n" +
                     example.contexts[i].second;
    }
    llm::CompletionRequest request;
    request.model = model;
    request.user = llm::render(llm::answer_template(),
                               {{"user_query", example.query},
                                {"grounding_context", grounding}});
    return client.complete(request);
}

namespace {

std::optional<bool> parse_boolean_verdict(const std::string& completion) {
    std::string s = completion;
    const auto b = s.find_first_not_of(" \t\r\n`");
    const auto e = s.find_last_not_of(" \t\r\n`");
    if (b == std::string::npos) return std::nullopt;
    s = s.substr(b, e - b + 1);
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (s == "true") return true;
    if (s == "false") return false;
    return std::nullopt;
}

}  // namespace

JudgeVerdict judge(const std::string& answer, const std::string& reference,
                   const std::string& query, llm::Client& client,
                   const std::string& model) {
    llm::CompletionRequest request;
    request.model = model;
    request.user = llm::render(llm::judge_template(),
                               {{"query", query},
                                {"reference_answer", reference},
                                {"actual_answer", answer}});
    for (int attempt = 0; attempt < 2; ++attempt) {
        const std::string completion = client.complete(request, attempt > 0);
        if (auto verdict = parse_boolean_verdict(completion)) {
            return *verdict ? JudgeVerdict::correct : JudgeVerdict::incorrect;
        }
    }
    return JudgeVerdict::parse_failed;
}

namespace {

ExampleResult process_example(const QaExample& example, const EvalConfig& config,
                              llm::Client& client) {
    ExampleResult result;
    result.example_id = example.example_id;
    result.gold_support = example.gold_support;

    const std::string answer =
        generate_answer(example, client, config.models.answer);

    Trace trace;
    trace.trace_id = example.example_id;
    trace.query = example.query;
    trace.response = answer;
    int tool_id = 1;
    for (const auto& [title, passage] : example.contexts) {
        ToolCall call;
        call.tool_id = tool_id++;
        call.tool_name = title;
        call.tool_input = example.query;
        call.tool_output = passage;
        trace.tools.push_back(std::move(call));
    }

    AtomMap atoms;
    ChunkingParams chunking{config.chunk_sentences};
    if (config.decomposer_kind == "llm") {
        llm::LlmDecomposer decomposer(client, config.models.decomposer);
        atoms = decompose_tool_calls(trace, decomposer, chunking);
    } else {
        BaselineDecomposer decomposer;
        atoms = decompose_tool_calls(trace, decomposer, chunking);
    }

    BaselineScorer scorer;
    SignalMap signals = inject_signals(atoms, example.query, scorer);
    apply_signals(atoms, signals);
    FlatPool pool = flatten(atoms);

    std::vector<Atom> response_atoms;
    AttributionMap attribution;
    if (config.matcher_kind == "llm") {
        auto fused = llm::fused_assign(client, config.models.matcher, example.query,
                                       answer, pool, config.partition_size);
        response_atoms = std::move(fused.response_atoms);
        attribution = std::move(fused.attribution);
    } else {
        if (!trace.response.empty()) {
            BaselineDecomposer response_decomposer;
            response_atoms = decompose_response(trace, response_decomposer);
        }
        BaselineMatcher matcher(config.tau);
        attribution = assign(response_atoms, pool, matcher, config.partition_size);
    }

    const HeuristicsReport report =
        compute_report(atoms, signals, response_atoms, attribution, config.k_grid);
    result.rap = report.rap;
    result.factscore = report.factscore;
    result.rap_at_k = report.rap_at_k;
    for (const auto& [tid, t] : report.per_tool) {
        if (t.tup && *t.tup > 0.0) result.predicted_support.insert(tid - 1);
    }
    result.prf = attribution_prf(example.gold_support, result.predicted_support);

    std::string final_answer = answer;
    if (config.compression != "off") {
        const auto capacities =
            assign_capacities(report, config.provider, nullptr, &signals);
        CutDecision cut;
        if (config.compression == "lossless") {
            cut = lossless_cut(capacities);
        } else if (config.compression == "budgeted") {
            std::map<int, TokenCount> tokens;
            for (const auto& tool : trace.tools) {
                tokens[tool.tool_id] =
                    count_tokens(tool.tool_output, TokenMethod::whitespace);
            }
            cut = budgeted_cut(capacities, tokens, config.budget, config.solver);
        } else {
            throw ConfigError("unknown compression mode: " + config.compression);
        }
        account_tokens(trace, cut, TokenMethod::whitespace);
        result.token_reduction = cut.token_reduction.value_or(0.0);

        std::set<int> retained_contexts;
        for (int t : cut.retained) retained_contexts.insert(t - 1);
        final_answer = generate_answer(example, client, config.models.answer,
                                       retained_contexts);
    }

    const JudgeVerdict verdict = judge(final_answer, example.reference_answer,
                                       example.query, client, config.models.judge);
    if (verdict == JudgeVerdict::parse_failed) {
        result.status = "judge_parse_failed";
    } else {
        result.status = "ok";
        result.judged = (verdict == JudgeVerdict::correct);
    }
    return result;
}

}  // namespace

BatchResult run_pipeline(const std::vector<QaExample>& dataset,
                         const EvalConfig& config) {
    std::vector<QaExample> examples = dataset;
    if (config.limit > 0 && static_cast<int>(examples.size()) > config.limit) {
        examples.resize(static_cast<std::size_t>(config.limit));
    }

    llm::Client client(config.client);
    BatchResult batch;
    batch.examples.resize(examples.size());

    unsigned jobs = config.jobs > 0 ? static_cast<unsigned>(config.jobs)
                                    : std::max(1u, std::thread::hardware_concurrency());
    jobs = std::min<unsigned>(jobs, std::max<std::size_t>(1, examples.size()));

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= examples.size()) break;
            try {
                batch.examples[i] = process_example(examples[i], config, client);
            } catch (const std::exception& e) {
                // Quarantine the example; the batch completes.
                ExampleResult failed;
                failed.example_id = examples[i].example_id;
                failed.gold_support = examples[i].gold_support;
                failed.status = "error";
                failed.failure = e.what();
                batch.examples[i] = std::move(failed);
            }
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (unsigned t = 0; t < jobs; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }

    // Deterministic fold in example order.
    std::vector<PrfTerms> true_terms;
    std::vector<PrfTerms> false_terms;
    int ok = 0;
    int correct = 0;
    double reduction_sum = 0.0;
    for (const auto& r : batch.examples) {
        if (r.status == "error") {
            ++batch.errors;
            continue;
        }
        if (r.status == "judge_parse_failed") {
            ++batch.parse_failures;  // excluded from both segments
            continue;
        }
        ++ok;
        reduction_sum += r.token_reduction;
        if (*r.judged) {
            ++correct;
            true_terms.push_back(r.prf);
        } else {
            false_terms.push_back(r.prf);
        }
    }
    batch.true_segment = macro_prf(true_terms);
    batch.false_segment = macro_prf(false_terms);
    if (ok > 0) {
        batch.accuracy = static_cast<double>(correct) / ok;
        batch.mean_token_reduction = reduction_sum / ok;
    }

    for (int k : config.k_grid) {
        std::vector<double> scores;
        std::vector<bool> labels;
        for (const auto& r : batch.examples) {
            if (r.status != "ok") continue;
            auto it = r.rap_at_k.find(k);
            if (it == r.rap_at_k.end() || !it->second) continue;
            scores.push_back(*it->second);
            labels.push_back(*r.judged);
        }
        batch.auroc_by_k[k] = auroc(scores, labels);
    }
    return batch;
}

std::string results_to_json(const BatchResult& batch) {
    json root;
    json examples = json::array();
    for (const auto& r : batch.examples) {
        json row;
        row["example_id"] = r.example_id;
        row["status"] = r.status;
        row["judged"] = r.judged ? json(*r.judged) : json(nullptr);
        row["predicted_support"] = r.predicted_support;
        row["gold_support"] = r.gold_support;
        row["precision"] = r.prf.precision ? json(*r.prf.precision) : json(nullptr);
        row["recall"] = r.prf.recall ? json(*r.prf.recall) : json(nullptr);
        row["rap"] = r.rap ? json(*r.rap) : json(nullptr);
        row["factscore"] = r.factscore ? json(*r.factscore) : json(nullptr);
        json rap_k = json::object();
        for (const auto& [k, v] : r.rap_at_k) {
            rap_k[std::to_string(k)] = v ? json(*v) : json(nullptr);
        }
        row["rap_at_k"] = std::move(rap_k);
        row["token_reduction"] = r.token_reduction;
        if (!r.failure.empty()) row["failure"] = r.failure;
        examples.push_back(std::move(row));
    }
    root["examples"] = std::move(examples);

    auto segment_json = [](const MacroPrf& m) {
        json row;
        row["n"] = m.n;
        row["precision"] = m.precision ? json(*m.precision) : json(nullptr);
        row["recall"] = m.recall ? json(*m.recall) : json(nullptr);
        row["f1"] = m.f1 ? json(*m.f1) : json(nullptr);
        row["excluded_precision"] = m.excluded_precision;
        row["excluded_recall"] = m.excluded_recall;
        return row;
    };
    json aggregates;
    aggregates["segments"] = {{"true", segment_json(batch.true_segment)},
                              {"false", segment_json(batch.false_segment)}};
    aggregates["parse_failures"] = batch.parse_failures;
    aggregates["errors"] = batch.errors;
    aggregates["accuracy"] = batch.accuracy ? json(*batch.accuracy) : json(nullptr);
    aggregates["mean_token_reduction"] =
        batch.mean_token_reduction ? json(*batch.mean_token_reduction) : json(nullptr);
    json auroc_k = json::object();
    for (const auto& [k, a] : batch.auroc_by_k) {
        json row;
        row["auroc"] = a.value ? json(*a.value) : json(nullptr);
        row["n_pos"] = a.n_pos;
        row["n_neg"] = a.n_neg;
        if (!a.reason.empty()) row["reason"] = a.reason;
        auroc_k[std::to_string(k)] = std::move(row);
    }
    aggregates["auroc_by_k"] = std::move(auroc_k);
    root["aggregates"] = std::move(aggregates);
    return root.dump(2) + "\n";
}

std::string segments_to_csv(const BatchResult& batch) {
    std::ostringstream out;
    out << "segment,n,precision,recall,f1,excluded_precision,excluded_recall\n";
    auto row = [&](const char* name, const MacroPrf& m) {
        out << name << ',' << m.n << ',' << csv_opt(m.precision) << ','
            << csv_opt(m.recall) << ',' << csv_opt(m.f1) << ',' << m.excluded_precision
            << ',' << m.excluded_recall << '\n';
    };
    row("true", batch.true_segment);
    row("false", batch.false_segment);
    return out.str();
}

std::string auroc_to_csv(const BatchResult& batch) {
    std::ostringstream out;
    out << "k,auroc,n_pos,n_neg\n";
    for (const auto& [k, a] : batch.auroc_by_k) {
        out << k << ',' << csv_opt(a.value) << ',' << a.n_pos << ',' << a.n_neg << '\n';
    }
    return out.str();
}

}  // namespace aif::eval
