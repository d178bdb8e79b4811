#include "aif/atomizer.hpp"

#include <algorithm>

#include <json.hpp>

#include "aif/errors.hpp"
#include "aif/text.hpp"

namespace aif {

using nlohmann::json;

std::size_t AtomMap::total_atoms() const {
    std::size_t n = 0;
    for (const auto& [_, atoms] : entries) n += atoms.size();
    return n;
}

ChunkPlan plan_chunks(const std::string& txt, std::size_t max_chunk_units) {
    if (max_chunk_units < 1) {
        throw ValidationError("max_chunk_units must be >= 1");
    }
    ChunkPlan plan;
    plan.max_chunk_units = max_chunk_units;
    if (txt.empty()) return plan;

    const auto sentences = text::split_sentences(txt);
    const std::size_t total = text::scalar_length(txt);
    if (sentences.empty()) {
        plan.chunks.push_back({0, total});  // whitespace-only text
        return plan;
    }
    for (std::size_t i = 0; i < sentences.size(); i += max_chunk_units) {
        const std::size_t last = std::min(i + max_chunk_units, sentences.size()) - 1;
        plan.chunks.push_back({sentences[i].begin, sentences[last].end});
    }
    // Sentence spans tile [first.begin, last.end); stretch the ends so the
    // plan covers any leading garbage and the full text.
    plan.chunks.front().start = 0;
    plan.chunks.back().end = total;
    return plan;
}

std::vector<std::string> baseline_decompose(const std::string& txt) {
    std::vector<std::string> facts;
    for (const auto& span : text::split_sentences(txt)) {
        std::string sentence = text::scalar_substr(txt, span.begin, span.end);
        // Trim outer whitespace only; inner spacing is preserved.
        const auto first = sentence.find_first_not_of(" \t\r\n\f\v");
        const auto last = sentence.find_last_not_of(" \t\r\n\f\v");
        if (first == std::string::npos) continue;
        facts.push_back(sentence.substr(first, last - first + 1));
    }
    return facts;
}

std::vector<DecomposedFact> BaselineDecomposer::decompose(const std::string& txt,
                                                          const std::string&) {
    std::vector<DecomposedFact> out;
    for (auto& fact : baseline_decompose(txt)) {
        out.push_back({std::move(fact), std::nullopt});
    }
    return out;
}

namespace {

std::vector<DecomposedFact> decompose_with_chunks(const std::string& txt,
                                                  const std::string& query,
                                                  Decomposer& decomposer,
                                                  const ChunkingParams& chunking) {
    const auto plan = plan_chunks(txt, chunking.max_chunk_sentences);
    if (plan.chunks.size() <= 1) {
        return decomposer.decompose(txt, query);
    }
    // Reduce step: merge chunk decompositions in chunk order. Duplicates
    // across chunks are kept (multiset semantics).
    std::vector<DecomposedFact> merged;
    for (const auto& range : plan.chunks) {
        auto part = decomposer.decompose(
            text::scalar_substr(txt, range.start, range.end), query);
        merged.insert(merged.end(), std::make_move_iterator(part.begin()),
                      std::make_move_iterator(part.end()));
    }
    return merged;
}

}  // namespace

AtomMap decompose_tool_calls(const Trace& trace, Decomposer& decomposer,
                             const ChunkingParams& chunking) {
    AtomMap map;
    for (const auto& tool : trace.tools) {
        auto& atoms = map.entries[tool.tool_id];  // every tool gets an entry
        if (tool.tool_output.empty()) continue;
        try {
            const auto facts = decompose_with_chunks(tool.tool_output, trace.query,
                                                     decomposer, chunking);
            int local = 0;
            for (const auto& f : facts) {
                if (f.fact.empty()) continue;
                Atom atom;
                atom.local_index = local++;
                atom.source = {SourceKind::tool, tool.tool_id};
                atom.fact = f.fact;
                atom.relevance = f.relevance;
                atoms.push_back(std::move(atom));
            }
        } catch (const std::exception& e) {
            atoms.clear();
            map.failures[tool.tool_id] = e.what();
        }
    }
    return map;
}

std::vector<Atom> decompose_response(const Trace& trace, Decomposer& decomposer) {
    if (trace.response.empty()) {
        throw ValidationError(
            "trace has no response text; generate a response before "
            "decomposing it");
    }
    std::vector<Atom> atoms;
    int local = 0;
    for (const auto& f : decomposer.decompose(trace.response, trace.query)) {
        if (f.fact.empty()) continue;
        Atom atom;
        atom.local_index = local++;
        atom.source = {SourceKind::response, 0};
        atom.fact = f.fact;
        atom.relevance = f.relevance;
        atoms.push_back(std::move(atom));
    }
    return atoms;
}

std::string atoms_to_json(const std::vector<Atom>& atoms) {
    json arr = json::array();
    for (const auto& a : atoms) {
        json row;
        row["Index"] = a.global_index >= 0 ? a.global_index : a.local_index;
        row["Fact"] = a.fact;
        if (a.relevance) row["Relevance"] = *a.relevance;
        arr.push_back(std::move(row));
    }
    return arr.dump(2) + "\n";
}

std::vector<Atom> atoms_from_json(const std::string& json_text, SourceNode source) {
    json arr;
    try {
        arr = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("atom JSON parse error: ") + e.what());
    }
    if (!arr.is_array()) throw ValidationError("atom JSON must be an array");
    std::vector<Atom> atoms;
    int local = 0;
    for (const auto& row : arr) {
        Atom atom;
        atom.global_index = row.value("Index", -1);
        atom.local_index = local++;
        atom.source = source;
        atom.fact = row.at("Fact").get<std::string>();
        if (row.contains("Relevance") && !row["Relevance"].is_null()) {
            atom.relevance = row["Relevance"].get<int>();
        }
        atoms.push_back(std::move(atom));
    }
    return atoms;
}

}  // namespace aif
