#include "aif/assigner.hpp"

#include <algorithm>

#include <json.hpp>

#include "aif/errors.hpp"
#include "aif/text.hpp"

namespace aif {

using nlohmann::json;

std::set<std::size_t> baseline_match(const std::string& response_fact,
                                     const std::vector<std::string>& candidates,
                                     double tau) {
    std::set<std::size_t> matched;
    const auto response_words = text::content_words(response_fact);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (text::jaccard(response_words, text::content_words(candidates[i])) >= tau) {
            matched.insert(i);
        }
    }
    return matched;
}

FlatPool flatten(const AtomMap& atoms) {
    FlatPool pool;
    pool.atoms.reserve(atoms.total_atoms());
    for (const auto& [tool_id, list] : atoms.entries) {  // std::map: ascending ids
        for (const auto& atom : list) {
            Atom copy = atom;
            copy.global_index = static_cast<int>(pool.atoms.size());
            pool.atoms.push_back(std::move(copy));
            pool.source_map.push_back(tool_id);
        }
    }
    return pool;
}

AttributionMap assign(const std::vector<Atom>& response_atoms, const FlatPool& pool,
                      Matcher& matcher, std::size_t partition_size) {
    if (partition_size < 1) throw ValidationError("partition_size must be >= 1");
    AttributionMap result;
    result.entries.resize(response_atoms.size());

    for (std::size_t j = 0; j < response_atoms.size(); ++j) {
        auto& entry = result.entries[j];
        for (std::size_t offset = 0; offset < pool.atoms.size();
             offset += partition_size) {
            const std::size_t count =
                std::min(partition_size, pool.atoms.size() - offset);
            std::vector<std::string> candidates;
            candidates.reserve(count);
            for (std::size_t k = 0; k < count; ++k) {
                candidates.push_back(pool.atoms[offset + k].fact);
            }
            try {
                for (std::size_t local : matcher.match(response_atoms[j].fact,
                                                       candidates)) {
                    if (local >= count) {
                        ++result.dropped_indices;
                        continue;
                    }
                    entry.matched_indices.insert(static_cast<int>(offset + local));
                }
            } catch (const std::exception&) {
                ++result.partition_failures;  // partition contributes nothing
            }
        }
        for (int idx : entry.matched_indices) {
            entry.source_tools.insert(pool.source_map[static_cast<std::size_t>(idx)]);
        }
    }
    return result;
}

std::string assignment_to_json(const std::vector<Atom>& response_atoms,
                               const AttributionMap& attribution) {
    json arr = json::array();
    for (std::size_t j = 0; j < response_atoms.size(); ++j) {
        json row;
        row["Fact"] = response_atoms[j].fact;
        json indices = json::array();
        if (j < attribution.entries.size()) {
            for (int idx : attribution.entries[j].matched_indices) indices.push_back(idx);
        }
        row["Assignment"] = std::move(indices);
        arr.push_back(std::move(row));
    }
    return arr.dump(2) + "\n";
}

std::pair<std::vector<Atom>, AttributionMap> assignment_from_json(
    const std::string& json_text, const FlatPool& pool) {
    json arr;
    try {
        arr = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("assignment JSON parse error: ") + e.what());
    }
    if (!arr.is_array()) throw ValidationError("assignment JSON must be an array");

    std::vector<Atom> response_atoms;
    AttributionMap attribution;
    int local = 0;
    for (const auto& row : arr) {
        Atom atom;
        atom.local_index = local++;
        atom.source = {SourceKind::response, 0};
        atom.fact = row.at("Fact").get<std::string>();
        response_atoms.push_back(std::move(atom));

        AttributionMap::Entry entry;
        for (const auto& idx : row.value("Assignment", json::array())) {
            const int i = idx.get<int>();
            if (i < 0 || i >= static_cast<int>(pool.atoms.size())) {
                ++attribution.dropped_indices;
                continue;
            }
            entry.matched_indices.insert(i);
            entry.source_tools.insert(pool.source_map[static_cast<std::size_t>(i)]);
        }
        attribution.entries.push_back(std::move(entry));
    }
    return {std::move(response_atoms), std::move(attribution)};
}

}  // namespace aif
