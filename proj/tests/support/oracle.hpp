#pragma once

// Independent oracles for the property and acceptance suites. Everything in
// here recomputes results from first principles (plain loops over the raw
// structures) and must stay decoupled from the library implementation paths
// it checks.

#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "aif/assigner.hpp"
#include "aif/atomizer.hpp"
#include "aif/signals.hpp"

namespace testsupport {

struct RandomInstance {
    aif::AtomMap atoms;
    aif::SignalMap signals;
    std::vector<aif::Atom> response_atoms;
    aif::AttributionMap attribution;
    aif::Trace trace;
};

// Random tools/atoms/relevances/attributions. Multi-hop and many-to-one
// attributions both occur; empty pools, empty responses, and unattributed
// atoms are all reachable.
inline RandomInstance random_instance(std::mt19937& rng, int max_tools = 6,
                                      int max_atoms_per_tool = 8,
                                      int max_response_atoms = 8) {
    RandomInstance inst;
    inst.trace.trace_id = "random";
    inst.trace.query = "query words";
    inst.trace.response = "response text.";

    const int tools = static_cast<int>(rng() % (max_tools + 1));
    std::vector<int> index_to_tool;
    for (int t = 1; t <= tools; ++t) {
        aif::ToolCall call;
        call.tool_id = t;
        call.tool_name = "tool" + std::to_string(t);
        call.tool_output = "output " + std::to_string(t) + ".";
        inst.trace.tools.push_back(call);

        auto& list = inst.atoms.entries[t];
        auto& scores = inst.signals.entries[t];
        const int n = static_cast<int>(rng() % (max_atoms_per_tool + 1));
        for (int i = 0; i < n; ++i) {
            aif::Atom atom;
            atom.local_index = i;
            atom.source = {aif::SourceKind::tool, t};
            atom.fact = "fact " + std::to_string(t) + "-" + std::to_string(i);
            const int rel = 1 + static_cast<int>(rng() % 5);
            atom.relevance = rel;
            list.push_back(atom);
            scores.push_back(rel);
            index_to_tool.push_back(t);
        }
    }

    const int pool_size = static_cast<int>(index_to_tool.size());
    const int responses = static_cast<int>(rng() % (max_response_atoms + 1));
    for (int j = 0; j < responses; ++j) {
        aif::Atom atom;
        atom.local_index = j;
        atom.source = {aif::SourceKind::response, 0};
        atom.fact = "response fact " + std::to_string(j);
        inst.response_atoms.push_back(atom);

        aif::AttributionMap::Entry entry;
        if (pool_size > 0 && rng() % 4 != 0) {  // 1 in 4 stays unattributed
            const int picks = 1 + static_cast<int>(rng() % 3);
            for (int p = 0; p < picks; ++p) {
                const int idx = static_cast<int>(rng() % pool_size);
                entry.matched_indices.insert(idx);
                entry.source_tools.insert(index_to_tool[idx]);
            }
        }
        inst.attribution.entries.push_back(std::move(entry));
    }
    return inst;
}

// Naive double-loop recount of every Table-1 quantity.
struct OracleHeuristics {
    int a_r = 0;
    int a_t = 0;
    int a_rt = 0;
    std::map<int, int> a_rt_gek;
    std::map<int, int> a_t_gek;
    std::map<int, int> a_tt;
    std::map<int, int> a_rtt;
    std::map<int, std::map<int, int>> a_rtt_gek;  // k -> tool -> count
    std::map<int, std::map<int, int>> a_tt_gek;

    std::optional<double> rap, rar, factscore;
    std::map<int, std::optional<double>> rap_at_k, rar_at_k;
    std::map<int, std::optional<double>> tup, tur;
    std::map<int, std::map<int, std::optional<double>>> tup_at_k, tur_at_k;
};

inline OracleHeuristics oracle_heuristics(const RandomInstance& inst,
                                          const std::vector<int>& k_values) {
    OracleHeuristics o;
    // Rebuild the flat index space by walking tools in ascending id order.
    std::vector<int> index_to_tool;
    std::vector<int> index_rel;
    for (const auto& [tool_id, list] : inst.atoms.entries) {
        o.a_tt[tool_id] = static_cast<int>(list.size());
        for (const auto& atom : list) {
            index_to_tool.push_back(tool_id);
            index_rel.push_back(*atom.relevance);
        }
        o.a_rtt[tool_id] = 0;
        for (int k : k_values) {
            o.a_rtt_gek[k][tool_id] = 0;
            int n = 0;
            for (const auto& atom : list) {
                if (*atom.relevance >= k) ++n;
            }
            o.a_tt_gek[k][tool_id] = n;
        }
    }
    o.a_r = static_cast<int>(inst.response_atoms.size());
    o.a_t = static_cast<int>(index_to_tool.size());
    for (int k : k_values) {
        o.a_rt_gek[k] = 0;
        int n = 0;
        for (int rel : index_rel) {
            if (rel >= k) ++n;
        }
        o.a_t_gek[k] = n;
    }

    for (const auto& entry : inst.attribution.entries) {
        if (entry.matched_indices.empty()) continue;
        ++o.a_rt;
        for (const auto& [tool_id, _] : inst.atoms.entries) {
            bool any = false;
            for (int idx : entry.matched_indices) {
                if (index_to_tool[static_cast<std::size_t>(idx)] == tool_id) any = true;
            }
            if (any) ++o.a_rtt[tool_id];
        }
        for (int k : k_values) {
            bool any_k = false;
            for (int idx : entry.matched_indices) {
                if (index_rel[static_cast<std::size_t>(idx)] >= k) any_k = true;
            }
            if (any_k) ++o.a_rt_gek[k];
            for (const auto& [tool_id, _] : inst.atoms.entries) {
                bool any_tk = false;
                for (int idx : entry.matched_indices) {
                    if (index_to_tool[static_cast<std::size_t>(idx)] == tool_id &&
                        index_rel[static_cast<std::size_t>(idx)] >= k) {
                        any_tk = true;
                    }
                }
                if (any_tk) ++o.a_rtt_gek[k][tool_id];
            }
        }
    }

    auto div = [](int num, int den) -> std::optional<double> {
        if (den == 0) return std::nullopt;
        return static_cast<double>(num) / den;
    };
    o.rap = div(o.a_rt, o.a_r);
    o.rar = div(o.a_rt, o.a_t);
    o.factscore = div(o.a_rt, o.a_r);
    for (int k : k_values) {
        o.rap_at_k[k] = div(o.a_rt_gek[k], o.a_r);
        o.rar_at_k[k] = div(o.a_rt_gek[k], o.a_t_gek[k]);
    }
    for (const auto& [tool_id, n] : o.a_tt) {
        o.tup[tool_id] = div(o.a_rtt[tool_id], o.a_r);
        o.tur[tool_id] = div(o.a_rtt[tool_id], n);
        for (int k : k_values) {
            o.tup_at_k[tool_id][k] = div(o.a_rtt_gek[k][tool_id], o.a_r);
            o.tur_at_k[tool_id][k] = div(o.a_rtt_gek[k][tool_id],
                                         o.a_tt_gek[k][tool_id]);
        }
    }
    return o;
}

// O(n^2) pairwise-count AUROC.
inline std::optional<double> oracle_auroc(const std::vector<double>& scores,
                                          const std::vector<bool>& labels) {
    double wins = 0.0;
    long pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!labels[i]) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j]) continue;
            ++pairs;
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    if (pairs == 0) return std::nullopt;
    return wins / static_cast<double>(pairs);
}

// Brute-force macro precision/recall over (gold, predicted) pairs.
struct OracleMacro {
    std::optional<double> precision, recall, f1;
};
inline OracleMacro oracle_macro_prf(
    const std::vector<std::pair<std::set<int>, std::set<int>>>& batches) {
    double p_sum = 0, r_sum = 0;
    int p_n = 0, r_n = 0;
    for (const auto& [gold, predicted] : batches) {
        int inter = 0;
        for (int g : gold) {
            if (predicted.count(g)) ++inter;
        }
        if (!predicted.empty()) {
            p_sum += static_cast<double>(inter) / predicted.size();
            ++p_n;
        }
        if (!gold.empty()) {
            r_sum += static_cast<double>(inter) / gold.size();
            ++r_n;
        }
    }
    OracleMacro o;
    if (p_n) o.precision = p_sum / p_n;
    if (r_n) o.recall = r_sum / r_n;
    if (o.precision && o.recall) {
        const double s = *o.precision + *o.recall;
        o.f1 = s > 0 ? 2.0 * *o.precision * *o.recall / s : 0.0;
    }
    return o;
}

}  // namespace testsupport
