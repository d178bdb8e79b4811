#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aif/assigner.hpp"
#include "aif/signals.hpp"

namespace aif {

/// Underlying set cardinalities behind every ratio. Response-atom sets use
/// atom identity, so duplicate facts count separately; a multi-hop response
/// atom counts toward every tool that supports it.
struct HeuristicCounts {
    int response_atoms = 0;                    // |A_R|
    int tool_atoms = 0;                        // |A_T|
    int attributed_response_atoms = 0;         // |A_{R,T}|
    std::map<int, int> tool_atoms_per_tool;    // |A_{T,t}|
    std::map<int, int> attributed_per_tool;    // |A_{R,T,t}|
    std::map<int, int> attributed_at_k;        // |A_{R,T,>=K}|
    std::map<int, int> tool_atoms_at_k;        // |A_{T,>=K}|
    std::map<int, std::map<int, int>> attributed_per_tool_at_k;  // |A_{R,T,t,>=K}|
    std::map<int, std::map<int, int>> tool_atoms_per_tool_at_k;  // |A_{T,t,>=K}|
};

struct ToolHeuristics {
    std::optional<double> tup;
    std::optional<double> tur;
    std::map<int, std::optional<double>> tup_at_k;
    std::map<int, std::optional<double>> tur_at_k;
};

/// Every Table-1 flow heuristic plus FActScore. A ratio whose denominator
/// is zero is left unset and the denominator is named in `undefined`.
struct HeuristicsReport {
    std::optional<double> rap;
    std::optional<double> rar;
    std::optional<double> factscore;
    std::map<int, std::optional<double>> rap_at_k;
    std::map<int, std::optional<double>> rar_at_k;
    std::map<int, ToolHeuristics> per_tool;
    HeuristicCounts counts;
    std::map<std::string, std::string> undefined;  // metric -> zero denominator
};

/// Compute the full report. A response atom is attributed iff its
/// matched_indices is non-empty; it belongs to the >=K variant iff at least
/// one matched tool atom carries relevance >= K. k_values must lie in [1,5].
HeuristicsReport compute_report(const AtomMap& atoms, const SignalMap& signals,
                                const std::vector<Atom>& response_atoms,
                                const AttributionMap& attribution,
                                const std::vector<int>& k_values);

/// Supported atomic facts over total atomic facts. Supported means a
/// non-empty attribution, so this equals RAP here by construction.
std::optional<double> factscore(const std::vector<Atom>& response_atoms,
                                const AttributionMap& attribution);

std::string heuristics_to_json(const HeuristicsReport& report);
HeuristicsReport heuristics_from_json(const std::string& json_text);

/// One CSV row per K: trace_id,k,rap,rap_at_k,rar,rar_at_k,factscore.
std::string heuristics_to_csv(const std::string& trace_id,
                              const HeuristicsReport& report);

}  // namespace aif
