#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "aif/heuristics.hpp"
#include "aif/trace.hpp"

namespace aif {

/// How tool capacities c(t) are instantiated. The paper only gives a
/// proportionality, so each provider is an explicit proxy.
enum class CapacityProvider { contribution_count, tup, relevance_mass, external };

CapacityProvider capacity_provider_from_name(const std::string& name);
std::string capacity_provider_name(CapacityProvider provider);

struct CapacityAssignment {
    std::map<int, double> capacities;
    CapacityProvider provider = CapacityProvider::tup;
};

/// Retained/masked partition with its cut value (sum of masked capacities)
/// and token accounting over tool outputs.
struct CutDecision {
    std::set<int> retained;
    std::set<int> masked;
    double cut_value = 0.0;
    TokenCount retained_tokens;
    TokenCount original_tokens;
    std::optional<double> token_reduction;  // 1 - retained/original
    std::string mode;                       // lossless | budgeted
    std::string solver;                     // exact | greedy | n/a
    std::map<int, double> capacities;
};

/// One SFT training row: the tool context plus the retained-set label.
struct SftExample {
    std::string trace_id;
    std::string query;
    std::vector<ToolCall> tool_summaries;
    std::set<int> label;
};

/// Capacities per provider:
///   contribution_count: c(t) = |A_{R,T,t}|
///   tup:                c(t) = TUP_t (0 when TUP_t is undefined)
///   relevance_mass:     c(t) = sum over t's atoms of (relevance - 1) / 4
/// external requires `external_map`.
CapacityAssignment assign_capacities(
    const HeuristicsReport& report, CapacityProvider provider,
    const std::map<int, double>* external_map = nullptr,
    const SignalMap* signals = nullptr);

/// Mask exactly the zero-capacity tools; cut value is 0 by construction.
CutDecision lossless_cut(const CapacityAssignment& capacities);

constexpr int kExactSolverMaxTools = 20;

/// Minimum-capacity mask subject to the retained token budget. Exact mode
/// enumerates subsets (<= kExactSolverMaxTools tools; ties broken by fewer
/// retained tokens, then lexicographically smallest retained set); greedy
/// repeatedly masks the lowest c(t)/tokens(t) tool (ties by larger tokens,
/// then lower tool_id) until within budget.
CutDecision budgeted_cut(const CapacityAssignment& capacities,
                         const std::map<int, TokenCount>& tokens,
                         std::uint64_t budget, const std::string& mode);

/// 1 - retained/original whitespace (or custom) tokens over tool outputs.
std::optional<double> token_reduction(const Trace& trace, const CutDecision& decision,
                                      TokenMethod method,
                                      const std::string& custom_name = {});

/// Fill the decision's token fields from the trace.
void account_tokens(const Trace& trace, CutDecision& decision, TokenMethod method,
                    const std::string& custom_name = {});

/// Label rule: retain the tools with TUP_t != 0 (lossless cut under the tup
/// provider). Returns nullopt if the report carries no attribution data.
std::optional<SftExample> make_sft_example(const Trace& trace,
                                           const HeuristicsReport& report);

std::string sft_example_to_jsonl(const SftExample& example);
std::string cut_to_json(const CutDecision& decision);

}  // namespace aif
