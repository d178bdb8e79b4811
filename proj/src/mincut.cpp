#include "aif/mincut.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "aif/errors.hpp"

namespace aif {

using nlohmann::json;

CapacityProvider capacity_provider_from_name(const std::string& name) {
    if (name == "contribution_count") return CapacityProvider::contribution_count;
    if (name == "tup") return CapacityProvider::tup;
    if (name == "relevance_mass") return CapacityProvider::relevance_mass;
    if (name == "external") return CapacityProvider::external;
    throw ConfigError("unknown capacity provider: " + name);
}

std::string capacity_provider_name(CapacityProvider provider) {
    switch (provider) {
        case CapacityProvider::contribution_count: return "contribution_count";
        case CapacityProvider::tup: return "tup";
        case CapacityProvider::relevance_mass: return "relevance_mass";
        case CapacityProvider::external: return "external";
    }
    return "unknown";
}

CapacityAssignment assign_capacities(const HeuristicsReport& report,
                                     CapacityProvider provider,
                                     const std::map<int, double>* external_map,
                                     const SignalMap* signals) {
    CapacityAssignment out;
    out.provider = provider;
    switch (provider) {
        case CapacityProvider::contribution_count:
            for (const auto& [tool_id, n] : report.counts.attributed_per_tool) {
                out.capacities[tool_id] = static_cast<double>(n);
            }
            break;
        case CapacityProvider::tup:
            for (const auto& [tool_id, t] : report.per_tool) {
                out.capacities[tool_id] = t.tup.value_or(0.0);
            }
            break;
        case CapacityProvider::relevance_mass: {
            if (!signals) {
                throw ConfigError("relevance_mass provider requires a signal map");
            }
            for (const auto& [tool_id, scores] : signals->entries) {
                double mass = 0.0;
                for (int r : scores) mass += (r - 1) / 4.0;
                out.capacities[tool_id] = mass;
            }
            break;
        }
        case CapacityProvider::external:
            if (!external_map) {
                throw ConfigError("external provider requires a capacity map");
            }
            out.capacities = *external_map;
            break;
    }
    return out;
}

namespace {

double masked_sum(const CapacityAssignment& capacities, const std::set<int>& masked) {
    double sum = 0.0;
    for (const auto& [tool_id, c] : capacities.capacities) {
        if (masked.count(tool_id)) sum += c;
    }
    return sum;
}

}  // namespace

CutDecision lossless_cut(const CapacityAssignment& capacities) {
    CutDecision decision;
    decision.mode = "lossless";
    decision.solver = "n/a";
    decision.capacities = capacities.capacities;
    for (const auto& [tool_id, c] : capacities.capacities) {
        if (c == 0.0) {
            decision.masked.insert(tool_id);
        } else {
            decision.retained.insert(tool_id);
        }
    }
    decision.cut_value = masked_sum(capacities, decision.masked);
    return decision;
}

CutDecision budgeted_cut(const CapacityAssignment& capacities,
                         const std::map<int, TokenCount>& tokens,
                         std::uint64_t budget, const std::string& mode) {
    std::vector<int> ids;
    for (const auto& [tool_id, _] : capacities.capacities) ids.push_back(tool_id);

    std::vector<double> cap(ids.size());
    std::vector<std::uint64_t> tok(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        cap[i] = capacities.capacities.at(ids[i]);
        auto it = tokens.find(ids[i]);
        if (it == tokens.end()) {
            throw ValidationError("no token count for tool " + std::to_string(ids[i]));
        }
        tok[i] = it->second.value;
    }

    CutDecision decision;
    decision.mode = "budgeted";
    decision.solver = mode;
    decision.capacities = capacities.capacities;

    if (mode == "exact") {
        if (ids.size() > kExactSolverMaxTools) {
            throw ValidationError(
                "exact solver is capped at " + std::to_string(kExactSolverMaxTools) +
                " tools (" + std::to_string(ids.size()) + " given); use greedy");
        }
        const std::uint32_t n = static_cast<std::uint32_t>(ids.size());
        double best_cut = std::numeric_limits<double>::infinity();
        std::uint64_t best_tokens = 0;
        std::vector<int> best_retained;
        bool have_best = false;
        for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
            std::uint64_t retained_tokens = 0;
            double cut = 0.0;
            for (std::uint32_t i = 0; i < n; ++i) {
                if (mask & (1ULL << i)) {
                    retained_tokens += tok[i];
                } else {
                    cut += cap[i];
                }
            }
            if (retained_tokens > budget) continue;
            bool better = false;
            if (!have_best || cut < best_cut) {
                better = true;
            } else if (cut == best_cut) {
                if (retained_tokens < best_tokens) {
                    better = true;
                } else if (retained_tokens == best_tokens) {
                    std::vector<int> retained;
                    for (std::uint32_t i = 0; i < n; ++i) {
                        if (mask & (1ULL << i)) retained.push_back(ids[i]);
                    }
                    if (retained < best_retained) better = true;
                }
            }
            if (better) {
                have_best = true;
                best_cut = cut;
                best_tokens = retained_tokens;
                best_retained.clear();
                for (std::uint32_t i = 0; i < n; ++i) {
                    if (mask & (1ULL << i)) best_retained.push_back(ids[i]);
                }
            }
        }
        decision.retained.insert(best_retained.begin(), best_retained.end());
        for (int id : ids) {
            if (!decision.retained.count(id)) decision.masked.insert(id);
        }
    } else if (mode == "greedy") {
        std::set<int> retained(ids.begin(), ids.end());
        auto retained_tokens = [&] {
            std::uint64_t sum = 0;
            for (std::size_t i = 0; i < ids.size(); ++i) {
                if (retained.count(ids[i])) sum += tok[i];
            }
            return sum;
        };
        while (retained_tokens() > budget && !retained.empty()) {
            std::size_t victim = ids.size();
            double victim_ratio = 0.0;
            for (std::size_t i = 0; i < ids.size(); ++i) {
                if (!retained.count(ids[i])) continue;
                double r;
                if (tok[i] > 0) {
                    r = cap[i] / static_cast<double>(tok[i]);
                } else {
                    r = cap[i] > 0 ? std::numeric_limits<double>::infinity() : 0.0;
                }
                bool pick = false;
                if (victim == ids.size() || r < victim_ratio) {
                    pick = true;
                } else if (r == victim_ratio) {
                    if (tok[i] > tok[victim]) {
                        pick = true;
                    } else if (tok[i] == tok[victim] && ids[i] < ids[victim]) {
                        pick = true;
                    }
                }
                if (pick) {
                    victim = i;
                    victim_ratio = r;
                }
            }
            retained.erase(ids[victim]);
        }
        decision.retained = std::move(retained);
        for (int id : ids) {
            if (!decision.retained.count(id)) decision.masked.insert(id);
        }
    } else {
        throw ConfigError("unknown solver mode: " + mode + " (expected exact|greedy)");
    }

    decision.cut_value = masked_sum(capacities, decision.masked);
    return decision;
}

std::optional<double> token_reduction(const Trace& trace, const CutDecision& decision,
                                      TokenMethod method,
                                      const std::string& custom_name) {
    std::uint64_t original = 0;
    std::uint64_t retained = 0;
    for (const auto& tool : trace.tools) {
        const auto tc = count_tokens(tool.tool_output, method, custom_name);
        original += tc.value;
        if (decision.retained.count(tool.tool_id)) retained += tc.value;
    }
    if (original == 0) return std::nullopt;
    return 1.0 - static_cast<double>(retained) / static_cast<double>(original);
}

void account_tokens(const Trace& trace, CutDecision& decision, TokenMethod method,
                    const std::string& custom_name) {
    std::uint64_t original = 0;
    std::uint64_t retained = 0;
    for (const auto& tool : trace.tools) {
        const auto tc = count_tokens(tool.tool_output, method, custom_name);
        original += tc.value;
        if (decision.retained.count(tool.tool_id)) retained += tc.value;
    }
    decision.original_tokens = {original, method, custom_name};
    decision.retained_tokens = {retained, method, custom_name};
    if (original > 0) {
        decision.token_reduction =
            1.0 - static_cast<double>(retained) / static_cast<double>(original);
    } else {
        decision.token_reduction = std::nullopt;
    }
}

std::optional<SftExample> make_sft_example(const Trace& trace,
                                           const HeuristicsReport& report) {
    if (report.per_tool.size() != trace.tools.size()) return std::nullopt;
    SftExample example;
    example.trace_id = trace.trace_id;
    example.query = trace.query;
    example.tool_summaries = trace.tools;
    for (const auto& [tool_id, t] : report.per_tool) {
        if (t.tup && *t.tup != 0.0) example.label.insert(tool_id);
    }
    return example;
}

std::string sft_example_to_jsonl(const SftExample& example) {
    json row;
    row["query"] = example.query;
    json tools = json::array();
    for (const auto& t : example.tool_summaries) {
        tools.push_back({{"tool_id", t.tool_id},
                         {"tool_name", t.tool_name},
                         {"tool_output", t.tool_output}});
    }
    row["tools"] = std::move(tools);
    row["label"] = example.label;
    return row.dump() + "\n";
}

std::string cut_to_json(const CutDecision& decision) {
    json root;
    root["mode"] = decision.mode;
    root["solver"] = decision.solver;
    root["retained"] = decision.retained;
    root["masked"] = decision.masked;
    root["cut_value"] = decision.cut_value;
    json caps = json::object();
    for (const auto& [tool_id, c] : decision.capacities) {
        caps[std::to_string(tool_id)] = c;
    }
    root["capacities"] = std::move(caps);
    root["retained_tokens"] = {{"value", decision.retained_tokens.value},
                               {"method", token_method_name(decision.retained_tokens)}};
    root["original_tokens"] = {{"value", decision.original_tokens.value},
                               {"method", token_method_name(decision.original_tokens)}};
    if (decision.token_reduction) {
        root["token_reduction"] = *decision.token_reduction;
    } else {
        root["token_reduction"] = nullptr;
    }
    return root.dump(2) + "\n";
}

}  // namespace aif
