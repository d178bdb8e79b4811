#include "aif/flow_graph.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "aif/errors.hpp"

namespace aif {

using nlohmann::json;

std::string node_kind_name(NodeKind kind) {
    switch (kind) {
        case NodeKind::super_source: return "super_source";
        case NodeKind::tool: return "tool";
        case NodeKind::llm: return "llm";
        case NodeKind::super_sink: return "super_sink";
    }
    return "unknown";
}

FlowGraph build_graph(const Trace& trace, const AtomMap& atoms,
                      const std::vector<Atom>& response_atoms,
                      const AttributionMap& attribution) {
    const std::size_t pool_size = atoms.total_atoms();

    // Distinct matched atoms per tool, via the flatten order (ascending
    // tool_id then local order defines the global index space).
    std::vector<int> index_to_tool;
    index_to_tool.reserve(pool_size);
    for (const auto& [tool_id, list] : atoms.entries) {
        for (std::size_t i = 0; i < list.size(); ++i) index_to_tool.push_back(tool_id);
    }

    std::map<int, std::set<int>> consumed_by_tool;
    int attributed_count = 0;
    std::set<int> distinct_matched;
    for (const auto& entry : attribution.entries) {
        if (!entry.matched_indices.empty()) ++attributed_count;
        for (int idx : entry.matched_indices) {
            if (idx < 0 || idx >= static_cast<int>(pool_size)) {
                throw ValidationError("attribution references unknown atom index " +
                                      std::to_string(idx));
            }
            distinct_matched.insert(idx);
            consumed_by_tool[index_to_tool[static_cast<std::size_t>(idx)]].insert(idx);
        }
    }

    FlowGraph graph;
    graph.nodes.push_back({"s0", NodeKind::super_source, 0});
    for (const auto& [tool_id, list] : atoms.entries) {
        graph.nodes.push_back({"tool_" + std::to_string(tool_id), NodeKind::tool,
                               static_cast<int>(list.size())});
    }

    const int response_count = static_cast<int>(response_atoms.size());
    const int distinct_consumed = static_cast<int>(distinct_matched.size());
    const int novel = response_count - attributed_count;
    const int amplification = std::max(0, attributed_count - distinct_consumed);
    graph.nodes.push_back({"llm", NodeKind::llm, novel + amplification});
    graph.nodes.push_back({"t0", NodeKind::super_sink, 0});

    for (const auto& [tool_id, list] : atoms.entries) {
        const std::string tool_node = "tool_" + std::to_string(tool_id);
        graph.edges.push_back({"s0", tool_node, 0, {}});

        FlowEdge consume;
        consume.from = tool_node;
        consume.to = "llm";
        auto it = consumed_by_tool.find(tool_id);
        if (it != consumed_by_tool.end()) consume.atom_ids = it->second;
        consume.flow = static_cast<int>(consume.atom_ids.size());
        graph.edges.push_back(std::move(consume));
    }

    FlowEdge emit;
    emit.from = "llm";
    emit.to = "t0";
    emit.flow = response_count;
    for (int j = 0; j < response_count; ++j) emit.atom_ids.insert(j);
    graph.edges.push_back(std::move(emit));

    for (const auto& node : graph.nodes) {
        if (node.kind == NodeKind::super_source || node.kind == NodeKind::super_sink) {
            graph.slack[node.id] = 0;
            continue;
        }
        int inflow = 0;
        int outflow = 0;
        for (const auto& e : graph.edges) {
            if (e.to == node.id) inflow += e.flow;
            if (e.from == node.id) outflow += e.flow;
        }
        graph.slack[node.id] = inflow + node.supply - outflow;
    }
    return graph;
}

ConservationReport check_conservation(const FlowGraph& graph) {
    ConservationReport report;
    for (const auto& node : graph.nodes) {
        if (node.kind == NodeKind::super_source || node.kind == NodeKind::super_sink) {
            continue;
        }
        ConservationRow row;
        row.node_id = node.id;
        row.supply = node.supply;
        for (const auto& e : graph.edges) {
            if (e.to == node.id) row.inflow += e.flow;
            if (e.from == node.id) row.outflow += e.flow;
        }
        row.slack = row.inflow + row.supply - row.outflow;
        if (row.slack < 0) report.violations.push_back(node.id);
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::string graph_to_json(const FlowGraph& graph) {
    json root;
    json nodes = json::array();
    for (const auto& n : graph.nodes) {
        json row;
        row["id"] = n.id;
        row["kind"] = node_kind_name(n.kind);
        row["supply"] = n.supply;
        auto it = graph.slack.find(n.id);
        row["slack"] = it != graph.slack.end() ? it->second : 0;
        nodes.push_back(std::move(row));
    }
    root["nodes"] = std::move(nodes);
    json edges = json::array();
    for (const auto& e : graph.edges) {
        json row;
        row["from"] = e.from;
        row["to"] = e.to;
        row["flow"] = e.flow;
        row["atom_ids"] = e.atom_ids;
        edges.push_back(std::move(row));
    }
    root["edges"] = std::move(edges);
    return root.dump(2) + "\n";
}

std::string graph_to_dot(const FlowGraph& graph) {
    std::ostringstream out;
    out << "digraph aif {\n  rankdir=LR;\n";
    for (const auto& n : graph.nodes) {
        const char* shape = "box";
        if (n.kind == NodeKind::super_source || n.kind == NodeKind::super_sink) {
            shape = "ellipse";
        } else if (n.kind == NodeKind::llm) {
            shape = "diamond";
        }
        auto it = graph.slack.find(n.id);
        out << "  \"" << n.id << "\" [shape=" << shape << ", label=\"" << n.id
            << "\\nsupply=" << n.supply << " slack="
            << (it != graph.slack.end() ? it->second : 0) << "\"];\n";
    }
    for (const auto& e : graph.edges) {
        out << "  \"" << e.from << "\" -> \"" << e.to << "\" [label=\"" << e.flow
            << "\"";
        if (e.flow == 0) out << ", style=dashed";
        out << "];\n";
    }
    out << "}\n";
    return out.str();
}

}  // namespace aif
