#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "aif/assigner.hpp"

namespace aif {

enum class NodeKind { super_source, tool, llm, super_sink };

std::string node_kind_name(NodeKind kind);

/// Typed graph node. supply counts the atoms originating at the node; the
/// super-sink always has supply 0.
struct FlowNode {
    std::string id;
    NodeKind kind = NodeKind::tool;
    int supply = 0;
};

/// Directed edge carrying an integer atom flow; flow == |atom_ids| (each
/// distinct atom traverses an edge at most once).
struct FlowEdge {
    std::string from;
    std::string to;
    int flow = 0;
    std::set<int> atom_ids;
};

struct FlowGraph {
    std::vector<FlowNode> nodes;
    std::vector<FlowEdge> edges;
    std::map<std::string, int> slack;
};

struct ConservationRow {
    std::string node_id;
    int inflow = 0;
    int supply = 0;
    int outflow = 0;
    int slack = 0;  // inflow + supply - outflow
};

struct ConservationReport {
    std::vector<ConservationRow> rows;       // non-terminal nodes only
    std::vector<std::string> violations;     // nodes where slack < 0
};

/// Materialize the attribution as a flow graph:
///   s0 -> tool_t        structural, zero flow (retrieval edges are not
///                        modeled yet)
///   tool_t -> llm       flow = distinct atoms of t matched by any response
///                        atom (an atom traverses once however many response
///                        atoms it supports)
///   llm -> t0           flow = |response atoms|
/// The llm node supplies the unattributed response atoms plus any
/// amplification (attributed response atoms beyond the distinct tool atoms
/// consumed); its slack absorbs multi-hop over-consumption. Conservation
/// holds exactly at every non-terminal node by construction.
FlowGraph build_graph(const Trace& trace, const AtomMap& atoms,
                      const std::vector<Atom>& response_atoms,
                      const AttributionMap& attribution);

/// Per-node conservation audit. Violations are data, not exceptions.
ConservationReport check_conservation(const FlowGraph& graph);

std::string graph_to_json(const FlowGraph& graph);
std::string graph_to_dot(const FlowGraph& graph);

}  // namespace aif
