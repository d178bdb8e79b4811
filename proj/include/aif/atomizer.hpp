#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "aif/trace.hpp"

namespace aif {

/// Where an atom came from.
enum class SourceKind { tool, response, query };

struct SourceNode {
    SourceKind kind = SourceKind::tool;
    int tool_id = 0;  // meaningful only for kind == tool

    friend bool operator==(const SourceNode&, const SourceNode&) = default;
};

/// Minimal self-contained fact extracted from a node's text. global_index
/// is the position in the flattened pool (stamped by flatten); local_index
/// is the position within the source node's own list.
struct Atom {
    int global_index = -1;
    int local_index = 0;
    SourceNode source;
    std::string fact;
    std::optional<int> relevance;  // Likert 1..5 when scored
};

/// Per-tool atom lists plus per-tool decomposition failures. Every tool_id
/// of the source trace appears in entries, possibly with an empty list.
struct AtomMap {
    std::map<int, std::vector<Atom>> entries;
    std::map<int, std::string> failures;

    std::size_t total_atoms() const;
};

/// Covering, disjoint, sentence-aligned character ranges (Unicode scalar
/// offsets) used to fan a long text out to parallel decompositions.
struct ChunkPlan {
    struct Range {
        std::size_t start = 0;
        std::size_t end = 0;
    };
    std::vector<Range> chunks;
    std::size_t max_chunk_units = 0;
};

struct DecomposedFact {
    std::string fact;
    std::optional<int> relevance;
};

/// Pluggable decomposition model. Implementations must be deterministic
/// given their inputs (the LLM one is deterministic under a warm cache).
class Decomposer {
public:
    virtual ~Decomposer() = default;
    virtual std::vector<DecomposedFact> decompose(const std::string& text,
                                                  const std::string& query) = 0;
    virtual std::string identity() const = 0;
};

struct ChunkingParams {
    std::size_t max_chunk_sentences = 40;
};

/// Sentence-aligned chunk plan; a text with <= max_chunk_units sentences is
/// a single chunk, empty text an empty plan.
ChunkPlan plan_chunks(const std::string& text, std::size_t max_chunk_units);

/// Deterministic stand-in for an LLM decomposer: sentence segmentation on
/// . ! ? followed by whitespace/end, trimmed, empties dropped. No pronoun
/// resolution is attempted.
std::vector<std::string> baseline_decompose(const std::string& text);

/// Decompose every tool output (chunked map-reduce for long ones). A
/// decomposer failure on some tool is recorded in the result's failures and
/// the run continues.
AtomMap decompose_tool_calls(const Trace& trace, Decomposer& decomposer,
                             const ChunkingParams& chunking = {});

/// Decompose the response into ordered atoms (source = response).
/// Throws ValidationError if the trace has no response yet.
std::vector<Atom> decompose_response(const Trace& trace, Decomposer& decomposer);

/// Decomposer backed by baseline_decompose (identity "baseline").
class BaselineDecomposer : public Decomposer {
public:
    std::vector<DecomposedFact> decompose(const std::string& text,
                                          const std::string& query) override;
    std::string identity() const override { return "baseline"; }
};

/// Appendix-D-shaped atom JSON: [{"Index", "Fact", "Relevance"}].
/// Index values are pool-global (ascending tool_id, then local order).
std::string atoms_to_json(const std::vector<Atom>& atoms);
std::vector<Atom> atoms_from_json(const std::string& json_text, SourceNode source);

}  // namespace aif
