#pragma once

#include <set>
#include <string>
#include <vector>

#include "aif/atomizer.hpp"

namespace aif {

/// All tool atoms flattened in ascending (tool_id, local_index) order so
/// matching is unbiased by tool order or hierarchy. source_map[i] is the
/// tool_id of atoms[i]; atoms carry their global_index.
struct FlatPool {
    std::vector<Atom> atoms;
    std::vector<int> source_map;
};

/// Response-atom attributions. entries[j] corresponds to response atom j;
/// source_tools is always the image of matched_indices under source_map.
struct AttributionMap {
    struct Entry {
        std::set<int> matched_indices;
        std::set<int> source_tools;
    };
    std::vector<Entry> entries;
    int dropped_indices = 0;   // matcher indices outside the pool
    int row_mismatches = 0;    // fused rows not aligned to response atoms
    int partition_failures = 0;
};

/// Pluggable matcher: which candidate facts support a response fact.
/// Returned indices are positions into the candidate list handed in.
class Matcher {
public:
    virtual ~Matcher() = default;
    virtual std::set<std::size_t> match(const std::string& response_fact,
                                        const std::vector<std::string>& candidates) = 0;
    virtual std::string identity() const = 0;
};

/// Deterministic stand-in for an LLM matcher: every candidate whose
/// content-word Jaccard similarity with the response fact is >= tau.
std::set<std::size_t> baseline_match(const std::string& response_fact,
                                     const std::vector<std::string>& candidates,
                                     double tau);

class BaselineMatcher : public Matcher {
public:
    explicit BaselineMatcher(double tau = 0.5) : tau_(tau) {}
    std::set<std::size_t> match(const std::string& response_fact,
                                const std::vector<std::string>& candidates) override {
        return baseline_match(response_fact, candidates, tau_);
    }
    std::string identity() const override { return "baseline"; }

private:
    double tau_;
};

/// Flatten tool atoms into the global pool, stamping global_index.
FlatPool flatten(const AtomMap& atoms);

/// Match each response atom against the pool, partitioned into consecutive
/// slices of at most partition_size candidates; per-atom results are the
/// set union over partitions. A matcher failure on one partition drops that
/// partition's contribution and is counted on the result.
AttributionMap assign(const std::vector<Atom>& response_atoms, const FlatPool& pool,
                      Matcher& matcher, std::size_t partition_size);

/// Assignment JSON (one row per response atom): [{"Fact","Assignment"}].
std::string assignment_to_json(const std::vector<Atom>& response_atoms,
                               const AttributionMap& attribution);
/// Rebuild (response atoms, attribution) from assignment JSON; source_tools
/// are derived through the pool's source_map.
std::pair<std::vector<Atom>, AttributionMap> assignment_from_json(
    const std::string& json_text, const FlatPool& pool);

}  // namespace aif
