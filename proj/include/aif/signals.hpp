#pragma once

#include <map>
#include <string>
#include <vector>

#include "aif/atomizer.hpp"

namespace aif {

/// Per-tool scalar metadata lists, parallel to the AtomMap lists. The
/// container is keyed by signal name so other signal types can ride along
/// later; "relevance" (Likert 1..5) is the only built-in.
struct SignalMap {
    std::string signal = "relevance";
    std::map<int, std::vector<int>> entries;
    int clamp_warnings = 0;  // out-of-range scores clamped instead of failing
};

/// Pluggable scoring policy mapping (atom fact, query) to a Likert score.
class Scorer {
public:
    virtual ~Scorer() = default;
    virtual int score(const std::string& fact, const std::string& query) = 0;
    virtual std::string identity() const = 0;
};

/// Deterministic stand-in for an LLM scorer: content-word overlap ratio
/// bucketed as r >= 0.8 -> 5, >= 0.6 -> 4, >= 0.4 -> 3, >= 0.2 -> 2, else 1.
int baseline_score(const std::string& fact, const std::string& query);

class BaselineScorer : public Scorer {
public:
    int score(const std::string& fact, const std::string& query) override {
        return baseline_score(fact, query);
    }
    std::string identity() const override { return "baseline"; }
};

/// Score every tool atom. Atoms that already carry a relevance (fused
/// decomposition) are reused without re-calling the scorer. Out-of-range
/// scorer output is retried twice, then clamped into [1,5] with a warning
/// counted on the result.
SignalMap inject_signals(const AtomMap& atoms, const std::string& query,
                         Scorer& scorer);

/// Copy scores back onto the atoms (parallel lists by construction).
void apply_signals(AtomMap& atoms, const SignalMap& signals);

/// {"signal":"relevance","entries":{"<tool_id>":[...]}} round trip.
std::string signals_to_json(const SignalMap& signals);
SignalMap signals_from_json(const std::string& json_text);

}  // namespace aif
