#include "aif/signals.hpp"

#include <algorithm>

#include <json.hpp>

#include "aif/errors.hpp"
#include "aif/text.hpp"

namespace aif {

using nlohmann::json;

int baseline_score(const std::string& fact, const std::string& query) {
    const auto fact_words = text::content_words(fact);
    const auto query_words = text::content_words(query);
    std::size_t overlap = 0;
    for (const auto& w : query_words) {
        if (fact_words.count(w)) ++overlap;
    }
    const double r = static_cast<double>(overlap) /
                     static_cast<double>(std::max<std::size_t>(1, query_words.size()));
    if (r >= 0.8) return 5;
    if (r >= 0.6) return 4;
    if (r >= 0.4) return 3;
    if (r >= 0.2) return 2;
    return 1;
}

SignalMap inject_signals(const AtomMap& atoms, const std::string& query,
                         Scorer& scorer) {
    SignalMap map;
    for (const auto& [tool_id, list] : atoms.entries) {
        auto& scores = map.entries[tool_id];
        scores.reserve(list.size());
        for (const auto& atom : list) {
            if (atom.relevance) {
                scores.push_back(std::clamp(*atom.relevance, 1, 5));
                if (*atom.relevance < 1 || *atom.relevance > 5) ++map.clamp_warnings;
                continue;
            }
            int s = scorer.score(atom.fact, query);
            for (int attempt = 0; (s < 1 || s > 5) && attempt < 2; ++attempt) {
                s = scorer.score(atom.fact, query);
            }
            if (s < 1 || s > 5) {
                s = std::clamp(s, 1, 5);
                ++map.clamp_warnings;
            }
            scores.push_back(s);
        }
        if (scores.size() != list.size()) {
            throw std::logic_error("signal list length diverged from atom list");
        }
    }
    return map;
}

void apply_signals(AtomMap& atoms, const SignalMap& signals) {
    for (auto& [tool_id, list] : atoms.entries) {
        auto it = signals.entries.find(tool_id);
        if (it == signals.entries.end() || it->second.size() != list.size()) {
            throw ValidationError("signal map is not parallel to atom map for tool " +
                                  std::to_string(tool_id));
        }
        for (std::size_t i = 0; i < list.size(); ++i) {
            list[i].relevance = it->second[i];
        }
    }
}

std::string signals_to_json(const SignalMap& signals) {
    json root;
    root["signal"] = signals.signal;
    json entries = json::object();
    for (const auto& [tool_id, scores] : signals.entries) {
        entries[std::to_string(tool_id)] = scores;
    }
    root["entries"] = std::move(entries);
    return root.dump(2) + "\n";
}

SignalMap signals_from_json(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("signal JSON parse error: ") + e.what());
    }
    SignalMap map;
    map.signal = root.value("signal", "relevance");
    for (const auto& [key, scores] : root.at("entries").items()) {
        map.entries[std::stoi(key)] = scores.get<std::vector<int>>();
    }
    return map;
}

}  // namespace aif
