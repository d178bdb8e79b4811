#include "aif/heuristics.hpp"

#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "aif/errors.hpp"

namespace aif {

using nlohmann::json;

namespace {

std::optional<double> ratio(int numerator, int denominator,
                            const std::string& metric, const std::string& denom_name,
                            std::map<std::string, std::string>& undefined) {
    if (denominator == 0) {
        undefined[metric] = denom_name + " = 0";
        return std::nullopt;
    }
    return static_cast<double>(numerator) / static_cast<double>(denominator);
}

json opt_to_json(const std::optional<double>& v) {
    if (!v) return nullptr;
    return *v;
}

std::optional<double> opt_from_json(const json& v) {
    if (v.is_null()) return std::nullopt;
    return v.get<double>();
}

std::string format_ratio(const std::optional<double>& v) {
    if (!v) return "";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", *v);
    return buf;
}

}  // namespace

std::optional<double> factscore(const std::vector<Atom>& response_atoms,
                                const AttributionMap& attribution) {
    if (response_atoms.empty()) return std::nullopt;
    int supported = 0;
    for (const auto& entry : attribution.entries) {
        if (!entry.matched_indices.empty()) ++supported;
    }
    return static_cast<double>(supported) / static_cast<double>(response_atoms.size());
}

HeuristicsReport compute_report(const AtomMap& atoms, const SignalMap& signals,
                                const std::vector<Atom>& response_atoms,
                                const AttributionMap& attribution,
                                const std::vector<int>& k_values) {
    for (int k : k_values) {
        if (k < 1 || k > 5) {
            throw ValidationError("K must lie in [1,5], got " + std::to_string(k));
        }
    }
    if (attribution.entries.size() != response_atoms.size()) {
        throw ValidationError("attribution entries do not match response atoms");
    }

    HeuristicsReport report;
    auto& c = report.counts;
    c.response_atoms = static_cast<int>(response_atoms.size());

    // Relevance per global index, via the flatten order.
    std::vector<int> relevance;
    std::vector<int> index_to_tool;
    for (const auto& [tool_id, list] : atoms.entries) {
        c.tool_atoms_per_tool[tool_id] = static_cast<int>(list.size());
        auto sig = signals.entries.find(tool_id);
        if (sig == signals.entries.end() || sig->second.size() != list.size()) {
            throw ValidationError("signals are not parallel to atoms for tool " +
                                  std::to_string(tool_id));
        }
        for (std::size_t i = 0; i < list.size(); ++i) {
            relevance.push_back(sig->second[i]);
            index_to_tool.push_back(tool_id);
        }
        c.attributed_per_tool[tool_id] = 0;
    }
    c.tool_atoms = static_cast<int>(relevance.size());

    for (int k : k_values) {
        c.attributed_at_k[k] = 0;
        int tool_at_k = 0;
        for (int r : relevance) {
            if (r >= k) ++tool_at_k;
        }
        c.tool_atoms_at_k[k] = tool_at_k;
        for (const auto& [tool_id, _] : atoms.entries) {
            c.attributed_per_tool_at_k[k][tool_id] = 0;
            int n = 0;
            auto sig = signals.entries.find(tool_id);
            for (int r : sig->second) {
                if (r >= k) ++n;
            }
            c.tool_atoms_per_tool_at_k[k][tool_id] = n;
        }
    }

    for (const auto& entry : attribution.entries) {
        if (entry.matched_indices.empty()) continue;
        ++c.attributed_response_atoms;
        for (int t : entry.source_tools) ++c.attributed_per_tool[t];
        for (int k : k_values) {
            bool any_at_k = false;
            std::set<int> tools_at_k;
            for (int idx : entry.matched_indices) {
                if (idx < 0 || idx >= c.tool_atoms) {
                    throw ValidationError("attribution references unknown atom index " +
                                          std::to_string(idx));
                }
                if (relevance[static_cast<std::size_t>(idx)] >= k) {
                    any_at_k = true;
                    tools_at_k.insert(index_to_tool[static_cast<std::size_t>(idx)]);
                }
            }
            if (any_at_k) ++c.attributed_at_k[k];
            for (int t : tools_at_k) ++c.attributed_per_tool_at_k[k][t];
        }
    }

    report.rap = ratio(c.attributed_response_atoms, c.response_atoms, "rap", "|A_R|",
                       report.undefined);
    report.rar = ratio(c.attributed_response_atoms, c.tool_atoms, "rar", "|A_T|",
                       report.undefined);
    report.factscore = factscore(response_atoms, attribution);
    if (!report.factscore) report.undefined["factscore"] = "|A_R| = 0";

    for (int k : k_values) {
        const std::string suffix = "@" + std::to_string(k);
        report.rap_at_k[k] = ratio(c.attributed_at_k[k], c.response_atoms,
                                   "rap" + suffix, "|A_R|", report.undefined);
        report.rar_at_k[k] =
            ratio(c.attributed_at_k[k], c.tool_atoms_at_k[k], "rar" + suffix,
                  "|A_{T,>=" + std::to_string(k) + "}|", report.undefined);
    }

    for (const auto& [tool_id, atom_count] : c.tool_atoms_per_tool) {
        auto& tool = report.per_tool[tool_id];
        const std::string tname = "tool_" + std::to_string(tool_id);
        tool.tup = ratio(c.attributed_per_tool[tool_id], c.response_atoms,
                         "tup." + tname, "|A_R|", report.undefined);
        tool.tur = ratio(c.attributed_per_tool[tool_id], atom_count, "tur." + tname,
                         "|A_{T,t}|", report.undefined);
        for (int k : k_values) {
            const std::string suffix = "@" + std::to_string(k);
            tool.tup_at_k[k] =
                ratio(c.attributed_per_tool_at_k[k][tool_id], c.response_atoms,
                      "tup." + tname + suffix, "|A_R|", report.undefined);
            tool.tur_at_k[k] =
                ratio(c.attributed_per_tool_at_k[k][tool_id],
                      c.tool_atoms_per_tool_at_k[k][tool_id], "tur." + tname + suffix,
                      "|A_{T,t,>=" + std::to_string(k) + "}|", report.undefined);
        }
    }
    return report;
}

std::string heuristics_to_json(const HeuristicsReport& report) {
    json root;
    root["rap"] = opt_to_json(report.rap);
    root["rar"] = opt_to_json(report.rar);
    root["factscore"] = opt_to_json(report.factscore);

    json rap_k = json::object();
    json rar_k = json::object();
    for (const auto& [k, v] : report.rap_at_k) rap_k[std::to_string(k)] = opt_to_json(v);
    for (const auto& [k, v] : report.rar_at_k) rar_k[std::to_string(k)] = opt_to_json(v);
    root["rap_at_k"] = std::move(rap_k);
    root["rar_at_k"] = std::move(rar_k);

    json per_tool = json::object();
    for (const auto& [tool_id, t] : report.per_tool) {
        json row;
        row["tup"] = opt_to_json(t.tup);
        row["tur"] = opt_to_json(t.tur);
        json tup_k = json::object();
        json tur_k = json::object();
        for (const auto& [k, v] : t.tup_at_k) tup_k[std::to_string(k)] = opt_to_json(v);
        for (const auto& [k, v] : t.tur_at_k) tur_k[std::to_string(k)] = opt_to_json(v);
        row["tup_at_k"] = std::move(tup_k);
        row["tur_at_k"] = std::move(tur_k);
        per_tool[std::to_string(tool_id)] = std::move(row);
    }
    root["per_tool"] = std::move(per_tool);

    const auto& c = report.counts;
    json counts;
    counts["A_R"] = c.response_atoms;
    counts["A_T"] = c.tool_atoms;
    counts["A_RT"] = c.attributed_response_atoms;
    json per_tool_counts = json::object();
    for (const auto& [tool_id, n] : c.tool_atoms_per_tool) {
        json row;
        row["A_Tt"] = n;
        row["A_RTt"] = c.attributed_per_tool.at(tool_id);
        per_tool_counts[std::to_string(tool_id)] = std::move(row);
    }
    counts["per_tool"] = std::move(per_tool_counts);
    json at_k = json::object();
    for (const auto& [k, n] : c.attributed_at_k) {
        json row;
        row["A_RT_geK"] = n;
        row["A_T_geK"] = c.tool_atoms_at_k.at(k);
        json per_tool_k = json::object();
        for (const auto& [tool_id, m] : c.attributed_per_tool_at_k.at(k)) {
            json cell;
            cell["A_RTt_geK"] = m;
            cell["A_Tt_geK"] = c.tool_atoms_per_tool_at_k.at(k).at(tool_id);
            per_tool_k[std::to_string(tool_id)] = std::move(cell);
        }
        row["per_tool"] = std::move(per_tool_k);
        at_k[std::to_string(k)] = std::move(row);
    }
    counts["at_k"] = std::move(at_k);
    root["counts"] = std::move(counts);

    root["undefined"] = report.undefined;
    return root.dump(2) + "\n";
}

HeuristicsReport heuristics_from_json(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("heuristics JSON parse error: ") + e.what());
    }
    HeuristicsReport report;
    report.rap = opt_from_json(root.at("rap"));
    report.rar = opt_from_json(root.at("rar"));
    report.factscore = opt_from_json(root.at("factscore"));
    for (const auto& [k, v] : root.at("rap_at_k").items()) {
        report.rap_at_k[std::stoi(k)] = opt_from_json(v);
    }
    for (const auto& [k, v] : root.at("rar_at_k").items()) {
        report.rar_at_k[std::stoi(k)] = opt_from_json(v);
    }
    for (const auto& [tool, row] : root.at("per_tool").items()) {
        ToolHeuristics t;
        t.tup = opt_from_json(row.at("tup"));
        t.tur = opt_from_json(row.at("tur"));
        for (const auto& [k, v] : row.at("tup_at_k").items()) {
            t.tup_at_k[std::stoi(k)] = opt_from_json(v);
        }
        for (const auto& [k, v] : row.at("tur_at_k").items()) {
            t.tur_at_k[std::stoi(k)] = opt_from_json(v);
        }
        report.per_tool[std::stoi(tool)] = std::move(t);
    }
    const auto& counts = root.at("counts");
    report.counts.response_atoms = counts.at("A_R").get<int>();
    report.counts.tool_atoms = counts.at("A_T").get<int>();
    report.counts.attributed_response_atoms = counts.at("A_RT").get<int>();
    for (const auto& [tool, row] : counts.at("per_tool").items()) {
        report.counts.tool_atoms_per_tool[std::stoi(tool)] = row.at("A_Tt").get<int>();
        report.counts.attributed_per_tool[std::stoi(tool)] = row.at("A_RTt").get<int>();
    }
    for (const auto& [k, row] : counts.at("at_k").items()) {
        const int kk = std::stoi(k);
        report.counts.attributed_at_k[kk] = row.at("A_RT_geK").get<int>();
        report.counts.tool_atoms_at_k[kk] = row.at("A_T_geK").get<int>();
        for (const auto& [tool, cell] : row.at("per_tool").items()) {
            report.counts.attributed_per_tool_at_k[kk][std::stoi(tool)] =
                cell.at("A_RTt_geK").get<int>();
            report.counts.tool_atoms_per_tool_at_k[kk][std::stoi(tool)] =
                cell.at("A_Tt_geK").get<int>();
        }
    }
    if (root.contains("undefined")) {
        for (const auto& [metric, reason] : root.at("undefined").items()) {
            report.undefined[metric] = reason.get<std::string>();
        }
    }
    return report;
}

std::string heuristics_to_csv(const std::string& trace_id,
                              const HeuristicsReport& report) {
    std::ostringstream out;
    out << "trace_id,k,rap,rap_at_k,rar,rar_at_k,factscore\n";
    for (const auto& [k, rap_k] : report.rap_at_k) {
        out << trace_id << ',' << k << ',' << format_ratio(report.rap) << ','
            << format_ratio(rap_k) << ',' << format_ratio(report.rar) << ','
            << format_ratio(report.rar_at_k.at(k)) << ','
            << format_ratio(report.factscore) << '\n';
    }
    return out.str();
}

}  // namespace aif
