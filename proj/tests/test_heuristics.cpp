#include <doctest.h>

#include <random>

#include "aif/errors.hpp"
#include "aif/heuristics.hpp"
#include "support/oracle.hpp"

using namespace aif;

namespace {

const std::vector<int> kAllK = {1, 2, 3, 4, 5};

void check_opt_eq(const std::optional<double>& actual,
                  const std::optional<double>& expected) {
    REQUIRE(actual.has_value() == expected.has_value());
    if (actual) CHECK(*actual == doctest::Approx(*expected).epsilon(1e-12));
}

testsupport::RandomInstance simple_instance(int tool_atoms, int response_atoms,
                                            int attributed) {
    testsupport::RandomInstance inst;
    auto& list = inst.atoms.entries[1];
    auto& scores = inst.signals.entries[1];
    for (int i = 0; i < tool_atoms; ++i) {
        list.push_back({i, i, {SourceKind::tool, 1}, "f" + std::to_string(i), 3});
        scores.push_back(3);
    }
    inst.trace.tools.push_back({1, "tool1", "", "out.", "", 0.0});
    for (int j = 0; j < response_atoms; ++j) {
        Atom atom;
        atom.local_index = j;
        atom.source = {SourceKind::response, 0};
        inst.response_atoms.push_back(atom);
        AttributionMap::Entry entry;
        if (j < attributed && tool_atoms > 0) {
            entry.matched_indices = {j % tool_atoms};
            entry.source_tools = {1};
        }
        inst.attribution.entries.push_back(entry);
    }
    return inst;
}

}  // namespace

TEST_CASE("RAP counts attributed response atoms") {
    const auto inst = simple_instance(8, 5, 3);
    const auto report = compute_report(inst.atoms, inst.signals, inst.response_atoms,
                                       inst.attribution, kAllK);
    CHECK(*report.rap == doctest::Approx(0.6));
    CHECK(report.counts.attributed_response_atoms == 3);
    CHECK(report.counts.response_atoms == 5);
    CHECK(*report.factscore == doctest::Approx(0.6));
}

TEST_CASE("nothing attributed gives zero RAP/RAR/TUP") {
    const auto inst = simple_instance(4, 3, 0);
    const auto report = compute_report(inst.atoms, inst.signals, inst.response_atoms,
                                       inst.attribution, kAllK);
    CHECK(*report.rap == 0.0);
    CHECK(*report.rar == 0.0);
    CHECK(*report.per_tool.at(1).tup == 0.0);
    CHECK(*report.per_tool.at(1).tur == 0.0);
}

TEST_CASE("full consumption gives all ones") {
    const auto inst = simple_instance(4, 4, 4);
    const auto report = compute_report(inst.atoms, inst.signals, inst.response_atoms,
                                       inst.attribution, kAllK);
    CHECK(*report.rap == 1.0);
    CHECK(*report.rar == 1.0);
    CHECK(*report.per_tool.at(1).tup == 1.0);
    CHECK(*report.per_tool.at(1).tur == 1.0);
    CHECK(*report.factscore == 1.0);
}

TEST_CASE("zero denominators are undefined and named") {
    const auto inst = simple_instance(0, 0, 0);
    const auto report = compute_report(inst.atoms, inst.signals, inst.response_atoms,
                                       inst.attribution, kAllK);
    CHECK_FALSE(report.rap.has_value());
    CHECK_FALSE(report.rar.has_value());
    CHECK_FALSE(report.factscore.has_value());
    CHECK(report.undefined.at("rap") == "|A_R| = 0");
    CHECK(report.undefined.at("rar") == "|A_T| = 0");
    // Tool 1 has no atoms: TUR is undefined, and so is every RAR@K.
    CHECK_FALSE(report.per_tool.at(1).tur.has_value());
    CHECK(report.undefined.count("rar@5") == 1);
}

TEST_CASE("K outside [1,5] is rejected") {
    const auto inst = simple_instance(2, 2, 1);
    CHECK_THROWS_AS(compute_report(inst.atoms, inst.signals, inst.response_atoms,
                                   inst.attribution, {7}),
                    ValidationError);
}

TEST_CASE("every Table-1 value equals the naive counting oracle") {
    std::mt19937 rng(113);
    for (int iter = 0; iter < 300; ++iter) {
        const auto inst = testsupport::random_instance(rng);
        const auto report = compute_report(inst.atoms, inst.signals,
                                           inst.response_atoms, inst.attribution,
                                           kAllK);
        const auto oracle = testsupport::oracle_heuristics(inst, kAllK);

        CHECK(report.counts.response_atoms == oracle.a_r);
        CHECK(report.counts.tool_atoms == oracle.a_t);
        CHECK(report.counts.attributed_response_atoms == oracle.a_rt);
        check_opt_eq(report.rap, oracle.rap);
        check_opt_eq(report.rar, oracle.rar);
        check_opt_eq(report.factscore, oracle.factscore);
        for (int k : kAllK) {
            CHECK(report.counts.attributed_at_k.at(k) == oracle.a_rt_gek.at(k));
            CHECK(report.counts.tool_atoms_at_k.at(k) == oracle.a_t_gek.at(k));
            check_opt_eq(report.rap_at_k.at(k), oracle.rap_at_k.at(k));
            check_opt_eq(report.rar_at_k.at(k), oracle.rar_at_k.at(k));
        }
        for (const auto& [tool_id, t] : report.per_tool) {
            CHECK(report.counts.tool_atoms_per_tool.at(tool_id) == oracle.a_tt.at(tool_id));
            CHECK(report.counts.attributed_per_tool.at(tool_id) ==
                  oracle.a_rtt.at(tool_id));
            check_opt_eq(t.tup, oracle.tup.at(tool_id));
            check_opt_eq(t.tur, oracle.tur.at(tool_id));
            for (int k : kAllK) {
                check_opt_eq(t.tup_at_k.at(k), oracle.tup_at_k.at(tool_id).at(k));
                check_opt_eq(t.tur_at_k.at(k), oracle.tur_at_k.at(tool_id).at(k));
            }
        }
    }
}

TEST_CASE("rap@k and tup@k are non-increasing in K") {
    std::mt19937 rng(127);
    for (int iter = 0; iter < 100; ++iter) {
        const auto inst = testsupport::random_instance(rng);
        const auto report = compute_report(inst.atoms, inst.signals,
                                           inst.response_atoms, inst.attribution,
                                           kAllK);
        for (int k = 2; k <= 5; ++k) {
            if (report.rap_at_k.at(k) && report.rap_at_k.at(k - 1)) {
                CHECK(*report.rap_at_k.at(k) <= *report.rap_at_k.at(k - 1) + 1e-15);
            }
            for (const auto& [tool_id, t] : report.per_tool) {
                if (t.tup_at_k.at(k) && t.tup_at_k.at(k - 1)) {
                    CHECK(*t.tup_at_k.at(k) <= *t.tup_at_k.at(k - 1) + 1e-15);
                }
            }
        }
    }
}

TEST_CASE("sum of TUP_t is at least RAP, equal without multi-hop") {
    std::mt19937 rng(131);
    for (int iter = 0; iter < 100; ++iter) {
        const auto inst = testsupport::random_instance(rng);
        if (inst.response_atoms.empty()) continue;
        const auto report = compute_report(inst.atoms, inst.signals,
                                           inst.response_atoms, inst.attribution,
                                           kAllK);
        double tup_sum = 0.0;
        for (const auto& [_, t] : report.per_tool) tup_sum += t.tup.value_or(0.0);
        CHECK(tup_sum >= *report.rap - 1e-12);

        bool multi_hop = false;
        for (const auto& entry : inst.attribution.entries) {
            if (entry.source_tools.size() > 1) multi_hop = true;
        }
        if (!multi_hop) CHECK(tup_sum == doctest::Approx(*report.rap).epsilon(1e-12));
    }
}

TEST_CASE("factscore") {
    auto inst = simple_instance(4, 4, 4);
    CHECK(*factscore(inst.response_atoms, inst.attribution) == 1.0);
    inst = simple_instance(4, 4, 0);
    CHECK(*factscore(inst.response_atoms, inst.attribution) == 0.0);
    inst = simple_instance(4, 0, 0);
    CHECK_FALSE(factscore(inst.response_atoms, inst.attribution).has_value());
}

TEST_CASE("heuristics JSON round trip preserves values and undefineds") {
    std::mt19937 rng(137);
    const auto inst = testsupport::random_instance(rng);
    const auto report = compute_report(inst.atoms, inst.signals, inst.response_atoms,
                                       inst.attribution, kAllK);
    const auto back = heuristics_from_json(heuristics_to_json(report));
    check_opt_eq(back.rap, report.rap);
    check_opt_eq(back.rar, report.rar);
    CHECK(back.counts.attributed_per_tool == report.counts.attributed_per_tool);
    CHECK(back.undefined == report.undefined);
    for (const auto& [tool_id, t] : report.per_tool) {
        check_opt_eq(back.per_tool.at(tool_id).tup, t.tup);
        check_opt_eq(back.per_tool.at(tool_id).tur, t.tur);
    }
}

TEST_CASE("csv emits one row per K") {
    const auto inst = simple_instance(4, 4, 2);
    const auto report = compute_report(inst.atoms, inst.signals, inst.response_atoms,
                                       inst.attribution, {1, 3, 5});
    const std::string csv = heuristics_to_csv("trace-x", report);
    CHECK(csv.find("trace_id,k,rap,rap_at_k,rar,rar_at_k,factscore\n") == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);  // header + 3 rows
    CHECK(csv.find("trace-x,1,") != std::string::npos);
    CHECK(csv.find("trace-x,5,") != std::string::npos);
}
