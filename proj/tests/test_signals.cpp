#include <doctest.h>

#include <random>

#include "aif/signals.hpp"
#include "aif/text.hpp"

using namespace aif;

TEST_CASE("baseline_score bucket edges") {
    // Identical non-stop-word text: overlap ratio 1.
    CHECK(baseline_score("quantum flux capacitor", "quantum flux capacitor") == 5);
    // Disjoint vocabulary: ratio 0.
    CHECK(baseline_score("entirely unrelated words", "quantum flux capacitor") == 1);
    // 2 of 5 query content words present: r = 0.4, lower bounds are
    // inclusive, so the bucket is 3 (not 2).
    CHECK(baseline_score("alpha beta", "alpha beta gamma delta epsilon") == 3);
    // 1 of 5: r = 0.2 -> 2.
    CHECK(baseline_score("alpha", "alpha beta gamma delta epsilon") == 2);
    // 3 of 5: r = 0.6 -> 4.
    CHECK(baseline_score("alpha beta gamma", "alpha beta gamma delta epsilon") == 4);
    // Query with only stop words: max(1, 0) denominator keeps r at 0.
    CHECK(baseline_score("anything", "the of and") == 1);
}

TEST_CASE("baseline_score on the worked relevance example") {
    CHECK(baseline_score("Paris is the capital of France", "capital of France") == 5);
}

TEST_CASE("inject_signals is parallel to the atom map") {
    AtomMap atoms;
    atoms.entries[1] = {{-1, 0, {SourceKind::tool, 1}, "alpha beta", std::nullopt},
                        {-1, 1, {SourceKind::tool, 1}, "gamma", std::nullopt}};
    atoms.entries[2] = {};
    BaselineScorer scorer;
    const SignalMap signals = inject_signals(atoms, "alpha beta", scorer);
    REQUIRE(signals.entries.at(1).size() == 2);
    CHECK(signals.entries.at(2).empty());
    CHECK(signals.entries.at(1)[0] == 5);
    CHECK(signals.entries.at(1)[1] == 1);
    CHECK(signals.clamp_warnings == 0);
}

TEST_CASE("inject_signals on an empty map") {
    AtomMap atoms;
    BaselineScorer scorer;
    CHECK(inject_signals(atoms, "q", scorer).entries.empty());
}

TEST_CASE("fused relevance is reused without calling the scorer") {
    struct Counting : Scorer {
        int calls = 0;
        int score(const std::string&, const std::string&) override {
            ++calls;
            return 3;
        }
        std::string identity() const override { return "counting"; }
    };
    AtomMap atoms;
    atoms.entries[1] = {{-1, 0, {SourceKind::tool, 1}, "a", 4},
                        {-1, 1, {SourceKind::tool, 1}, "b", std::nullopt}};
    Counting scorer;
    const SignalMap signals = inject_signals(atoms, "q", scorer);
    CHECK(signals.entries.at(1) == std::vector<int>{4, 3});
    CHECK(scorer.calls == 1);
}

TEST_CASE("out-of-range scores are retried then clamped with a warning") {
    struct Wild : Scorer {
        int calls = 0;
        int score(const std::string&, const std::string&) override {
            ++calls;
            return 9;
        }
        std::string identity() const override { return "wild"; }
    };
    AtomMap atoms;
    atoms.entries[1] = {{-1, 0, {SourceKind::tool, 1}, "a", std::nullopt}};
    Wild scorer;
    const SignalMap signals = inject_signals(atoms, "q", scorer);
    CHECK(signals.entries.at(1) == std::vector<int>{5});
    CHECK(signals.clamp_warnings == 1);
    CHECK(scorer.calls == 3);  // initial call plus two retries
}

TEST_CASE("adding a query content word to a fact never lowers the score") {
    std::mt19937 rng(41);
    const std::vector<std::string> vocab = {"red", "green", "blue", "cyan", "magenta",
                                            "yellow", "umber", "teal"};
    for (int iter = 0; iter < 60; ++iter) {
        std::string query;
        for (int i = 0; i < 4; ++i) query += vocab[rng() % vocab.size()] + " ";
        std::string fact;
        for (int i = 0; i < 3; ++i) fact += vocab[rng() % vocab.size()] + " ";
        // Append a query word that the fact is missing, if any.
        std::string extended = fact;
        for (const auto& w : text::content_words(query)) {
            if (!text::content_words(fact).count(w)) {
                extended += " " + w;
                break;
            }
        }
        CHECK(baseline_score(extended, query) >= baseline_score(fact, query));
    }
}

TEST_CASE("signals JSON round trip") {
    SignalMap signals;
    signals.entries[1] = {5, 1, 3};
    signals.entries[7] = {};
    const SignalMap back = signals_from_json(signals_to_json(signals));
    CHECK(back.signal == "relevance");
    CHECK(back.entries == signals.entries);
}
