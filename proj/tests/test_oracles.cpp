// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rankbudget Authors

#include <catch_amalgamated.hpp>

#include <deque>

#include "support.hpp"

using namespace rankbudget;
using rbtest::ConstantComparator;
using rbtest::SlotBiasedComparator;

namespace {

/// Replays scripted bits in call order.
class ScriptedComparator final : public DirectionalComparator {
public:
    explicit ScriptedComparator(std::deque<int> bits) : bits_(std::move(bits)) {}
    int compare(const ComparisonRequest& r, Rng&) override {
        seen.emplace_back(r.first.id.str(), r.second.id.str());
        const int b = bits_.front();
        bits_.pop_front();
        return b;
    }
    bool uses_rng() const override { return false; }
    std::string descriptor() const override { return "scripted"; }
    std::vector<std::pair<std::string, std::string>> seen;

private:
    std::deque<int> bits_;
};

/// Table-driven comparator for one pair: bit for (i first) and for (j first).
class TableComparator final : public DirectionalComparator {
public:
    TableComparator(std::string i, int bit_ij, int bit_ji) : i_(std::move(i)), ij_(bit_ij), ji_(bit_ji) {}
    int compare(const ComparisonRequest& r, Rng&) override { return r.first.id.str() == i_ ? ij_ : ji_; }
    bool uses_rng() const override { return false; }
    std::string descriptor() const override { return "table"; }

private:
    std::string i_;
    int ij_, ji_;
};

class CachingComparator final : public DirectionalComparator {
public:
    int compare(const ComparisonRequest&, Rng&) override {
        ++network;
        return 1;
    }
    std::optional<int> cached(const ComparisonRequest& r) const override {
        if (r.first.id.str() == "d000") return 1;
        return std::nullopt;
    }
    bool uses_rng() const override { return false; }
    std::string descriptor() const override { return "caching"; }
    int network = 0;
};

struct Fixture {
    CandidateSet c = rbtest::numbered(4);
    const Document& di = c.docs[0];
    const Document& dj = c.docs[1];
};

}  // namespace

TEST_CASE("bidirectional outcome truth table") {
    Fixture f;
    const std::tuple<int, int, std::string> cases[] = {
        {1, 0, "d000"}, {1, 1, "d001"}, {0, 1, "d001"}, {0, 0, "d001"}};
    for (const auto& [a, b, want] : cases) {
        ScriptedComparator cmp({a, b});
        BudgetLedger ledger(10);
        Rng rng(1);
        OracleSession s{cmp, ledger, rng, {"q1", "query"}};
        const auto out = bidirectional_outcome(s, f.di, f.dj);
        CHECK(out.winner.str() == want);
        CHECK(out.calls == 2);
        CHECK(ledger.used() == 2);
        REQUIRE(out.records.size() == 2);
        CHECK(cmp.seen[0] == std::pair<std::string, std::string>{"d000", "d001"});
        CHECK(cmp.seen[1] == std::pair<std::string, std::string>{"d001", "d000"});
        CHECK(out.records[0].seq < out.records[1].seq);
        CHECK_FALSE(out.records[0].direction_swapped);
        CHECK(out.records[1].direction_swapped);
        CHECK(out.records[0].raw_bit == a);
        CHECK(out.records[1].raw_bit == b);
        for (const auto& r : out.records) {
            CHECK(r.oracle_kind == OracleKind::bidirectional);
            CHECK(r.winner == out.winner);
            CHECK(r.calls_consumed == 1);
        }
    }
}

TEST_CASE("bidirectional outcome denied with one call left makes no comparator call") {
    Fixture f;
    ConstantComparator cmp(1);
    BudgetLedger ledger(3, 2);
    Rng rng(1);
    OracleSession s{cmp, ledger, rng, {"q1", "query"}};
    CHECK_THROWS_AS(bidirectional_outcome(s, f.di, f.dj), BudgetExhausted);
    CHECK(cmp.calls == 0);
    CHECK(ledger.used() == 2);
}

TEST_CASE("randomized outcome follows the drawn direction") {
    Fixture f;
    int seen_unswapped = 0, seen_swapped = 0;
    for (std::uint64_t seed = 0; seed < 64; ++seed) {
        ConstantComparator cmp(1);
        BudgetLedger ledger(1);
        Rng rng(seed);
        OracleSession s{cmp, ledger, rng, {"q1", "query"}};
        const auto out = randomized_outcome(s, f.di, f.dj);
        REQUIRE(out.records.size() == 1);
        const auto& r = out.records[0];
        CHECK(out.calls == 1);
        CHECK(ledger.used() == 1);
        CHECK(r.raw_bit == 1);
        if (r.direction_swapped) {
            ++seen_swapped;
            CHECK(r.first == f.dj.id);
            CHECK(out.winner == f.dj.id);
        } else {
            ++seen_unswapped;
            CHECK(r.first == f.di.id);
            CHECK(out.winner == f.di.id);
        }
    }
    CHECK(seen_swapped > 10);
    CHECK(seen_unswapped > 10);
}

TEST_CASE("randomized outcome cancels a content-blind slot bias") {
    Fixture f;
    SlotBiasedComparator cmp(0.9);
    auto ledger = BudgetLedger::unlimited();
    Rng rng(2024);
    OracleSession s{cmp, ledger, rng, {"q1", "query"}};
    int wins = 0;
    const int n = 100000;
    for (int t = 0; t < n; ++t) wins += randomized_outcome(s, f.di, f.dj).winner == f.di.id;
    CHECK(std::abs(static_cast<double>(wins) / n - 0.5) <= 0.01);
    CHECK(ledger.used() == static_cast<std::uint64_t>(n));
}

TEST_CASE("oracles reject identical documents") {
    Fixture f;
    ConstantComparator cmp(1);
    BudgetLedger ledger(10);
    Rng rng(1);
    OracleSession s{cmp, ledger, rng, {"q1", "query"}};
    CHECK_THROWS_AS(randomized_outcome(s, f.di, f.di), std::invalid_argument);
    CHECK(ledger.used() == 0);
}

TEST_CASE("comparator output outside {0, 1} is a failure") {
    Fixture f;
    ScriptedComparator cmp({2});
    BudgetLedger ledger(10);
    Rng rng(1);
    OracleSession s{cmp, ledger, rng, {"q1", "query"}};
    CHECK_THROWS_AS(randomized_outcome(s, f.di, f.dj), ComparatorFailure);
}

TEST_CASE("reciprocity gap examples") {
    Fixture f;
    SECTION("unbiased symmetric comparator") {
        SlotBiasedComparator cmp(0.5);
        Rng rng(17);
        CHECK(estimate_reciprocity_gap(cmp, {"q1", "q"}, f.di, f.dj, 10000, rng) < 0.03);
    }
    SECTION("always-1 comparator") {
        ConstantComparator cmp(1);
        Rng rng(18);
        CHECK(estimate_reciprocity_gap(cmp, {"q1", "q"}, f.di, f.dj, 10000, rng) < 0.03);
    }
    SECTION("single trial") {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            SlotBiasedComparator cmp(0.7);
            Rng rng(seed);
            const double g = estimate_reciprocity_gap(cmp, {"q1", "q"}, f.di, f.dj, 1, rng);
            CHECK((g == 0.0 || g == 1.0));
        }
    }
    SECTION("zero trials") {
        ConstantComparator cmp(1);
        Rng rng(1);
        CHECK_THROWS_AS(estimate_reciprocity_gap(cmp, {"q1", "q"}, f.di, f.dj, 0, rng), std::invalid_argument);
    }
}

TEST_CASE("bidirectional pair probabilities sum to at most one") {
    // Exact enumeration over the four deterministic 2-bit tables.
    Fixture f;
    for (int ij = 0; ij <= 1; ++ij)
        for (int ji = 0; ji <= 1; ++ji) {
            TableComparator cmp("d000", ij, ji);
            auto ledger = BudgetLedger::unlimited();
            Rng rng(1);
            OracleSession s{cmp, ledger, rng, {"q1", "q"}};
            const int v_ij = bidirectional_outcome(s, f.di, f.dj).winner == f.di.id;
            const int v_ji = bidirectional_outcome(s, f.dj, f.di).winner == f.dj.id;
            CHECK(v_ij + v_ji <= 1);
            CHECK((v_ij + v_ji == 1) == (ij != ji));
        }
    // Mixtures of the tables: P[V_ij] + P[V_ji] = p(1-q) + q(1-p).
    for (int a = 0; a <= 10; ++a)
        for (int b = 0; b <= 10; ++b) {
            const double p = a / 10.0, q = b / 10.0;
            double total = 0.0;
            for (int ij = 0; ij <= 1; ++ij)
                for (int ji = 0; ji <= 1; ++ji) {
                    const double w = (ij ? p : 1 - p) * (ji ? q : 1 - q);
                    total += w * ((ij == 1 && ji == 0) + (ji == 1 && ij == 0));
                }
            CHECK(total <= 1.0 + 1e-12);
            CHECK(total == Catch::Approx(p * (1 - q) + q * (1 - p)));
        }
}

TEST_CASE("ledger delta per invocation matches oracle kind") {
    Fixture f;
    SlotBiasedComparator cmp(0.6);
    BudgetLedger ledger(1000);
    Rng rng(4);
    OracleSession s{cmp, ledger, rng, {"q1", "q"}};
    for (int t = 0; t < 100; ++t) {
        const auto before = ledger.used();
        if (t % 2) {
            CHECK(bidirectional_outcome(s, f.di, f.dj).calls == 2);
            CHECK(ledger.used() - before == 2);
        } else {
            CHECK(randomized_outcome(s, f.di, f.dj).calls == 1);
            CHECK(ledger.used() - before == 1);
        }
    }
}

TEST_CASE("pair oracle stops a set at the first denial and stays exhausted") {
    auto c = rbtest::numbered(6);
    ConstantComparator cmp(1);
    BudgetLedger ledger(5);
    Rng rng(1);
    PairOracle o(c, cmp, OracleKind::bidirectional, ledger, rng);
    const std::vector<Match> set{{0, 1}, {2, 3}, {4, 5}};
    const auto w = o.resolve(set);
    CHECK(w.size() == 2);
    CHECK(o.exhausted());
    CHECK(ledger.used() == 4);
    CHECK(o.round_trace() == std::vector<std::size_t>{4});
    CHECK(o.resolve(set).empty());
    CHECK_FALSE(o.winner(0, 1).has_value());
    CHECK(cmp.calls == 4);
}

TEST_CASE("pair oracle records sum to ledger use") {
    auto c = rbtest::numbered(8);
    SlotBiasedComparator cmp(0.5);
    BudgetLedger ledger(37);
    Rng rng(9);
    PairOracle o(c, cmp, OracleKind::randomized, ledger, rng);
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j)
            if (i != j) o.winner(i, j);
    std::uint64_t sum = 0;
    for (const auto& r : o.records()) sum += static_cast<std::uint64_t>(r.calls_consumed);
    CHECK(sum == ledger.used());
    CHECK(o.calls_charged() == ledger.used());
    for (std::size_t k = 1; k < o.records().size(); ++k) CHECK(o.records()[k].seq > o.records()[k - 1].seq);
}

TEST_CASE("cache hits are free unless charging is requested") {
    auto c = rbtest::numbered(3);
    for (bool charge : {false, true}) {
        CachingComparator cmp;
        BudgetLedger ledger(100);
        Rng rng(1);
        PairOracle o(c, cmp, OracleKind::bidirectional, ledger, rng, {charge, 1});
        o.winner(0, 1);  // (d000, d001) cached, (d001, d000) not
        CHECK(cmp.network == 1);
        CHECK(ledger.used() == (charge ? 2u : 1u));
        CHECK(o.records()[0].calls_consumed == (charge ? 1 : 0));
        CHECK(o.records()[1].calls_consumed == 1);
    }
}

TEST_CASE("parallel resolution matches sequential resolution") {
    auto c = rbtest::numbered(20);
    std::vector<double> s(20);
    for (std::size_t i = 0; i < 20; ++i) s[i] = static_cast<double>((i * 7) % 20);
    ScoreComparator cmp(rbtest::score_map(c, s));
    std::vector<Match> set;
    for (std::size_t i = 0; i + 1 < 20; i += 2) set.push_back({i, i + 1});
    std::vector<std::size_t> seq, par;
    for (std::size_t conc : {std::size_t{1}, std::size_t{4}}) {
        BudgetLedger ledger(15);
        Rng rng(3);
        PairOracle o(c, cmp, OracleKind::bidirectional, ledger, rng, {false, conc});
        (conc == 1 ? seq : par) = o.resolve(set);
        CHECK(ledger.used() == 14);
        CHECK(o.exhausted());
    }
    CHECK(seq == par);
}

TEST_CASE("observer fires once per resolved outcome") {
    auto c = rbtest::numbered(5);
    ConstantComparator cmp(0);
    BudgetLedger ledger(100);
    Rng rng(1);
    PairOracle o(c, cmp, OracleKind::randomized, ledger, rng);
    int fired = 0;
    o.set_observer([&] { ++fired; });
    const std::vector<Match> set{{0, 1}, {2, 3}};
    o.resolve(set);
    o.winner(1, 4);
    CHECK(fired == 3);
    CHECK(o.outcomes() == 3);
}
