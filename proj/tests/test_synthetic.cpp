// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rankbudget Authors

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "support.hpp"

using namespace rankbudget;

TEST_CASE("btl comparator draws with the logistic probability") {
    BtlWorld w;
    w.scores = {{"a", 1.0}, {"b", 0.0}};
    w.position_bias = 0.5;
    Rng rng(1);
    const int n = 200000;
    int ones = 0;
    for (int i = 0; i < n; ++i) ones += btl_compare(w, DocId("a"), DocId("b"), rng);
    CHECK(static_cast<double>(ones) / n == Catch::Approx(sigmoid(1.5)).margin(0.005));
    ones = 0;
    for (int i = 0; i < n; ++i) ones += btl_compare(w, DocId("b"), DocId("a"), rng);
    CHECK(static_cast<double>(ones) / n == Catch::Approx(sigmoid(-0.5)).margin(0.005));
    CHECK_THROWS_AS(btl_compare(w, DocId("a"), DocId("zz"), rng), UnknownDoc);
}

TEST_CASE("btl flip rate matches its closed form") {
    // Flip when both orders give the same bit: p*q + (1-p)*(1-q).
    BtlWorld w;
    w.scores = {{"a", 0.7}, {"b", 0.0}};
    w.position_bias = 1.0;
    const double p = sigmoid(0.7 + 1.0), q = sigmoid(-0.7 + 1.0);
    const double expected = p * q + (1 - p) * (1 - q);
    std::vector<std::pair<DocId, DocId>> pairs(100000, {DocId("a"), DocId("b")});
    Rng rng(2);
    CHECK(flip_rate_of_world(w, pairs, rng) == Catch::Approx(expected).margin(0.005));
    CHECK_THROWS_AS(flip_rate_of_world(w, std::span<const std::pair<DocId, DocId>>{}, rng), std::invalid_argument);
}

TEST_CASE("randomized invocation of a biased btl world has no reciprocity gap") {
    BtlWorld w;
    w.scores = {{"d000", 0.3}, {"d001", -0.2}};
    w.position_bias = 1.5;
    BtlComparator cmp(w);
    const auto c = rbtest::numbered(2);
    Rng rng(5);
    const double gap = estimate_reciprocity_gap(cmp, {"q1", "q"}, c.docs[0], c.docs[1], 40000, rng);
    CHECK(gap < 0.015);
}

TEST_CASE("score comparator is transitive with DocId tie-break") {
    ScoreComparator cmp({{"d000", 1.0}, {"d001", 1.0}, {"d002", 2.0}});
    const auto c = rbtest::numbered(3);
    Rng rng(1);
    CHECK(cmp.compare({{"q1", "q"}, c.docs[2], c.docs[0]}, rng) == 1);
    CHECK(cmp.compare({{"q1", "q"}, c.docs[0], c.docs[2]}, rng) == 0);
    CHECK(cmp.compare({{"q1", "q"}, c.docs[0], c.docs[1]}, rng) == 1);
    CHECK(cmp.compare({{"q1", "q"}, c.docs[1], c.docs[0]}, rng) == 0);
    CHECK_FALSE(cmp.uses_rng());
}

TEST_CASE("bucket grades follow score quantiles") {
    std::vector<std::pair<DocId, double>> scored;
    for (int i = 0; i < 20; ++i) scored.emplace_back(DocId(rbtest::doc_name(static_cast<std::size_t>(i))), -i);
    const auto g = bucket_grades(scored);
    const std::vector<int> want{3, 3, 2, 2, 2, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0};
    CHECK(g == want);
}

TEST_CASE("scenario generation is deterministic and well formed") {
    ScenarioParams p;
    p.queries = 5;
    p.docs_per_query = 30;
    const auto a = make_scenario(p), b = make_scenario(p);
    REQUIRE(a.candidates.size() == 5);
    for (std::size_t q = 0; q < 5; ++q) {
        const auto& c = a.candidates[q];
        CHECK_NOTHROW(c.validate());
        CHECK(c.size() == 30);
        CHECK(c.dataset == "synthetic");
        for (std::size_t d = 0; d < c.size(); ++d) {
            CHECK(c.docs[d].id == b.candidates[q].docs[d].id);
            CHECK(a.world.score(c.docs[d].id) == b.world.score(c.docs[d].id));
        }
        CHECK(a.qrels.judged(c.query_id).size() == 30);
    }
    p.seed += 1;
    const auto other = make_scenario(p);
    CHECK(other.candidates[0].docs[0].id != a.candidates[0].docs[0].id);
    p.queries = 0;
    CHECK_THROWS_AS(make_scenario(p), ConfigError);
}

TEST_CASE("default scenario reaches the target flip rate") {
    const auto sc = make_scenario(ScenarioParams{});
    std::vector<std::pair<DocId, DocId>> pairs;
    for (std::size_t q = 0; q < 40; ++q) {
        const auto& c = sc.candidates[q];
        for (std::size_t i = 0; i < c.size(); ++i)
            for (std::size_t j = i + 1; j < c.size(); ++j) pairs.emplace_back(c.docs[i].id, c.docs[j].id);
    }
    Rng rng(77);
    CHECK(std::abs(flip_rate_of_world(sc.world, pairs, rng) - 0.206) <= 0.015);
}

TEST_CASE("world json round-trips through a file") {
    BtlWorld w;
    w.scores = {{"x", 1.25}, {"y", -0.5}};
    w.position_bias = 0.75;
    w.seed = 9;
    const auto dir = std::filesystem::temp_directory_path() / "rankbudget_world_test";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "world.json").string();
    std::ofstream(path) << world_to_json(w).dump(2);
    const auto r = load_world(path);
    CHECK(r.scores == w.scores);
    CHECK(r.position_bias == 0.75);
    CHECK(r.seed == 9);
    std::ofstream(path) << "{not json";
    CHECK_THROWS_AS(load_world(path), ParseError);
    CHECK_THROWS_AS(load_world((dir / "missing.json").string()), IoError);
    CHECK_THROWS_AS(world_from_json(nlohmann::json{{"seed", 1}}), ParseError);
}

TEST_CASE("scenario params parse from json") {
    const auto p = scenario_from_json({{"queries", 3}, {"docs_per_query", 12}, {"score_scale", 2.0}});
    CHECK(p.queries == 3);
    CHECK(p.docs_per_query == 12);
    CHECK(p.score_scale == 2.0);
    CHECK(p.prior_noise == ScenarioParams{}.prior_noise);
    CHECK_THROWS_AS(scenario_from_json({{"queries", "many"}}), ConfigError);
}
