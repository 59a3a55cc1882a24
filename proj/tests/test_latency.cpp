// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rankbudget Authors

#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace rankbudget;

TEST_CASE("sequential estimates") {
    CHECK(sequential_estimate(0, 0.1).sequential_seconds == 0.0);
    const auto m = sequential_estimate(233, 0.1);
    CHECK(m.sequential_seconds == 23.3);
    CHECK(m.rounds == 233);
    CHECK(m.batch_size == 1);
    CHECK(sequential_estimate(101, 0.1).sequential_seconds == Catch::Approx(10.1));
    CHECK_THROWS_AS(sequential_estimate(10, 0.0), std::invalid_argument);
}

TEST_CASE("round counting") {
    const std::vector<std::size_t> one{11};
    CHECK(round_count(one, 10) == 2);
    const std::vector<std::size_t> sets(35, 10);
    CHECK(round_count(sets, 10) == 35);
    CHECK(round_count(sets, 1) == 350);
    CHECK(round_count(std::vector<std::size_t>{}, 10) == 0);
    CHECK_THROWS_AS(round_count(one, 0), std::invalid_argument);
}

TEST_CASE("rounds are non-increasing in batch size and bounded by calls") {
    Rng rng(2);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<std::size_t> trace(1 + rng.below(40));
        std::uint64_t calls = 0;
        for (auto& t : trace) calls += (t = 1 + rng.below(60));
        std::uint64_t prev = round_count(trace, 1);
        CHECK(prev == calls);
        for (std::uint64_t b = 2; b <= 70; ++b) {
            const auto r = round_count(trace, b);
            CHECK(r <= prev);
            prev = r;
        }
        CHECK(round_count(trace, 1'000'000) == trace.size());
        const auto e = batched_estimate(trace, 0.2, 10);
        CHECK(e.total_calls == calls);
        CHECK(e.rounds <= e.total_calls);
        CHECK(e.sequential_seconds == Catch::Approx(0.2 * static_cast<double>(calls)));
    }
}
