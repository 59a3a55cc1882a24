// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rankbudget Authors

#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace rankbudget;

TEST_CASE("bootstrap of constant values has zero width") {
    const std::vector<double> v(8, 0.6);
    Rng rng(1);
    const auto r = bootstrap_ci(v, 10000, 0.95, rng);
    CHECK(r.ci_half_width == 0.0);
    CHECK(r.mean == Catch::Approx(0.6));
    CHECK(r.resamples == 10000);
}

TEST_CASE("bootstrap of {0, 1} has half width near one half") {
    const std::vector<double> v{0.0, 1.0};
    Rng rng(2);
    const auto r = bootstrap_ci(v, 10000, 0.95, rng);
    CHECK(std::abs(r.ci_half_width - 0.5) <= 0.05);
    CHECK(r.lower <= r.mean);
    CHECK(r.upper >= r.mean);
}

TEST_CASE("bootstrap input validation") {
    Rng rng(1);
    CHECK_THROWS_AS(bootstrap_ci(std::vector<double>{1.0}, 100, 0.95, rng), InsufficientData);
    CHECK_THROWS_AS(bootstrap_ci(std::vector<double>{1.0, 2.0}, 0, 0.95, rng), std::invalid_argument);
    CHECK_THROWS_AS(bootstrap_ci(std::vector<double>{1.0, 2.0}, 10, 1.0, rng), std::invalid_argument);
}

TEST_CASE("bootstrap is permutation invariant") {
    Rng data(5);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> v(12);
        for (auto& x : v) x = data.uniform();
        auto w = v;
        std::reverse(w.begin(), w.end());
        std::swap(w[0], w[5]);
        Rng r3(10), r4(11);
        CHECK(bootstrap_ci(v, 20000, 0.95, r3).ci_half_width ==
              Catch::Approx(bootstrap_ci(w, 20000, 0.95, r4).ci_half_width).epsilon(0.08));
    }
}

TEST_CASE("paired test examples") {
    Rng data(3);
    std::vector<double> b(50);
    for (auto& x : b) x = data.uniform();
    Rng rng(1);
    const auto same = paired_bootstrap_test(b, b, 10000, 0.05, rng);
    CHECK(same.mean_delta == 0.0);
    CHECK_FALSE(same.significant);
    CHECK(same.p_value == 1.0);

    auto a = b;
    for (auto& x : a) x += 0.1;
    const auto shifted = paired_bootstrap_test(a, b, 10000, 0.05, rng);
    CHECK(shifted.significant);
    CHECK(shifted.p_value == Catch::Approx(1.0 / 10000));
    CHECK(shifted.mean_delta == Catch::Approx(0.1));

    CHECK_THROWS_AS(paired_bootstrap_test(a, std::vector<double>(49, 0.0), 100, 0.05, rng), MisalignedInput);
    CHECK_THROWS_AS(paired_bootstrap_test(std::vector<double>{1.0}, std::vector<double>{1.0}, 100, 0.05, rng),
                    InsufficientData);
}

TEST_CASE("paired test is antisymmetric") {
    Rng data(4);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> a(30), b(30);
        for (std::size_t i = 0; i < 30; ++i) {
            a[i] = data.uniform();
            b[i] = a[i] + 0.05 * data.normal();
        }
        Rng r1(77), r2(77);
        const auto ab = paired_bootstrap_test(a, b, 2000, 0.05, r1);
        const auto ba = paired_bootstrap_test(b, a, 2000, 0.05, r2);
        CHECK(ab.mean_delta == Catch::Approx(-ba.mean_delta));
        CHECK(ab.p_value == ba.p_value);
        CHECK(ab.significant == (ab.p_value < ab.alpha));
    }
}

TEST_CASE("paired test null rejection rate is near alpha") {
    Rng data(6);
    int rejections = 0;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> a(40), b(40);
        for (std::size_t i = 0; i < 40; ++i) {
            const double base = data.uniform();
            a[i] = base + 0.1 * data.normal();
            b[i] = base + 0.1 * data.normal();
        }
        Rng rng(derive_seed(1, std::to_string(trial)));
        rejections += paired_bootstrap_test(a, b, 2000, 0.05, rng).significant;
    }
    const double rate = rejections / 200.0;
    CHECK(rate >= 0.01);
    CHECK(rate <= 0.10);
}

TEST_CASE("significance cells") {
    CHECK(significance_cell({0.097, 0.001, true, 0.05, 10000}) == "↑ (+9.7)");
    CHECK(significance_cell({-0.192, 0.001, true, 0.05, 10000}) == "↓ (-19.2)");
    CHECK(significance_cell({-0.012, 0.4, false, 0.05, 10000}) == "= (-1.2)");
}

TEST_CASE("percentile interpolation") {
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    CHECK(percentile_sorted(v, 0.0) == 1.0);
    CHECK(percentile_sorted(v, 1.0) == 4.0);
    CHECK(percentile_sorted(v, 0.5) == Catch::Approx(2.5));
    CHECK_THROWS_AS(percentile_sorted(std::vector<double>{}, 0.5), InsufficientData);
}
