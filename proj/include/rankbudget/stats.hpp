// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rankbudget Authors

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "rankbudget/core.hpp"

namespace rankbudget {

struct BootstrapResult {
    double mean = 0.0;
    double ci_half_width = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double level = 0.95;
    std::size_t resamples = 10000;
};

struct PairedTestResult {
    double mean_delta = 0.0;
    double p_value = 1.0;
    bool significant = false;
    double alpha = 0.05;
    std::size_t resamples = 10000;
};

inline double mean_of(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Linear interpolation between order statistics (sorted input, p in [0, 1]).
inline double percentile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw InsufficientData("percentile of empty sample");
    const double h = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

namespace detail {

inline std::vector<double> resample_means(std::span<const double> v, std::size_t resamples, Rng& rng) {
    std::vector<double> means(resamples);
    const auto n = static_cast<std::uint64_t>(v.size());
    for (auto& m : means) {
        double s = 0.0;
        for (std::uint64_t i = 0; i < n; ++i) s += v[rng.below(n)];
        m = s / static_cast<double>(n);
    }
    return means;
}

}  // namespace detail

/// Percentile bootstrap of the mean.
inline BootstrapResult bootstrap_ci(std::span<const double> values, std::size_t resamples, double level, Rng& rng) {
    if (values.size() < 2) throw InsufficientData("bootstrap needs at least two values");
    if (resamples == 0) throw std::invalid_argument("resamples must be >= 1");
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must be in (0, 1)");
    auto means = detail::resample_means(values, resamples, rng);
    std::sort(means.begin(), means.end());
    BootstrapResult r;
    r.mean = mean_of(values);
    r.level = level;
    r.resamples = resamples;
    r.lower = percentile_sorted(means, (1.0 - level) / 2.0);
    r.upper = percentile_sorted(means, 1.0 - (1.0 - level) / 2.0);
    r.ci_half_width = std::max(0.0, (r.upper - r.lower) / 2.0);
    return r;
}

/// Paired bootstrap over aligned per-query scores; two-sided p from the sign
/// fractions of resampled mean deltas, clamped to [1/resamples, 1].
inline PairedTestResult paired_bootstrap_test(std::span<const double> a, std::span<const double> b,
                                              std::size_t resamples, double alpha, Rng& rng) {
    if (a.size() != b.size())
        throw MisalignedInput("paired test: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()) +
                              " values");
    if (a.size() < 2) throw InsufficientData("paired test needs at least two queries");
    if (resamples == 0) throw std::invalid_argument("resamples must be >= 1");
    std::vector<double> deltas(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) deltas[i] = a[i] - b[i];
    const auto means = detail::resample_means(deltas, resamples, rng);
    std::size_t le = 0, ge = 0;
    for (double m : means) {
        le += m <= 0.0 ? 1 : 0;
        ge += m >= 0.0 ? 1 : 0;
    }
    const double n = static_cast<double>(resamples);
    PairedTestResult r;
    r.mean_delta = mean_of(deltas);
    r.p_value = std::clamp(2.0 * static_cast<double>(std::min(le, ge)) / n, 1.0 / n, 1.0);
    r.alpha = alpha;
    r.resamples = resamples;
    r.significant = r.p_value < alpha;
    return r;
}

/// "↑ (+9.7)", "↓ (-19.2)" or "= (-1.2)"; delta shown in NDCG points.
inline std::string significance_cell(const PairedTestResult& r) {
    const char* arrow = !r.significant ? "=" : r.mean_delta > 0 ? "↑" : "↓";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s (%+.1f)", arrow, 100.0 * r.mean_delta);
    return buf;
}

}  // namespace rankbudget
