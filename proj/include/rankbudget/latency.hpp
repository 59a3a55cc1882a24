// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rankbudget Authors

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>

namespace rankbudget {

struct LatencyEstimate {
    std::uint64_t total_calls = 0;
    double per_call_seconds = 0.0;
    double sequential_seconds = 0.0;
    std::uint64_t rounds = 0;
    std::uint64_t batch_size = 1;
};

/// Upper bound ignoring parallelism: every call waits for the previous one.
inline LatencyEstimate sequential_estimate(std::uint64_t calls, double per_call_seconds) {
    if (!(per_call_seconds > 0.0)) throw std::invalid_argument("per-call seconds must be positive");
    return {calls, per_call_seconds, static_cast<double>(calls) * per_call_seconds, calls, 1};
}

/// Batched rounds for a trace of independent-set sizes: sum of ceil(|set| / batch).
inline std::uint64_t round_count(std::span<const std::size_t> trace, std::uint64_t batch_size) {
    if (batch_size == 0) throw std::invalid_argument("batch size must be >= 1");
    std::uint64_t rounds = 0;
    for (auto n : trace) rounds += (static_cast<std::uint64_t>(n) + batch_size - 1) / batch_size;
    return rounds;
}

inline LatencyEstimate batched_estimate(std::span<const std::size_t> trace, double per_call_seconds,
                                        std::uint64_t batch_size) {
    if (!(per_call_seconds > 0.0)) throw std::invalid_argument("per-call seconds must be positive");
    std::uint64_t calls = 0;
    for (auto n : trace) calls += n;
    const auto rounds = round_count(trace, batch_size);
    return {calls, per_call_seconds, static_cast<double>(calls) * per_call_seconds, rounds, batch_size};
}

}  // namespace rankbudget
