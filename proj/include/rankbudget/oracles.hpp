// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rankbudget Authors

#pragma once

#include <cstdint>
#include <functional>
#include <future>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rankbudget/core.hpp"

namespace rankbudget {

struct QueryRef {
    std::string_view id;
    std::string_view text;
};

/// Inputs of one directional call: is `first` preferred over `second` for the query?
struct ComparisonRequest {
    QueryRef query;
    const Document& first;
    const Document& second;
};

/// A single-call comparator with constrained output: compare() returns 1 when the
/// document presented first is preferred, else 0.
class DirectionalComparator {
public:
    virtual ~DirectionalComparator() = default;

    virtual int compare(const ComparisonRequest& request, Rng& rng) = 0;

    /// Bit already known without a model call, if any (outcome caches).
    virtual std::optional<int> cached(const ComparisonRequest&) const { return std::nullopt; }

    /// Whether compare() draws from the rng. Comparators that do not may be
    /// invoked concurrently within a round.
    virtual bool uses_rng() const { return true; }
    virtual bool thread_safe() const { return false; }

    virtual std::string descriptor() const = 0;
};

/// Everything an oracle invocation touches. One session per (query, run).
struct OracleSession {
    DirectionalComparator& comparator;
    BudgetLedger& ledger;
    Rng& rng;
    QueryRef query;
    /// When false, comparator cache hits are served without charging the ledger.
    bool charge_cache_hits = false;
    std::uint64_t next_seq = 0;
};

struct PairOutcome {
    DocId winner;
    std::vector<ComparisonRecord> records;
    int calls = 0;
};

namespace detail {

struct PlannedCall {
    const Document* first = nullptr;
    const Document* second = nullptr;
    bool swapped = false;
    std::optional<int> hit;
    int bit = 0;
};

struct PlannedInvocation {
    OracleKind kind;
    const Document* di = nullptr;
    const Document* dj = nullptr;
    PlannedCall calls[2];
    int n_calls = 0;
    int cost = 0;
};

inline int checked_bit(int bit, const DirectionalComparator& cmp) {
    if (bit != 0 && bit != 1)
        throw ComparatorFailure(cmp.descriptor() + " returned " + std::to_string(bit) +
                                " (expected 0 or 1)");
    return bit;
}

/// Draws the direction (randomized kind) and prices the invocation. Does not touch the ledger.
inline PlannedInvocation plan(OracleSession& s, OracleKind kind, const Document& di,
                              const Document& dj) {
    PlannedInvocation p{kind, &di, &dj, {}, 0, 0};
    if (kind == OracleKind::bidirectional) {
        p.calls[0] = {&di, &dj, false, {}, 0};
        p.calls[1] = {&dj, &di, true, {}, 0};
        p.n_calls = 2;
    } else {
        const bool swapped = s.rng.coin();
        p.calls[0] = swapped ? PlannedCall{&dj, &di, true, {}, 0} : PlannedCall{&di, &dj, false, {}, 0};
        p.n_calls = 1;
    }
    for (int c = 0; c < p.n_calls; ++c) {
        auto& call = p.calls[c];
        call.hit = s.comparator.cached({s.query, *call.first, *call.second});
        p.cost += (call.hit && !s.charge_cache_hits) ? 0 : 1;
    }
    return p;
}

inline void execute(OracleSession& s, PlannedInvocation& p) {
    for (int c = 0; c < p.n_calls; ++c) {
        auto& call = p.calls[c];
        call.bit = call.hit ? *call.hit
                            : checked_bit(s.comparator.compare({s.query, *call.first, *call.second}, s.rng),
                                          s.comparator);
    }
}

inline PairOutcome finalize(OracleSession& s, const PlannedInvocation& p) {
    bool i_wins;
    if (p.kind == OracleKind::bidirectional) {
        // V_ij = 1 iff LLM(d_i, d_j) = 1 and LLM(d_j, d_i) = 0; every other case goes to d_j.
        i_wins = p.calls[0].bit == 1 && p.calls[1].bit == 0;
    } else {
        const auto& call = p.calls[0];
        i_wins = call.swapped ? call.bit == 0 : call.bit == 1;
    }
    PairOutcome out{i_wins ? p.di->id : p.dj->id, {}, p.cost};
    out.records.reserve(p.n_calls);
    for (int c = 0; c < p.n_calls; ++c) {
        const auto& call = p.calls[c];
        ComparisonRecord r;
        r.query_id = std::string(s.query.id);
        r.first = call.first->id;
        r.second = call.second->id;
        r.direction_swapped = call.swapped;
        r.raw_bit = call.bit;
        r.oracle_kind = p.kind;
        r.winner = out.winner;
        r.calls_consumed = (call.hit && !s.charge_cache_hits) ? 0 : 1;
        r.seq = s.next_seq++;
        out.records.push_back(std::move(r));
    }
    return out;
}

inline PairOutcome invoke(OracleSession& s, OracleKind kind, const Document& di, const Document& dj) {
    if (di.id == dj.id) throw std::invalid_argument("oracle invoked on identical documents");
    auto p = plan(s, kind, di, dj);
    if (!s.ledger.try_consume(static_cast<std::uint64_t>(p.cost))) throw BudgetExhausted();
    execute(s, p);
    return finalize(s, p);
}

}  // namespace detail

/// Two calls, one per presentation order. d_i wins only if both directions agree on it.
inline PairOutcome bidirectional_outcome(OracleSession& session, const Document& di,
                                         const Document& dj) {
    return detail::invoke(session, OracleKind::bidirectional, di, dj);
}

/// One call with the presentation order drawn uniformly from the session rng.
inline PairOutcome randomized_outcome(OracleSession& session, const Document& di,
                                      const Document& dj) {
    return detail::invoke(session, OracleKind::randomized, di, dj);
}

inline PairOutcome pair_outcome(OracleSession& session, OracleKind kind, const Document& di,
                                const Document& dj) {
    return detail::invoke(session, kind, di, dj);
}

/// |P[V_ij = 1] + P[V_ji = 1] - 1| estimated from `trials` unmetered randomized
/// invocations in each orientation.
inline double estimate_reciprocity_gap(DirectionalComparator& cmp, QueryRef query,
                                       const Document& di, const Document& dj,
                                       std::size_t trials, Rng& rng) {
    if (trials == 0) throw std::invalid_argument("trials must be >= 1");
    auto ledger = BudgetLedger::unlimited();
    OracleSession session{cmp, ledger, rng, query, true, 0};
    std::size_t ij = 0, ji = 0;
    for (std::size_t t = 0; t < trials; ++t)
        if (randomized_outcome(session, di, dj).winner == di.id) ++ij;
    for (std::size_t t = 0; t < trials; ++t)
        if (randomized_outcome(session, dj, di).winner == dj.id) ++ji;
    const double n = static_cast<double>(trials);
    return std::abs(static_cast<double>(ij) / n + static_cast<double>(ji) / n - 1.0);
}

// ---------------------------------------------------------------------------
// Scheduler-facing executor
// ---------------------------------------------------------------------------

/// A pair of candidate indices to be judged: is `first` better than `second`?
struct Match {
    std::size_t first;
    std::size_t second;
};

struct OracleOptions {
    bool charge_cache_hits = false;
    /// Maximum comparator calls in flight while resolving one set of independent
    /// matches. Only honored for thread-safe comparators that do not use the rng.
    std::size_t concurrency = 1;
};

/// Binds a comparator, oracle kind, ledger and rng to one query's candidates.
/// Schedulers hand it sets of mutually independent matches; it resolves a set
/// in order and stops at the first budget denial. After a denial the oracle is
/// exhausted and resolves nothing further.
class PairOracle {
public:
    PairOracle(const CandidateSet& candidates, DirectionalComparator& comparator, OracleKind kind,
               BudgetLedger& ledger, Rng& rng, OracleOptions options = {})
        : candidates_(candidates),
          kind_(kind),
          options_(options),
          session_{comparator, ledger, rng, {candidates.query_id, candidates.query_text},
                   options.charge_cache_hits, 0} {}

    PairOracle(const PairOracle&) = delete;
    PairOracle& operator=(const PairOracle&) = delete;

    /// Winners (candidate indices) for the resolved prefix of `set`.
    std::vector<std::size_t> resolve(std::span<const Match> set) {
        std::vector<std::size_t> winners;
        if (set.empty() || exhausted_) return winners;
        winners.reserve(set.size());
        const std::uint64_t calls_before = calls_;
        const bool parallel = options_.concurrency > 1 && set.size() > 1 &&
                              session_.comparator.thread_safe() && !session_.comparator.uses_rng();
        if (parallel)
            resolve_parallel(set, winners);
        else
            for (const auto& m : set) {
                auto w = resolve_one(m);
                if (!w) break;
                winners.push_back(*w);
            }
        if (calls_ > calls_before) trace_.push_back(static_cast<std::size_t>(calls_ - calls_before));
        return winners;
    }

    std::optional<std::size_t> winner(std::size_t i, std::size_t j) {
        const Match m{i, j};
        auto w = resolve(std::span<const Match>(&m, 1));
        if (w.empty()) return std::nullopt;
        return w.front();
    }

    bool exhausted() const noexcept { return exhausted_; }
    OracleKind kind() const noexcept { return kind_; }
    const CandidateSet& candidates() const noexcept { return candidates_; }
    const BudgetLedger& ledger() const noexcept { return session_.ledger; }

    const std::vector<ComparisonRecord>& records() const noexcept { return records_; }
    /// Charged calls of each resolved independent set, in execution order.
    const std::vector<std::size_t>& round_trace() const noexcept { return trace_; }
    std::uint64_t outcomes() const noexcept { return outcomes_; }
    std::uint64_t calls_charged() const noexcept { return calls_; }

    /// Invoked after every resolved outcome; lets callers read anytime snapshots.
    void set_observer(std::function<void()> observer) { observer_ = std::move(observer); }

private:
    std::optional<std::size_t> resolve_one(const Match& m) {
        try {
            auto out = detail::invoke(session_, kind_, candidates_.docs.at(m.first),
                                      candidates_.docs.at(m.second));
            return record(m, std::move(out));
        } catch (const BudgetExhausted&) {
            exhausted_ = true;
            return std::nullopt;
        }
    }

    void resolve_parallel(std::span<const Match> set, std::vector<std::size_t>& winners) {
        std::vector<detail::PlannedInvocation> planned;
        planned.reserve(set.size());
        for (const auto& m : set) {
            const auto& di = candidates_.docs.at(m.first);
            const auto& dj = candidates_.docs.at(m.second);
            if (di.id == dj.id) throw std::invalid_argument("oracle invoked on identical documents");
            auto p = detail::plan(session_, kind_, di, dj);
            if (!session_.ledger.try_consume(static_cast<std::uint64_t>(p.cost))) {
                exhausted_ = true;
                break;
            }
            planned.push_back(p);
        }
        const std::size_t width = options_.concurrency;
        for (std::size_t begin = 0; begin < planned.size(); begin += width) {
            const std::size_t end = std::min(planned.size(), begin + width);
            std::vector<std::future<void>> inflight;
            for (std::size_t k = begin; k < end; ++k)
                inflight.push_back(std::async(std::launch::async, [this, &planned, k] {
                    detail::execute(session_, planned[k]);
                }));
            for (auto& f : inflight) f.get();
        }
        for (std::size_t k = 0; k < planned.size(); ++k)
            winners.push_back(record(set[k], detail::finalize(session_, planned[k])));
    }

    std::size_t record(const Match& m, PairOutcome out) {
        calls_ += static_cast<std::uint64_t>(out.calls);
        ++outcomes_;
        for (auto& r : out.records) records_.push_back(std::move(r));
        const std::size_t w = out.winner == candidates_.docs[m.first].id ? m.first : m.second;
        if (observer_) observer_();
        return w;
    }

    const CandidateSet& candidates_;
    OracleKind kind_;
    OracleOptions options_;
    OracleSession session_;
    bool exhausted_ = false;
    std::vector<ComparisonRecord> records_;
    std::vector<std::size_t> trace_;
    std::uint64_t outcomes_ = 0;
    std::uint64_t calls_ = 0;
    std::function<void()> observer_;
};

}  // namespace rankbudget
