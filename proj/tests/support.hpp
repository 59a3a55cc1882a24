// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rankbudget Authors

#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include "rankbudget/rankbudget.hpp"

namespace rbtest {

using namespace rankbudget;

inline std::string doc_name(std::size_t i) { return "d" + zero_pad(i, 3); }

/// Documents d000..d{n-1}; prior order = document order unless `prior` is given.
inline CandidateSet numbered(std::size_t n, const std::string& qid = "q1",
                             const std::vector<std::size_t>& prior = {}) {
    std::vector<Document> docs;
    for (std::size_t i = 0; i < n; ++i) docs.push_back({DocId(doc_name(i)), "passage " + std::to_string(i)});
    auto c = make_candidate_set(qid, "query " + qid, std::move(docs));
    if (!prior.empty()) {
        c.prior_order = prior;
        c.validate();
    }
    return c;
}

inline std::vector<std::size_t> shuffled(std::size_t n, Rng& rng) {
    std::vector<std::size_t> v(n);
    std::iota(v.begin(), v.end(), 0);
    for (std::size_t i = n; i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
    return v;
}

/// Scores indexed by document position.
inline std::unordered_map<std::string, double> score_map(const CandidateSet& c, const std::vector<double>& s) {
    std::unordered_map<std::string, double> m;
    for (std::size_t i = 0; i < c.size(); ++i) m[c.docs[i].id.str()] = s[i];
    return m;
}

/// Reference: full sort by score desc, ties by DocId asc, first k.
inline std::vector<DocId> brute_topk(const CandidateSet& c, const std::vector<double>& s, std::size_t k) {
    std::vector<std::size_t> idx(c.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (s[a] != s[b]) return s[a] > s[b];
        return c.docs[a].id < c.docs[b].id;
    });
    std::vector<DocId> out;
    for (std::size_t i = 0; i < std::min(k, idx.size()); ++i) out.push_back(c.docs[idx[i]].id);
    return out;
}

struct Run {
    RankedPrefix prefix;
    std::uint64_t used = 0;
    std::uint64_t outcomes = 0;
    std::vector<ComparisonRecord> records;
    std::vector<std::size_t> trace;
};

inline Run run_with(SchedulerKind kind, const CandidateSet& c, DirectionalComparator& cmp, std::size_t k,
                    OracleKind oracle = OracleKind::randomized, std::uint64_t budget = 1'000'000,
                    std::uint64_t seed = 7, std::size_t m = 3) {
    BudgetLedger ledger(budget);
    Rng rng(derive_seed(seed, c.query_id));
    PairOracle o(c, cmp, oracle, ledger, rng);
    auto s = make_scheduler(kind, c, k, m);
    Run r;
    r.prefix = s->run(o);
    r.used = ledger.used();
    r.outcomes = o.outcomes();
    r.records = o.records();
    r.trace = o.round_trace();
    return r;
}

/// Comparator whose answer depends only on presentation slot.
class ConstantComparator final : public DirectionalComparator {
public:
    explicit ConstantComparator(int bit) : bit_(bit) {}
    int compare(const ComparisonRequest&, Rng&) override {
        ++calls;
        return bit_;
    }
    bool uses_rng() const override { return false; }
    std::string descriptor() const override { return "constant(" + std::to_string(bit_) + ")"; }
    int calls = 0;

private:
    int bit_;
};

/// First slot wins with a fixed probability regardless of content.
class SlotBiasedComparator final : public DirectionalComparator {
public:
    explicit SlotBiasedComparator(double p_first) : p_(p_first) {}
    int compare(const ComparisonRequest&, Rng& rng) override { return rng.uniform() < p_ ? 1 : 0; }
    std::string descriptor() const override { return "slot-biased"; }

private:
    double p_;
};

}  // namespace rbtest
