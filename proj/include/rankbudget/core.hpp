// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rankbudget Authors

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rankbudget {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The ledger refused an oracle invocation. No comparator call was made.
class BudgetExhausted : public Error {
public:
    BudgetExhausted() : Error("budget exhausted") {}
};

/// A comparator could not produce a bit (transport failure, unparseable answer, ...).
class ComparatorFailure : public Error {
public:
    explicit ComparatorFailure(const std::string& what, std::string raw = {})
        : Error(what), raw_(std::move(raw)) {}
    /// Raw completion text when the failure was a parse failure.
    const std::string& raw() const noexcept { return raw_; }

private:
    std::string raw_;
};

class UnknownDoc : public Error {
public:
    explicit UnknownDoc(const std::string& id) : Error("unknown document: " + id) {}
};

class MissingQuery : public Error {
public:
    explicit MissingQuery(const std::string& q) : Error("no relevance judgments for query: " + q) {}
};

class UnpairedRecord : public Error {
public:
    using Error::Error;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

class MisalignedInput : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class DuplicateDoc : public Error {
public:
    DuplicateDoc(const std::string& query, const std::string& doc)
        : Error("duplicate document " + doc + " in query " + query) {}
};

// ---------------------------------------------------------------------------
// Random streams
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Stable stream derivation: the same (seed, key) gives the same stream on every platform.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view key) {
    return splitmix64(seed ^ splitmix64(fnv1a64(key)));
}

/// Seedable random stream. Variates are derived from mt19937_64 bits directly so
/// sequences do not depend on the standard library's distribution implementations.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool coin() { return (engine_() >> 63) != 0; }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = max() - (max() % n + 1) % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x > limit);
        return x % n;
    }

    /// Standard normal variate (Box-Muller, one value per call).
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

private:
    std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// Opaque document identifier, unique within a query's candidate set.
class DocId {
public:
    DocId() = default;
    explicit DocId(std::string value) : value_(std::move(value)) {
        if (value_.empty()) throw std::invalid_argument("DocId must be non-empty");
    }

    const std::string& str() const noexcept { return value_; }

    friend bool operator==(const DocId&, const DocId&) = default;
    friend auto operator<=>(const DocId&, const DocId&) = default;

private:
    std::string value_;
};

struct Document {
    DocId id;
    std::string text;
};

/// One query's candidates. prior_order[r] is the index into docs of the document
/// at prior rank r (rank 0 = best).
struct CandidateSet {
    std::string query_id;
    std::string query_text;
    std::vector<Document> docs;
    std::vector<std::size_t> prior_order;
    std::string dataset;  // optional label used to stratify reports

    std::size_t size() const noexcept { return docs.size(); }

    /// Inverse of prior_order: prior rank of each document index.
    std::vector<std::size_t> prior_ranks() const {
        std::vector<std::size_t> ranks(prior_order.size());
        for (std::size_t r = 0; r < prior_order.size(); ++r) ranks[prior_order[r]] = r;
        return ranks;
    }

    std::optional<std::size_t> index_of(const DocId& id) const {
        for (std::size_t i = 0; i < docs.size(); ++i)
            if (docs[i].id == id) return i;
        return std::nullopt;
    }

    void validate() const {
        if (docs.empty()) throw std::invalid_argument("candidate set " + query_id + " is empty");
        std::vector<const std::string*> ids;
        ids.reserve(docs.size());
        for (const auto& d : docs) {
            if (d.id.str().empty()) throw std::invalid_argument("empty DocId in " + query_id);
            ids.push_back(&d.id.str());
        }
        std::sort(ids.begin(), ids.end(), [](auto a, auto b) { return *a < *b; });
        for (std::size_t i = 1; i < ids.size(); ++i)
            if (*ids[i] == *ids[i - 1]) throw DuplicateDoc(query_id, *ids[i]);
        if (prior_order.size() != docs.size())
            throw std::invalid_argument("prior_order size mismatch in " + query_id);
        std::vector<bool> seen(docs.size(), false);
        for (auto idx : prior_order) {
            if (idx >= docs.size() || seen[idx])
                throw std::invalid_argument("prior_order is not a permutation in " + query_id);
            seen[idx] = true;
        }
    }
};

/// Builds a candidate set whose prior order is the given document order.
inline CandidateSet make_candidate_set(std::string query_id, std::string query_text,
                                       std::vector<Document> docs) {
    CandidateSet c{std::move(query_id), std::move(query_text), std::move(docs), {}, {}};
    c.prior_order.resize(c.docs.size());
    for (std::size_t i = 0; i < c.prior_order.size(); ++i) c.prior_order[i] = i;
    c.validate();
    return c;
}

/// Monotone counter of LLM calls against a hard cap. try_consume is linearizable
/// so a ledger may be shared by concurrent workers.
class BudgetLedger {
public:
    explicit BudgetLedger(std::uint64_t cap = 0, std::uint64_t used = 0) : cap_(cap), used_(used) {
        if (used > cap) throw std::invalid_argument("ledger used exceeds cap");
    }
    BudgetLedger(const BudgetLedger& other) : cap_(other.cap_), used_(other.used()) {}
    BudgetLedger& operator=(const BudgetLedger& other) {
        cap_ = other.cap_;
        used_.store(other.used(), std::memory_order_relaxed);
        return *this;
    }

    static BudgetLedger unlimited() {
        return BudgetLedger(std::numeric_limits<std::uint64_t>::max() / 2);
    }

    std::uint64_t cap() const noexcept { return cap_; }
    std::uint64_t used() const noexcept { return used_.load(std::memory_order_acquire); }
    std::uint64_t remaining() const noexcept { return cap_ - used(); }

    /// All-or-nothing: grants iff used + calls <= cap.
    bool try_consume(std::uint64_t calls) noexcept {
        std::uint64_t cur = used_.load(std::memory_order_acquire);
        do {
            if (calls > cap_ - cur) return false;
        } while (!used_.compare_exchange_weak(cur, cur + calls, std::memory_order_acq_rel,
                                              std::memory_order_acquire));
        return true;
    }

private:
    std::uint64_t cap_;
    std::atomic<std::uint64_t> used_;
};

struct ConsumeResult {
    bool granted;
    BudgetLedger ledger;
};

/// Value-semantics form of BudgetLedger::try_consume. calls must be 1 or 2.
inline ConsumeResult ledger_try_consume(const BudgetLedger& ledger, std::uint64_t calls) {
    if (calls != 1 && calls != 2) throw std::invalid_argument("calls must be 1 or 2");
    BudgetLedger next = ledger;
    const bool granted = next.try_consume(calls);
    return {granted, next};
}

enum class OracleKind { bidirectional, randomized };

inline std::string_view to_string(OracleKind k) {
    return k == OracleKind::bidirectional ? "bidirectional" : "randomized";
}

inline OracleKind parse_oracle_kind(std::string_view s) {
    if (s == "bidirectional") return OracleKind::bidirectional;
    if (s == "randomized") return OracleKind::randomized;
    throw ConfigError("unknown oracle: " + std::string(s));
}

/// One directional LLM invocation. A bidirectional pair outcome emits two records.
struct ComparisonRecord {
    std::string query_id;
    DocId first;                    // as presented to the comparator
    DocId second;
    bool direction_swapped = false; // presented order differs from the oracle's (d_i, d_j)
    int raw_bit = 0;                // 1 = first presented document preferred
    OracleKind oracle_kind = OracleKind::randomized;
    std::optional<DocId> winner;
    int calls_consumed = 1;         // 0 only for a cache hit under cache-as-free accounting
    std::uint64_t seq = 0;
};

/// Ordered top-K output with an anytime convergence flag.
struct RankedPrefix {
    std::string query_id;
    std::vector<DocId> items;
    bool converged = false;
    std::uint64_t calls_used = 0;
};

/// Graded judgments keyed by (query, document). Missing pairs read as grade 0.
class QrelSet {
public:
    void set(const std::string& query_id, const std::string& doc_id, int grade) {
        if (grade < 0) throw std::invalid_argument("relevance grade must be non-negative");
        judgments_[query_id][doc_id] = grade;
    }

    bool has_query(const std::string& query_id) const { return judgments_.count(query_id) != 0; }

    int grade(const std::string& query_id, const std::string& doc_id) const {
        auto q = judgments_.find(query_id);
        if (q == judgments_.end()) return 0;
        auto d = q->second.find(doc_id);
        return d == q->second.end() ? 0 : d->second;
    }

    /// All judgments for a query; throws MissingQuery if the query was never judged.
    const std::map<std::string, int>& judged(const std::string& query_id) const {
        auto q = judgments_.find(query_id);
        if (q == judgments_.end()) throw MissingQuery(query_id);
        return q->second;
    }

    const std::map<std::string, std::map<std::string, int>>& all() const { return judgments_; }

private:
    std::map<std::string, std::map<std::string, int>> judgments_;
};

}  // namespace rankbudget
