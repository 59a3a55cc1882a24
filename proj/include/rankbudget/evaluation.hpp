// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rankbudget Authors

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "rankbudget/core.hpp"

namespace rankbudget {

struct EvalResult {
    std::string query_id;
    std::size_t k = 0;
    double ndcg = 0.0;
    double dcg = 0.0;
    double idcg = 0.0;
};

inline double gain(int grade) { return std::exp2(static_cast<double>(grade)) - 1.0; }
inline double discount(std::size_t rank) { return 1.0 / std::log2(static_cast<double>(rank) + 1.0); }

/// NDCG@k with exponential gain. The ideal ranking is drawn from every judged
/// document of the query; unjudged retrieved documents count as grade 0.
inline EvalResult ndcg_at_k(const RankedPrefix& prefix, const QrelSet& qrels, std::size_t k) {
    if (k == 0) throw std::invalid_argument("k must be >= 1");
    const auto& judged = qrels.judged(prefix.query_id);
    EvalResult r{prefix.query_id, k, 0.0, 0.0, 0.0};
    const std::size_t depth = std::min(k, prefix.items.size());
    for (std::size_t i = 0; i < depth; ++i) {
        auto it = judged.find(prefix.items[i].str());
        r.dcg += gain(it == judged.end() ? 0 : it->second) * discount(i + 1);
    }
    std::vector<int> grades;
    grades.reserve(judged.size());
    for (const auto& [doc, g] : judged) grades.push_back(g);
    std::sort(grades.begin(), grades.end(), std::greater<>());
    for (std::size_t i = 0; i < std::min(k, grades.size()); ++i) r.idcg += gain(grades[i]) * discount(i + 1);
    r.ndcg = r.idcg > 0.0 ? r.dcg / r.idcg : 0.0;
    return r;
}

// ---------------------------------------------------------------------------
// TREC files
// ---------------------------------------------------------------------------

/// Reads "query_id iteration doc_id grade" lines. Blank lines and lines starting
/// with '#' are skipped.
inline QrelSet parse_qrels(std::istream& in) {
    QrelSet q;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream fields(line);
        std::string qid, iter, doc, grade_text, extra;
        if (!(fields >> qid >> iter >> doc >> grade_text) || (fields >> extra))
            throw ParseError("qrels: expected 4 fields", lineno);
        std::size_t used = 0;
        int grade = 0;
        try {
            grade = std::stoi(grade_text, &used);
        } catch (const std::exception&) {
            throw ParseError("qrels: invalid grade '" + grade_text + "'", lineno);
        }
        if (used != grade_text.size()) throw ParseError("qrels: invalid grade '" + grade_text + "'", lineno);
        // Negative grades mark judged non-relevant documents in some collections.
        q.set(qid, doc, std::max(grade, 0));
    }
    return q;
}

inline QrelSet load_qrels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open qrels file: " + path);
    return parse_qrels(in);
}

inline void write_qrels(std::ostream& out, const QrelSet& qrels) {
    for (const auto& [qid, docs] : qrels.all())
        for (const auto& [doc, g] : docs) out << qid << " 0 " << doc << ' ' << g << '\n';
}

/// Six-column run lines ranked 1..|items| with score k - rank + 1.
inline void write_trec_run(std::ostream& out, const RankedPrefix& prefix, std::size_t k, std::string_view tag) {
    for (std::size_t i = 0; i < prefix.items.size() && i < k; ++i)
        out << prefix.query_id << " Q0 " << prefix.items[i].str() << ' ' << (i + 1) << ' ' << (k - i) << ' '
            << tag << '\n';
}

// ---------------------------------------------------------------------------
// Flip analysis
// ---------------------------------------------------------------------------

struct FlipStratum {
    std::uint64_t pairs = 0;
    std::uint64_t flips = 0;
    double rate() const { return pairs ? static_cast<double>(flips) / static_cast<double>(pairs) : 0.0; }
};

struct FlipReport {
    FlipStratum overall;
    /// "rank 1-5", "rank 6-10", "rank 11-20", "rank >20", and "dataset <label>".
    std::map<std::string, FlipStratum> by_stratum;

    double overall_rate() const { return overall.rate(); }
};

inline constexpr std::string_view kRankBuckets[] = {"rank 1-5", "rank 6-10", "rank 11-20", "rank >20"};

inline std::string_view rank_bucket(std::size_t distance) {
    if (distance <= 5) return kRankBuckets[0];
    if (distance <= 10) return kRankBuckets[1];
    if (distance <= 20) return kRankBuckets[2];
    return kRankBuckets[3];
}

/// Pairs each unswapped bidirectional record with the next swapped record for
/// the same documents in reverse order. A flip is a pair whose two raw bits
/// agree, since equal bits name different winners.
inline FlipReport flip_analysis(std::span<const ComparisonRecord> records, std::span<const CandidateSet> candidates) {
    struct QueryInfo {
        std::map<std::string, std::size_t> rank;
        std::string dataset;
    };
    std::map<std::string, QueryInfo> info;
    for (const auto& c : candidates) {
        auto& qi = info[c.query_id];
        qi.dataset = c.dataset.empty() ? "default" : c.dataset;
        for (std::size_t r = 0; r < c.prior_order.size(); ++r) qi.rank[c.docs[c.prior_order[r]].id.str()] = r;
    }

    std::vector<const ComparisonRecord*> ordered;
    ordered.reserve(records.size());
    for (const auto& r : records) {
        if (r.oracle_kind != OracleKind::bidirectional)
            throw std::invalid_argument("flip analysis needs bidirectional records");
        ordered.push_back(&r);
    }
    std::stable_sort(ordered.begin(), ordered.end(), [](auto a, auto b) { return a->seq < b->seq; });

    FlipReport report;
    for (auto b : kRankBuckets) report.by_stratum[std::string(b)];
    using Key = std::tuple<std::string, std::string, std::string>;
    std::map<Key, std::deque<const ComparisonRecord*>> pending;
    for (const auto* r : ordered) {
        if (!r->direction_swapped) {
            pending[{r->query_id, r->first.str(), r->second.str()}].push_back(r);
            continue;
        }
        auto it = pending.find({r->query_id, r->second.str(), r->first.str()});
        if (it == pending.end() || it->second.empty())
            throw UnpairedRecord("reverse call without forward call: " + r->query_id + " " + r->first.str() + " " +
                                 r->second.str());
        const ComparisonRecord* a = it->second.front();
        it->second.pop_front();

        auto qi = info.find(r->query_id);
        if (qi == info.end()) throw MissingQuery(r->query_id);
        auto ra = qi->second.rank.find(a->first.str()), rb = qi->second.rank.find(a->second.str());
        if (ra == qi->second.rank.end()) throw UnknownDoc(a->first.str());
        if (rb == qi->second.rank.end()) throw UnknownDoc(a->second.str());
        const std::size_t dist = ra->second > rb->second ? ra->second - rb->second : rb->second - ra->second;
        const bool flip = a->raw_bit == r->raw_bit;
        for (FlipStratum* s : {&report.overall, &report.by_stratum[std::string(rank_bucket(dist))],
                               &report.by_stratum["dataset " + qi->second.dataset]}) {
            ++s->pairs;
            s->flips += flip ? 1 : 0;
        }
    }
    for (const auto& [key, queue] : pending)
        if (!queue.empty())
            throw UnpairedRecord("forward call without reverse call: " + std::get<0>(key) + " " + std::get<1>(key) +
                                 " " + std::get<2>(key));
    return report;
}

inline std::string format_fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

/// CSV stratum,pairs,flips,rate: "all" first, then rank buckets, then datasets.
inline void write_flip_csv(std::ostream& out, const FlipReport& report) {
    out << "stratum,pairs,flips,rate\n";
    const auto row = [&](std::string_view label, const FlipStratum& s) {
        out << label << ',' << s.pairs << ',' << s.flips << ',' << format_fixed(s.rate(), 6) << '\n';
    };
    row("all", report.overall);
    for (auto b : kRankBuckets) row(b, report.by_stratum.at(std::string(b)));
    for (const auto& [label, s] : report.by_stratum)
        if (label.rfind("dataset ", 0) == 0) row(label, s);
}

}  // namespace rankbudget
