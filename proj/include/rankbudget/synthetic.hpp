// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rankbudget Authors

#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rankbudget/core.hpp"
#include "rankbudget/oracles.hpp"

namespace rankbudget {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Bradley-Terry-Luce preference world: Pr[first preferred] =
/// sigmoid(s_first - s_second + position_bias).
struct BtlWorld {
    std::unordered_map<std::string, double> scores;
    double position_bias = 0.0;
    std::uint64_t seed = 0;

    double score(const DocId& id) const {
        auto it = scores.find(id.str());
        if (it == scores.end()) throw UnknownDoc(id.str());
        return it->second;
    }
};

/// One Bernoulli draw; consumes exactly one rng variate.
inline int btl_compare(const BtlWorld& world, const DocId& first, const DocId& second, Rng& rng) {
    const double p = sigmoid(world.score(first) - world.score(second) + world.position_bias);
    return rng.uniform() < p ? 1 : 0;
}

class BtlComparator final : public DirectionalComparator {
public:
    explicit BtlComparator(const BtlWorld& world) : world_(world) {}

    int compare(const ComparisonRequest& r, Rng& rng) override {
        return btl_compare(world_, r.first.id, r.second.id, rng);
    }
    std::string descriptor() const override {
        return "btl(position_bias=" + std::to_string(world_.position_bias) + ")";
    }

private:
    const BtlWorld& world_;
};

/// Noiseless transitive comparator: higher score wins, equal scores go to the
/// smaller DocId. Never draws from the rng.
class ScoreComparator final : public DirectionalComparator {
public:
    explicit ScoreComparator(std::unordered_map<std::string, double> scores)
        : scores_(std::move(scores)) {}

    int compare(const ComparisonRequest& r, Rng&) override {
        const double a = at(r.first.id), b = at(r.second.id);
        if (a != b) return a > b ? 1 : 0;
        return r.first.id < r.second.id ? 1 : 0;
    }
    bool uses_rng() const override { return false; }
    bool thread_safe() const override { return true; }
    std::string descriptor() const override { return "noiseless"; }

private:
    double at(const DocId& id) const {
        auto it = scores_.find(id.str());
        if (it == scores_.end()) throw UnknownDoc(id.str());
        return it->second;
    }
    std::unordered_map<std::string, double> scores_;
};

/// Fraction of pairs whose two presentation orders name different winners.
inline double flip_rate_of_world(const BtlWorld& world, std::span<const std::pair<DocId, DocId>> pairs,
                                 Rng& rng) {
    if (pairs.empty()) throw std::invalid_argument("flip_rate_of_world: no pairs");
    std::size_t flips = 0;
    for (const auto& [a, b] : pairs) {
        const int forward = btl_compare(world, a, b, rng);   // 1 -> a wins
        const int backward = btl_compare(world, b, a, rng);  // 1 -> b wins
        if (forward == backward) ++flips;
    }
    return static_cast<double>(flips) / static_cast<double>(pairs.size());
}

// ---------------------------------------------------------------------------
// World files
// ---------------------------------------------------------------------------

inline BtlWorld world_from_json(const nlohmann::json& j) {
    BtlWorld w;
    try {
        w.seed = j.value("seed", std::uint64_t{0});
        w.position_bias = j.value("position_bias", 0.0);
        for (const auto& [id, s] : j.at("scores").items()) w.scores[id] = s.get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid world spec: ") + e.what(), 0);
    }
    return w;
}

inline nlohmann::json world_to_json(const BtlWorld& w) {
    nlohmann::json scores = nlohmann::json::object();
    std::vector<std::pair<std::string, double>> sorted(w.scores.begin(), w.scores.end());
    std::sort(sorted.begin(), sorted.end());
    for (const auto& [id, s] : sorted) scores[id] = s;
    return {{"seed", w.seed}, {"position_bias", w.position_bias}, {"scores", scores}};
}

inline BtlWorld load_world(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open world file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what(), 0);
    }
    return world_from_json(j);
}

// ---------------------------------------------------------------------------
// Synthetic scenarios
// ---------------------------------------------------------------------------

/// Graded labels from latent scores: top 10% -> 3, next 15% -> 2, next 25% -> 1,
/// rest 0. Equal scores are ordered by ascending DocId.
inline std::vector<int> bucket_grades(std::span<const std::pair<DocId, double>> scored) {
    const std::size_t n = scored.size();
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (scored[a].second != scored[b].second) return scored[a].second > scored[b].second;
        return scored[a].first < scored[b].first;
    });
    const auto cut = [n](double q) { return static_cast<std::size_t>(std::lround(q * static_cast<double>(n))); };
    const std::size_t c3 = cut(0.10), c2 = cut(0.25), c1 = cut(0.50);
    std::vector<int> grades(n, 0);
    for (std::size_t r = 0; r < n; ++r) grades[idx[r]] = r < c3 ? 3 : r < c2 ? 2 : r < c1 ? 1 : 0;
    return grades;
}

struct ScenarioParams {
    std::size_t queries = 200;
    std::size_t docs_per_query = 100;
    /// BTL score = score_scale * latent, latent ~ N(0, 1).
    double score_scale = 3.4;
    double position_bias = 1.0;
    /// Prior (first-stage) key = latent + prior_noise * N(0, 1).
    double prior_noise = 1.5;
    std::uint64_t seed = 20240611;
    std::string dataset = "synthetic";
};

struct Scenario {
    std::vector<CandidateSet> candidates;
    BtlWorld world;
    QrelSet qrels;
};

inline std::string zero_pad(std::size_t v, int width) {
    std::string s = std::to_string(v);
    if (static_cast<int>(s.size()) < width) s.insert(0, static_cast<std::size_t>(width) - s.size(), '0');
    return s;
}

/// Generates queries whose documents are listed in prior order, a BTL world over
/// all documents, and quantile-bucketed qrels.
inline Scenario make_scenario(const ScenarioParams& p) {
    if (p.queries == 0 || p.docs_per_query == 0) throw ConfigError("scenario needs queries and documents");
    Scenario sc;
    sc.world.position_bias = p.position_bias;
    sc.world.seed = p.seed;
    Rng rng(p.seed);
    for (std::size_t q = 0; q < p.queries; ++q) {
        const std::string qid = "q" + zero_pad(q + 1, 4);
        struct Draw {
            DocId id;
            double latent;
            double prior_key;
        };
        std::vector<Draw> draws;
        draws.reserve(p.docs_per_query);
        for (std::size_t d = 0; d < p.docs_per_query; ++d) {
            const double latent = rng.normal();
            const double key = latent + p.prior_noise * rng.normal();
            draws.push_back({DocId(qid + "-d" + zero_pad(d + 1, 3)), latent, key});
        }
        std::vector<std::pair<DocId, double>> scored;
        for (const auto& d : draws) scored.emplace_back(d.id, d.latent);
        const auto grades = bucket_grades(scored);
        for (std::size_t d = 0; d < draws.size(); ++d) {
            sc.qrels.set(qid, draws[d].id.str(), grades[d]);
            sc.world.scores[draws[d].id.str()] = p.score_scale * draws[d].latent;
        }
        std::sort(draws.begin(), draws.end(), [](const Draw& a, const Draw& b) {
            if (a.prior_key != b.prior_key) return a.prior_key > b.prior_key;
            return a.id < b.id;
        });
        std::vector<Document> docs;
        docs.reserve(draws.size());
        for (const auto& d : draws) docs.push_back({d.id, "synthetic passage " + d.id.str()});
        auto cs = make_candidate_set(qid, "synthetic query " + qid, std::move(docs));
        cs.dataset = p.dataset;
        sc.candidates.push_back(std::move(cs));
    }
    return sc;
}

inline ScenarioParams scenario_from_json(const nlohmann::json& j) {
    ScenarioParams p;
    try {
        p.queries = j.value("queries", p.queries);
        p.docs_per_query = j.value("docs_per_query", p.docs_per_query);
        p.score_scale = j.value("score_scale", p.score_scale);
        p.position_bias = j.value("position_bias", p.position_bias);
        p.prior_noise = j.value("prior_noise", p.prior_noise);
        p.seed = j.value("seed", p.seed);
        p.dataset = j.value("dataset", p.dataset);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid scenario: ") + e.what());
    }
    return p;
}

}  // namespace rankbudget
