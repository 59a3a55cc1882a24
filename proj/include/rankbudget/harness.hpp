// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rankbudget Authors

#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rankbudget/core.hpp"
#include "rankbudget/evaluation.hpp"
#include "rankbudget/latency.hpp"
#include "rankbudget/llm_client.hpp"
#include "rankbudget/oracles.hpp"
#include "rankbudget/rankers.hpp"
#include "rankbudget/stats.hpp"
#include "rankbudget/synthetic.hpp"

namespace rankbudget {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

enum class ComparatorKind { synthetic, remote, replay };

inline std::string_view to_string(ComparatorKind k) {
    switch (k) {
        case ComparatorKind::synthetic: return "synthetic";
        case ComparatorKind::remote: return "remote";
        case ComparatorKind::replay: return "replay";
    }
    return "?";
}

inline ComparatorKind parse_comparator_kind(std::string_view s) {
    if (s == "synthetic") return ComparatorKind::synthetic;
    if (s == "remote") return ComparatorKind::remote;
    if (s == "replay") return ComparatorKind::replay;
    throw ConfigError("unknown comparator: " + std::string(s));
}

struct RunConfig {
    std::vector<SchedulerKind> schedulers{SchedulerKind::mohajer_bubble};
    std::vector<OracleKind> oracles{OracleKind::randomized};
    ComparatorKind comparator = ComparatorKind::synthetic;
    std::size_t k = 10;
    std::vector<std::uint64_t> budgets;
    std::vector<std::uint64_t> seeds;
    std::size_t m = 3;

    /// Generated in memory instead of reading candidates, qrels and world files.
    std::optional<ScenarioParams> scenario;
    std::string candidates_path;
    std::string qrels_path;
    std::string world_path;
    std::string endpoint_path;
    std::string cache_path;
    std::string replay_model;
    std::string out_dir = "out";

    std::size_t workers = 1;
    /// Comparator calls in flight within one query (thread-safe comparators only).
    std::size_t concurrency = 1;
    double sample = 1.0;
    /// Pool of prior-top documents whose pairs the flip check queries; 0 = all.
    std::size_t flip_pool = 0;
    bool count_cache_hits = false;
    bool lenient_parse = false;

    std::uint64_t stats_seed = 1;
    std::size_t resamples = 10000;
    double level = 0.95;
    double alpha = 0.05;

    double per_call_seconds = 0.1;
    std::size_t batch_size = 10;
    std::string tag = "rankbudget";

    void validate() const {
        if (schedulers.empty()) throw ConfigError("no schedulers configured");
        if (oracles.empty()) throw ConfigError("no oracles configured");
        if (k == 0) throw ConfigError("k must be >= 1");
        if (m == 0) throw ConfigError("m must be >= 1");
        if (budgets.empty()) throw ConfigError("budgets list is empty");
        for (std::size_t i = 1; i < budgets.size(); ++i)
            if (budgets[i] <= budgets[i - 1]) throw ConfigError("budgets must be strictly ascending");
        if (seeds.empty()) throw ConfigError("seeds list is empty");
        if (workers == 0) throw ConfigError("workers must be >= 1");
        if (concurrency == 0) throw ConfigError("concurrency must be >= 1");
        if (!(sample > 0.0 && sample <= 1.0)) throw ConfigError("sample must be in (0, 1]");
        if (resamples == 0) throw ConfigError("resamples must be >= 1");
        if (!(level > 0.0 && level < 1.0)) throw ConfigError("level must be in (0, 1)");
        if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must be in (0, 1)");
        if (!(per_call_seconds > 0.0)) throw ConfigError("per_call_seconds must be positive");
        if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
        if (!scenario && candidates_path.empty()) throw ConfigError("config needs a scenario or a candidates file");
        if (comparator == ComparatorKind::synthetic && !scenario && world_path.empty())
            throw ConfigError("synthetic comparator needs a scenario or a world file");
        if (comparator == ComparatorKind::remote && endpoint_path.empty())
            throw ConfigError("remote comparator needs an endpoint config");
        if (comparator == ComparatorKind::replay && (cache_path.empty() || replay_model.empty()))
            throw ConfigError("replay comparator needs a cache file and replay_model");
    }
};

namespace detail {

template <typename T, typename Parse>
std::vector<T> one_or_many(const nlohmann::json& j, const char* plural, const char* singular, Parse parse,
                           std::vector<T> fallback) {
    const auto read = [&](const nlohmann::json& v) {
        std::vector<T> out;
        if (v.is_array())
            for (const auto& e : v) out.push_back(parse(e.get<std::string>()));
        else
            out.push_back(parse(v.get<std::string>()));
        return out;
    };
    if (j.contains(plural)) return read(j.at(plural));
    if (j.contains(singular)) return read(j.at(singular));
    return fallback;
}

inline std::string resolve_path(const std::filesystem::path& base, const std::string& p) {
    if (p.empty() || base.empty()) return p;
    const std::filesystem::path path(p);
    return path.is_absolute() ? p : (base / path).lexically_normal().string();
}

}  // namespace detail

/// Relative paths are resolved against `base_dir` (the config file's directory).
inline RunConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
    RunConfig c;
    try {
        c.schedulers = detail::one_or_many<SchedulerKind>(
            j, "schedulers", "scheduler", [](const std::string& s) { return parse_scheduler_kind(s); },
            c.schedulers);
        c.oracles = detail::one_or_many<OracleKind>(
            j, "oracles", "oracle", [](const std::string& s) { return parse_oracle_kind(s); }, c.oracles);
        if (j.contains("comparator")) c.comparator = parse_comparator_kind(j.at("comparator").get<std::string>());
        c.k = j.value("k", c.k);
        c.m = j.value("m", c.m);
        if (j.contains("budgets")) c.budgets = j.at("budgets").get<std::vector<std::uint64_t>>();
        if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        if (j.contains("scenario")) c.scenario = scenario_from_json(j.at("scenario"));
        c.candidates_path = detail::resolve_path(base_dir, j.value("candidates", std::string{}));
        c.qrels_path = detail::resolve_path(base_dir, j.value("qrels", std::string{}));
        c.world_path = detail::resolve_path(base_dir, j.value("world", std::string{}));
        c.endpoint_path = detail::resolve_path(base_dir, j.value("endpoint", std::string{}));
        c.cache_path = detail::resolve_path(base_dir, j.value("cache", std::string{}));
        c.replay_model = j.value("replay_model", c.replay_model);
        c.out_dir = j.value("out", c.out_dir);
        c.workers = j.value("workers", c.workers);
        c.concurrency = j.value("concurrency", c.concurrency);
        c.sample = j.value("sample", c.sample);
        c.flip_pool = j.value("flip_pool", c.flip_pool);
        c.count_cache_hits = j.value("count_cache_hits", c.count_cache_hits);
        c.lenient_parse = j.value("lenient_parse", c.lenient_parse);
        c.stats_seed = j.value("stats_seed", c.stats_seed);
        c.resamples = j.value("resamples", c.resamples);
        c.level = j.value("level", c.level);
        c.alpha = j.value("alpha", c.alpha);
        c.per_call_seconds = j.value("per_call_seconds", c.per_call_seconds);
        c.batch_size = j.value("batch_size", c.batch_size);
        c.tag = j.value("tag", c.tag);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
    // A purely bidirectional setup over a deterministic comparator needs no seed list.
    if (c.seeds.empty() && std::all_of(c.oracles.begin(), c.oracles.end(),
                                       [](OracleKind o) { return o == OracleKind::bidirectional; }))
        c.seeds = {0};
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return config_from_json(j, std::filesystem::path(path).parent_path());
}

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

/// JSONL, one query per line: {"query_id", "query", "docs": [{"id", "text"}, ...]}
/// with documents in prior order and an optional "dataset" label.
inline std::vector<CandidateSet> parse_candidates(std::istream& in) {
    std::vector<CandidateSet> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        CandidateSet c;
        try {
            const auto j = nlohmann::json::parse(line);
            c.query_id = j.at("query_id").get<std::string>();
            c.query_text = j.at("query").get<std::string>();
            c.dataset = j.value("dataset", std::string{});
            for (const auto& d : j.at("docs")) {
                auto id = d.at("id").get<std::string>();
                if (id.empty()) throw ParseError("empty document id", lineno);
                c.docs.push_back({DocId(std::move(id)), d.value("text", std::string{})});
            }
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("candidates: ") + e.what(), lineno);
        }
        if (c.query_id.empty()) throw ParseError("candidates: empty query_id", lineno);
        if (c.docs.empty()) throw ParseError("candidates: query " + c.query_id + " has no documents", lineno);
        c.prior_order.resize(c.docs.size());
        for (std::size_t i = 0; i < c.docs.size(); ++i) c.prior_order[i] = i;
        c.validate();
        out.push_back(std::move(c));
    }
    std::set<std::string> seen;
    for (const auto& c : out)
        if (!seen.insert(c.query_id).second) throw ConfigError("query " + c.query_id + " appears twice");
    return out;
}

inline std::vector<CandidateSet> ingest_candidates(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open candidates file: " + path);
    return parse_candidates(in);
}

/// Writes candidates in prior order, the format ingest_candidates reads.
inline void write_candidates(std::ostream& out, const std::vector<CandidateSet>& sets) {
    for (const auto& c : sets) {
        nlohmann::json docs = nlohmann::json::array();
        for (auto idx : c.prior_order) docs.push_back({{"id", c.docs[idx].id.str()}, {"text", c.docs[idx].text}});
        nlohmann::json j{{"query_id", c.query_id}, {"query", c.query_text}, {"docs", docs}};
        if (!c.dataset.empty()) j["dataset"] = c.dataset;
        out << j.dump() << '\n';
    }
}

/// Inputs resolved from a RunConfig.
struct Workspace {
    std::vector<CandidateSet> candidates;
    QrelSet qrels;
    bool has_qrels = false;
    std::optional<BtlWorld> world;
    std::unique_ptr<OutcomeCache> cache;
    std::optional<EndpointConfig> endpoint;
};

inline Workspace load_workspace(const RunConfig& cfg, bool need_qrels) {
    Workspace ws;
    if (cfg.scenario) {
        auto sc = make_scenario(*cfg.scenario);
        ws.candidates = std::move(sc.candidates);
        ws.qrels = std::move(sc.qrels);
        ws.has_qrels = true;
        ws.world = std::move(sc.world);
    } else {
        ws.candidates = ingest_candidates(cfg.candidates_path);
        if (!cfg.qrels_path.empty()) {
            ws.qrels = load_qrels(cfg.qrels_path);
            ws.has_qrels = true;
        }
        if (cfg.comparator == ComparatorKind::synthetic) ws.world = load_world(cfg.world_path);
    }
    if (need_qrels && !ws.has_qrels) throw ConfigError("this command needs qrels");
    if (ws.world)
        for (const auto& c : ws.candidates)
            for (const auto& d : c.docs) ws.world->score(d.id);  // UnknownDoc if unscored
    if (cfg.comparator == ComparatorKind::remote) {
        std::ifstream in(cfg.endpoint_path);
        if (!in) throw IoError("cannot open endpoint config: " + cfg.endpoint_path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(cfg.endpoint_path + ": " + e.what());
        }
        ws.endpoint = endpoint_from_json(j);
        ws.endpoint->lenient_parse = cfg.lenient_parse;
        ws.cache = cfg.cache_path.empty() ? std::make_unique<OutcomeCache>()
                                          : std::make_unique<OutcomeCache>(cfg.cache_path);
    } else if (cfg.comparator == ComparatorKind::replay) {
        if (!std::filesystem::exists(cfg.cache_path)) throw IoError("cannot open replay log: " + cfg.cache_path);
        ws.cache = std::make_unique<OutcomeCache>(cfg.cache_path);
    }
    return ws;
}

inline std::unique_ptr<DirectionalComparator> make_comparator(const RunConfig& cfg, Workspace& ws) {
    switch (cfg.comparator) {
        case ComparatorKind::synthetic: return std::make_unique<BtlComparator>(*ws.world);
        case ComparatorKind::remote: return std::make_unique<RemoteComparator>(*ws.endpoint, *ws.cache);
        case ComparatorKind::replay: return std::make_unique<ReplayComparator>(*ws.cache, cfg.replay_model);
    }
    throw std::logic_error("unhandled comparator kind");
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

/// Runs tasks 0..n-1 on `workers` threads. Every task runs; the first exception
/// (by task index) is rethrown afterwards.
inline void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& task) {
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    const auto drain = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                task(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::min(workers, n);
    if (threads <= 1) {
        drain();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(drain);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

struct RunSpec {
    SchedulerKind scheduler = SchedulerKind::mohajer;
    OracleKind oracle = OracleKind::randomized;
    std::size_t k = 10;
    std::size_t m = 3;
    std::uint64_t budget = 0;
    std::uint64_t seed = 0;
    OracleOptions options{};
};

struct RunOutput {
    RankedPrefix prefix;
    std::vector<ComparisonRecord> records;
    std::vector<std::size_t> trace;
    std::uint64_t ledger_used = 0;
};

/// One query at one budget: fresh ledger, fresh scheduler, rng stream derived
/// from (seed, query_id).
inline RunOutput run_one(const CandidateSet& c, DirectionalComparator& cmp, const RunSpec& spec) {
    BudgetLedger ledger(spec.budget);
    Rng rng(derive_seed(spec.seed, c.query_id));
    PairOracle oracle(c, cmp, spec.oracle, ledger, rng, spec.options);
    auto scheduler = make_scheduler(spec.scheduler, c, spec.k, spec.m);
    RunOutput out;
    out.prefix = scheduler->run(oracle);
    out.records = oracle.records();
    out.trace = oracle.round_trace();
    out.ledger_used = ledger.used();
    return out;
}

inline std::string method_label(SchedulerKind s, OracleKind o) {
    return std::string(to_string(s)) + ":" + std::string(to_string(o));
}

// ---------------------------------------------------------------------------
// CSV helpers
// ---------------------------------------------------------------------------

inline std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + '"';
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                fields.back() += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                fields.back() += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.emplace_back();
        } else if (ch != '\r') {
            fields.back() += ch;
        }
    }
    return fields;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

struct SweepRow {
    std::string method;
    std::string oracle;
    std::uint64_t seed = 0;
    std::uint64_t budget = 0;
    std::string query_id;
    double ndcg = 0.0;
    std::uint64_t calls_used = 0;
    bool converged = false;
    std::string error;
};

struct SweepSummaryRow {
    std::string method;
    std::string oracle;
    std::uint64_t budget = 0;
    double mean_ndcg = 0.0;
    double ci_half_width = 0.0;
    std::size_t seeds = 0;
    std::size_t queries = 0;
    double converged_fraction = 0.0;
    double mean_calls = 0.0;
    std::size_t errors = 0;
    bool first_converged = false;
};

struct SweepReport {
    std::vector<SweepRow> rows;
    std::vector<SweepSummaryRow> summary;
};

inline SweepReport run_sweep(const RunConfig& cfg, Workspace& ws) {
    cfg.validate();
    auto cmp = make_comparator(cfg, ws);
    const std::size_t nq = ws.candidates.size(), nb = cfg.budgets.size();
    struct Cell {
        SchedulerKind scheduler;
        OracleKind oracle;
        std::uint64_t seed;
        std::size_t query;
    };
    std::vector<Cell> cells;
    for (auto s : cfg.schedulers)
        for (auto o : cfg.oracles)
            for (auto seed : cfg.seeds)
                for (std::size_t q = 0; q < nq; ++q) cells.push_back({s, o, seed, q});

    std::vector<SweepRow> rows(cells.size() * nb);
    parallel_for(cells.size(), cfg.workers, [&](std::size_t i) {
        const auto& cell = cells[i];
        const auto& c = ws.candidates[cell.query];
        for (std::size_t b = 0; b < nb; ++b) {
            SweepRow& row = rows[i * nb + b];
            row.method = std::string(to_string(cell.scheduler));
            row.oracle = std::string(to_string(cell.oracle));
            row.seed = cell.seed;
            row.budget = cfg.budgets[b];
            row.query_id = c.query_id;
            const RunSpec spec{cell.scheduler, cell.oracle, cfg.k, cfg.m, cfg.budgets[b], cell.seed,
                               OracleOptions{cfg.count_cache_hits, cfg.concurrency}};
            try {
                const auto out = run_one(c, *cmp, spec);
                row.ndcg = ndcg_at_k(out.prefix, ws.qrels, cfg.k).ndcg;
                row.calls_used = out.prefix.calls_used;
                row.converged = out.prefix.converged;
            } catch (const ComparatorFailure& e) {
                row.error = e.what();
            }
        }
    });

    SweepReport report;
    report.rows = std::move(rows);

    // Aggregate: per (method, oracle, budget), mean over queries per seed, then
    // mean and bootstrap CI across seeds.
    const std::size_t no = cfg.oracles.size(), ns = cfg.seeds.size();
    for (std::size_t si = 0; si < cfg.schedulers.size(); ++si)
        for (std::size_t oi = 0; oi < no; ++oi) {
            const auto s = cfg.schedulers[si];
            const auto o = cfg.oracles[oi];
            bool marked = false;
            for (std::size_t b = 0; b < nb; ++b) {
                SweepSummaryRow sum;
                sum.method = std::string(to_string(s));
                sum.oracle = std::string(to_string(o));
                sum.budget = cfg.budgets[b];
                std::vector<double> seed_means;
                std::size_t ok = 0, conv = 0;
                double calls = 0.0;
                std::set<std::string> queries;
                for (std::size_t sdi = 0; sdi < ns; ++sdi) {
                    double total = 0.0;
                    std::size_t n = 0;
                    for (std::size_t q = 0; q < nq; ++q) {
                        const std::size_t cell = ((si * no + oi) * ns + sdi) * nq + q;
                        const auto& r = report.rows[cell * nb + b];
                        if (!r.error.empty()) {
                            ++sum.errors;
                            continue;
                        }
                        total += r.ndcg;
                        ++n;
                        ++ok;
                        conv += r.converged ? 1 : 0;
                        calls += static_cast<double>(r.calls_used);
                        queries.insert(r.query_id);
                    }
                    if (n > 0) seed_means.push_back(total / static_cast<double>(n));
                }
                sum.seeds = seed_means.size();
                sum.queries = queries.size();
                if (!seed_means.empty()) sum.mean_ndcg = mean_of(seed_means);
                if (seed_means.size() >= 2) {
                    Rng rng(derive_seed(cfg.stats_seed, method_label(s, o) + "/" + std::to_string(sum.budget)));
                    sum.ci_half_width = bootstrap_ci(seed_means, cfg.resamples, cfg.level, rng).ci_half_width;
                }
                if (ok > 0) {
                    sum.converged_fraction = static_cast<double>(conv) / static_cast<double>(ok);
                    sum.mean_calls = calls / static_cast<double>(ok);
                }
                if (!marked && ok > 0 && conv == ok && sum.errors == 0) {
                    sum.first_converged = true;
                    marked = true;
                }
                report.summary.push_back(sum);
            }
        }
    return report;
}

inline std::string sweep_rows_csv(const SweepReport& r) {
    std::ostringstream out;
    out << "method,oracle,seed,budget,query_id,ndcg,calls_used,converged,error\n";
    for (const auto& row : r.rows)
        out << row.method << ',' << row.oracle << ',' << row.seed << ',' << row.budget << ','
            << csv_field(row.query_id) << ',' << (row.error.empty() ? format_fixed(row.ndcg, 6) : "") << ','
            << row.calls_used << ',' << (row.converged ? "true" : "false") << ',' << csv_field(row.error) << '\n';
    return out.str();
}

inline std::string sweep_summary_csv(const SweepReport& r) {
    std::ostringstream out;
    out << "method,oracle,budget,mean_ndcg,ci_half_width,seeds,queries,converged_fraction,mean_calls,errors,"
           "first_converged\n";
    for (const auto& s : r.summary)
        out << s.method << ',' << s.oracle << ',' << s.budget << ',' << format_fixed(s.mean_ndcg, 6) << ','
            << format_fixed(s.ci_half_width, 6) << ',' << s.seeds << ',' << s.queries << ','
            << format_fixed(s.converged_fraction, 6) << ',' << format_fixed(s.mean_calls, 3) << ',' << s.errors
            << ',' << (s.first_converged ? "†" : "") << '\n';
    return out.str();
}

/// query_id,method,budget,ndcg with ndcg averaged over seeds; method is "scheduler:oracle".
inline std::string per_query_csv(const SweepReport& r) {
    std::map<std::tuple<std::string, std::uint64_t, std::string>, std::pair<double, std::size_t>> acc;
    for (const auto& row : r.rows) {
        if (!row.error.empty()) continue;
        auto& a = acc[{row.method + ":" + row.oracle, row.budget, row.query_id}];
        a.first += row.ndcg;
        ++a.second;
    }
    std::ostringstream out;
    out << "query_id,method,budget,ndcg\n";
    for (const auto& [key, a] : acc)
        out << csv_field(std::get<2>(key)) << ',' << std::get<0>(key) << ',' << std::get<1>(key) << ','
            << format_fixed(a.first / static_cast<double>(a.second), 6) << '\n';
    return out.str();
}

/// Writes sweep_rows.csv, sweep_summary.csv and per_query.csv under out_dir.
inline SweepReport cmd_sweep(const RunConfig& cfg) {
    cfg.validate();
    auto ws = load_workspace(cfg, true);
    auto report = run_sweep(cfg, ws);
    const std::filesystem::path dir(cfg.out_dir);
    write_file(dir / "sweep_rows.csv", sweep_rows_csv(report));
    write_file(dir / "sweep_summary.csv", sweep_summary_csv(report));
    write_file(dir / "per_query.csv", per_query_csv(report));
    return report;
}

// ---------------------------------------------------------------------------
// rerank
// ---------------------------------------------------------------------------

/// One ranking per query with the first configured scheduler, oracle and seed.
/// Returns the run file path.
inline std::filesystem::path cmd_rerank(const RunConfig& cfg, std::uint64_t budget) {
    cfg.validate();
    auto ws = load_workspace(cfg, false);
    auto cmp = make_comparator(cfg, ws);
    const RunSpec base{cfg.schedulers.front(), cfg.oracles.front(), cfg.k, cfg.m, budget, cfg.seeds.front(),
                       OracleOptions{cfg.count_cache_hits, cfg.concurrency}};
    std::vector<std::string> chunks(ws.candidates.size());
    parallel_for(ws.candidates.size(), cfg.workers, [&](std::size_t i) {
        const auto out = run_one(ws.candidates[i], *cmp, base);
        std::ostringstream s;
        write_trec_run(s, out.prefix, cfg.k, cfg.tag);
        chunks[i] = s.str();
    });
    std::string all;
    for (const auto& c : chunks) all += c;
    const auto path = std::filesystem::path(cfg.out_dir) /
                      ("run." + std::string(to_string(base.scheduler)) + "." + std::string(to_string(base.oracle)) +
                       ".B" + std::to_string(budget) + ".trec");
    write_file(path, all);
    return path;
}

// ---------------------------------------------------------------------------
// flips
// ---------------------------------------------------------------------------

/// Both directions for every pair within each query's pool (all documents, or
/// the prior top flip_pool), optionally keeping a seeded `sample` fraction.
inline FlipReport cmd_flips(const RunConfig& cfg) {
    cfg.validate();
    auto ws = load_workspace(cfg, false);
    auto cmp = make_comparator(cfg, ws);
    const std::uint64_t seed = cfg.seeds.front();
    std::vector<std::vector<ComparisonRecord>> per_query(ws.candidates.size());
    parallel_for(ws.candidates.size(), cfg.workers, [&](std::size_t q) {
        const auto& c = ws.candidates[q];
        const std::size_t pool = cfg.flip_pool ? std::min(cfg.flip_pool, c.size()) : c.size();
        Rng sampler(derive_seed(seed, c.query_id + "/sample"));
        Rng rng(derive_seed(seed, c.query_id));
        auto ledger = BudgetLedger::unlimited();
        OracleSession session{*cmp, ledger, rng, {c.query_id, c.query_text}, cfg.count_cache_hits, 0};
        for (std::size_t i = 0; i < pool; ++i)
            for (std::size_t j = i + 1; j < pool; ++j) {
                if (cfg.sample < 1.0 && !(sampler.uniform() < cfg.sample)) continue;
                auto out = bidirectional_outcome(session, c.docs[c.prior_order[i]], c.docs[c.prior_order[j]]);
                for (auto& r : out.records) per_query[q].push_back(std::move(r));
            }
    });
    std::vector<ComparisonRecord> records;
    for (auto& v : per_query)
        for (auto& r : v) records.push_back(std::move(r));
    auto report = flip_analysis(records, ws.candidates);
    std::ostringstream csv;
    write_flip_csv(csv, report);
    write_file(std::filesystem::path(cfg.out_dir) / "flips.csv", csv.str());
    return report;
}

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------

struct PerQueryTable {
    /// method -> budget -> query_id -> ndcg
    std::map<std::string, std::map<std::uint64_t, std::map<std::string, double>>> values;
};

inline PerQueryTable parse_per_query(std::istream& in, const std::string& source) {
    PerQueryTable t;
    std::string line;
    if (!std::getline(in, line)) throw ParseError(source + ": empty file", 1);
    const auto header = split_csv_line(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
    for (const char* name : {"query_id", "method", "budget", "ndcg"})
        if (!col.count(name)) throw ParseError(source + ": missing column " + name, 1);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto f = split_csv_line(line);
        if (f.size() != header.size()) throw ParseError(source + ": wrong field count", lineno);
        try {
            std::size_t used = 0;
            const auto budget = std::stoull(f[col["budget"]], &used);
            if (used != f[col["budget"]].size()) throw std::invalid_argument("budget");
            const double ndcg = std::stod(f[col["ndcg"]], &used);
            if (used != f[col["ndcg"]].size()) throw std::invalid_argument("ndcg");
            t.values[f[col["method"]]][budget][f[col["query_id"]]] = ndcg;
        } catch (const std::exception&) {
            throw ParseError(source + ": invalid number", lineno);
        }
    }
    return t;
}

inline PerQueryTable load_per_query(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return parse_per_query(in, path);
}

struct StatsRow {
    std::string method_a;
    std::string method_b;
    std::uint64_t budget = 0;
    std::size_t queries = 0;
    PairedTestResult test;
};

namespace detail {

inline const std::map<std::uint64_t, std::map<std::string, double>>& pick_method(const PerQueryTable& t,
                                                                                   const std::string& wanted,
                                                                                   std::string& chosen) {
    if (!wanted.empty()) {
        auto it = t.values.find(wanted);
        if (it == t.values.end()) throw ConfigError("method " + wanted + " not found");
        chosen = wanted;
        return it->second;
    }
    if (t.values.size() != 1) throw ConfigError("table holds several methods; choose one");
    chosen = t.values.begin()->first;
    return t.values.begin()->second;
}

}  // namespace detail

/// Paired bootstrap of A against B per shared budget, joined on query_id.
inline std::vector<StatsRow> compare_tables(const PerQueryTable& a, const PerQueryTable& b, const std::string& method_a,
                                            const std::string& method_b, const RunConfig& cfg) {
    std::string name_a, name_b;
    const auto& ta = detail::pick_method(a, method_a, name_a);
    const auto& tb = detail::pick_method(b, method_b, name_b);
    std::vector<StatsRow> rows;
    for (const auto& [budget, qa] : ta) {
        auto it = tb.find(budget);
        if (it == tb.end()) continue;
        const auto& qb = it->second;
        if (qa.size() != qb.size())
            throw MisalignedInput("budget " + std::to_string(budget) + ": " + std::to_string(qa.size()) + " vs " +
                                  std::to_string(qb.size()) + " queries");
        std::vector<double> va, vb;
        for (const auto& [qid, v] : qa) {
            auto jt = qb.find(qid);
            if (jt == qb.end()) throw MisalignedInput("query " + qid + " missing from second table");
            va.push_back(v);
            vb.push_back(jt->second);
        }
        Rng rng(derive_seed(cfg.stats_seed, "paired/" + std::to_string(budget)));
        rows.push_back({name_a, name_b, budget, va.size(),
                        paired_bootstrap_test(va, vb, cfg.resamples, cfg.alpha, rng)});
    }
    if (rows.empty()) throw MisalignedInput("the two tables share no budget");
    return rows;
}

inline std::string stats_csv(const std::vector<StatsRow>& rows) {
    std::ostringstream out;
    out << "method_a,method_b,budget,queries,mean_delta,p_value,significant,cell\n";
    for (const auto& r : rows)
        out << csv_field(r.method_a) << ',' << csv_field(r.method_b) << ',' << r.budget << ',' << r.queries << ','
            << format_fixed(r.test.mean_delta, 6) << ',' << format_fixed(r.test.p_value, 6) << ','
            << (r.test.significant ? "true" : "false") << ',' << significance_cell(r.test) << '\n';
    return out.str();
}

/// One line: "A vs B | cell | cell | ..." across budgets.
inline std::string stats_table_line(const std::vector<StatsRow>& rows) {
    if (rows.empty()) return {};
    std::string line = rows.front().method_a + " vs " + rows.front().method_b;
    for (const auto& r : rows) line += " | B=" + std::to_string(r.budget) + " " + significance_cell(r.test);
    return line;
}

inline std::vector<StatsRow> cmd_stats(const std::string& path_a, const std::string& path_b,
                                       const std::string& method_a, const std::string& method_b,
                                       const RunConfig& cfg) {
    const auto rows = compare_tables(load_per_query(path_a), load_per_query(path_b), method_a, method_b, cfg);
    write_file(std::filesystem::path(cfg.out_dir) / "stats.csv", stats_csv(rows));
    return rows;
}

// ---------------------------------------------------------------------------
// latency
// ---------------------------------------------------------------------------

struct LatencyRow {
    std::string method;
    std::uint64_t budget = 0;
    double calls = 0.0;
    double seconds = 0.0;
    double rounds = 0.0;
};

/// Mean per-query calls, sequential seconds and batched rounds for every
/// configured (scheduler, oracle, budget), using the first seed.
inline std::vector<LatencyRow> run_latency(const RunConfig& cfg, Workspace& ws, double per_call_seconds,
                                           std::size_t batch_size) {
    cfg.validate();
    if (!(per_call_seconds > 0.0)) throw ConfigError("per-call seconds must be positive");
    if (batch_size == 0) throw ConfigError("batch size must be >= 1");
    auto cmp = make_comparator(cfg, ws);
    struct Cell {
        SchedulerKind s;
        OracleKind o;
        std::uint64_t budget;
    };
    std::vector<Cell> cells;
    for (auto s : cfg.schedulers)
        for (auto o : cfg.oracles)
            for (auto b : cfg.budgets) cells.push_back({s, o, b});
    const std::size_t nq = ws.candidates.size();
    std::vector<LatencyEstimate> per(cells.size() * nq);
    parallel_for(per.size(), cfg.workers, [&](std::size_t i) {
        const auto& cell = cells[i / nq];
        const RunSpec spec{cell.s, cell.o, cfg.k, cfg.m, cell.budget, cfg.seeds.front(),
                           OracleOptions{cfg.count_cache_hits, cfg.concurrency}};
        const auto out = run_one(ws.candidates[i % nq], *cmp, spec);
        per[i] = batched_estimate(out.trace, per_call_seconds, batch_size);
    });
    std::vector<LatencyRow> rows;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        LatencyRow row{method_label(cells[c].s, cells[c].o), cells[c].budget, 0, 0, 0};
        for (std::size_t q = 0; q < nq; ++q) {
            const auto& e = per[c * nq + q];
            row.calls += static_cast<double>(e.total_calls);
            row.seconds += e.sequential_seconds;
            row.rounds += static_cast<double>(e.rounds);
        }
        const double n = static_cast<double>(nq);
        row.calls /= n;
        row.seconds /= n;
        row.rounds /= n;
        rows.push_back(row);
    }
    return rows;
}

inline std::string latency_csv(const std::vector<LatencyRow>& rows) {
    std::ostringstream out;
    out << "method,budget,calls,seconds,rounds\n";
    for (const auto& r : rows)
        out << r.method << ',' << r.budget << ',' << format_fixed(r.calls, 3) << ',' << format_fixed(r.seconds, 3)
            << ',' << format_fixed(r.rounds, 3) << '\n';
    return out.str();
}

inline std::vector<LatencyRow> cmd_latency(const RunConfig& cfg, double per_call_seconds, std::size_t batch_size) {
    cfg.validate();
    auto ws = load_workspace(cfg, false);
    auto rows = run_latency(cfg, ws, per_call_seconds, batch_size);
    write_file(std::filesystem::path(cfg.out_dir) / "latency.csv", latency_csv(rows));
    return rows;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

/// Materializes a scenario as candidates.jsonl, qrels.txt and world.json.
inline void cmd_synth(const ScenarioParams& params, const std::filesystem::path& dir) {
    const auto sc = make_scenario(params);
    std::ostringstream cands, qrels;
    write_candidates(cands, sc.candidates);
    write_qrels(qrels, sc.qrels);
    write_file(dir / "candidates.jsonl", cands.str());
    write_file(dir / "qrels.txt", qrels.str());
    write_file(dir / "world.json", world_to_json(sc.world).dump(2) + "\n");
}

}  // namespace rankbudget
