// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rankbudget Authors

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rankbudget/rankbudget.hpp"

namespace rb = rankbudget;

namespace {

struct CommonFlags {
    std::string config;
    std::string out;
    std::optional<std::size_t> workers;
    bool count_cache_hits = false;
    bool lenient_parse = false;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool config_required = true) {
    auto* opt = cmd->add_option("--config", f.config, "run configuration (JSON)");
    if (config_required) opt->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", f.out, "output directory (overrides config)");
    cmd->add_option("--workers", f.workers, "worker threads across queries")->check(CLI::PositiveNumber);
    cmd->add_flag("--count-cache-hits", f.count_cache_hits, "charge cached outcomes to the budget");
    cmd->add_flag("--lenient-parse", f.lenient_parse, "map unparseable answers to 1 instead of failing");
}

rb::RunConfig resolve(const CommonFlags& f) {
    auto cfg = f.config.empty() ? rb::RunConfig{} : rb::load_config(f.config);
    if (!f.out.empty()) cfg.out_dir = f.out;
    if (f.workers) cfg.workers = *f.workers;
    if (f.count_cache_hits) cfg.count_cache_hits = true;
    if (f.lenient_parse) cfg.lenient_parse = true;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rankbudget: call-budgeted top-K reranking from noisy pairwise comparisons"};
    app.require_subcommand(1);

    CommonFlags sweep_f, rerank_f, flips_f, latency_f, stats_f;

    auto* sweep = app.add_subcommand("sweep", "NDCG across budgets, seeds and schedulers");
    add_common(sweep, sweep_f);

    auto* rerank = app.add_subcommand("rerank", "TREC run file at one budget");
    add_common(rerank, rerank_f);
    std::uint64_t rerank_budget = 0;
    rerank->add_option("--budget", rerank_budget, "LLM call budget per query")->required();

    auto* flips = app.add_subcommand("flips", "bidirectional flip-rate check");
    add_common(flips, flips_f);
    std::optional<double> sample;
    flips->add_option("--sample", sample, "fraction of pairs to query")->check(CLI::Range(0.0, 1.0));

    auto* stats = app.add_subcommand("stats", "paired bootstrap between two per-query tables");
    add_common(stats, stats_f, false);
    std::string table_a, table_b, method_a, method_b;
    std::optional<std::size_t> resamples;
    std::optional<double> alpha;
    stats->add_option("--a", table_a, "per-query CSV for method A")->required()->check(CLI::ExistingFile);
    stats->add_option("--b", table_b, "per-query CSV for method B")->required()->check(CLI::ExistingFile);
    stats->add_option("--method-a", method_a, "method label to take from table A");
    stats->add_option("--method-b", method_b, "method label to take from table B");
    stats->add_option("--resamples", resamples, "bootstrap resamples")->check(CLI::PositiveNumber);
    stats->add_option("--alpha", alpha, "significance level");

    auto* latency = app.add_subcommand("latency", "sequential time and batched rounds");
    add_common(latency, latency_f);
    std::optional<double> per_call;
    std::optional<std::size_t> batch;
    latency->add_option("--per-call", per_call, "seconds per LLM call")->check(CLI::PositiveNumber);
    latency->add_option("--batch", batch, "calls per parallel round")->check(CLI::PositiveNumber);

    auto* synth = app.add_subcommand("synth", "write a synthetic scenario as input files");
    rb::ScenarioParams sp;
    std::string synth_out = "synthetic";
    synth->add_option("--out", synth_out, "output directory");
    synth->add_option("--queries", sp.queries, "number of queries");
    synth->add_option("--docs", sp.docs_per_query, "candidates per query");
    synth->add_option("--seed", sp.seed, "generator seed");
    synth->add_option("--score-scale", sp.score_scale, "BTL score scale");
    synth->add_option("--position-bias", sp.position_bias, "first-slot logit bias");
    synth->add_option("--prior-noise", sp.prior_noise, "noise of the prior ranking");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sweep) {
            const auto cfg = resolve(sweep_f);
            const auto report = rb::cmd_sweep(cfg);
            std::cout << rb::sweep_summary_csv(report);
        } else if (*rerank) {
            const auto cfg = resolve(rerank_f);
            std::cout << rb::cmd_rerank(cfg, rerank_budget).string() << '\n';
        } else if (*flips) {
            auto cfg = resolve(flips_f);
            if (sample) cfg.sample = *sample;
            const auto report = rb::cmd_flips(cfg);
            rb::write_flip_csv(std::cout, report);
        } else if (*stats) {
            auto cfg = resolve(stats_f);
            if (resamples) cfg.resamples = *resamples;
            if (alpha) cfg.alpha = *alpha;
            const auto rows = rb::cmd_stats(table_a, table_b, method_a, method_b, cfg);
            std::cout << rb::stats_table_line(rows) << '\n';
        } else if (*latency) {
            const auto cfg = resolve(latency_f);
            const auto rows = rb::cmd_latency(cfg, per_call.value_or(cfg.per_call_seconds),
                                              batch.value_or(cfg.batch_size));
            std::cout << rb::latency_csv(rows);
        } else if (*synth) {
            rb::cmd_synth(sp, synth_out);
            std::cout << synth_out << '\n';
        }
    } catch (const rb::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
