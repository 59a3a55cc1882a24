// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rankbudget Authors

#pragma once

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <utility>

#include <httplib.h>
#include <json.hpp>

#include "rankbudget/core.hpp"
#include "rankbudget/oracles.hpp"

namespace rankbudget {

inline constexpr std::string_view kDefaultPromptTemplate =
    "Given a query \"{query}\", which of the following two passages is more relevant to the query?\n\n"
    "Passage A: \"{passage_a}\"\n\n"
    "Passage B: \"{passage_b}\"\n\n"
    "Output Passage A or Passage B:";

struct EndpointConfig {
    std::string base_url;  // e.g. http://localhost:8000/v1/completions
    std::string model_name;
    int timeout_ms = 30000;
    int max_retries = 3;
    int retry_backoff_ms = 200;
    int max_tokens = 8;
    std::size_t in_flight = 4;
    std::string prompt_template{kDefaultPromptTemplate};
    std::pair<std::string, std::string> answer_tokens{"Passage A", "Passage B"};
    /// Map unparseable answers to 1 (with a warning) instead of failing.
    bool lenient_parse = false;
    /// Bearer token; empty means no Authorization header.
    std::string api_key;

    void validate() const {
        if (base_url.empty()) throw ConfigError("endpoint base_url is empty");
        if (model_name.empty()) throw ConfigError("endpoint model is empty");
        if (timeout_ms <= 0) throw ConfigError("endpoint timeout must be positive");
        if (max_retries < 0) throw ConfigError("max_retries must be >= 0");
        if (in_flight == 0) throw ConfigError("in_flight must be >= 1");
        if (answer_tokens.first.empty() || answer_tokens.second.empty())
            throw ConfigError("answer tokens must be non-empty");
        for (std::string_view ph : {"{query}", "{passage_a}", "{passage_b}"}) {
            const auto first = prompt_template.find(ph);
            if (first == std::string::npos || prompt_template.find(ph, first + 1) != std::string::npos)
                throw ConfigError("prompt template must contain " + std::string(ph) + " exactly once");
        }
    }
};

inline EndpointConfig endpoint_from_json(const nlohmann::json& j) {
    EndpointConfig c;
    try {
        c.base_url = j.at("base_url").get<std::string>();
        c.model_name = j.at("model").get<std::string>();
        c.timeout_ms = j.value("timeout_ms", c.timeout_ms);
        c.max_retries = j.value("max_retries", c.max_retries);
        c.retry_backoff_ms = j.value("retry_backoff_ms", c.retry_backoff_ms);
        c.max_tokens = j.value("max_tokens", c.max_tokens);
        c.in_flight = j.value("in_flight", c.in_flight);
        c.prompt_template = j.value("prompt_template", c.prompt_template);
        if (j.contains("answer_tokens")) {
            const auto& t = j.at("answer_tokens");
            c.answer_tokens = {t.at(0).get<std::string>(), t.at(1).get<std::string>()};
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid endpoint config: ") + e.what());
    }
    if (const char* key = std::getenv("RANKBUDGET_API_KEY")) c.api_key = key;
    c.validate();
    return c;
}

/// Substitutes the three placeholders in a single left-to-right pass, so
/// placeholder-like text inside documents is left alone.
inline std::string render_prompt(std::string_view tmpl, std::string_view query, std::string_view passage_a,
                                 std::string_view passage_b) {
    static constexpr std::pair<std::string_view, int> slots[] = {
        {"{query}", 0}, {"{passage_a}", 1}, {"{passage_b}", 2}};
    const std::string_view values[] = {query, passage_a, passage_b};
    std::string out;
    out.reserve(tmpl.size() + query.size() + passage_a.size() + passage_b.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        bool matched = false;
        if (tmpl[i] == '{')
            for (const auto& [ph, slot] : slots)
                if (tmpl.substr(i, ph.size()) == ph) {
                    out += values[slot];
                    i += ph.size();
                    matched = true;
                    break;
                }
        if (!matched) out += tmpl[i++];
    }
    return out;
}

namespace detail {

inline std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

inline std::string_view trim_answer(std::string_view s) {
    const auto junk = [](unsigned char c) { return std::isspace(c) || c == '"' || c == '\'' || c == '*'; };
    while (!s.empty() && junk(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

}  // namespace detail

/// 1 if the completion starts with the first answer token, 0 for the second,
/// nullopt otherwise. Case-insensitive; leading whitespace and quotes ignored.
inline std::optional<int> parse_answer(std::string_view completion,
                                       const std::pair<std::string, std::string>& tokens) {
    const std::string text = detail::lowercase(detail::trim_answer(completion));
    const std::string a = detail::lowercase(tokens.first), b = detail::lowercase(tokens.second);
    const bool is_a = text.rfind(a, 0) == 0, is_b = text.rfind(b, 0) == 0;
    if (is_a && is_b) return a.size() >= b.size() ? 1 : 0;
    if (is_a) return 1;
    if (is_b) return 0;
    return std::nullopt;
}

/// Completion text from common response shapes.
inline std::optional<std::string> extract_completion(const nlohmann::json& body) {
    if (body.contains("choices") && body["choices"].is_array() && !body["choices"].empty()) {
        const auto& c = body["choices"][0];
        if (c.contains("text") && c["text"].is_string()) return c["text"].get<std::string>();
        if (c.contains("message") && c["message"].contains("content") && c["message"]["content"].is_string())
            return c["message"]["content"].get<std::string>();
    }
    for (const char* key : {"completion", "text", "response"})
        if (body.contains(key) && body[key].is_string()) return body[key].get<std::string>();
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Outcome cache
// ---------------------------------------------------------------------------

struct CacheKey {
    std::string query_id;
    std::string first;
    std::string second;
    std::string model;

    friend auto operator<=>(const CacheKey&, const CacheKey&) = default;
};

/// Direction-sensitive bit cache persisted as append-only JSONL:
/// {"q": ..., "a": ..., "b": ..., "model": ..., "bit": 0|1}.
class OutcomeCache {
public:
    OutcomeCache() = default;

    explicit OutcomeCache(std::string path) : path_(std::move(path)) {
        std::ifstream in(path_);
        if (!in) return;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            try {
                const auto j = nlohmann::json::parse(line);
                const int bit = j.at("bit").get<int>();
                if (bit != 0 && bit != 1) throw ParseError(path_ + ": bit must be 0 or 1", lineno);
                entries_.emplace(CacheKey{j.at("q").get<std::string>(), j.at("a").get<std::string>(),
                                          j.at("b").get<std::string>(), j.at("model").get<std::string>()},
                                 bit);
            } catch (const nlohmann::json::exception& e) {
                throw ParseError(path_ + ": " + e.what(), lineno);
            }
        }
    }

    OutcomeCache(const OutcomeCache&) = delete;
    OutcomeCache& operator=(const OutcomeCache&) = delete;

    std::optional<int> get(const CacheKey& key) const {
        std::lock_guard lock(mu_);
        auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        return it->second;
    }

    /// Stores a bit unless the key is already present. Returns true if written.
    bool put(const CacheKey& key, int bit) {
        std::lock_guard lock(mu_);
        if (!entries_.emplace(key, bit).second) return false;
        if (!path_.empty()) {
            std::ofstream out(path_, std::ios::app);
            if (!out) throw IoError("cannot append to cache file: " + path_);
            out << nlohmann::json{{"q", key.query_id}, {"a", key.first}, {"b", key.second},
                                  {"model", key.model}, {"bit", bit}}
                       .dump()
                << '\n';
        }
        return true;
    }

    std::size_t size() const {
        std::lock_guard lock(mu_);
        return entries_.size();
    }

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
    mutable std::mutex mu_;
    std::map<CacheKey, int> entries_;
};

// ---------------------------------------------------------------------------
// Comparators
// ---------------------------------------------------------------------------

namespace detail {

struct ParsedUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

inline ParsedUrl split_url(const std::string& url) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos) throw ConfigError("endpoint URL needs a scheme: " + url);
    const auto slash = url.find('/', scheme + 3);
    if (slash == std::string::npos) return {url, "/"};
    return {url.substr(0, slash), url.substr(slash)};
}

}  // namespace detail

/// Comparator backed by an HTTP text-completion endpoint.
class RemoteComparator final : public DirectionalComparator {
public:
    RemoteComparator(EndpointConfig cfg, OutcomeCache& cache)
        : cfg_(std::move(cfg)), cache_(cache), slots_(static_cast<std::ptrdiff_t>(cfg_.in_flight)) {
        cfg_.validate();
        url_ = detail::split_url(cfg_.base_url);
    }

    int compare(const ComparisonRequest& r, Rng&) override {
        const CacheKey key = key_of(r);
        if (auto hit = cache_.get(key)) return *hit;

        const std::string prompt = render_prompt(cfg_.prompt_template, r.query.text, r.first.text, r.second.text);
        const std::string body =
            nlohmann::json{{"model", cfg_.model_name}, {"prompt", prompt}, {"max_tokens", cfg_.max_tokens}}.dump();

        std::string last_error, last_raw;
        bool unparseable = false;
        for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
            if (attempt > 0 && cfg_.retry_backoff_ms > 0)
                std::this_thread::sleep_for(std::chrono::milliseconds(cfg_.retry_backoff_ms << (attempt - 1)));
            auto reply = post(body);
            if (!reply.ok) {
                last_error = reply.error;
                unparseable = false;
                continue;
            }
            if (auto bit = parse_answer(reply.completion, cfg_.answer_tokens)) {
                cache_.put(key, *bit);
                return *bit;
            }
            unparseable = true;
            last_raw = reply.completion;
            last_error = "unparseable answer";
        }
        if (unparseable && cfg_.lenient_parse) {
            std::cerr << "warning: unparseable answer for (" << key.query_id << ", " << key.first << ", "
                      << key.second << "): \"" << last_raw << "\"; using 1\n";
            return 1;
        }
        throw ComparatorFailure(cfg_.model_name + ": " + last_error + " after " +
                                    std::to_string(cfg_.max_retries + 1) + " attempts",
                                last_raw);
    }

    std::optional<int> cached(const ComparisonRequest& r) const override { return cache_.get(key_of(r)); }
    bool uses_rng() const override { return false; }
    bool thread_safe() const override { return true; }
    std::string descriptor() const override { return "remote(" + cfg_.model_name + ")"; }

    const EndpointConfig& config() const noexcept { return cfg_; }

private:
    struct Reply {
        bool ok = false;
        std::string completion;
        std::string error;
    };

    CacheKey key_of(const ComparisonRequest& r) const {
        return {std::string(r.query.id), r.first.id.str(), r.second.id.str(), cfg_.model_name};
    }

    Reply post(const std::string& body) {
        slots_.acquire();
        struct Release {
            std::counting_semaphore<>& s;
            ~Release() { s.release(); }
        } release{slots_};

        httplib::Client client(url_.origin);
        const auto secs = cfg_.timeout_ms / 1000, usecs = (cfg_.timeout_ms % 1000) * 1000;
        client.set_connection_timeout(secs, usecs);
        client.set_read_timeout(secs, usecs);
        client.set_write_timeout(secs, usecs);
        httplib::Headers headers;
        if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);

        auto res = client.Post(url_.path, headers, body, "application/json");
        if (!res) return {false, {}, "transport error: " + httplib::to_string(res.error())};
        if (res->status != 200) return {false, {}, "HTTP " + std::to_string(res->status)};
        try {
            const auto j = nlohmann::json::parse(res->body);
            if (auto text = extract_completion(j)) return {true, *text, {}};
            return {false, {}, "response has no completion text"};
        } catch (const nlohmann::json::exception&) {
            return {false, {}, "response is not JSON"};
        }
    }

    EndpointConfig cfg_;
    OutcomeCache& cache_;
    detail::ParsedUrl url_;
    std::counting_semaphore<> slots_;
};

/// Serves recorded bits from a cache file; every call is charged. A missing
/// key is a ComparatorFailure.
class ReplayComparator final : public DirectionalComparator {
public:
    ReplayComparator(const OutcomeCache& cache, std::string model) : cache_(cache), model_(std::move(model)) {}

    int compare(const ComparisonRequest& r, Rng&) override {
        const CacheKey key{std::string(r.query.id), r.first.id.str(), r.second.id.str(), model_};
        if (auto bit = cache_.get(key)) return *bit;
        throw ComparatorFailure("no recorded outcome for (" + key.query_id + ", " + key.first + ", " +
                                key.second + ", " + model_ + ")");
    }

    bool uses_rng() const override { return false; }
    bool thread_safe() const override { return true; }
    std::string descriptor() const override { return "replay(" + model_ + ")"; }

private:
    const OutcomeCache& cache_;
    std::string model_;
};

}  // namespace rankbudget
