// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rankbudget Authors

#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rankbudget/core.hpp"
#include "rankbudget/oracles.hpp"

namespace rankbudget {

/// Budgeted, anytime top-K scheduler over a PairOracle.
///
/// run() schedules comparisons until the scheduler has nothing left to ask or the
/// oracle is exhausted, then returns snapshot(). snapshot() may be called at any
/// point, including from the oracle's observer while run() is in progress, and is
/// always a list of min(K, N) distinct candidates.
class Scheduler {
public:
    Scheduler(const CandidateSet& candidates, std::size_t k)
        : candidates_(candidates), k_(std::min(k, candidates.size())) {
        if (k == 0) throw std::invalid_argument("K must be >= 1");
        candidates.validate();
    }
    virtual ~Scheduler() = default;

    Scheduler(const Scheduler&) = delete;
    Scheduler& operator=(const Scheduler&) = delete;

    virtual std::string_view name() const = 0;

    RankedPrefix run(PairOracle& oracle) {
        if (oracle.candidates().query_id != candidates_.query_id)
            throw std::invalid_argument("oracle bound to a different query");
        oracle_ = &oracle;
        execute(oracle);
        return snapshot();
    }

    virtual RankedPrefix snapshot() const = 0;

    std::size_t k() const noexcept { return k_; }

protected:
    virtual void execute(PairOracle& oracle) = 0;

    RankedPrefix make_prefix(std::span<const std::size_t> order, bool converged) const {
        RankedPrefix out;
        out.query_id = candidates_.query_id;
        out.converged = converged;
        out.calls_used = oracle_ ? oracle_->calls_charged() : 0;
        for (std::size_t i = 0; i < order.size() && out.items.size() < k_; ++i)
            out.items.push_back(candidates_.docs[order[i]].id);
        return out;
    }

    RankedPrefix prior_prefix() const {
        return make_prefix(std::span<const std::size_t>(candidates_.prior_order).first(k_), false);
    }

    const CandidateSet& candidates_;
    std::size_t k_;
    const PairOracle* oracle_ = nullptr;
};

/// Per-run outcome cache keyed by unordered pair. Repeated pairs cost nothing.
class OutcomeMemo {
public:
    std::optional<std::size_t> winner(PairOracle& oracle, std::size_t a, std::size_t b) {
        const auto key = std::minmax(a, b);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        auto w = oracle.winner(a, b);
        if (w) memo_.emplace(key, *w);
        return w;
    }

private:
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo_;
};

/// Bottom-up bubble passes over order[begin, end): pass p carries the best
/// remaining item to position begin + p, swapping adjacent items when the lower
/// one wins. Stops early after a pass without swaps. Returns false if the oracle
/// ran dry before the passes completed.
inline bool bubble_passes(std::vector<std::size_t>& order, std::size_t begin, std::size_t end,
                          std::size_t passes, PairOracle& oracle, OutcomeMemo& memo) {
    for (std::size_t p = 0; p < passes; ++p) {
        const std::size_t top = begin + p;
        if (top + 1 >= end) break;
        bool swapped = false;
        for (std::size_t j = end - 1; j > top; --j) {
            auto w = memo.winner(oracle, order[j], order[j - 1]);
            if (!w) return false;
            if (*w == order[j]) {
                std::swap(order[j], order[j - 1]);
                swapped = true;
            }
        }
        if (!swapped) break;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Sorting baselines
// ---------------------------------------------------------------------------

class BubbleScheduler final : public Scheduler {
public:
    BubbleScheduler(const CandidateSet& c, std::size_t k) : Scheduler(c, k), order_(c.prior_order) {}

    std::string_view name() const override { return "bubble"; }
    RankedPrefix snapshot() const override { return make_prefix(order_, done_); }

protected:
    void execute(PairOracle& oracle) override {
        done_ = bubble_passes(order_, 0, order_.size(), k_, oracle, memo_);
    }

private:
    std::vector<std::size_t> order_;
    OutcomeMemo memo_;
    bool done_ = false;
};

class HeapScheduler final : public Scheduler {
public:
    HeapScheduler(const CandidateSet& c, std::size_t k)
        : Scheduler(c, k), heap_(c.prior_order), size_(c.size()), out_(c.size(), false) {}

    std::string_view name() const override { return "heap"; }

    RankedPrefix snapshot() const override {
        if (!built_) return make_prefix(heap_, false);
        std::vector<std::size_t> order = extracted_;
        for (std::size_t i = 0; i < size_; ++i)
            if (!out_[heap_[i]]) order.push_back(heap_[i]);
        return make_prefix(order, done_);
    }

protected:
    void execute(PairOracle& oracle) override {
        for (std::size_t i = size_ / 2; i-- > 0;)
            if (!sift_down(oracle, i)) return;
        built_ = true;
        while (true) {
            extracted_.push_back(heap_[0]);
            out_[heap_[0]] = true;
            if (extracted_.size() == k_) break;
            --size_;
            std::swap(heap_[0], heap_[size_]);
            if (!sift_down(oracle, 0)) return;
        }
        done_ = true;
    }

private:
    bool sift_down(PairOracle& oracle, std::size_t i) {
        while (true) {
            const std::size_t l = 2 * i + 1, r = l + 1;
            if (l >= size_) return true;
            std::size_t c = l;
            if (r < size_) {
                auto w = oracle.winner(heap_[r], heap_[l]);
                if (!w) return false;
                c = *w == heap_[r] ? r : l;
            }
            auto w = oracle.winner(heap_[c], heap_[i]);
            if (!w) return false;
            if (*w == heap_[i]) return true;
            std::swap(heap_[i], heap_[c]);
            i = c;
        }
    }

    std::vector<std::size_t> heap_;
    std::size_t size_;
    std::vector<std::size_t> extracted_;
    std::vector<bool> out_;
    bool built_ = false;
    bool done_ = false;
};

/// Quickselect-then-sort restricted to the partitions that overlap the top K.
/// The pivot is whichever of first/middle/last has the median prior rank, so
/// choosing it costs no comparisons. A partition is one set of independent matches.
class QuickScheduler final : public Scheduler {
public:
    QuickScheduler(const CandidateSet& c, std::size_t k)
        : Scheduler(c, k), order_(c.prior_order), rank_(c.prior_ranks()) {}

    std::string_view name() const override { return "quick"; }
    RankedPrefix snapshot() const override { return make_prefix(order_, done_); }

protected:
    void execute(PairOracle& oracle) override { done_ = sort(oracle, 0, order_.size()); }

private:
    bool sort(PairOracle& oracle, std::size_t lo, std::size_t hi) {
        if (hi - lo < 2 || lo >= k_) return true;
        const std::size_t pivot_pos = median_of_three(lo, lo + (hi - lo - 1) / 2, hi - 1);
        const std::size_t pivot = order_[pivot_pos];
        std::vector<Match> matches;
        std::vector<std::size_t> members;
        for (std::size_t x = lo; x < hi; ++x) {
            if (x == pivot_pos) continue;
            matches.push_back({order_[x], pivot});
            members.push_back(order_[x]);
        }
        const auto winners = oracle.resolve(matches);
        if (winners.size() < matches.size()) return false;
        std::vector<std::size_t> left, right;
        for (std::size_t i = 0; i < members.size(); ++i)
            (winners[i] == members[i] ? left : right).push_back(members[i]);
        std::size_t pos = lo;
        for (auto v : left) order_[pos++] = v;
        const std::size_t p = pos;
        order_[pos++] = pivot;
        for (auto v : right) order_[pos++] = v;
        if (!sort(oracle, lo, p)) return false;
        if (p + 1 < k_ && !sort(oracle, p + 1, hi)) return false;
        return true;
    }

    std::size_t median_of_three(std::size_t a, std::size_t b, std::size_t c) const {
        std::size_t pos[3] = {a, b, c};
        std::sort(pos, pos + 3, [&](std::size_t x, std::size_t y) {
            return rank_[order_[x]] < rank_[order_[y]];
        });
        return pos[1];
    }

    std::vector<std::size_t> order_;
    std::vector<std::size_t> rank_;
    bool done_ = false;
};

// ---------------------------------------------------------------------------
// Active rankers
// ---------------------------------------------------------------------------

/// Tournament/heap top-K selection with one oracle outcome per match.
///
/// 1. Candidates are dealt round-robin by prior rank into K groups; a
///    single-elimination bracket per group yields K champions. All matches at
///    one bracket depth form one independent set.
/// 2. The champions are heapified bottom-up; sift-downs of nodes at the same
///    heap depth run in lockstep.
/// 3. K times: emit the root, replay the emptied leaf's bracket path in its group
///    to get a replacement, and sink the replacement from the root. The
///    better-child path below the vacated root is resolved alongside the bracket
///    replay, since neither depends on the other.
///
/// Until every bracket has a champion the snapshot is the prior prefix.
class MohajerScheduler final : public Scheduler {
public:
    MohajerScheduler(const CandidateSet& c, std::size_t k, bool polish = false)
        : Scheduler(c, k),
          polish_(polish),
          group_of_(c.size()),
          leaf_of_(c.size()),
          out_(c.size(), false) {
        brackets_.resize(k_);
        remaining_.assign(k_, 0);
        for (std::size_t r = 0; r < c.size(); ++r) {
            const std::size_t idx = c.prior_order[r], g = r % k_;
            group_of_[idx] = g;
            leaf_of_[idx] = brackets_[g].empty() ? 0 : brackets_[g][0].size();
            if (brackets_[g].empty()) brackets_[g].emplace_back();
            brackets_[g][0].push_back(idx);
            ++remaining_[g];
        }
        for (auto& levels : brackets_)
            while (levels.back().size() > 1)
                levels.emplace_back((levels.back().size() + 1) / 2, std::nullopt);
    }

    std::string_view name() const override { return polish_ ? "mohajer_bubble" : "mohajer"; }

    RankedPrefix snapshot() const override {
        if (!champions_ready_) return prior_prefix();
        if (polishing_) return make_prefix(polish_order_, polish_done_);
        std::vector<std::size_t> order = extracted_;
        for (auto v : heap_)
            if (!out_[v]) order.push_back(v);
        return make_prefix(order, extraction_done_ && !polish_);
    }

    bool champions_ready() const noexcept { return champions_ready_; }
    const std::vector<std::size_t>& extracted() const noexcept { return extracted_; }

protected:
    void execute(PairOracle& oracle) override {
        if (!play_brackets(oracle)) return;
        champions_ready_ = true;
        for (const auto& levels : brackets_) heap_.push_back(*levels.back()[0]);
        if (!heapify(oracle)) return;
        if (!extract_all(oracle)) return;
        extraction_done_ = true;
        if (polish_) {
            polishing_ = true;
            polish_order_ = extracted_;
            polish_done_ = bubble_passes(polish_order_, 0, polish_order_.size(),
                                         polish_order_.size() - 1, oracle, polish_memo_);
        }
    }

private:
    using Level = std::vector<std::optional<std::size_t>>;
    using Bracket = std::vector<Level>;

    // Node `node` of level+1 is decided by the right child challenging the left.
    bool play_brackets(PairOracle& oracle) {
        for (std::size_t level = 0;; ++level) {
            std::vector<Match> matches;
            std::vector<std::pair<std::size_t, std::size_t>> slots;
            bool any = false;
            for (std::size_t g = 0; g < brackets_.size(); ++g) {
                auto& levels = brackets_[g];
                if (level + 1 >= levels.size()) continue;
                any = true;
                for (std::size_t node = 0; node < levels[level + 1].size(); ++node) {
                    const auto left = levels[level][2 * node];
                    const auto right = 2 * node + 1 < levels[level].size() ? levels[level][2 * node + 1]
                                                                          : std::nullopt;
                    if (left && right) {
                        matches.push_back({*right, *left});
                        slots.emplace_back(g, node);
                    } else {
                        levels[level + 1][node] = left ? left : right;
                    }
                }
            }
            if (!any) return true;
            const auto winners = oracle.resolve(matches);
            if (winners.size() < matches.size()) return false;
            for (std::size_t i = 0; i < winners.size(); ++i)
                brackets_[slots[i].first][level + 1][slots[i].second] = winners[i];
        }
    }

    struct SiftCursor {
        std::size_t pos;
        std::optional<std::size_t> child;
        bool comparing_children = false;
        bool done = false;
    };

    std::optional<Match> next_sift_match(SiftCursor& c) const {
        if (c.done) return std::nullopt;
        const std::size_t l = 2 * c.pos + 1, r = l + 1, n = heap_.size();
        if (l >= n) {
            c.done = true;
            return std::nullopt;
        }
        if (!c.child) {
            if (r < n) {
                c.comparing_children = true;
                return Match{heap_[r], heap_[l]};
            }
            c.child = l;
        }
        c.comparing_children = false;
        return Match{heap_[*c.child], heap_[c.pos]};
    }

    void apply_sift(SiftCursor& c, std::size_t winner) {
        const std::size_t l = 2 * c.pos + 1, r = l + 1;
        if (c.comparing_children) {
            c.child = winner == heap_[r] ? r : l;
            return;
        }
        if (winner == heap_[c.pos]) {
            c.done = true;
            return;
        }
        std::swap(heap_[c.pos], heap_[*c.child]);
        c.pos = *c.child;
        c.child.reset();
    }

    bool heapify(PairOracle& oracle) {
        const std::size_t n = heap_.size();
        if (n < 2) return true;
        const std::size_t last_internal = n / 2 - 1;
        std::size_t depth = 0;
        while ((std::size_t{2} << depth) - 1 <= last_internal) ++depth;
        for (std::size_t d = depth + 1; d-- > 0;) {
            std::vector<SiftCursor> cursors;
            const std::size_t first = (std::size_t{1} << d) - 1;
            const std::size_t last = std::min((std::size_t{2} << d) - 2, last_internal);
            for (std::size_t i = first; i <= last; ++i) cursors.push_back({i, std::nullopt, false, false});
            while (true) {
                std::vector<Match> matches;
                std::vector<std::size_t> owners;
                for (std::size_t c = 0; c < cursors.size(); ++c)
                    if (auto m = next_sift_match(cursors[c])) {
                        matches.push_back(*m);
                        owners.push_back(c);
                    }
                if (matches.empty()) break;
                const auto winners = oracle.resolve(matches);
                if (winners.size() < matches.size()) return false;
                for (std::size_t i = 0; i < winners.size(); ++i) apply_sift(cursors[owners[i]], winners[i]);
            }
        }
        return true;
    }

    // Replays one group's bracket after a leaf was emptied.
    struct Refill {
        std::size_t group;
        std::size_t level;
        std::size_t pos;
        std::optional<std::size_t> carry;
        bool active;
    };

    std::optional<Match> next_refill_match(Refill& f) {
        auto& levels = brackets_[f.group];
        while (f.active) {
            if (f.level + 1 == levels.size()) {
                f.active = false;
                break;
            }
            const std::size_t sib = f.pos ^ 1, parent = f.pos / 2;
            const auto sib_val = sib < levels[f.level].size() ? levels[f.level][sib] : std::nullopt;
            if (f.carry && sib_val) {
                const bool carry_is_left = (f.pos % 2) == 0;
                return carry_is_left ? Match{*sib_val, *f.carry} : Match{*f.carry, *sib_val};
            }
            const auto value = f.carry ? f.carry : sib_val;
            levels[f.level + 1][parent] = value;
            f.carry = value;
            f.pos = parent;
            ++f.level;
        }
        return std::nullopt;
    }

    void apply_refill(Refill& f, std::size_t winner) {
        f.pos /= 2;
        ++f.level;
        brackets_[f.group][f.level][f.pos] = winner;
        f.carry = winner;
    }

    // Walks the better-child path below the vacated root.
    struct Path {
        std::vector<std::size_t> positions{0};
        bool active = true;
    };

    std::optional<Match> next_path_match(Path& p) {
        while (p.active) {
            const std::size_t pos = p.positions.back(), l = 2 * pos + 1, r = l + 1;
            if (l >= heap_.size()) {
                p.active = false;
                break;
            }
            if (r < heap_.size()) return Match{heap_[r], heap_[l]};
            p.positions.push_back(l);
        }
        return std::nullopt;
    }

    void apply_path(Path& p, std::size_t winner) {
        const std::size_t l = 2 * p.positions.back() + 1;
        p.positions.push_back(winner == heap_[l] ? l : l + 1);
    }

    bool extract_all(PairOracle& oracle) {
        while (true) {
            const std::size_t root = heap_[0];
            extracted_.push_back(root);
            out_[root] = true;
            if (extracted_.size() == k_) return true;
            const std::size_t g = group_of_[root];
            --remaining_[g];

            std::optional<std::size_t> incoming;
            Refill refill{g, 0, leaf_of_[root], std::nullopt, remaining_[g] > 0};
            brackets_[g][0][leaf_of_[root]] = std::nullopt;
            if (!refill.active) {
                incoming = heap_.back();
                heap_.pop_back();
                if (heap_.size() == 1) {
                    heap_[0] = *incoming;
                    continue;
                }
            }

            Path path;
            while (true) {
                std::vector<Match> matches;
                const auto rm = next_refill_match(refill);
                const auto pm = next_path_match(path);
                if (rm) matches.push_back(*rm);
                if (pm) matches.push_back(*pm);
                if (matches.empty()) break;
                const auto winners = oracle.resolve(matches);
                if (winners.size() < matches.size()) return false;
                std::size_t w = 0;
                if (rm) apply_refill(refill, winners[w++]);
                if (pm) apply_path(path, winners[w]);
            }
            if (!incoming) incoming = refill.carry;

            // Sink the incoming champion along the path: it stops above the first
            // path element it beats.
            std::size_t stop = path.positions.size() - 1;
            for (std::size_t d = 1; d < path.positions.size(); ++d) {
                auto w = oracle.winner(*incoming, heap_[path.positions[d]]);
                if (!w) return false;
                if (*w == *incoming) {
                    stop = d - 1;
                    break;
                }
            }
            for (std::size_t d = 1; d <= stop; ++d) heap_[path.positions[d - 1]] = heap_[path.positions[d]];
            heap_[path.positions[stop]] = *incoming;
        }
    }

    bool polish_;
    std::vector<Bracket> brackets_;
    std::vector<std::size_t> group_of_;
    std::vector<std::size_t> leaf_of_;
    std::vector<std::size_t> remaining_;
    std::vector<bool> out_;
    std::vector<std::size_t> heap_;
    std::vector<std::size_t> extracted_;
    bool champions_ready_ = false;
    bool extraction_done_ = false;

    bool polishing_ = false;
    bool polish_done_ = false;
    std::vector<std::size_t> polish_order_;
    OutcomeMemo polish_memo_;
};

/// Bookkeeping of the anchor-based best-K selection.
struct PacState {
    std::vector<std::size_t> pool;      // prior top min(K*m, N)
    std::vector<std::size_t> anchors;   // pool members at prior ranks 0, 2, 4, ...
    std::map<std::size_t, std::vector<std::size_t>> winner_sets;  // non-anchor -> anchors it beat
    std::map<std::size_t, std::size_t> scores;
    std::vector<std::size_t> selected;  // score desc, then prior rank
};

/// Anchor-based best-K: every non-anchor pool member meets every anchor once, as
/// one independent set. A member's score is the number of anchors it beat. Anchors
/// are never compared with each other; an anchor scores the number of other
/// anchors with fewer wins against the pool (ties by prior rank), which places
/// anchors and members on the same 0..ceil(K/2)-1 scale.
class PacScheduler final : public Scheduler {
public:
    PacScheduler(const CandidateSet& c, std::size_t k, std::size_t m = 3, bool polish = true)
        : Scheduler(c, k), m_(m), polish_(polish), rank_(c.prior_ranks()) {
        if (m == 0) throw std::invalid_argument("pool multiplier m must be >= 1");
        const std::size_t pool_size = std::min(k_ * m_, c.size());
        state_.pool.assign(c.prior_order.begin(), c.prior_order.begin() + static_cast<std::ptrdiff_t>(pool_size));
        const std::size_t n_anchors = (k_ + 1) / 2;
        for (std::size_t a = 0; a < n_anchors; ++a) state_.anchors.push_back(state_.pool[2 * a]);
    }

    std::string_view name() const override { return polish_ ? "pac_bubble" : "pac"; }

    RankedPrefix snapshot() const override {
        if (!scored_) return prior_prefix();
        if (polishing_) return make_prefix(polish_order_, polish_done_);
        return make_prefix(state_.selected, !polish_);
    }

    const PacState& state() const noexcept { return state_; }

    /// Outcomes needed before the optional polish.
    std::size_t selection_comparisons() const noexcept {
        return (state_.pool.size() - state_.anchors.size()) * state_.anchors.size();
    }

protected:
    void execute(PairOracle& oracle) override {
        std::vector<bool> is_anchor(candidates_.size(), false);
        for (auto a : state_.anchors) is_anchor[a] = true;
        std::vector<std::size_t> members;
        for (auto d : state_.pool)
            if (!is_anchor[d]) members.push_back(d);

        std::vector<Match> matches;
        for (auto d : members)
            for (auto a : state_.anchors) matches.push_back({d, a});
        const auto winners = oracle.resolve(matches);
        if (winners.size() < matches.size()) return;

        std::map<std::size_t, std::size_t> anchor_wins;
        for (auto a : state_.anchors) anchor_wins[a] = 0;
        for (auto d : members) state_.winner_sets[d];
        for (std::size_t i = 0; i < matches.size(); ++i) {
            const auto [d, a] = matches[i];
            if (winners[i] == d)
                state_.winner_sets[d].push_back(a);
            else
                ++anchor_wins[a];
        }
        for (auto d : members) state_.scores[d] = state_.winner_sets[d].size();
        for (auto a : state_.anchors) {
            std::size_t beaten = 0;
            for (auto b : state_.anchors) {
                if (b == a) continue;
                if (anchor_wins[a] > anchor_wins[b] || (anchor_wins[a] == anchor_wins[b] && rank_[a] < rank_[b]))
                    ++beaten;
            }
            state_.scores[a] = beaten;
        }
        std::vector<std::size_t> ranked = state_.pool;
        std::stable_sort(ranked.begin(), ranked.end(), [&](std::size_t x, std::size_t y) {
            if (state_.scores[x] != state_.scores[y]) return state_.scores[x] > state_.scores[y];
            return rank_[x] < rank_[y];
        });
        ranked.resize(k_);
        state_.selected = ranked;
        scored_ = true;

        if (polish_) {
            polishing_ = true;
            polish_order_ = state_.selected;
            polish_done_ = bubble_passes(polish_order_, 0, polish_order_.size(), polish_order_.size() - 1,
                                         oracle, polish_memo_);
        }
    }

private:
    std::size_t m_;
    bool polish_;
    std::vector<std::size_t> rank_;
    PacState state_;
    bool scored_ = false;
    bool polishing_ = false;
    bool polish_done_ = false;
    std::vector<std::size_t> polish_order_;
    OutcomeMemo polish_memo_;
};

// ---------------------------------------------------------------------------
// Operation-level entry points
// ---------------------------------------------------------------------------

inline RankedPrefix bubble_topk(const CandidateSet& c, std::size_t k, PairOracle& oracle) {
    return BubbleScheduler(c, k).run(oracle);
}

inline RankedPrefix heapsort_topk(const CandidateSet& c, std::size_t k, PairOracle& oracle) {
    return HeapScheduler(c, k).run(oracle);
}

inline RankedPrefix quicksort_topk(const CandidateSet& c, std::size_t k, PairOracle& oracle) {
    return QuickScheduler(c, k).run(oracle);
}

inline RankedPrefix mohajer_topk(const CandidateSet& c, std::size_t k, PairOracle& oracle) {
    return MohajerScheduler(c, k).run(oracle);
}

/// Unordered best-K set (listed by score, then prior rank); no polish.
inline RankedPrefix pac_topk(const CandidateSet& c, std::size_t k, std::size_t m, PairOracle& oracle) {
    return PacScheduler(c, k, m, false).run(oracle);
}

/// Full bubble sort of a prefix (early exit, pairs cached). Outcomes are charged
/// to the oracle's ledger like any other comparison.
inline RankedPrefix bubble_polish(const RankedPrefix& prefix, PairOracle& oracle) {
    const auto& c = oracle.candidates();
    std::vector<std::size_t> order;
    for (const auto& id : prefix.items) {
        auto idx = c.index_of(id);
        if (!idx) throw UnknownDoc(id.str());
        order.push_back(*idx);
    }
    OutcomeMemo memo;
    const bool done = order.size() < 2 ||
                      bubble_passes(order, 0, order.size(), order.size() - 1, oracle, memo);
    RankedPrefix out;
    out.query_id = prefix.query_id;
    out.converged = prefix.converged && done;
    out.calls_used = oracle.calls_charged();
    for (auto i : order) out.items.push_back(c.docs[i].id);
    return out;
}

enum class SchedulerKind { bubble, heap, quick, mohajer, mohajer_bubble, pac_bubble };

inline constexpr SchedulerKind kAllSchedulers[] = {SchedulerKind::bubble,  SchedulerKind::heap,
                                                   SchedulerKind::quick,   SchedulerKind::mohajer,
                                                   SchedulerKind::mohajer_bubble, SchedulerKind::pac_bubble};

inline std::string_view to_string(SchedulerKind k) {
    switch (k) {
        case SchedulerKind::bubble: return "bubble";
        case SchedulerKind::heap: return "heap";
        case SchedulerKind::quick: return "quick";
        case SchedulerKind::mohajer: return "mohajer";
        case SchedulerKind::mohajer_bubble: return "mohajer_bubble";
        case SchedulerKind::pac_bubble: return "pac_bubble";
    }
    return "?";
}

inline SchedulerKind parse_scheduler_kind(std::string_view s) {
    for (auto k : kAllSchedulers)
        if (to_string(k) == s) return k;
    throw ConfigError("unknown scheduler: " + std::string(s));
}

inline std::unique_ptr<Scheduler> make_scheduler(SchedulerKind kind, const CandidateSet& c, std::size_t k,
                                                 std::size_t m = 3) {
    switch (kind) {
        case SchedulerKind::bubble: return std::make_unique<BubbleScheduler>(c, k);
        case SchedulerKind::heap: return std::make_unique<HeapScheduler>(c, k);
        case SchedulerKind::quick: return std::make_unique<QuickScheduler>(c, k);
        case SchedulerKind::mohajer: return std::make_unique<MohajerScheduler>(c, k, false);
        case SchedulerKind::mohajer_bubble: return std::make_unique<MohajerScheduler>(c, k, true);
        case SchedulerKind::pac_bubble: return std::make_unique<PacScheduler>(c, k, m, true);
    }
    throw std::logic_error("unhandled scheduler kind");
}

}  // namespace rankbudget
