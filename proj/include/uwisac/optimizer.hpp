// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <vector>

#include "uwisac/common.hpp"
#include "uwisac/metrics.hpp"
#include "uwisac/waveform.hpp"

namespace uwisac {

/// Everything a search needs to score candidates: one trial's channels,
/// noise, data frame and power vector. Immutable during a search.
template <typename Scalar>
struct SearchContext {
    std::vector<ChannelResponse<Scalar>> channels;
    VecR<Scalar> noise_var;
    SymbolFrame<Scalar> frame;
    VecR<Scalar> power;
    Scalar total_power = 1;
    int num_tx = 1;
    int oversample = 4;

    int num_subcarriers() const { return static_cast<int>(power.size()); }
    int num_users() const { return static_cast<int>(channels.size()); }
};

struct TdgrsConfig {
    int groups = 1;
    int e1 = 64;            // allocation shuffles per group
    int e2 = 8;             // interleave shuffles per group
    int feasible_cap = 8;   // retained allocation candidates per group
    double prr_min_kbpskm = 0.0;
    double papr_limit_db = std::numeric_limits<double>::infinity();
    std::uint64_t seed = 1;
};

struct HistoryPoint {
    long long shuffle_count = 0;
    double prr_si = 0;
};

/// Search outcome. When no candidate ever satisfied both the PRR and PAPR
/// constraints, feasible is false and the incumbent fields are meaningless.
struct SearchState {
    InterleavePattern w_best;
    AllocationMatrix x_best;
    double prr_best_si = 0;
    bool feasible = false;
    std::vector<HistoryPoint> history;  // incumbent change points
    long long total_shuffles = 0;
    long long pairs_enumerated = 0;
};

inline void validate_divisibility(int num_subcarriers, int num_tx, int num_users) {
    if (num_tx < 1 || num_users < 1 || num_subcarriers < 1)
        throw ConfigError("counts must be positive");
    if (num_subcarriers % num_tx != 0)
        throw ConfigError("num_tx must divide the subcarrier count");
    if (num_subcarriers % num_users != 0)
        throw ConfigError("num_users must divide the subcarrier count");
}

/// Round-robin starting point: element (k mod Mt), user (k mod Nu).
inline std::pair<InterleavePattern, AllocationMatrix> init_sequential(int num_subcarriers,
                                                                      int num_tx, int num_users) {
    validate_divisibility(num_subcarriers, num_tx, num_users);
    InterleavePattern w;
    w.num_elements = num_tx;
    w.assign.resize(num_subcarriers);
    AllocationMatrix x;
    x.num_users = num_users;
    x.assign.resize(num_subcarriers);
    for (int k = 0; k < num_subcarriers; ++k) {
        w.assign[k] = k % num_tx;
        x.assign[k] = k % num_users;
    }
    return {w, x};
}

/// Contiguous group block [group*K/G, (group+1)*K/G).
inline std::pair<int, int> group_range(int num_subcarriers, int group, int num_groups) {
    if (num_groups < 1 || num_subcarriers % num_groups != 0)
        throw ConfigError("group count must divide the subcarrier count");
    if (group < 0 || group >= num_groups) throw std::invalid_argument("group index out of range");
    const int size = num_subcarriers / num_groups;
    return {group * size, (group + 1) * size};
}

/// Uniformly permute the labels inside one contiguous group; everything
/// outside the group is untouched, so per-label counts are preserved.
inline VecI shuffle_group(const VecI& assign, int group, int num_groups, Rng& rng) {
    auto [lo, hi] = group_range(static_cast<int>(assign.size()), group, num_groups);
    VecI result = assign;
    rng.shuffle(result.data() + lo, hi - lo);
    return result;
}

/// RNG stream for candidate e of (group, step); keyed derivation keeps
/// results independent of evaluation order.
inline Rng rng_for(std::uint64_t seed, int group, int step, int candidate) {
    return Rng(mix_seed(seed, static_cast<std::uint64_t>(group) + 1,
                        static_cast<std::uint64_t>(step),
                        static_cast<std::uint64_t>(candidate) + 1));
}

namespace detail {

/// Distinct multiset permutations of `labels`, saturating at cap + 1.
inline std::uint64_t distinct_permutations_capped(std::vector<int> labels, std::uint64_t cap) {
    std::sort(labels.begin(), labels.end());
    const std::uint64_t limit = cap + 1;
    unsigned __int128 result = 1;
    std::size_t remaining = labels.size();
    std::size_t i = 0;
    while (i < labels.size()) {
        std::size_t run = 1;
        while (i + run < labels.size() && labels[i + run] == labels[i]) ++run;
        // multiply by C(remaining, run)
        unsigned __int128 binom = 1;
        for (std::size_t step = 1; step <= run; ++step) {
            binom = binom * (remaining - run + step) / step;
            if (binom > limit) return limit;
        }
        result *= binom;
        if (result > limit) return limit;
        remaining -= run;
        i += run;
    }
    return static_cast<std::uint64_t>(result);
}

/// Candidate group contents for one (group, step): all distinct permutations
/// when the group space fits within the shuffle budget, otherwise `budget`
/// seeded uniform shuffles. Random search over a space smaller than its
/// budget degenerates to enumeration, which keeps every draw informative.
inline std::vector<VecI> group_candidates(const VecI& base, int group, int num_groups, int budget,
                                          std::uint64_t seed, int step) {
    auto [lo, hi] = group_range(static_cast<int>(base.size()), group, num_groups);
    std::vector<int> labels(base.data() + lo, base.data() + hi);
    const std::uint64_t space =
        distinct_permutations_capped(labels, static_cast<std::uint64_t>(budget));
    std::vector<VecI> candidates;
    if (space <= static_cast<std::uint64_t>(budget)) {
        std::sort(labels.begin(), labels.end());
        do {
            VecI candidate = base;
            std::copy(labels.begin(), labels.end(), candidate.data() + lo);
            candidates.push_back(std::move(candidate));
        } while (std::next_permutation(labels.begin(), labels.end()));
    } else {
        candidates.reserve(static_cast<std::size_t>(budget));
        for (int e = 0; e < budget; ++e) {
            Rng rng = rng_for(seed, group, step, e);
            candidates.push_back(shuffle_group(base, group, num_groups, rng));
        }
    }
    return candidates;
}

}  // namespace detail

/// Two-dimensional grouped random search: per group, Step I shuffles the
/// allocation and keeps the best candidates meeting the per-user PRR floor;
/// Step II shuffles the interleave, pairs it with the retained allocations,
/// filters by per-element PAPR and promotes the best feasible pair. The
/// incumbent reseeds the remaining groups whenever it improves.
template <typename Scalar>
SearchState tdgrs(const TdgrsConfig& cfg, const SearchContext<Scalar>& ctx) {
    const int num_subcarriers = ctx.num_subcarriers();
    const int num_users = ctx.num_users();
    validate_divisibility(num_subcarriers, ctx.num_tx, num_users);
    if (cfg.groups < 1 || num_subcarriers % cfg.groups != 0)
        throw ConfigError("groups must divide the subcarrier count");
    const int group_size = num_subcarriers / cfg.groups;
    if (group_size % ctx.num_tx != 0 || group_size % num_users != 0)
        throw ConfigError("group size must be divisible by num_tx and num_users");
    if (cfg.e1 < 1 || cfg.e2 < 1 || cfg.feasible_cap < 1)
        throw ConfigError("e1, e2 and feasible_cap must be >= 1");

    const Scalar prr_min_si = Scalar(cfg.prr_min_kbpskm * kPrrSiPerKbpsKm);
    const double papr_limit = cfg.papr_limit_db;

    auto [w0, x0] = init_sequential(num_subcarriers, ctx.num_tx, num_users);
    SearchState state;
    state.w_best = w0;
    state.x_best = x0;

    auto papr_ok = [&](const InterleavePattern& w, const AllocationMatrix& x) {
        if (!std::isfinite(papr_limit)) return true;
        const auto papr = papr_all_elements(w, x, ctx.power, ctx.frame, ctx.channels,
                                            ctx.oversample);
        return static_cast<double>(papr.maxCoeff()) <= papr_limit;
    };

    struct ScoredAllocation {
        AllocationMatrix x;
        double total_prr;
        std::size_t order;  // discovery index, for deterministic ties
    };

    auto score = [&](const AllocationMatrix& x) {
        const auto report = prr(x, ctx.power, ctx.channels, ctx.noise_var);
        const double min_user = static_cast<double>(report.per_user_prr.minCoeff());
        return std::pair<double, double>(static_cast<double>(report.total_prr), min_user);
    };

    // The starting pattern is a candidate too: adopt it when it is feasible.
    {
        const auto [total, min_user] = score(x0);
        if (min_user >= static_cast<double>(prr_min_si) && papr_ok(w0, x0)) {
            state.feasible = true;
            state.prr_best_si = total;
            state.history.push_back({0, total});
        }
    }

    for (int group = 0; group < cfg.groups; ++group) {
        // Step I: filter allocation candidates on the per-user PRR floor.
        std::vector<ScoredAllocation> kept;
        {
            auto x_candidates =
                detail::group_candidates(x0.assign, group, cfg.groups, cfg.e1, cfg.seed, 1);
            for (std::size_t e = 0; e < x_candidates.size(); ++e) {
                AllocationMatrix candidate{std::move(x_candidates[e]), num_users};
                const auto [total, min_user] = score(candidate);
                if (min_user < static_cast<double>(prr_min_si)) continue;
                kept.push_back({std::move(candidate), total, e});
            }
            std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
                if (a.total_prr != b.total_prr) return a.total_prr > b.total_prr;
                return a.order < b.order;
            });
            if (kept.size() > static_cast<std::size_t>(cfg.feasible_cap))
                kept.resize(static_cast<std::size_t>(cfg.feasible_cap));
        }

        // Step II: pair interleave shuffles with the retained allocations and
        // select the group's best feasible pair. The incumbent and the seed
        // pattern for the remaining groups update once per group.
        double group_best = state.feasible ? state.prr_best_si : 0.0;
        bool group_found = false;
        const InterleavePattern* group_w = nullptr;
        const ScoredAllocation* group_x = nullptr;
        auto w_candidates =
            detail::group_candidates(w0.assign, group, cfg.groups, cfg.e2, cfg.seed, 2);
        std::vector<InterleavePattern> w_pool;
        w_pool.reserve(w_candidates.size());
        for (auto& w_assign : w_candidates)
            w_pool.push_back(InterleavePattern{std::move(w_assign), ctx.num_tx});
        for (const auto& candidate_w : w_pool) {
            ++state.total_shuffles;
            for (const auto& scored : kept) {
                ++state.pairs_enumerated;
                if ((state.feasible || group_found) && scored.total_prr <= group_best) break;
                if (!papr_ok(candidate_w, scored.x)) continue;
                group_best = scored.total_prr;
                group_found = true;
                group_w = &candidate_w;
                group_x = &scored;
                break;
            }
        }
        if (group_found && (!state.feasible || group_best > state.prr_best_si)) {
            state.feasible = true;
            state.prr_best_si = group_best;
            state.w_best = *group_w;
            state.x_best = group_x->x;
            state.history.push_back({state.total_shuffles, state.prr_best_si});
            w0 = state.w_best;
            x0 = state.x_best;
        }
    }
    return state;
}

/// Full enumeration over all structurally valid (W, X) pairs; the ground
/// truth for small instances. Refuses instances beyond the candidate budget.
template <typename Scalar>
SearchState exhaustive_search(const SearchContext<Scalar>& ctx, double prr_min_kbpskm,
                              double papr_limit_db, std::uint64_t budget = 10'000'000) {
    const int num_subcarriers = ctx.num_subcarriers();
    const int num_users = ctx.num_users();
    validate_divisibility(num_subcarriers, ctx.num_tx, num_users);
    auto [w0, x0] = init_sequential(num_subcarriers, ctx.num_tx, num_users);

    std::vector<int> w_labels(w0.assign.data(), w0.assign.data() + num_subcarriers);
    std::vector<int> x_labels(x0.assign.data(), x0.assign.data() + num_subcarriers);
    const std::uint64_t w_space = detail::distinct_permutations_capped(w_labels, budget);
    const std::uint64_t x_space = detail::distinct_permutations_capped(x_labels, budget);
    if (w_space > budget || x_space > budget || w_space > budget / x_space)
        throw std::length_error("exhaustive_search: candidate space exceeds budget");

    const Scalar prr_min_si = Scalar(prr_min_kbpskm * kPrrSiPerKbpsKm);
    SearchState state;
    state.w_best = w0;
    state.x_best = x0;

    std::sort(x_labels.begin(), x_labels.end());
    do {
        AllocationMatrix x;
        x.num_users = num_users;
        x.assign = Eigen::Map<const VecI>(x_labels.data(), num_subcarriers);
        const auto report = prr(x, ctx.power, ctx.channels, ctx.noise_var);
        const double total = static_cast<double>(report.total_prr);
        const bool meets_floor =
            static_cast<double>(report.per_user_prr.minCoeff()) >= static_cast<double>(prr_min_si);
        VecC<Scalar> dbar;
        if (meets_floor) dbar = modified_symbols(x, ctx.frame, ctx.channels);

        std::sort(w_labels.begin(), w_labels.end());
        do {
            ++state.pairs_enumerated;
            if (!meets_floor) continue;
            if (state.feasible && total <= state.prr_best_si) continue;
            InterleavePattern w;
            w.num_elements = ctx.num_tx;
            w.assign = Eigen::Map<const VecI>(w_labels.data(), num_subcarriers);
            if (std::isfinite(papr_limit_db)) {
                double worst = 0;
                for (int m = 0; m < ctx.num_tx; ++m)
                    worst = std::max(worst, static_cast<double>(papr_db(synth_element_signal(
                                                m, w, ctx.power, dbar, ctx.oversample))));
                if (worst > papr_limit_db) continue;
            }
            state.feasible = true;
            state.prr_best_si = total;
            state.w_best = w;
            state.x_best = x;
            state.history.push_back({state.pairs_enumerated, total});
        } while (std::next_permutation(w_labels.begin(), w_labels.end()));
    } while (std::next_permutation(x_labels.begin(), x_labels.end()));
    return state;
}

/// Uniform random baseline: `trials` independent structural (W, X) draws
/// from one stream, keeping the best feasible one.
template <typename Scalar>
SearchState baseline_random(int trials, const SearchContext<Scalar>& ctx, double prr_min_kbpskm,
                            double papr_limit_db, std::uint64_t seed) {
    if (trials < 1) throw ConfigError("baseline_random: trials must be >= 1");
    const int num_subcarriers = ctx.num_subcarriers();
    auto [w0, x0] = init_sequential(num_subcarriers, ctx.num_tx, ctx.num_users());
    const Scalar prr_min_si = Scalar(prr_min_kbpskm * kPrrSiPerKbpsKm);

    SearchState state;
    state.w_best = w0;
    state.x_best = x0;
    Rng rng(mix_seed(seed, 0x72616e64ULL));
    for (int trial = 0; trial < trials; ++trial) {
        InterleavePattern w = w0;
        AllocationMatrix x = x0;
        rng.shuffle(w.assign.data(), num_subcarriers);
        rng.shuffle(x.assign.data(), num_subcarriers);
        ++state.total_shuffles;
        ++state.pairs_enumerated;
        const auto report = prr(x, ctx.power, ctx.channels, ctx.noise_var);
        const double total = static_cast<double>(report.total_prr);
        if (static_cast<double>(report.per_user_prr.minCoeff()) <
            static_cast<double>(prr_min_si))
            continue;
        if (state.feasible && total <= state.prr_best_si) continue;
        if (std::isfinite(papr_limit_db)) {
            const auto papr =
                papr_all_elements(w, x, ctx.power, ctx.frame, ctx.channels, ctx.oversample);
            if (static_cast<double>(papr.maxCoeff()) > papr_limit_db) continue;
        }
        state.feasible = true;
        state.prr_best_si = total;
        state.w_best = w;
        state.x_best = x;
        state.history.push_back({state.total_shuffles, total});
    }
    return state;
}

/// Fixed round-robin baseline: the sequential pattern, accepted or not.
template <typename Scalar>
SearchState baseline_sequential(const SearchContext<Scalar>& ctx, double prr_min_kbpskm,
                                double papr_limit_db) {
    auto [w0, x0] = init_sequential(ctx.num_subcarriers(), ctx.num_tx, ctx.num_users());
    const Scalar prr_min_si = Scalar(prr_min_kbpskm * kPrrSiPerKbpsKm);
    SearchState state;
    state.w_best = w0;
    state.x_best = x0;
    state.pairs_enumerated = 1;
    const auto report = prr(x0, ctx.power, ctx.channels, ctx.noise_var);
    if (static_cast<double>(report.per_user_prr.minCoeff()) < static_cast<double>(prr_min_si))
        return state;
    if (std::isfinite(papr_limit_db)) {
        const auto papr =
            papr_all_elements(w0, x0, ctx.power, ctx.frame, ctx.channels, ctx.oversample);
        if (static_cast<double>(papr.maxCoeff()) > papr_limit_db) return state;
    }
    state.feasible = true;
    state.prr_best_si = static_cast<double>(report.total_prr);
    state.history.push_back({0, state.prr_best_si});
    return state;
}

}  // namespace uwisac
