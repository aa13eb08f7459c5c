// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cstdlib>
#include <optional>
#include <thread>
#include <vector>

#include "uwisac/io.hpp"
#include "uwisac/optimizer.hpp"
#include "uwisac/scenario.hpp"
#include "uwisac/sensing.hpp"

namespace uwisac {

namespace seedtag {
inline constexpr std::uint64_t kChannel = 0x6368616eULL;
inline constexpr std::uint64_t kFrame = 0x6672616dULL;
inline constexpr std::uint64_t kSearch = 0x73726368ULL;
inline constexpr std::uint64_t kTrial = 0x7472696cULL;
}  // namespace seedtag

/// Per-user channels for one trial: synthesized from seeded multipath draws,
/// or loaded from the scenario's channel CSV when one is configured.
inline std::vector<ChannelResponse<double>> build_channels(const Scenario& scenario,
                                                           std::uint64_t trial_seed) {
    const auto freqs = scenario.freqs();
    if (scenario.channel_csv) {
        auto channels = read_channels_csv(*scenario.channel_csv, freqs);
        if (static_cast<int>(channels.size()) < scenario.num_users)
            throw ConfigError("imported channel file covers fewer users than num_users");
        channels.resize(static_cast<std::size_t>(scenario.num_users));
        return channels;
    }
    std::vector<ChannelResponse<double>> channels;
    const auto prop = scenario.propagation();
    for (int n = 0; n < scenario.num_users; ++n) {
        const auto& user = scenario.users[static_cast<std::size_t>(n)];
        MultipathGeometry<double> geometry{scenario.water_depth_m, scenario.array_depth_m,
                                           user.depth_m, user.horizontal_range_m};
        const auto paths =
            random_multipath(mix_seed(trial_seed, seedtag::kChannel, static_cast<std::uint64_t>(n)),
                             geometry, user.paths, scenario.sound_speed_mps);
        const double range = std::hypot(user.horizontal_range_m,
                                        user.depth_m - scenario.array_depth_m);
        channels.push_back(synth_channel(paths, freqs, prop, range, n));
    }
    return channels;
}

/// Assemble the immutable per-trial search context.
inline SearchContext<double> make_context(const Scenario& scenario, std::uint64_t trial_seed) {
    SearchContext<double> ctx;
    ctx.channels = build_channels(scenario, trial_seed);
    ctx.noise_var = noise_variances(scenario.freqs(), scenario.noise);
    Rng frame_rng(mix_seed(trial_seed, seedtag::kFrame));
    ctx.frame = SymbolFrame<double>::random(scenario.num_users,
                                            scenario.num_subcarriers / scenario.num_users,
                                            scenario.psk_order, frame_rng);
    ctx.power = uniform_power(scenario.num_subcarriers, scenario.total_power_w);
    ctx.total_power = scenario.total_power_w;
    ctx.num_tx = scenario.num_tx;
    ctx.oversample = scenario.oversample;
    return ctx;
}

struct TrialResult {
    std::uint64_t trial_seed = 0;
    SearchState state;
    PrrReport<double> report;
    FeasibilityReport feasibility;
    VecR<double> papr_db_per_element;
    std::optional<DelayProfile<double>> profile;
};

/// One seeded Monte Carlo draw: build the context, run TDGRS, evaluate the
/// incumbent. Deterministic per trial_seed.
inline TrialResult run_trial(const Scenario& scenario, const TdgrsConfig& cfg,
                             std::uint64_t trial_seed) {
    TrialResult result;
    result.trial_seed = trial_seed;
    const auto ctx = make_context(scenario, trial_seed);
    TdgrsConfig trial_cfg = cfg;
    trial_cfg.seed = mix_seed(trial_seed, seedtag::kSearch);
    result.state = tdgrs(trial_cfg, ctx);

    result.report = prr(result.state.x_best, ctx.power, ctx.channels, ctx.noise_var);
    result.papr_db_per_element = papr_all_elements(result.state.w_best, result.state.x_best,
                                                   ctx.power, ctx.frame, ctx.channels,
                                                   ctx.oversample);
    result.feasibility = check_feasibility(
        result.state.w_best, result.state.x_best, ctx.power, ctx.frame, ctx.channels,
        ctx.noise_var, cfg.prr_min_kbpskm * kPrrSiPerKbpsKm, cfg.papr_limit_db,
        ctx.total_power, ctx.oversample);
    if (!scenario.targets.empty()) {
        double lo = scenario.targets.front().delay_s;
        double hi = lo;
        for (const auto& target : scenario.targets) {
            lo = std::min(lo, target.delay_s);
            hi = std::max(hi, target.delay_s);
        }
        const auto grid = default_tau_grid(scenario.bandwidth_hz, lo, hi);
        result.profile = delay_profile(ctx.power, scenario.freqs(), scenario.targets.front(),
                                       grid);
    }
    return result;
}

/// First shuffle count at which the incumbent reached `fraction` of the
/// final PRR; the full shuffle budget when the search never got there
/// (e.g. infeasible runs).
inline long long shuffles_to_fraction(const SearchState& state, double fraction) {
    if (!state.feasible) return state.total_shuffles;
    const double threshold = fraction * state.prr_best_si;
    for (const auto& point : state.history)
        if (point.prr_si >= threshold) return point.shuffle_count;
    return state.total_shuffles;
}

struct SweepRow {
    double value = 0;
    double mean_prr_kbpskm = 0;
    double std_prr = 0;
    double infeasible_frac = 0;
    double mean_shuffles_95 = 0;
};

inline int resolve_thread_count(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("ISAC_ALLOC_THREADS")) {
        const int parsed = std::atoi(env);
        if (parsed > 0) return parsed;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Apply a sweep variable to a (scenario, config) pair.
inline void apply_sweep_value(const std::string& variable, double value, Scenario& scenario,
                              TdgrsConfig& cfg) {
    if (variable == "prr_min") {
        cfg.prr_min_kbpskm = value;
    } else if (variable == "papr_0") {
        cfg.papr_limit_db = value;
    } else if (variable == "groups") {
        cfg.groups = static_cast<int>(value);
    } else if (variable == "e1") {
        cfg.e1 = static_cast<int>(value);
    } else if (variable == "e2") {
        cfg.e2 = static_cast<int>(value);
    } else if (variable == "Nu") {
        scenario.num_users = static_cast<int>(value);
        if (static_cast<int>(scenario.users.size()) < scenario.num_users)
            throw ConfigError("scenario.users lists fewer users than the swept Nu");
        validate_divisibility(scenario.num_subcarriers, scenario.num_tx, scenario.num_users);
    } else {
        throw ConfigError("unknown sweep variable: " + variable);
    }
}

/// Run trials across worker threads. Trial seeds are position-derived, and
/// results land in a preallocated slot per trial, so any schedule produces
/// the same aggregate.
template <typename Fn>
void parallel_trials(int trials, int threads, Fn&& body) {
    const int workers = std::max(1, std::min(threads, trials));
    if (workers == 1) {
        for (int t = 0; t < trials; ++t) body(t);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&]() {
            for (;;) {
                const int t = next.fetch_add(1);
                if (t >= trials) return;
                body(t);
            }
        });
    for (auto& worker : pool) worker.join();
}

/// Monte Carlo sweep over one variable; per value, aggregates final PRR,
/// infeasible fraction and shuffles-to-95%-of-final over seeded trials.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, int threads = 0) {
    const int workers = resolve_thread_count(threads);
    std::vector<SweepRow> rows;
    for (std::size_t vi = 0; vi < spec.values.size(); ++vi) {
        Scenario scenario = spec.base;
        TdgrsConfig cfg = spec.base_cfg;
        apply_sweep_value(spec.variable, spec.values[vi], scenario, cfg);

        // Trial seeds depend on the trial index only: sweep columns share
        // the same Monte Carlo draws, so constraint relaxations compare on
        // common random numbers.
        std::vector<TrialResult> results(static_cast<std::size_t>(spec.trials));
        parallel_trials(spec.trials, workers, [&](int t) {
            const std::uint64_t trial_seed =
                mix_seed(scenario.seed, seedtag::kTrial, static_cast<std::uint64_t>(t));
            results[static_cast<std::size_t>(t)] = run_trial(scenario, cfg, trial_seed);
        });

        SweepRow row;
        row.value = spec.values[vi];
        int feasible = 0;
        double sum = 0;
        double sum_sq = 0;
        double shuffles = 0;
        for (const auto& result : results) {
            if (!result.state.feasible) continue;
            ++feasible;
            const double prr_kbpskm = result.state.prr_best_si / kPrrSiPerKbpsKm;
            sum += prr_kbpskm;
            sum_sq += prr_kbpskm * prr_kbpskm;
            shuffles += static_cast<double>(shuffles_to_fraction(result.state, 0.95));
        }
        row.infeasible_frac = 1.0 - static_cast<double>(feasible) / spec.trials;
        if (feasible > 0) {
            row.mean_prr_kbpskm = sum / feasible;
            const double variance =
                std::max(0.0, sum_sq / feasible - row.mean_prr_kbpskm * row.mean_prr_kbpskm);
            row.std_prr = std::sqrt(variance);
            row.mean_shuffles_95 = shuffles / feasible;
        } else {
            row.mean_prr_kbpskm = std::numeric_limits<double>::quiet_NaN();
            row.std_prr = std::numeric_limits<double>::quiet_NaN();
            row.mean_shuffles_95 = std::numeric_limits<double>::quiet_NaN();
        }
        rows.push_back(row);
    }
    return rows;
}

inline void write_sweep_csv(const std::string& file, const std::vector<SweepRow>& rows) {
    auto out = iodetail::open_out(file);
    out << "sweep_value,mean_prr_kbpskm,std_prr,infeasible_frac,mean_shuffles_95\n";
    for (const auto& row : rows)
        out << format_full(row.value) << ',' << format_full(row.mean_prr_kbpskm) << ','
            << format_full(row.std_prr) << ',' << format_full(row.infeasible_frac) << ','
            << format_full(row.mean_shuffles_95) << '\n';
}

inline std::string sweep_table_text(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "sweep_value,mean_prr_kbpskm,std_prr,infeasible_frac,mean_shuffles_95\n";
    for (const auto& row : rows)
        out << format_full(row.value) << ',' << format_full(row.mean_prr_kbpskm) << ','
            << format_full(row.std_prr) << ',' << format_full(row.infeasible_frac) << ','
            << format_full(row.mean_shuffles_95) << '\n';
    return out.str();
}

}  // namespace uwisac
