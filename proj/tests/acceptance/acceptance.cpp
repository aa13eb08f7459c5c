// SPDX-License-Identifier: Apache-2.0
//
// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line;
// run with no arguments for all criteria or with a list of numbers.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "uwisac/harness.hpp"

using namespace uwisac;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Scenario desk_scenario(int num_users) {
    Scenario sc;
    sc.num_subcarriers = 64;
    sc.num_tx = 4;
    sc.num_rx = 4;
    sc.num_users = num_users;
    sc.carrier_hz = 1000.0;
    sc.bandwidth_hz = 4000.0;
    sc.tx_gain = 4000.0;
    sc.rx_gain = 4000.0;
    sc.noise = {0.5, 2.0};
    sc.seed = 1;
    sc.users = {{110.0, 800.0, 6}, {30.0, 5000.0, 6}, {100.0, 3500.0, 6}, {115.0, 2000.0, 6}};
    return sc;
}

/// Small random-channel instance for the exhaustive-oracle comparisons.
SearchContext<double> tiny_context(int num_subcarriers, int num_tx, int num_users,
                                   std::uint64_t seed) {
    SearchContext<double> ctx;
    const auto freqs = subcarrier_frequencies<double>(num_subcarriers, 1000.0, 4000.0);
    Rng rng(seed);
    for (int n = 0; n < num_users; ++n) {
        ChannelResponse<double> ch;
        ch.user_id = n;
        ch.range_m = rng.uniform(400.0, 4000.0);
        ch.freqs_hz = freqs;
        ch.h.resize(num_subcarriers);
        for (int k = 0; k < num_subcarriers; ++k)
            ch.h[k] = std::polar(rng.uniform(0.1, 2.0), rng.uniform(0.0, 6.28));
        ctx.channels.push_back(ch);
    }
    ctx.noise_var = VecR<double>::Constant(num_subcarriers, 1e-2);
    Rng frame_rng(seed ^ 0xf00d);
    ctx.frame = SymbolFrame<double>::random(num_users, num_subcarriers / num_users, 4, frame_rng);
    ctx.power = uniform_power<double>(num_subcarriers, 1.0);
    ctx.total_power = 1.0;
    ctx.num_tx = num_tx;
    ctx.oversample = 4;
    return ctx;
}

double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
    const std::size_t n = xs.size();
    auto ranks = [n](const std::vector<double>& values) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        std::vector<double> rank(n);
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
            const double average = 0.5 * (i + j) + 1.0;
            for (std::size_t t = i; t <= j; ++t) rank[order[t]] = average;
            i = j + 1;
        }
        return rank;
    };
    const auto rx = ranks(xs);
    const auto ry = ranks(ys);
    double mean_x = 0, mean_y = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_x += rx[i];
        mean_y += ry[i];
    }
    mean_x /= n;
    mean_y /= n;
    double cov = 0, var_x = 0, var_y = 0;
    for (std::size_t i = 0; i < n; ++i) {
        cov += (rx[i] - mean_x) * (ry[i] - mean_y);
        var_x += (rx[i] - mean_x) * (rx[i] - mean_x);
        var_y += (ry[i] - mean_y) * (ry[i] - mean_y);
    }
    return cov / std::sqrt(var_x * var_y);
}

double percentile(std::vector<double> values, double fraction) {
    std::sort(values.begin(), values.end());
    const auto idx = static_cast<std::size_t>(fraction * (values.size() - 1));
    return values[idx];
}

// ---- criterion 1: beam-pattern flatness ------------------------------------

bool criterion_1(std::string& detail) {
    const int num_subcarriers = 64;
    const int num_tx = 4;
    const double total_power = 1.0;
    const auto freqs = subcarrier_frequencies<double>(num_subcarriers, 1000.0, 4000.0);
    const auto power = uniform_power<double>(num_subcarriers, total_power);
    VecR<double> theta_grid(181);
    for (int i = 0; i < 181; ++i) theta_grid[i] = (-90.0 + i) * EIGEN_PI / 180.0;

    auto [w, x] = init_sequential(num_subcarriers, num_tx, 2);
    Rng rng(2001);
    double worst = 0.0;
    for (int draw = 0; draw < 1000; ++draw) {
        InterleavePattern candidate = w;
        rng.shuffle(candidate.assign.data(), num_subcarriers);
        const auto gain = beam_pattern(candidate, power, theta_grid, freqs, 3.0);
        for (Eigen::Index i = 0; i < gain.size(); ++i)
            worst = std::max(worst, std::abs(gain[i] - total_power));
    }
    detail = "max |G(theta) - P_total| = " + format_short(worst);
    return worst < 1e-9 * total_power;
}

// ---- criterion 2: exhaustive-oracle equivalence -----------------------------

bool criterion_2(std::string& detail) {
    const int seeds = 100;
    int loose_hits = 0;
    int constrained_hits = 0;
    for (int s = 0; s < seeds; ++s) {
        const auto ctx = tiny_context(8, 2, 2, 5000 + static_cast<std::uint64_t>(s));

        const auto truth = exhaustive_search(ctx, 0.0, kInf);
        TdgrsConfig cfg;
        cfg.groups = 1;
        cfg.e1 = 200;
        cfg.e2 = 200;
        cfg.feasible_cap = 8;
        cfg.seed = 9000 + static_cast<std::uint64_t>(s);
        const auto found = tdgrs(cfg, ctx);
        if (truth.feasible && found.feasible &&
            std::abs(found.prr_best_si - truth.prr_best_si) <= 1e-9 * truth.prr_best_si)
            ++loose_hits;

        // binding ceiling at the 30th percentile of all candidate pair PAPRs
        std::vector<double> pair_paprs;
        pair_paprs.reserve(4900);
        auto [w0, x0] = init_sequential(8, 2, 2);
        std::vector<int> w_labels(w0.assign.data(), w0.assign.data() + 8);
        std::vector<int> x_labels(x0.assign.data(), x0.assign.data() + 8);
        std::sort(x_labels.begin(), x_labels.end());
        do {
            AllocationMatrix x;
            x.num_users = 2;
            x.assign = Eigen::Map<const VecI>(x_labels.data(), 8);
            const auto dbar = modified_symbols(x, ctx.frame, ctx.channels);
            std::sort(w_labels.begin(), w_labels.end());
            do {
                InterleavePattern w;
                w.num_elements = 2;
                w.assign = Eigen::Map<const VecI>(w_labels.data(), 8);
                double worst = 0;
                for (int m = 0; m < 2; ++m)
                    worst = std::max(worst, papr_db(synth_element_signal(m, w, ctx.power, dbar,
                                                                         ctx.oversample)));
                pair_paprs.push_back(worst);
            } while (std::next_permutation(w_labels.begin(), w_labels.end()));
        } while (std::next_permutation(x_labels.begin(), x_labels.end()));
        const double ceiling = percentile(pair_paprs, 0.30);

        const auto truth_capped = exhaustive_search(ctx, 0.0, ceiling);
        TdgrsConfig capped_cfg = cfg;
        capped_cfg.papr_limit_db = ceiling;
        const auto found_capped = tdgrs(capped_cfg, ctx);
        const bool agree =
            truth_capped.feasible == found_capped.feasible &&
            (!truth_capped.feasible ||
             std::abs(found_capped.prr_best_si - truth_capped.prr_best_si) <=
                 1e-9 * truth_capped.prr_best_si);
        if (agree) ++constrained_hits;
    }
    detail = "loose " + std::to_string(loose_hits) + "/100, constrained " +
             std::to_string(constrained_hits) + "/100";
    return loose_hits >= 99 && constrained_hits >= 95;
}

// ---- criterion 3: convergence trend over G ----------------------------------

bool criterion_3(std::string& detail) {
    Scenario sc = desk_scenario(2);
    const int trials = 200;

    // Budgets mirror the unequal-length convergence comparison: the single
    // group runs an order of magnitude more shuffles to approach its own
    // plateau; the grouped search spends 64 shuffles total.
    TdgrsConfig slow;  // G = 1
    slow.groups = 1;
    slow.e1 = 32768;
    slow.e2 = 320;
    slow.feasible_cap = 8;
    TdgrsConfig fast;  // G = 8
    fast.groups = 8;
    fast.e1 = 32;
    fast.e2 = 8;
    fast.feasible_cap = 8;

    double t95_slow = 0, t95_fast = 0, fin_slow = 0, fin_fast = 0;
    int feas_slow = 0, feas_fast = 0;
    for (int t = 0; t < trials; ++t) {
        const auto seed = mix_seed(sc.seed, seedtag::kTrial, static_cast<std::uint64_t>(t));
        const auto ctx = make_context(sc, seed);
        TdgrsConfig a = slow;
        a.seed = mix_seed(seed, seedtag::kSearch);
        TdgrsConfig b = fast;
        b.seed = a.seed;
        const auto sa = tdgrs(a, ctx);
        const auto sb = tdgrs(b, ctx);
        if (sa.feasible) {
            ++feas_slow;
            t95_slow += static_cast<double>(shuffles_to_fraction(sa, 0.95));
            fin_slow += sa.prr_best_si / kPrrSiPerKbpsKm;
        }
        if (sb.feasible) {
            ++feas_fast;
            t95_fast += static_cast<double>(shuffles_to_fraction(sb, 0.95));
            fin_fast += sb.prr_best_si / kPrrSiPerKbpsKm;
        }
    }
    t95_slow /= feas_slow;
    fin_slow /= feas_slow;
    t95_fast /= feas_fast;
    fin_fast /= feas_fast;
    detail = "t95 G8 " + format_short(t95_fast) + " vs G1 " + format_short(t95_slow) +
             " (ratio " + format_short(t95_fast / t95_slow) + "), finals G1 " +
             format_short(fin_slow) + " vs G8 " + format_short(fin_fast) + " kbps*km";
    return t95_fast <= 0.25 * t95_slow && fin_slow >= 0.95 * fin_fast && feas_slow == trials &&
           feas_fast == trials;
}

// ---- criterion 4: prr_min sweep trend ----------------------------------------

bool criterion_4(std::string& detail) {
    Scenario sc = desk_scenario(4);
    const int trials = 100;
    // floors chosen inside the binding band of this scenario: below ~4.3 the
    // constraint is inactive (exactly tied means), above ~5.1 most trials are
    // infeasible and survivor bias distorts the mean
    const std::vector<double> grid = {4.25, 4.4, 4.55, 4.7, 4.85, 5.0};

    TdgrsConfig cfg;
    cfg.groups = 8;
    cfg.e1 = 80;
    cfg.e2 = 8;
    cfg.feasible_cap = 8;
    cfg.papr_limit_db = kInf;

    std::vector<double> mean_prr;
    std::vector<double> infeasible_frac;
    std::vector<int> tdgrs_feasible(grid.size(), 0);
    std::vector<int> random_feasible(grid.size(), 0);
    std::vector<int> sequential_feasible(grid.size(), 0);
    std::vector<double> spearman_grid;
    std::vector<double> spearman_mean;
    for (std::size_t vi = 0; vi < grid.size(); ++vi) {
        int feasible = 0;
        double sum = 0;
        for (int t = 0; t < trials; ++t) {
            const auto seed = mix_seed(sc.seed, seedtag::kTrial, static_cast<std::uint64_t>(t));
            const auto ctx = make_context(sc, seed);
            TdgrsConfig c = cfg;
            c.prr_min_kbpskm = grid[vi];
            c.seed = mix_seed(seed, seedtag::kSearch);
            const auto state = tdgrs(c, ctx);
            if (state.feasible) {
                ++feasible;
                sum += state.prr_best_si / kPrrSiPerKbpsKm;
            }
            // the baselines are the paper's static allocation schemes
            if (baseline_random(1, ctx, grid[vi], kInf, mix_seed(seed, seedtag::kSearch))
                    .feasible)
                ++random_feasible[vi];
            if (baseline_sequential(ctx, grid[vi], kInf).feasible) ++sequential_feasible[vi];
        }
        tdgrs_feasible[vi] = feasible;
        infeasible_frac.push_back(1.0 - static_cast<double>(feasible) / trials);
        if (feasible > 0) {
            mean_prr.push_back(sum / feasible);
            if (2 * feasible >= trials) {  // exclude survivor-biased sparse points
                spearman_grid.push_back(grid[vi]);
                spearman_mean.push_back(sum / feasible);
            }
        } else {
            mean_prr.push_back(0.0);
        }
    }

    const double rho = spearman(spearman_grid, spearman_mean);
    bool frac_monotone = true;
    for (std::size_t vi = 1; vi < grid.size(); ++vi)
        if (infeasible_frac[vi] < infeasible_frac[vi - 1] - 1e-12) frac_monotone = false;

    // Largest floor each scheme still satisfies in at least half the trials.
    auto largest_feasible = [&](const std::vector<int>& counts) {
        double best = -1.0;
        for (std::size_t vi = 0; vi < grid.size(); ++vi)
            if (2 * counts[vi] >= trials) best = grid[vi];
        return best;
    };
    const double reach_tdgrs = largest_feasible(tdgrs_feasible);
    const double reach_random = largest_feasible(random_feasible);
    const double reach_sequential = largest_feasible(sequential_feasible);

    detail = "rho " + format_short(rho) + " over " + std::to_string(spearman_grid.size()) +
             " pts, reach tdgrs/seq/random " + format_short(reach_tdgrs) + "/" +
             format_short(reach_sequential) + "/" + format_short(reach_random) + " kbps*km" +
             (frac_monotone ? "" : ", frac not monotone");
    return rho <= -0.9 && spearman_grid.size() >= 6 && frac_monotone &&
           reach_tdgrs > reach_random && reach_tdgrs > reach_sequential;
}

// ---- criterion 5: papr_0 sweep trend ----------------------------------------

bool criterion_5(std::string& detail) {
    Scenario sc = desk_scenario(2);
    const int trials = 100;
    const std::vector<double> grid = {6.75, 7.0, 7.25, 7.5, 7.75, 8.0};

    TdgrsConfig cfg;
    cfg.groups = 8;
    cfg.e1 = 32;
    cfg.e2 = 8;
    cfg.feasible_cap = 8;

    std::vector<double> mean_prr;
    int worst_feasible = trials;
    for (double ceiling : grid) {
        int feasible = 0;
        double sum = 0;
        for (int t = 0; t < trials; ++t) {
            const auto seed = mix_seed(sc.seed, seedtag::kTrial, static_cast<std::uint64_t>(t));
            const auto ctx = make_context(sc, seed);
            TdgrsConfig c = cfg;
            c.papr_limit_db = ceiling;
            c.seed = mix_seed(seed, seedtag::kSearch);
            const auto state = tdgrs(c, ctx);
            if (state.feasible) {
                ++feasible;
                sum += state.prr_best_si / kPrrSiPerKbpsKm;
            }
        }
        worst_feasible = std::min(worst_feasible, feasible);
        mean_prr.push_back(feasible > 0 ? sum / feasible : 0.0);
    }
    const double rho = spearman(grid, mean_prr);
    detail = "rho " + format_short(rho) + ", means " + format_short(mean_prr.front()) + " .. " +
             format_short(mean_prr.back()) + " kbps*km, min feasible " +
             std::to_string(worst_feasible) + "/" + std::to_string(trials);
    return rho >= 0.9;
}

// ---- criterion 6: delay-profile identities -----------------------------------

bool criterion_6(std::string& detail) {
    const int num_subcarriers = 64;
    const double bandwidth = 4000.0;
    const auto freqs = subcarrier_frequencies<double>(num_subcarriers, 1000.0, bandwidth);
    const auto uniform = uniform_power<double>(num_subcarriers, 1.0);
    TargetSpec<double> target{{0.7, -0.4}, 0.05, 0.0};

    // peak identity for an arbitrary power vector
    Rng rng(31);
    VecR<double> power(num_subcarriers);
    for (int k = 0; k < num_subcarriers; ++k) power[k] = rng.uniform(0.005, 0.05);
    const auto grid = default_tau_grid(bandwidth, target.delay_s, target.delay_s);
    const auto profile = delay_profile(power, freqs, target, grid);
    const double expected_peak = std::abs(target.scatter_coeff) * power.sum();
    const double peak_err =
        std::abs(std::abs(profile.values[profile.peak_index]) - expected_peak) / expected_peak;
    if (peak_err > 1e-9) {
        detail = "peak identity off by " + format_short(peak_err);
        return false;
    }

    // first null for uniform power
    const auto uniform_profile = delay_profile(uniform, freqs, target, grid);
    const double peak_mag = std::abs(uniform_profile.values[uniform_profile.peak_index]);
    const double null_tau = target.delay_s + 1.0 / bandwidth;
    Eigen::Index nearest = 0;
    for (Eigen::Index i = 0; i < grid.size(); ++i)
        if (std::abs(grid[i] - null_tau) < std::abs(grid[nearest] - null_tau)) nearest = i;
    const double null_mag = std::abs(uniform_profile.values[nearest]) / peak_mag;
    if (null_mag > 1e-6) {
        detail = "first null magnitude " + format_short(null_mag);
        return false;
    }

    // uniform power attains the minimal ISL in every seeded comparison
    const auto period = full_period_tau_grid(bandwidth, num_subcarriers, target.delay_s);
    const double cell_half_width = 0.5 / bandwidth;
    const auto reference = delay_profile(uniform, freqs, target, period);
    const double ref_isl = sidelobe_metrics(reference, cell_half_width).second;
    int wins = 0;
    for (int s = 0; s < 50; ++s) {
        Rng seed_rng(4000 + static_cast<std::uint64_t>(s));
        bool all = true;
        for (int candidate = 0; candidate < 20; ++candidate) {
            VecR<double> perturbed(num_subcarriers);
            for (int k = 0; k < num_subcarriers; ++k)
                perturbed[k] = uniform[k] * (1.0 + 0.3 * (seed_rng.uniform01() - 0.5));
            perturbed *= uniform.sum() / perturbed.sum();
            const auto other = delay_profile(perturbed, freqs, target, period);
            if (ref_isl > sidelobe_metrics(other, cell_half_width).second + 1e-12) all = false;
        }
        if (all) ++wins;
    }
    detail = "peak err " + format_short(peak_err) + ", null " + format_short(null_mag) +
             ", isl wins " + std::to_string(wins) + "/50";
    return wins == 50;
}

// ---- criterion 7: papr closed forms ------------------------------------------

bool criterion_7(std::string& detail) {
    const int num_subcarriers = 16;
    const auto power = uniform_power<double>(num_subcarriers, 1.0);
    const VecC<double> dbar = VecC<double>::Ones(num_subcarriers);
    const double single = papr_db(synth_tone_signal<double>({5}, power, dbar, 4));
    const double pair = papr_db(synth_tone_signal<double>({5, 6}, power, dbar, 4));
    detail = "single tone " + format_short(single) + " dB, adjacent pair " + format_short(pair) +
             " dB";
    return std::abs(single) <= 1e-9 && std::abs(pair - 3.0103) <= 1e-3;
}

// ---- criterion 8: rate arithmetic --------------------------------------------

bool criterion_8(std::string& detail) {
    const int num_subcarriers = 1024;
    auto [w, x] = init_sequential(num_subcarriers, 4, 4);
    ChannelResponse<double> ch;
    ch.user_id = 0;
    ch.range_m = 1.0;
    ch.freqs_hz = subcarrier_frequencies<double>(num_subcarriers, 1000.0, 4000.0);
    ch.h = VecC<double>::Ones(num_subcarriers);
    const auto power = VecR<double>::Constant(num_subcarriers, 1.0).eval();
    const auto noise = VecR<double>::Constant(num_subcarriers, 1.0).eval();
    const double rate = user_rate(0, x, power, ch, noise);
    detail = "rate = " + format_full(rate) + " bit/s";
    return std::abs(rate - 1000.0) <= 1e-9 * 1000.0;
}

// ---- criterion 9: determinism and csv round-trips ------------------------------

bool criterion_9(std::string& detail) {
    Scenario sc = desk_scenario(2);
    sc.num_subcarriers = 32;

    SweepSpec spec;
    spec.base = sc;
    spec.base_cfg.groups = 4;
    spec.base_cfg.e1 = 16;
    spec.base_cfg.e2 = 4;
    spec.variable = "prr_min";
    spec.values = {0.0, 6.0};
    spec.trials = 8;
    const auto table_1 = sweep_table_text(run_sweep(spec, 1));
    const auto table_4 = sweep_table_text(run_sweep(spec, 4));
    const auto table_8 = sweep_table_text(run_sweep(spec, 8));
    if (table_1 != table_4 || table_1 != table_8) {
        detail = "sweep tables differ across 1/4/8 worker threads";
        return false;
    }

    // emitted artifacts re-ingest to the same numbers
    const auto ctx = make_context(sc, 77);
    TdgrsConfig cfg = spec.base_cfg;
    cfg.seed = 77;
    const auto state = tdgrs(cfg, ctx);
    const std::string dir = std::filesystem::temp_directory_path().string();
    const std::string channels_file = dir + "/uwisac_acc_channels.csv";
    const std::string solution_file = dir + "/uwisac_acc_solution.csv";
    write_channels_csv(channels_file, ctx.channels);
    write_solution_csv(solution_file, state.w_best, state.x_best);
    const auto channels_back = read_channels_csv(channels_file, sc.freqs());
    const auto [w_back, x_back] = read_solution_csv(solution_file, sc.num_tx, sc.num_users);
    const auto replay = prr(x_back, ctx.power, channels_back, ctx.noise_var);
    std::remove(channels_file.c_str());
    std::remove(solution_file.c_str());
    const double err =
        std::abs(replay.total_prr - state.prr_best_si) / std::max(1.0, state.prr_best_si);
    detail = "thread-invariant tables, replay error " + format_short(err);
    return err <= 1e-9;
}

struct Criterion {
    int id;
    const char* name;
    std::function<bool(std::string&)> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria = {
        {1, "beam-pattern flatness at P_total", criterion_1},
        {2, "exhaustive-oracle equivalence", criterion_2},
        {3, "grouped-search convergence trend", criterion_3},
        {4, "prr_min sweep trend and scheme comparison", criterion_4},
        {5, "papr_0 sweep trend", criterion_5},
        {6, "delay-profile identities", criterion_6},
        {7, "papr closed forms", criterion_7},
        {8, "rate arithmetic", criterion_8},
        {9, "determinism and csv round-trips", criterion_9},
    };
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

    int failures = 0;
    for (const auto& criterion : criteria) {
        if (!selected.empty() &&
            std::find(selected.begin(), selected.end(), criterion.id) == selected.end())
            continue;
        const auto start = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = criterion.run(detail);
        } catch (const std::exception& err) {
            detail = std::string("exception: ") + err.what();
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s criterion %d: %s (%s) [%.1fs]\n", ok ? "PASS" : "FAIL", criterion.id,
                    criterion.name, detail.c_str(), seconds);
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
