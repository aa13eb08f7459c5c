// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: channel synthesis/import, single-scenario
// optimization, Monte Carlo sweeps, solution evaluation and sensing exports.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>

#include "uwisac/harness.hpp"

namespace {

using namespace uwisac;

struct CommonArgs {
    std::string config_file;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed_override;
};

Scenario load_scenario(const CommonArgs& args) {
    auto root = load_config_json(args.config_file);
    Scenario scenario = parse_scenario(root);
    if (args.seed_override) scenario.seed = *args.seed_override;
    return scenario;
}

TdgrsConfig load_search(const CommonArgs& args) {
    return parse_search(load_config_json(args.config_file));
}

std::string joined(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory: " + dir);
}

std::string summary_text(const Scenario& scenario, const TdgrsConfig& cfg,
                         const TrialResult& result) {
    std::ostringstream out;
    out << "feasible=" << (result.state.feasible ? "true" : "false") << '\n';
    if (result.state.feasible)
        out << "prr_kbpskm=" << format_full(result.state.prr_best_si / kPrrSiPerKbpsKm) << '\n';
    else
        out << "prr_kbpskm=no_feasible_solution\n";
    out << "total_shuffles=" << result.state.total_shuffles << '\n';
    out << "pairs_enumerated=" << result.state.pairs_enumerated << '\n';
    out << "shuffle_accounting=step2_interleave_shuffles\n";
    out << "num_subcarriers=" << scenario.num_subcarriers << '\n';
    out << "num_tx=" << scenario.num_tx << '\n';
    out << "num_users=" << scenario.num_users << '\n';
    out << "groups=" << cfg.groups << '\n';
    out << "e1=" << cfg.e1 << '\n';
    out << "e2=" << cfg.e2 << '\n';
    out << "feasible_cap=" << cfg.feasible_cap << '\n';
    out << "prr_min_kbpskm=" << format_full(cfg.prr_min_kbpskm) << '\n';
    out << "papr_limit_db=" << format_full(cfg.papr_limit_db) << '\n';
    out << "seed=" << scenario.seed << '\n';
    out << "max_papr_db=" << format_full(result.papr_db_per_element.maxCoeff()) << '\n';
    return out.str();
}

void write_text(const std::string& file, const std::string& text) {
    auto out = iodetail::open_out(file);
    out << text;
}

int cmd_channel(const std::string& action, const CommonArgs& args, const std::string& file,
                const std::string& out_file) {
    Scenario scenario = load_scenario(args);
    if (action == "synth" || action == "export") {
        const auto channels = build_channels(scenario, scenario.seed);
        write_channels_csv(out_file, channels);
        std::cout << "wrote " << channels.size() << " user channels to " << out_file << "\n";
        return 0;
    }
    // import: validate an external file against the scenario grid
    const auto channels = read_channels_csv(file, scenario.freqs());
    std::cout << "imported " << channels.size() << " user channels covering "
              << scenario.num_subcarriers << " subcarriers\n";
    for (const auto& ch : channels)
        std::cout << "user " << ch.user_id << ": range_m=" << format_short(ch.range_m)
                  << " mean|H|=" << format_short(ch.h.cwiseAbs().mean()) << "\n";
    if (!out_file.empty()) {
        write_channels_csv(out_file, channels);
        std::cout << "re-exported to " << out_file << "\n";
    }
    return 0;
}

int cmd_optimize(const CommonArgs& args, bool require_feasible) {
    Scenario scenario = load_scenario(args);
    TdgrsConfig cfg = load_search(args);
    ensure_out_dir(args.out_dir);
    const TrialResult result = run_trial(scenario, cfg, scenario.seed);
    write_solution_csv(joined(args.out_dir, "solution.csv"), result.state.w_best,
                       result.state.x_best);
    write_history_csv(joined(args.out_dir, "history.csv"), result.state);
    write_text(joined(args.out_dir, "summary.txt"), summary_text(scenario, cfg, result));
    write_text(joined(args.out_dir, "prr_report.txt"), prr_report_text(result.report));
    write_text(joined(args.out_dir, "feasibility.txt"),
               feasibility_report_text(result.feasibility));
    std::cout << summary_text(scenario, cfg, result);
    if (require_feasible && !result.state.feasible) return 3;
    return 0;
}

int cmd_eval(const CommonArgs& args, const std::string& solution_file) {
    Scenario scenario = load_scenario(args);
    TdgrsConfig cfg = load_search(args);
    const auto ctx = make_context(scenario, scenario.seed);
    const auto [w, x] = read_solution_csv(solution_file, scenario.num_tx, scenario.num_users);
    if (w.assign.size() != scenario.num_subcarriers)
        throw ConfigError("solution length does not match scenario.num_subcarriers");
    const auto report = prr(x, ctx.power, ctx.channels, ctx.noise_var);
    const auto feasibility = check_feasibility(
        w, x, ctx.power, ctx.frame, ctx.channels, ctx.noise_var,
        cfg.prr_min_kbpskm * kPrrSiPerKbpsKm, cfg.papr_limit_db, ctx.total_power, ctx.oversample);
    const auto papr = papr_all_elements(w, x, ctx.power, ctx.frame, ctx.channels, ctx.oversample);
    std::ostringstream papr_text;
    for (Eigen::Index m = 0; m < papr.size(); ++m)
        papr_text << "papr" << m << "_db=" << format_full(papr[m]) << '\n';
    const std::string text =
        prr_report_text(report) + feasibility_report_text(feasibility) + papr_text.str();
    std::cout << text;
    ensure_out_dir(args.out_dir);
    write_text(joined(args.out_dir, "eval_report.txt"), text);
    return 0;
}

int cmd_sweep(const CommonArgs& args, int threads) {
    auto root = load_config_json(args.config_file);
    SweepSpec spec = parse_sweep(root);
    if (args.seed_override) spec.base.seed = *args.seed_override;
    ensure_out_dir(args.out_dir);
    const auto rows = run_sweep(spec, threads);
    write_sweep_csv(joined(args.out_dir, "sweep.csv"), rows);
    std::ostringstream meta;
    meta << "variable=" << spec.variable << '\n'
         << "trials=" << spec.trials << '\n'
         << "shuffle_accounting=step2_interleave_shuffles\n"
         << "seed=" << spec.base.seed << '\n';
    write_text(joined(args.out_dir, "sweep_meta.txt"), meta.str());
    std::cout << sweep_table_text(rows);
    return 0;
}

int cmd_sense(const CommonArgs& args, const std::string& solution_file) {
    Scenario scenario = load_scenario(args);
    if (scenario.targets.empty()) throw ConfigError("sense requires scenario.targets");
    const auto ctx = make_context(scenario, scenario.seed);
    InterleavePattern w;
    AllocationMatrix x;
    if (solution_file.empty()) {
        std::tie(w, x) = init_sequential(scenario.num_subcarriers, scenario.num_tx,
                                         scenario.num_users);
    } else {
        std::tie(w, x) = read_solution_csv(solution_file, scenario.num_tx, scenario.num_users);
    }
    ensure_out_dir(args.out_dir);

    double lo = scenario.targets.front().delay_s;
    double hi = lo;
    for (const auto& target : scenario.targets) {
        lo = std::min(lo, target.delay_s);
        hi = std::max(hi, target.delay_s);
    }
    const auto tau_grid = default_tau_grid(scenario.bandwidth_hz, lo, hi);
    for (std::size_t q = 0; q < scenario.targets.size(); ++q) {
        const auto profile =
            delay_profile(ctx.power, scenario.freqs(), scenario.targets[q], tau_grid);
        write_profile_csv(joined(args.out_dir, "delay_profile_" + std::to_string(q) + ".csv"),
                          profile, scenario.targets[q].angle_rad);
        std::cout << "target " << q << ": psl_db=" << format_short(profile.psl_db)
                  << " isl_db=" << format_short(profile.isl_db) << "\n";
    }

    const auto dbar = modified_symbols(x, ctx.frame, ctx.channels);
    const auto geom = scenario.array();
    std::vector<MatC<double>> snapshots;
    snapshots.reserve(static_cast<std::size_t>(scenario.num_subcarriers));
    Rng noise_rng(mix_seed(scenario.seed, 0x65636865ULL));
    const auto freqs = scenario.freqs();
    for (int k = 0; k < scenario.num_subcarriers; ++k)
        snapshots.push_back(echo_snapshot(k, w, ctx.power, dbar, scenario.targets, freqs, geom,
                                          scenario.oversample, scenario.echo_noise_power,
                                          noise_rng));
    VecR<double> theta_grid(181);
    for (int i = 0; i < 181; ++i) theta_grid[i] = (-90.0 + i) * EIGEN_PI / 180.0;
    const auto map = joint_spectrum(snapshots, w, ctx.power, dbar, freqs, geom,
                                    scenario.oversample, tau_grid, theta_grid);
    write_spectrum_csv(joined(args.out_dir, "joint_spectrum.csv"), map, tau_grid, theta_grid);
    std::cout << "wrote joint spectrum over " << tau_grid.size() << " x " << theta_grid.size()
              << " grid\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Underwater MIMO-OFDM ISAC waveform simulator and resource optimizer"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    CommonArgs common;
    std::uint64_t seed_value = 0;
    bool seed_given = false;
    app.add_option("--config", common.config_file, "scenario/search config file (JSON)")
        ->required();
    app.add_option("--out-dir", common.out_dir, "output directory");
    auto* seed_opt = app.add_option("--seed", seed_value, "override the scenario seed");

    auto* channel = app.add_subcommand("channel", "synthesize, import or export channels");
    std::string channel_action;
    std::string channel_file;
    std::string channel_out = "channels.csv";
    channel->add_option("action", channel_action, "synth | import | export")->required();
    channel->add_option("--file", channel_file, "channel CSV to import");
    channel->add_option("--out", channel_out, "channel CSV to write");

    auto* optimize = app.add_subcommand("optimize", "run TDGRS on one scenario");
    bool require_feasible = false;
    optimize->add_flag("--require-feasible", require_feasible,
                       "exit with status 3 when no feasible solution is found");

    auto* eval = app.add_subcommand("eval", "evaluate a W/X solution CSV");
    std::string solution_file;
    eval->add_option("--solution", solution_file, "solution CSV (k,element,user)")->required();

    auto* sweep = app.add_subcommand("sweep", "run a Monte Carlo sweep");
    int threads = 0;
    sweep->add_option("--threads", threads, "worker threads (0 = ISAC_ALLOC_THREADS or auto)");

    auto* sense = app.add_subcommand("sense", "delay profile and joint spectrum exports");
    std::string sense_solution;
    sense->add_option("--solution", sense_solution, "solution CSV (defaults to sequential)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        return app.exit(err);
    }
    seed_given = seed_opt->count() > 0;
    if (seed_given) common.seed_override = seed_value;

    try {
        if (channel->parsed()) {
            if (channel_action != "synth" && channel_action != "import" &&
                channel_action != "export")
                throw ConfigError("channel action must be synth, import or export");
            if (channel_action == "import" && channel_file.empty())
                throw ConfigError("channel import requires --file");
            return cmd_channel(channel_action, common, channel_file, channel_out);
        }
        if (optimize->parsed()) return cmd_optimize(common, require_feasible);
        if (eval->parsed()) return cmd_eval(common, solution_file);
        if (sweep->parsed()) return cmd_sweep(common, threads);
        if (sense->parsed()) return cmd_sense(common, sense_solution);
    } catch (const uwisac::ConfigError& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}
