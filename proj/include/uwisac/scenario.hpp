// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "uwisac/channel.hpp"
#include "uwisac/common.hpp"
#include "uwisac/optimizer.hpp"
#include "uwisac/sensing.hpp"

namespace uwisac {

struct UserSpec {
    double depth_m = 0;
    double horizontal_range_m = 0;
    int paths = 6;
};

/// Full experiment description; see README for the config file schema.
struct Scenario {
    int num_subcarriers = 64;
    int num_tx = 4;
    int num_rx = 4;
    int num_users = 4;
    double carrier_hz = 1000.0;
    double bandwidth_hz = 4000.0;
    double total_power_w = 1.0;
    double guard_s = 0.05;
    int psk_order = 4;
    int oversample = 4;
    std::uint64_t seed = 1;
    double water_depth_m = 120.0;
    double array_depth_m = 20.0;
    double sound_speed_mps = kDefaultSoundSpeed;
    double spreading_factor = 1.5;
    double loss_constant = 1.0;
    double tx_gain = 1.0;
    double rx_gain = 1.0;
    std::optional<double> rx_spacing_m;  // default: half wavelength at carrier
    std::optional<double> tx_spacing_m;  // default: num_rx * rx_spacing
    NoiseModelParams<double> noise;
    double echo_noise_power = 0.0;
    std::vector<UserSpec> users;
    std::vector<TargetSpec<double>> targets;
    std::optional<std::string> channel_csv;

    double delta_f_hz() const { return bandwidth_hz / num_subcarriers; }
    VecR<double> freqs() const {
        return subcarrier_frequencies<double>(num_subcarriers, carrier_hz, bandwidth_hz);
    }
    double rx_spacing() const {
        return rx_spacing_m ? *rx_spacing_m : 0.5 * sound_speed_mps / carrier_hz;
    }
    double tx_spacing() const { return tx_spacing_m ? *tx_spacing_m : num_rx * rx_spacing(); }
    ArrayGeometry<double> array() const {
        return {num_tx, num_rx, tx_spacing(), rx_spacing(), sound_speed_mps};
    }
    PropagationParams<double> propagation() const {
        return {spreading_factor, loss_constant, tx_gain, rx_gain};
    }
};

struct SweepSpec {
    std::string variable;  // prr_min | papr_0 | groups | e1 | e2 | Nu
    std::vector<double> values;
    int trials = 1;
    Scenario base;
    TdgrsConfig base_cfg;
};

namespace cfgdetail {

inline const nlohmann::json& require(const nlohmann::json& node, const std::string& key,
                                     const std::string& path) {
    if (!node.is_object() || !node.contains(key))
        throw ConfigError("missing config key: " + path + key);
    return node.at(key);
}

template <typename T>
T fetch(const nlohmann::json& node, const std::string& key, const std::string& path) {
    try {
        return require(node, key, path).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("bad value for config key: " + path + key);
    }
}

template <typename T>
T fetch_or(const nlohmann::json& node, const std::string& key, const std::string& path,
           const T& fallback) {
    if (!node.is_object() || !node.contains(key)) return fallback;
    return fetch<T>(node, key, path);
}

/// Accepts numbers or the strings "inf" / "+inf" (handy for PAPR limits).
inline double number_or_inf(const nlohmann::json& value, const std::string& where) {
    if (value.is_number()) return value.get<double>();
    if (value.is_string()) {
        const auto text = value.get<std::string>();
        if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
    }
    throw ConfigError("bad value for config key: " + where);
}

}  // namespace cfgdetail

inline Scenario parse_scenario(const nlohmann::json& root) {
    using namespace cfgdetail;
    const auto& node = require(root, "scenario", "");
    const std::string path = "scenario.";
    Scenario sc;
    sc.num_subcarriers = fetch<int>(node, "num_subcarriers", path);
    sc.num_tx = fetch<int>(node, "num_tx", path);
    sc.num_rx = fetch<int>(node, "num_rx", path);
    sc.num_users = fetch<int>(node, "num_users", path);
    sc.carrier_hz = fetch<double>(node, "carrier_hz", path);
    sc.bandwidth_hz = fetch<double>(node, "bandwidth_hz", path);
    sc.total_power_w = fetch_or<double>(node, "total_power_w", path, 1.0);
    sc.guard_s = fetch_or<double>(node, "guard_s", path, 0.05);
    sc.psk_order = fetch_or<int>(node, "psk_order", path, 4);
    sc.oversample = fetch_or<int>(node, "oversample", path, 4);
    sc.seed = fetch_or<std::uint64_t>(node, "seed", path, 1);
    sc.water_depth_m = fetch_or<double>(node, "water_depth_m", path, 120.0);
    sc.array_depth_m = fetch_or<double>(node, "array_depth_m", path, 20.0);
    sc.sound_speed_mps = fetch_or<double>(node, "sound_speed_mps", path, kDefaultSoundSpeed);
    sc.spreading_factor = fetch_or<double>(node, "spreading_factor", path, 1.5);
    sc.loss_constant = fetch_or<double>(node, "loss_constant", path, 1.0);
    sc.tx_gain = fetch_or<double>(node, "tx_gain", path, 1.0);
    sc.rx_gain = fetch_or<double>(node, "rx_gain", path, 1.0);
    if (node.contains("rx_spacing_m")) sc.rx_spacing_m = fetch<double>(node, "rx_spacing_m", path);
    if (node.contains("tx_spacing_m")) sc.tx_spacing_m = fetch<double>(node, "tx_spacing_m", path);
    if (node.contains("noise")) {
        const auto& noise = node.at("noise");
        sc.noise.shipping_activity = fetch_or<double>(noise, "shipping_activity",
                                                      path + "noise.", 0.5);
        sc.noise.wind_speed_mps = fetch_or<double>(noise, "wind_speed_mps", path + "noise.", 0.0);
    }
    sc.echo_noise_power = fetch_or<double>(node, "echo_noise_power", path, 0.0);
    if (node.contains("channel_csv"))
        sc.channel_csv = fetch<std::string>(node, "channel_csv", path);

    const auto& users = require(node, "users", path);
    if (!users.is_array() || users.empty())
        throw ConfigError("config key scenario.users must be a non-empty array");
    for (const auto& user : users) {
        UserSpec spec;
        spec.depth_m = fetch<double>(user, "depth_m", path + "users[].");
        spec.horizontal_range_m = fetch<double>(user, "horizontal_range_m", path + "users[].");
        spec.paths = fetch_or<int>(user, "paths", path + "users[].", 6);
        sc.users.push_back(spec);
    }
    if (node.contains("targets")) {
        for (const auto& target : node.at("targets")) {
            TargetSpec<double> spec;
            spec.delay_s = fetch<double>(target, "delay_s", path + "targets[].");
            const double deg = fetch_or<double>(target, "angle_deg", path + "targets[].", 0.0);
            spec.angle_rad = deg * EIGEN_PI / 180.0;
            spec.scatter_coeff = {fetch_or<double>(target, "scatter_re", path + "targets[].", 1.0),
                                  fetch_or<double>(target, "scatter_im", path + "targets[].", 0.0)};
            sc.targets.push_back(spec);
        }
    }

    if (sc.num_subcarriers < 2) throw ConfigError("scenario.num_subcarriers must be >= 2");
    validate_divisibility(sc.num_subcarriers, sc.num_tx, sc.num_users);
    if (static_cast<int>(sc.users.size()) < sc.num_users)
        throw ConfigError("scenario.users must list at least num_users entries");
    if (!(sc.bandwidth_hz > 0) || !(sc.carrier_hz > 0))
        throw ConfigError("scenario.carrier_hz and scenario.bandwidth_hz must be positive");
    if (!(sc.total_power_w > 0)) throw ConfigError("scenario.total_power_w must be positive");
    if (sc.oversample < 1) throw ConfigError("scenario.oversample must be >= 1");
    return sc;
}

inline TdgrsConfig parse_search(const nlohmann::json& root) {
    using namespace cfgdetail;
    TdgrsConfig cfg;
    if (!root.contains("search")) return cfg;
    const auto& node = root.at("search");
    const std::string path = "search.";
    cfg.groups = fetch_or<int>(node, "groups", path, cfg.groups);
    cfg.e1 = fetch_or<int>(node, "e1", path, cfg.e1);
    cfg.e2 = fetch_or<int>(node, "e2", path, cfg.e2);
    cfg.feasible_cap = fetch_or<int>(node, "feasible_cap", path, cfg.feasible_cap);
    cfg.prr_min_kbpskm = fetch_or<double>(node, "prr_min_kbpskm", path, 0.0);
    if (node.contains("papr_limit_db"))
        cfg.papr_limit_db = number_or_inf(node.at("papr_limit_db"), path + "papr_limit_db");
    cfg.seed = fetch_or<std::uint64_t>(node, "seed", path, 1);
    return cfg;
}

inline nlohmann::json load_config_json(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open config file: " + file);
    nlohmann::json root;
    try {
        in >> root;
    } catch (const nlohmann::json::exception& err) {
        throw ConfigError("config parse error in " + file + ": " + err.what());
    }
    const int version = cfgdetail::fetch_or<int>(root, "schema_version", "", 1);
    if (version != 1) throw ConfigError("unsupported schema_version");
    return root;
}

inline SweepSpec parse_sweep(const nlohmann::json& root) {
    using namespace cfgdetail;
    SweepSpec spec;
    spec.base = parse_scenario(root);
    spec.base_cfg = parse_search(root);
    const auto& node = require(root, "sweep", "");
    const std::string path = "sweep.";
    spec.variable = fetch<std::string>(node, "variable", path);
    const auto& values = require(node, "values", path);
    if (!values.is_array() || values.empty())
        throw ConfigError("config key sweep.values must be a non-empty array");
    for (const auto& value : values)
        spec.values.push_back(number_or_inf(value, path + "values[]"));
    spec.trials = fetch<int>(node, "trials", path);
    if (spec.trials < 1) throw ConfigError("sweep.trials must be >= 1");
    static const std::vector<std::string> known = {"prr_min", "papr_0", "groups",
                                                   "e1", "e2", "Nu"};
    if (std::find(known.begin(), known.end(), spec.variable) == known.end())
        throw ConfigError("sweep.variable must be one of prr_min, papr_0, groups, e1, e2, Nu");
    return spec;
}

}  // namespace uwisac
