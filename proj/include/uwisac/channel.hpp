// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <complex>
#include <vector>

#include "uwisac/common.hpp"

namespace uwisac {

/// One propagation path of an underwater acoustic channel. Direct paths
/// carry reflection_coeff = 1; reflected paths carry |coeff| <= 1 with a
/// sign flip per surface bounce.
template <typename Scalar>
struct PathSpec {
    Scalar delay_s = 0;
    Scalar path_length_m = 0;
    std::complex<Scalar> reflection_coeff{1, 0};
};

/// Frequency response of one user's channel on the scenario subcarrier grid.
template <typename Scalar>
struct ChannelResponse {
    int user_id = 0;
    Scalar range_m = 0;  // straight-line array-to-user distance
    VecR<Scalar> freqs_hz;
    VecC<Scalar> h;
};

template <typename Scalar>
struct NoiseModelParams {
    Scalar shipping_activity = Scalar(0.5);  // in [0, 1]
    Scalar wind_speed_mps = Scalar(0);
};

/// Propagation constants; defaults are conventional shallow-water values.
template <typename Scalar>
struct PropagationParams {
    Scalar spreading = Scalar(1.5);
    Scalar L0 = Scalar(1);
    Scalar tx_gain = Scalar(1);
    Scalar rx_gain = Scalar(1);
};

template <typename Scalar>
void validate(const ChannelResponse<Scalar>& ch) {
    if (ch.freqs_hz.size() != ch.h.size())
        throw std::invalid_argument("channel: freqs_hz and h lengths differ");
    if (ch.freqs_hz.size() < 2) throw std::invalid_argument("channel: needs at least 2 subcarriers");
    if (ch.range_m <= Scalar(0)) throw std::invalid_argument("channel: range_m must be positive");
    for (Eigen::Index k = 1; k < ch.freqs_hz.size(); ++k)
        if (!(ch.freqs_hz[k] > ch.freqs_hz[k - 1]))
            throw std::invalid_argument("channel: frequencies must be strictly increasing");
    for (Eigen::Index k = 0; k < ch.h.size(); ++k)
        if (!std::isfinite(ch.h[k].real()) || !std::isfinite(ch.h[k].imag()))
            throw std::invalid_argument("channel: non-finite gain");
}

/// Thorp seawater absorption in dB/km.
template <typename Scalar>
Scalar absorption_db_per_km(Scalar f_hz) {
    if (!(f_hz > Scalar(0))) throw std::domain_error("absorption: frequency must be positive");
    const Scalar f_khz = f_hz / Scalar(1000);
    const Scalar fsq = f_khz * f_khz;
    return Scalar(0.11) * fsq / (Scalar(1) + fsq) + Scalar(44) * fsq / (Scalar(4100) + fsq) +
           Scalar(2.75e-4) * fsq + Scalar(0.003);
}

/// Urick transmission loss L(r, f) = L0 * r^s * a(f)^(r/1000) as a linear
/// power ratio, with a(f) the linear-scale absorption per km.
template <typename Scalar>
Scalar transmission_loss(Scalar r_m, Scalar f_hz, Scalar spreading = Scalar(1.5),
                         Scalar L0 = Scalar(1)) {
    if (!(r_m > Scalar(0))) throw std::domain_error("transmission_loss: range must be positive");
    const Scalar alpha_db = absorption_db_per_km(f_hz);
    using std::log10;
    const Scalar loss_db = Scalar(10) * spreading * log10(r_m) + alpha_db * r_m / Scalar(1000) +
                           Scalar(10) * log10(L0);
    return std::pow(Scalar(10), loss_db / Scalar(10));
}

/// Path amplitude gain A = G_T * G_R / sqrt(L).
template <typename Scalar>
Scalar path_gain(Scalar r_m, Scalar f_hz, const PropagationParams<Scalar>& prop) {
    if (!(prop.tx_gain > Scalar(0)) || !(prop.rx_gain > Scalar(0)))
        throw std::domain_error("path_gain: gains must be positive");
    return prop.tx_gain * prop.rx_gain /
           std::sqrt(transmission_loss(r_m, f_hz, prop.spreading, prop.L0));
}

/// Multipath frequency response h[k] = sum_l A_l(f_k) beta_l e^{-j2π f_k τ_l}.
template <typename Scalar>
ChannelResponse<Scalar> synth_channel(const std::vector<PathSpec<Scalar>>& paths,
                                      const VecR<Scalar>& freqs_hz,
                                      const PropagationParams<Scalar>& prop, Scalar range_m,
                                      int user_id = 0) {
    if (paths.empty()) throw std::domain_error("synth_channel: at least one path required");
    ChannelResponse<Scalar> ch;
    ch.user_id = user_id;
    ch.range_m = range_m;
    ch.freqs_hz = freqs_hz;
    ch.h = VecC<Scalar>::Zero(freqs_hz.size());
    for (const auto& path : paths) {
        for (Eigen::Index k = 0; k < freqs_hz.size(); ++k) {
            const Scalar amp = path_gain(path.path_length_m, freqs_hz[k], prop);
            const Scalar phase = Scalar(-2) * Scalar(EIGEN_PI) * freqs_hz[k] * path.delay_s;
            ch.h[k] += amp * path.reflection_coeff * std::polar(Scalar(1), phase);
        }
    }
    validate(ch);
    return ch;
}

// Four-source ambient noise components, dB re relative unit per Hz.

template <typename Scalar>
Scalar noise_turbulence_db(Scalar f_hz) {
    return Scalar(17) - Scalar(30) * std::log10(f_hz / Scalar(1000));
}

template <typename Scalar>
Scalar noise_shipping_db(Scalar f_hz, Scalar shipping_activity) {
    const Scalar f_khz = f_hz / Scalar(1000);
    return Scalar(40) + Scalar(20) * (shipping_activity - Scalar(0.5)) +
           Scalar(26) * std::log10(f_khz) - Scalar(60) * std::log10(f_khz + Scalar(0.03));
}

template <typename Scalar>
Scalar noise_wind_db(Scalar f_hz, Scalar wind_speed_mps) {
    const Scalar f_khz = f_hz / Scalar(1000);
    return Scalar(50) + Scalar(7.5) * std::sqrt(wind_speed_mps) +
           Scalar(20) * std::log10(f_khz) - Scalar(40) * std::log10(f_khz + Scalar(0.4));
}

template <typename Scalar>
Scalar noise_thermal_db(Scalar f_hz) {
    return Scalar(-15) + Scalar(20) * std::log10(f_hz / Scalar(1000));
}

/// Ambient noise power spectral density (linear, relative units per Hz):
/// power sum of turbulence, shipping, wind and thermal sources.
template <typename Scalar>
Scalar noise_psd(Scalar f_hz, const NoiseModelParams<Scalar>& params) {
    if (!(f_hz > Scalar(0))) throw std::domain_error("noise_psd: frequency must be positive");
    auto to_linear = [](Scalar db) { return std::pow(Scalar(10), db / Scalar(10)); };
    return to_linear(noise_turbulence_db(f_hz)) +
           to_linear(noise_shipping_db(f_hz, params.shipping_activity)) +
           to_linear(noise_wind_db(f_hz, params.wind_speed_mps)) +
           to_linear(noise_thermal_db(f_hz));
}

/// Per-subcarrier noise variance sigma_k^2 = PSD(f_k) * delta_f.
template <typename Scalar>
VecR<Scalar> noise_variances(const VecR<Scalar>& freqs_hz, const NoiseModelParams<Scalar>& params) {
    if (freqs_hz.size() < 2) throw std::invalid_argument("noise_variances: needs >= 2 frequencies");
    const Scalar delta_f = freqs_hz[1] - freqs_hz[0];
    VecR<Scalar> var(freqs_hz.size());
    for (Eigen::Index k = 0; k < freqs_hz.size(); ++k)
        var[k] = noise_psd(freqs_hz[k], params) * delta_f;
    return var;
}

template <typename Scalar>
struct MultipathGeometry {
    Scalar water_depth_m = 0;
    Scalar src_depth_m = 0;
    Scalar rcv_depth_m = 0;
    Scalar horizontal_range_m = 0;
};

/// Geometric multipath generator: direct path plus image-method surface and
/// bottom bounces. Reflection magnitudes are drawn from [0.3, 0.9]; each
/// surface bounce flips the sign. Deterministic for a given seed.
template <typename Scalar>
std::vector<PathSpec<Scalar>> random_multipath(std::uint64_t rng_seed,
                                               const MultipathGeometry<Scalar>& geom, int n_paths,
                                               Scalar sound_speed = Scalar(kDefaultSoundSpeed)) {
    if (n_paths < 1) throw std::domain_error("random_multipath: n_paths must be >= 1");
    if (!(geom.water_depth_m > 0) || !(geom.src_depth_m > 0) || !(geom.rcv_depth_m > 0) ||
        !(geom.horizontal_range_m > 0))
        throw std::domain_error("random_multipath: geometry values must be positive");
    if (geom.src_depth_m > geom.water_depth_m || geom.rcv_depth_m > geom.water_depth_m)
        throw std::domain_error("random_multipath: node deeper than water column");

    Rng rng(rng_seed);
    const Scalar depth = geom.water_depth_m;
    const Scalar zs = geom.src_depth_m;
    const Scalar zr = geom.rcv_depth_m;
    const Scalar range = geom.horizontal_range_m;

    std::vector<PathSpec<Scalar>> paths;
    paths.reserve(static_cast<std::size_t>(n_paths));
    auto push = [&](Scalar vertical, int surface_bounces) {
        PathSpec<Scalar> path;
        path.path_length_m = std::hypot(range, vertical);
        path.delay_s = path.path_length_m / sound_speed;
        if (surface_bounces < 0) {
            path.reflection_coeff = {Scalar(1), Scalar(0)};  // direct
        } else {
            const Scalar mag = Scalar(rng.uniform(0.3, 0.9));
            const Scalar sign = (surface_bounces % 2 == 0) ? Scalar(1) : Scalar(-1);
            path.reflection_coeff = {sign * mag, Scalar(0)};
        }
        paths.push_back(path);
    };

    push(zs - zr, -1);
    // Unfolded image-method vertical distances, alternating boundary hits.
    for (int bounces = 1; static_cast<int>(paths.size()) < n_paths; ++bounces) {
        const int surface_first_hits = (bounces + 1) / 2;
        if (bounces % 2 == 1) {
            push(Scalar(bounces - 1) * depth + zs + zr, surface_first_hits);
            if (static_cast<int>(paths.size()) == n_paths) break;
            push(Scalar(bounces + 1) * depth - zs - zr, bounces / 2);
        } else {
            push(Scalar(bounces) * depth + zs - zr, surface_first_hits);
            if (static_cast<int>(paths.size()) == n_paths) break;
            push(Scalar(bounces) * depth - zs + zr, bounces / 2);
        }
    }
    std::sort(paths.begin(), paths.end(),
              [](const auto& a, const auto& b) { return a.delay_s < b.delay_s; });
    return paths;
}

/// Uniform subcarrier grid f_k = f_low + k * delta_f, k = 0..K-1.
template <typename Scalar>
VecR<Scalar> subcarrier_frequencies(int num_subcarriers, Scalar f_low_hz, Scalar bandwidth_hz) {
    if (num_subcarriers < 2) throw std::invalid_argument("subcarrier grid needs K >= 2");
    if (!(bandwidth_hz > Scalar(0))) throw std::invalid_argument("bandwidth must be positive");
    const Scalar delta_f = bandwidth_hz / Scalar(num_subcarriers);
    VecR<Scalar> freqs(num_subcarriers);
    for (int k = 0; k < num_subcarriers; ++k) freqs[k] = f_low_hz + Scalar(k) * delta_f;
    return freqs;
}

}  // namespace uwisac
