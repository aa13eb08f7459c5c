// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "uwisac/common.hpp"
#include "uwisac/waveform.hpp"

namespace uwisac {

template <typename Scalar>
struct TargetSpec {
    std::complex<Scalar> scatter_coeff{1, 0};
    Scalar delay_s = 0;
    Scalar angle_rad = 0;  // monostatic: one angle for transmit and receive
};

/// Monostatic array split: Mt transmit and Mr receive elements with their
/// spacings. The d_t = Mr * d_r convention maximizes the virtual aperture.
template <typename Scalar>
struct ArrayGeometry {
    int num_tx = 1;
    int num_rx = 1;
    Scalar d_t_m = 0;
    Scalar d_r_m = 0;
    Scalar sound_speed = Scalar(kDefaultSoundSpeed);
};

template <typename Scalar>
struct DelayProfile {
    VecR<Scalar> tau_grid;
    VecC<Scalar> values;
    Eigen::Index peak_index = 0;
    Scalar psl_db = 0;
    Scalar isl_db = 0;
};

/// Peak and integrated sidelobe levels of a delay profile. The mainlobe is
/// the band within +-mainlobe_width_s of the peak.
template <typename Scalar>
std::pair<Scalar, Scalar> sidelobe_metrics(const DelayProfile<Scalar>& profile,
                                           Scalar mainlobe_width_s) {
    const Eigen::Index n = profile.tau_grid.size();
    if (n < 2) throw std::domain_error("sidelobe_metrics: grid too short");
    const Scalar spacing = profile.tau_grid[1] - profile.tau_grid[0];
    if (!(mainlobe_width_s > spacing))
        throw std::domain_error("sidelobe_metrics: mainlobe width must exceed grid spacing");
    const Scalar peak_tau = profile.tau_grid[profile.peak_index];
    const Scalar peak_mag = std::abs(profile.values[profile.peak_index]);
    Scalar side_peak = 0;
    Scalar side_energy = 0;
    Scalar main_energy = 0;
    Eigen::Index side_points = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const Scalar mag2 = std::norm(profile.values[i]);
        if (std::abs(profile.tau_grid[i] - peak_tau) <= mainlobe_width_s) {
            main_energy += mag2;
        } else {
            side_energy += mag2;
            side_peak = std::max(side_peak, std::abs(profile.values[i]));
            ++side_points;
        }
    }
    if (side_points == 0) throw std::domain_error("sidelobe_metrics: mainlobe covers entire grid");
    const Scalar psl = Scalar(20) * std::log10(side_peak / peak_mag);
    const Scalar isl = Scalar(10) * std::log10(side_energy / main_energy);
    return {psl, isl};
}

/// Beam-domain delay profile of one target:
/// c(tau) = gamma * sum_k p_k e^{j2π f_k (tau - tau_q)}.
/// PSL/ISL are filled with the default +-1/B mainlobe.
template <typename Scalar>
DelayProfile<Scalar> delay_profile(const VecR<Scalar>& power, const VecR<Scalar>& freqs_hz,
                                   const TargetSpec<Scalar>& target, const VecR<Scalar>& tau_grid) {
    if (power.size() != freqs_hz.size())
        throw std::invalid_argument("delay_profile: p and freqs mismatch");
    if (tau_grid.size() < 2) throw std::domain_error("delay_profile: grid too short");
    const Scalar bandwidth = (freqs_hz[1] - freqs_hz[0]) * Scalar(freqs_hz.size());
    const Scalar spacing = tau_grid[1] - tau_grid[0];
    if (spacing > Scalar(1) / (Scalar(4) * bandwidth))
        throw std::domain_error("delay_profile: grid spacing coarser than 1/(4B)");
    if (target.delay_s < tau_grid[0] || target.delay_s > tau_grid[tau_grid.size() - 1])
        throw std::domain_error("delay_profile: grid does not cover the target delay");

    DelayProfile<Scalar> profile;
    profile.tau_grid = tau_grid;
    profile.values.resize(tau_grid.size());
    Scalar peak_mag = -1;
    for (Eigen::Index i = 0; i < tau_grid.size(); ++i) {
        const Scalar dt = tau_grid[i] - target.delay_s;
        std::complex<Scalar> acc(0, 0);
        for (Eigen::Index k = 0; k < freqs_hz.size(); ++k)
            acc += power[k] * std::polar(Scalar(1),
                                         Scalar(2) * Scalar(EIGEN_PI) * freqs_hz[k] * dt);
        profile.values[i] = target.scatter_coeff * acc;
        const Scalar mag = std::abs(profile.values[i]);
        if (mag > peak_mag) {
            peak_mag = mag;
            profile.peak_index = i;
        }
    }
    const auto [psl, isl] = sidelobe_metrics(profile, Scalar(1) / bandwidth);
    profile.psl_db = psl;
    profile.isl_db = isl;
    return profile;
}

/// One full unambiguous delay period (1/delta_f wide) centered on a delay,
/// at the default 1/(8B) spacing. Sidelobe energy summed over this window
/// obeys the Parseval budget, which is what makes uniform power the
/// minimum-ISL choice.
template <typename Scalar>
VecR<Scalar> full_period_tau_grid(Scalar bandwidth_hz, int num_subcarriers, Scalar center_s) {
    const Scalar spacing = Scalar(1) / (Scalar(8) * bandwidth_hz);
    const Eigen::Index half = 4 * num_subcarriers;  // (1/(2 delta_f)) / spacing
    VecR<Scalar> grid(2 * half + 1);
    for (Eigen::Index i = 0; i < grid.size(); ++i)
        grid[i] = center_s + Scalar(i - half) * spacing;
    return grid;
}

/// Uniform tau grid of the default resolution (1/(8B) spacing) covering
/// [max(0, lo - pad), hi + pad] with pad = 8/B around the target delays.
template <typename Scalar>
VecR<Scalar> default_tau_grid(Scalar bandwidth_hz, Scalar min_delay_s, Scalar max_delay_s) {
    const Scalar spacing = Scalar(1) / (Scalar(8) * bandwidth_hz);
    const Scalar pad = Scalar(8) / bandwidth_hz;
    const Scalar lo = std::max(Scalar(0), min_delay_s - pad);
    const Scalar hi = max_delay_s + pad;
    const auto count = static_cast<Eigen::Index>((hi - lo) / spacing) + 1;
    VecR<Scalar> grid(count);
    for (Eigen::Index i = 0; i < count; ++i) grid[i] = lo + Scalar(i) * spacing;
    return grid;
}

/// Received array snapshot on subcarrier k over one symbol: delayed,
/// array-phased copies of the k-th transmit component from each target,
/// plus white complex noise of the given per-sample power.
template <typename Scalar>
MatC<Scalar> echo_snapshot(int k, const InterleavePattern& w, const VecR<Scalar>& power,
                           const VecC<Scalar>& dbar, const std::vector<TargetSpec<Scalar>>& targets,
                           const VecR<Scalar>& freqs_hz, const ArrayGeometry<Scalar>& geom,
                           int oversample, Scalar noise_power, Rng& rng) {
    const Eigen::Index num_subcarriers = freqs_hz.size();
    if (k < 0 || k >= num_subcarriers) throw std::invalid_argument("echo_snapshot: bad subcarrier");
    if (geom.num_rx < 1) throw std::invalid_argument("echo_snapshot: needs at least one receiver");
    const Scalar f_low = freqs_hz[0];
    const Scalar delta_f = freqs_hz[1] - freqs_hz[0];
    const Scalar f_k = freqs_hz[k];
    const Eigen::Index num_samples = num_subcarriers * oversample;
    const Scalar symbol_time = Scalar(1) / delta_f;
    const int tx_element = w.assign[k];
    const Scalar amplitude = std::sqrt(power[k]) / std::sqrt(Scalar(num_subcarriers));

    MatC<Scalar> snapshot = MatC<Scalar>::Zero(geom.num_rx, num_samples);
    for (const auto& target : targets) {
        const auto a_r = steering_vector(f_k, target.angle_rad, geom.num_rx, geom.d_r_m,
                                         geom.sound_speed);
        const auto a_t = steering_vector(f_k, target.angle_rad, geom.num_tx, geom.d_t_m,
                                         geom.sound_speed);
        const std::complex<Scalar> carrier_phase =
            std::polar(Scalar(1), Scalar(-2) * Scalar(EIGEN_PI) * f_low * target.delay_s);
        const std::complex<Scalar> gain =
            target.scatter_coeff * carrier_phase * a_t[tx_element] * amplitude * dbar[k];
        for (Eigen::Index i = 0; i < num_samples; ++i) {
            const Scalar t = Scalar(i) * symbol_time / Scalar(num_samples);
            const std::complex<Scalar> tone = std::polar(
                Scalar(1),
                Scalar(2) * Scalar(EIGEN_PI) * Scalar(k) * delta_f * (t - target.delay_s));
            for (int j = 0; j < geom.num_rx; ++j) snapshot(j, i) += gain * a_r[j] * tone;
        }
    }
    if (noise_power > Scalar(0)) {
        const Scalar sigma = std::sqrt(noise_power / Scalar(2));
        for (Eigen::Index i = 0; i < num_samples; ++i)
            for (int j = 0; j < geom.num_rx; ++j)
                snapshot(j, i) += std::complex<Scalar>(sigma * Scalar(rng.normal()),
                                                       sigma * Scalar(rng.normal()));
    }
    return snapshot;
}

/// Matched filtering plus conventional beamforming over all subcarriers:
/// complex joint spectrum indexed (tau, theta). The filter template is the
/// transmitted subcarrier replica averaged over the symbol, so a noiseless
/// on-angle cut reproduces the closed-form delay profile.
template <typename Scalar>
MatC<Scalar> joint_spectrum(const std::vector<MatC<Scalar>>& snapshots, const InterleavePattern& w,
                            const VecR<Scalar>& power, const VecC<Scalar>& dbar,
                            const VecR<Scalar>& freqs_hz, const ArrayGeometry<Scalar>& geom,
                            int oversample, const VecR<Scalar>& tau_grid,
                            const VecR<Scalar>& theta_grid) {
    const Eigen::Index num_subcarriers = freqs_hz.size();
    if (static_cast<Eigen::Index>(snapshots.size()) != num_subcarriers)
        throw std::invalid_argument("joint_spectrum: need one snapshot per subcarrier");
    const Scalar f_low = freqs_hz[0];
    const Scalar delta_f = freqs_hz[1] - freqs_hz[0];
    const Eigen::Index num_samples = num_subcarriers * oversample;
    const Scalar symbol_time = Scalar(1) / delta_f;

    MatC<Scalar> map = MatC<Scalar>::Zero(tau_grid.size(), theta_grid.size());
    VecC<Scalar> filtered(geom.num_rx);
    MatC<Scalar> beam_weights(geom.num_rx, theta_grid.size());
    for (Eigen::Index k = 0; k < num_subcarriers; ++k) {
        const Scalar f_k = freqs_hz[k];
        const std::complex<Scalar> template_gain =
            std::sqrt(power[k]) / std::sqrt(Scalar(num_subcarriers)) * dbar[k];
        for (Eigen::Index ai = 0; ai < theta_grid.size(); ++ai) {
            const auto a_r = steering_vector(f_k, theta_grid[ai], geom.num_rx, geom.d_r_m,
                                             geom.sound_speed);
            const auto a_t = steering_vector(f_k, theta_grid[ai], geom.num_tx, geom.d_t_m,
                                             geom.sound_speed);
            beam_weights.col(ai) =
                a_r.conjugate() * std::conj(a_t[w.assign[k]]) / Scalar(geom.num_rx);
        }
        // The K/num_samples factor restores the per-subcarrier p_k weight of
        // the autocorrelation after averaging the replica product.
        const Scalar filter_norm = Scalar(num_subcarriers) / Scalar(num_samples);
        for (Eigen::Index ti = 0; ti < tau_grid.size(); ++ti) {
            const Scalar tau = tau_grid[ti];
            filtered.setZero();
            for (Eigen::Index i = 0; i < num_samples; ++i) {
                const Scalar t = Scalar(i) * symbol_time / Scalar(num_samples);
                const std::complex<Scalar> ref =
                    template_gain * std::polar(Scalar(1), Scalar(2) * Scalar(EIGEN_PI) *
                                                              Scalar(k) * delta_f * (t - tau));
                const std::complex<Scalar> ref_conj = std::conj(ref);
                for (int j = 0; j < geom.num_rx; ++j) filtered[j] += snapshots[k](j, i) * ref_conj;
            }
            filtered *= std::polar(Scalar(1), Scalar(2) * Scalar(EIGEN_PI) * f_low * tau) *
                        filter_norm;
            map.row(ti) += (beam_weights.transpose() * filtered).transpose();
        }
    }
    return map;
}

}  // namespace uwisac
