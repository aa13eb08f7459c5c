// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <vector>

#include "uwisac/channel.hpp"
#include "uwisac/common.hpp"

namespace uwisac {

/// Subcarrier interleave pattern W, dense encoding: assign[k] is the
/// 0-based transmit element that radiates subcarrier k. CSV I/O is 1-based.
struct InterleavePattern {
    VecI assign;
    int num_elements = 0;
};

/// Frequency allocation X, dense encoding: assign[k] is the 0-based user
/// that subcarrier k carries data for.
struct AllocationMatrix {
    VecI assign;
    int num_users = 0;
};

inline std::vector<int> label_counts(const VecI& assign, int num_labels) {
    std::vector<int> counts(static_cast<std::size_t>(num_labels), 0);
    for (Eigen::Index k = 0; k < assign.size(); ++k) {
        const int label = assign[k];
        if (label < 0 || label >= num_labels) return {};  // out-of-range label
        ++counts[static_cast<std::size_t>(label)];
    }
    return counts;
}

/// Equal-count structural check: every label appears exactly K/num_labels times.
inline bool balanced(const VecI& assign, int num_labels) {
    if (num_labels <= 0 || assign.size() % num_labels != 0) return false;
    const int want = static_cast<int>(assign.size()) / num_labels;
    const auto counts = label_counts(assign, num_labels);
    if (counts.empty()) return false;
    for (int c : counts)
        if (c != want) return false;
    return true;
}

inline void validate(const InterleavePattern& w) {
    if (!balanced(w.assign, w.num_elements))
        throw std::invalid_argument("interleave pattern: unbalanced element assignment");
}

inline void validate(const AllocationMatrix& x) {
    if (!balanced(x.assign, x.num_users))
        throw std::invalid_argument("allocation matrix: unbalanced user assignment");
}

/// Uniform power vector p_k = P_total / K.
template <typename Scalar>
VecR<Scalar> uniform_power(int num_subcarriers, Scalar total_power) {
    if (num_subcarriers < 1 || !(total_power > Scalar(0)))
        throw std::invalid_argument("uniform_power: bad arguments");
    return VecR<Scalar>::Constant(num_subcarriers, total_power / Scalar(num_subcarriers));
}

/// One OFDM symbol worth of PSK data: row n holds user n's symbols in
/// transmission order.
template <typename Scalar>
struct SymbolFrame {
    MatC<Scalar> user_symbols;  // Nu x (K / Nu)
    int psk_order = 4;

    static SymbolFrame random(int num_users, int symbols_per_user, int psk_order, Rng& rng) {
        if (psk_order < 2) throw std::invalid_argument("symbol frame: PSK order must be >= 2");
        SymbolFrame frame;
        frame.psk_order = psk_order;
        frame.user_symbols.resize(num_users, symbols_per_user);
        for (int n = 0; n < num_users; ++n)
            for (int v = 0; v < symbols_per_user; ++v) {
                const auto idx = rng.below(static_cast<std::uint64_t>(psk_order));
                const Scalar phase =
                    Scalar(2) * Scalar(EIGEN_PI) * Scalar(idx) / Scalar(psk_order);
                frame.user_symbols(n, v) = std::polar(Scalar(1), phase);
            }
        return frame;
    }
};

/// Modified data symbols: subcarrier k carries user X.assign[k]'s next
/// symbol (ascending-k order) rotated by the conjugate channel phase, so the
/// received constellation point is the raw PSK symbol.
template <typename Scalar>
VecC<Scalar> modified_symbols(const AllocationMatrix& x, const SymbolFrame<Scalar>& frame,
                              const std::vector<ChannelResponse<Scalar>>& channels) {
    const Eigen::Index num_subcarriers = x.assign.size();
    if (static_cast<int>(channels.size()) < x.num_users)
        throw std::invalid_argument("modified_symbols: missing user channels");
    for (const auto& ch : channels)
        if (ch.h.size() != num_subcarriers)
            throw std::invalid_argument("modified_symbols: channel length != K");
    VecC<Scalar> dbar(num_subcarriers);
    std::vector<int> next_symbol(static_cast<std::size_t>(x.num_users), 0);
    for (Eigen::Index k = 0; k < num_subcarriers; ++k) {
        const int user = x.assign[k];
        const int v = next_symbol[static_cast<std::size_t>(user)]++;
        if (v >= frame.user_symbols.cols())
            throw std::invalid_argument("modified_symbols: frame too short for allocation");
        const Scalar channel_phase = std::arg(channels[static_cast<std::size_t>(user)].h[k]);
        dbar[k] = std::polar(Scalar(1), -channel_phase) * frame.user_symbols(user, v);
    }
    return dbar;
}

/// Core OFDM synthesis on an explicit set of active bins: time series of
/// length L*K with s[t] = (1/sqrt(K)) * sum_{k in bins} sqrt(p_k) dbar_k
/// e^{j2π k t / (LK)}. Zero bins stay zero; an empty bin set returns the
/// all-zero series.
template <typename Scalar>
VecC<Scalar> synth_tone_signal(const std::vector<int>& bins, const VecR<Scalar>& power,
                               const VecC<Scalar>& dbar, int oversample) {
    if (oversample < 1) throw std::invalid_argument("synth: oversample must be >= 1");
    const Eigen::Index num_subcarriers = power.size();
    if (dbar.size() != num_subcarriers) throw std::invalid_argument("synth: p and dbar mismatch");
    const Eigen::Index n = num_subcarriers * oversample;
    VecC<Scalar> spectrum = VecC<Scalar>::Zero(n);
    for (int k : bins) {
        if (k < 0 || k >= num_subcarriers) throw std::invalid_argument("synth: bin out of range");
        spectrum[k] = std::sqrt(power[k]) * dbar[k];
    }
    detail::fourier_transform(spectrum, +1);
    spectrum /= std::sqrt(Scalar(num_subcarriers));
    return spectrum;
}

inline std::vector<int> element_bins(const InterleavePattern& w, int element) {
    std::vector<int> bins;
    for (Eigen::Index k = 0; k < w.assign.size(); ++k)
        if (w.assign[k] == element) bins.push_back(static_cast<int>(k));
    return bins;
}

/// Baseband OFDM signal radiated by one transmit element.
template <typename Scalar>
VecC<Scalar> synth_element_signal(int element, const InterleavePattern& w,
                                  const VecR<Scalar>& power, const VecC<Scalar>& dbar,
                                  int oversample) {
    if (element < 0 || element >= w.num_elements)
        throw std::invalid_argument("synth_element_signal: element index out of range");
    return synth_tone_signal(element_bins(w, element), power, dbar, oversample);
}

/// Peak-to-average power ratio of a complex envelope, in dB.
template <typename Scalar>
Scalar papr_db(const VecC<Scalar>& signal) {
    if (signal.size() == 0) throw std::domain_error("papr: empty signal");
    Scalar peak = 0;
    Scalar mean = 0;
    for (Eigen::Index i = 0; i < signal.size(); ++i) {
        const Scalar mag2 = std::norm(signal[i]);
        peak = std::max(peak, mag2);
        mean += mag2;
    }
    mean /= Scalar(signal.size());
    if (!(mean > Scalar(0))) throw std::domain_error("papr: all-zero signal");
    return Scalar(10) * std::log10(peak / mean);
}

/// Per-element PAPR of the full candidate (W, X) with the given data frame.
template <typename Scalar>
VecR<Scalar> papr_all_elements(const InterleavePattern& w, const AllocationMatrix& x,
                               const VecR<Scalar>& power, const SymbolFrame<Scalar>& frame,
                               const std::vector<ChannelResponse<Scalar>>& channels,
                               int oversample) {
    const VecC<Scalar> dbar = modified_symbols(x, frame, channels);
    VecR<Scalar> result(w.num_elements);
    for (int m = 0; m < w.num_elements; ++m)
        result[m] = papr_db(synth_element_signal(m, w, power, dbar, oversample));
    return result;
}

/// Uniform-linear-array steering vector a(f, theta) with phase
/// 2π f d sin(theta) / c between adjacent elements.
template <typename Scalar>
VecC<Scalar> steering_vector(Scalar f_hz, Scalar theta_rad, int num_elements, Scalar spacing_m,
                             Scalar sound_speed = Scalar(kDefaultSoundSpeed)) {
    VecC<Scalar> a(num_elements);
    const Scalar eta =
        Scalar(2) * Scalar(EIGEN_PI) * spacing_m * std::sin(theta_rad) / sound_speed;
    for (int m = 0; m < num_elements; ++m) a[m] = std::polar(Scalar(1), Scalar(m) * f_hz * eta);
    return a;
}

/// Transmit beam pattern G(theta) = sum_k p_k |a_t(f_k, theta)[m_k]|^2.
/// With one element per subcarrier this is P_total at every angle; the sum
/// is evaluated honestly so tests can check the flatness.
template <typename Scalar>
VecR<Scalar> beam_pattern(const InterleavePattern& w, const VecR<Scalar>& power,
                          const VecR<Scalar>& theta_grid, const VecR<Scalar>& freqs_hz,
                          Scalar d_t_m, Scalar sound_speed = Scalar(kDefaultSoundSpeed)) {
    if (theta_grid.size() < 1) throw std::invalid_argument("beam_pattern: empty angle grid");
    if (power.size() != w.assign.size() || freqs_hz.size() != w.assign.size())
        throw std::invalid_argument("beam_pattern: dimension mismatch");
    VecR<Scalar> gain = VecR<Scalar>::Zero(theta_grid.size());
    for (Eigen::Index t = 0; t < theta_grid.size(); ++t) {
        const Scalar eta = Scalar(2) * Scalar(EIGEN_PI) * d_t_m *
                           std::sin(theta_grid[t]) / sound_speed;
        Scalar acc = 0;
        for (Eigen::Index k = 0; k < w.assign.size(); ++k) {
            const Scalar phase = Scalar(w.assign[k]) * freqs_hz[k] * eta;
            acc += power[k] * std::norm(std::polar(Scalar(1), phase));
        }
        gain[t] = acc;
    }
    return gain;
}

}  // namespace uwisac
