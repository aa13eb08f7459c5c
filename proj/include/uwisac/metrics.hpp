// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <limits>
#include <map>
#include <string>
#include <vector>

#include "uwisac/channel.hpp"
#include "uwisac/common.hpp"
#include "uwisac/waveform.hpp"

namespace uwisac {

inline constexpr double kPrrSiPerKbpsKm = 1.0e6;  // bits/s*m per kbps*km

/// Rate-range products; SI unit is bits/s * meters.
template <typename Scalar>
struct PrrReport {
    VecR<Scalar> per_user_rate;  // bits/s
    VecR<Scalar> per_user_prr;   // bits/s * m
    Scalar total_prr = 0;        // bits/s * m

    Scalar total_prr_kbpskm() const { return total_prr / Scalar(kPrrSiPerKbpsKm); }
};

/// Achievable rate of one user: R_n = sum over its subcarriers of
/// delta_f * log2(1 + p_k |H_n(f_k)|^2 / sigma_k^2).
template <typename Scalar>
Scalar user_rate(int user, const AllocationMatrix& x, const VecR<Scalar>& power,
                 const ChannelResponse<Scalar>& channel, const VecR<Scalar>& noise_var) {
    const Eigen::Index num_subcarriers = x.assign.size();
    if (power.size() != num_subcarriers || channel.h.size() != num_subcarriers ||
        noise_var.size() != num_subcarriers)
        throw std::invalid_argument("user_rate: dimension mismatch");
    if (channel.freqs_hz.size() < 2) throw std::invalid_argument("user_rate: needs K >= 2");
    const Scalar delta_f = channel.freqs_hz[1] - channel.freqs_hz[0];
    Scalar rate = 0;
    for (Eigen::Index k = 0; k < num_subcarriers; ++k) {
        if (x.assign[k] != user) continue;
        if (!(noise_var[k] > Scalar(0))) throw std::domain_error("user_rate: zero noise variance");
        const Scalar snr = power[k] * std::norm(channel.h[k]) / noise_var[k];
        rate += delta_f * std::log2(Scalar(1) + snr);
    }
    return rate;
}

/// Full rate-range report over all users: PRR = sum_n R_n r_n.
template <typename Scalar>
PrrReport<Scalar> prr(const AllocationMatrix& x, const VecR<Scalar>& power,
                      const std::vector<ChannelResponse<Scalar>>& channels,
                      const VecR<Scalar>& noise_var) {
    if (static_cast<int>(channels.size()) < x.num_users)
        throw std::invalid_argument("prr: missing user channels");
    PrrReport<Scalar> report;
    report.per_user_rate.resize(x.num_users);
    report.per_user_prr.resize(x.num_users);
    report.total_prr = 0;
    for (int n = 0; n < x.num_users; ++n) {
        const auto& ch = channels[static_cast<std::size_t>(n)];
        report.per_user_rate[n] = user_rate(n, x, power, ch, noise_var);
        report.per_user_prr[n] = report.per_user_rate[n] * ch.range_m;
        report.total_prr += report.per_user_prr[n];
    }
    return report;
}

/// Outcome of checking a candidate against all eight constraints.
/// Structural constraints carry boolean slack (1 = satisfied); the PRR and
/// PAPR constraints carry their real-valued margins.
struct FeasibilityReport {
    bool ok = false;
    std::vector<std::string> violated;
    std::map<std::string, double> margins;
};

/// Evaluate constraints (a)-(h): per-element counts, binary labels,
/// per-user counts, per-user minimum PRR, per-element PAPR ceiling,
/// uniform power, and one-hot assignment (one-hot holds by encoding; the
/// label-range check covers malformed inputs).
template <typename Scalar>
FeasibilityReport check_feasibility(const InterleavePattern& w, const AllocationMatrix& x,
                                    const VecR<Scalar>& power, const SymbolFrame<Scalar>& frame,
                                    const std::vector<ChannelResponse<Scalar>>& channels,
                                    const VecR<Scalar>& noise_var, Scalar prr_min_si,
                                    Scalar papr_limit_db, Scalar total_power, int oversample) {
    FeasibilityReport report;
    auto structural = [&report](const std::string& tag, bool satisfied) {
        report.margins[tag] = satisfied ? 1.0 : 0.0;
        if (!satisfied) report.violated.push_back(tag);
    };

    const auto w_counts = label_counts(w.assign, w.num_elements);
    const auto x_counts = label_counts(x.assign, x.num_users);
    const bool w_labels_ok = !w_counts.empty();
    const bool x_labels_ok = !x_counts.empty();
    structural("16a", w_labels_ok && balanced(w.assign, w.num_elements));
    structural("16b", w_labels_ok);
    structural("16c", x_labels_ok && balanced(x.assign, x.num_users));
    structural("16d", x_labels_ok);

    double prr_margin = std::numeric_limits<double>::infinity();
    if (x_labels_ok) {
        const auto report_prr = prr(x, power, channels, noise_var);
        for (int n = 0; n < x.num_users; ++n)
            prr_margin = std::min(prr_margin,
                                  static_cast<double>(report_prr.per_user_prr[n] - prr_min_si));
    } else {
        prr_margin = -std::numeric_limits<double>::infinity();
    }
    report.margins["16e"] = prr_margin;
    if (!(prr_margin >= 0.0)) report.violated.push_back("16e");

    double papr_margin = std::numeric_limits<double>::infinity();
    if (std::isfinite(static_cast<double>(papr_limit_db))) {
        const auto papr = papr_all_elements(w, x, power, frame, channels, oversample);
        papr_margin = static_cast<double>(papr_limit_db - papr.maxCoeff());
    }
    report.margins["16f"] = papr_margin;
    if (!(papr_margin >= 0.0)) report.violated.push_back("16f");

    const Scalar uniform = total_power / Scalar(power.size());
    bool power_ok = true;
    for (Eigen::Index k = 0; k < power.size(); ++k)
        if (std::abs(power[k] - uniform) > Scalar(1e-9) * uniform) power_ok = false;
    structural("16g", power_ok);

    structural("16h", w_labels_ok && x_labels_ok);  // one label per subcarrier by encoding

    // Keep the report tags ordered for stable serialization.
    std::sort(report.violated.begin(), report.violated.end());
    report.ok = report.violated.empty();
    return report;
}

}  // namespace uwisac
