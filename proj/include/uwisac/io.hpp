// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "uwisac/channel.hpp"
#include "uwisac/metrics.hpp"
#include "uwisac/optimizer.hpp"
#include "uwisac/sensing.hpp"

namespace uwisac {

namespace iodetail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream stream(line);
    std::string field;
    while (std::getline(stream, field, ',')) fields.push_back(field);
    return fields;
}

inline double parse_double(const std::string& text, const std::string& where) {
    try {
        std::size_t used = 0;
        const double value = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument("trailing");
        return value;
    } catch (const std::exception&) {
        throw std::runtime_error("malformed number in " + where + ": '" + text + "'");
    }
}

inline long parse_long(const std::string& text, const std::string& where) {
    try {
        std::size_t used = 0;
        const long value = std::stol(text, &used);
        if (used != text.size()) throw std::invalid_argument("trailing");
        return value;
    } catch (const std::exception&) {
        throw std::runtime_error("malformed integer in " + where + ": '" + text + "'");
    }
}

inline std::ofstream open_out(const std::string& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot open for writing: " + file);
    return out;
}

inline std::ifstream open_in(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open for reading: " + file);
    return in;
}

}  // namespace iodetail

// ---- channels: user_id,range_m,f_hz,re,im ----------------------------------

inline void write_channels_csv(const std::string& file,
                               const std::vector<ChannelResponse<double>>& channels) {
    auto out = iodetail::open_out(file);
    out << "user_id,range_m,f_hz,re,im\n";
    for (const auto& ch : channels)
        for (Eigen::Index k = 0; k < ch.freqs_hz.size(); ++k)
            out << ch.user_id << ',' << format_full(ch.range_m) << ','
                << format_full(ch.freqs_hz[k]) << ',' << format_full(ch.h[k].real()) << ','
                << format_full(ch.h[k].imag()) << '\n';
}

/// Read a channel CSV; rows for each user must cover exactly the given
/// frequency grid, in order.
inline std::vector<ChannelResponse<double>> read_channels_csv(const std::string& file,
                                                              const VecR<double>& expected_freqs) {
    auto in = iodetail::open_in(file);
    std::string line;
    if (!std::getline(in, line) || line.rfind("user_id,range_m,f_hz,re,im", 0) != 0)
        throw std::runtime_error("channel csv: bad header in " + file);
    std::map<int, ChannelResponse<double>> by_user;
    std::map<int, Eigen::Index> cursor;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = iodetail::split_csv_line(line);
        if (fields.size() != 5) throw std::runtime_error("channel csv: bad row in " + file);
        const int user = static_cast<int>(iodetail::parse_long(fields[0], file));
        auto [it, fresh] = by_user.try_emplace(user);
        auto& ch = it->second;
        if (fresh) {
            ch.user_id = user;
            ch.range_m = iodetail::parse_double(fields[1], file);
            ch.freqs_hz.resize(expected_freqs.size());
            ch.h.resize(expected_freqs.size());
            cursor[user] = 0;
        }
        Eigen::Index& k = cursor[user];
        if (k >= expected_freqs.size())
            throw std::runtime_error("channel csv: too many rows for user " +
                                     std::to_string(user));
        const double f = iodetail::parse_double(fields[2], file);
        if (std::abs(f - expected_freqs[k]) > 1e-6 * std::abs(expected_freqs[k]))
            throw std::runtime_error("channel csv: frequency grid mismatch for user " +
                                     std::to_string(user));
        ch.freqs_hz[k] = f;
        ch.h[k] = {iodetail::parse_double(fields[3], file),
                   iodetail::parse_double(fields[4], file)};
        ++k;
    }
    std::vector<ChannelResponse<double>> channels;
    for (auto& [user, ch] : by_user) {
        if (cursor[user] != expected_freqs.size())
            throw std::runtime_error("channel csv: user " + std::to_string(user) +
                                     " does not cover the full grid");
        validate(ch);
        channels.push_back(std::move(ch));
    }
    for (std::size_t i = 0; i < channels.size(); ++i)
        if (channels[i].user_id != static_cast<int>(i))
            throw std::runtime_error("channel csv: user ids must be 0..Nu-1 without gaps");
    return channels;
}

// ---- solution: k,element,user (1-based) ------------------------------------

inline void write_solution_csv(const std::string& file, const InterleavePattern& w,
                               const AllocationMatrix& x) {
    if (w.assign.size() != x.assign.size())
        throw std::invalid_argument("solution csv: W and X length mismatch");
    auto out = iodetail::open_out(file);
    out << "k,element,user\n";
    for (Eigen::Index k = 0; k < w.assign.size(); ++k)
        out << (k + 1) << ',' << (w.assign[k] + 1) << ',' << (x.assign[k] + 1) << '\n';
}

inline std::pair<InterleavePattern, AllocationMatrix> read_solution_csv(const std::string& file,
                                                                        int num_tx,
                                                                        int num_users) {
    auto in = iodetail::open_in(file);
    std::string line;
    if (!std::getline(in, line) || line.rfind("k,element,user", 0) != 0)
        throw std::runtime_error("solution csv: bad header in " + file);
    std::vector<int> elements;
    std::vector<int> users;
    long expect_k = 1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = iodetail::split_csv_line(line);
        if (fields.size() != 3) throw std::runtime_error("solution csv: bad row in " + file);
        if (iodetail::parse_long(fields[0], file) != expect_k++)
            throw std::runtime_error("solution csv: subcarrier indices must be 1..K in order");
        elements.push_back(static_cast<int>(iodetail::parse_long(fields[1], file)) - 1);
        users.push_back(static_cast<int>(iodetail::parse_long(fields[2], file)) - 1);
    }
    InterleavePattern w;
    w.num_elements = num_tx;
    w.assign = Eigen::Map<const VecI>(elements.data(), static_cast<Eigen::Index>(elements.size()));
    AllocationMatrix x;
    x.num_users = num_users;
    x.assign = Eigen::Map<const VecI>(users.data(), static_cast<Eigen::Index>(users.size()));
    validate(w);
    validate(x);
    return {w, x};
}

// ---- search history: shuffle_count,prr_kbpskm ------------------------------

inline void write_history_csv(const std::string& file, const SearchState& state) {
    auto out = iodetail::open_out(file);
    out << "shuffle_count,prr_kbpskm\n";
    for (const auto& point : state.history)
        out << point.shuffle_count << ',' << format_full(point.prr_si / kPrrSiPerKbpsKm) << '\n';
}

// ---- delay profile / joint spectrum: tau_s,theta_rad,magnitude -------------

inline void write_profile_csv(const std::string& file, const DelayProfile<double>& profile,
                              double theta_rad) {
    auto out = iodetail::open_out(file);
    out << "tau_s,theta_rad,magnitude\n";
    for (Eigen::Index i = 0; i < profile.tau_grid.size(); ++i)
        out << format_full(profile.tau_grid[i]) << ',' << format_full(theta_rad) << ','
            << format_full(std::abs(profile.values[i])) << '\n';
}

inline void write_spectrum_csv(const std::string& file, const MatC<double>& map,
                               const VecR<double>& tau_grid, const VecR<double>& theta_grid) {
    auto out = iodetail::open_out(file);
    out << "tau_s,theta_rad,magnitude\n";
    for (Eigen::Index ti = 0; ti < tau_grid.size(); ++ti)
        for (Eigen::Index ai = 0; ai < theta_grid.size(); ++ai)
            out << format_full(tau_grid[ti]) << ',' << format_full(theta_grid[ai]) << ','
                << format_full(std::abs(map(ti, ai))) << '\n';
}

// ---- reports: line-oriented key=value blocks -------------------------------

inline std::string prr_report_text(const PrrReport<double>& report) {
    std::ostringstream out;
    out << "total_prr_kbpskm=" << format_full(report.total_prr_kbpskm()) << '\n';
    out << "total_prr_bps_m=" << format_full(report.total_prr) << '\n';
    for (Eigen::Index n = 0; n < report.per_user_rate.size(); ++n) {
        out << "user" << n << "_rate_bps=" << format_full(report.per_user_rate[n]) << '\n';
        out << "user" << n << "_prr_kbpskm="
            << format_full(report.per_user_prr[n] / kPrrSiPerKbpsKm) << '\n';
    }
    return out.str();
}

inline std::string feasibility_report_text(const FeasibilityReport& report) {
    std::ostringstream out;
    out << "feasible=" << (report.ok ? "true" : "false") << '\n';
    std::string violated;
    for (const auto& tag : report.violated) {
        if (!violated.empty()) violated += ';';
        violated += tag;
    }
    out << "violated=" << violated << '\n';
    for (const auto& [tag, margin] : report.margins)
        out << "margin_" << tag << '=' << format_full(margin) << '\n';
    return out.str();
}

inline std::map<std::string, std::string> parse_key_values(const std::string& text) {
    std::map<std::string, std::string> result;
    std::stringstream stream(text);
    std::string line;
    while (std::getline(stream, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        result[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return result;
}

}  // namespace uwisac
