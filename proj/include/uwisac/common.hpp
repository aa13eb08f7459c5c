// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace uwisac {

template <typename Scalar>
using VecR = Eigen::Vector<Scalar, Eigen::Dynamic>;
template <typename Scalar>
using VecC = Eigen::Vector<std::complex<Scalar>, Eigen::Dynamic>;
template <typename Scalar>
using MatR = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using MatC = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;
using VecI = Eigen::VectorXi;

inline constexpr double kDefaultSoundSpeed = 1500.0;  // m/s

/// Thrown for malformed configuration (bad keys, divisibility violations).
/// The CLI maps it to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string format_full(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::string format_short(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", x);
    return buf;
}

/// splitmix64 step; used both as a stream mixer and to seed the main engine.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derive a child seed from a parent seed and up to three stream tags.
/// Candidate RNG streams are keyed this way so results do not depend on
/// evaluation order or thread schedule.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0,
                              std::uint64_t c = 0) {
    std::uint64_t s = seed;
    std::uint64_t h = splitmix64(s);
    s ^= a + 0x9e3779b97f4a7c15ULL;
    h ^= splitmix64(s);
    s ^= b + 0xd1b54a32d192ed03ULL;
    h ^= splitmix64(s);
    s ^= c + 0x8cb92ba72f3d8dd7ULL;
    h ^= splitmix64(s);
    return h;
}

/// xoshiro256** with portable helpers. std engines/distributions are avoided
/// on purpose: bit-identical sequences are part of the artifact contract.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& word : state_) word = splitmix64(s);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform in [0, 1).
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, bound); rejection sampling, no modulo bias.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    /// Standard normal via Box-Muller; the paired value is cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * EIGEN_PI * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    /// Fisher-Yates over a contiguous range.
    template <typename T>
    void shuffle(T* data, std::ptrdiff_t n) {
        for (std::ptrdiff_t i = n - 1; i > 0; --i) {
            const auto j = static_cast<std::ptrdiff_t>(below(static_cast<std::uint64_t>(i + 1)));
            std::swap(data[i], data[j]);
        }
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4]{};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

namespace detail {

/// In-place unnormalized DFT, sign = +1 for the inverse kernel e^{+j2πkn/N}.
/// Radix-2 when the length is a power of two, direct evaluation otherwise
/// (the direct path only ever sees small test sizes).
template <typename Scalar>
void fourier_transform(VecC<Scalar>& data, int sign) {
    using Cplx = std::complex<Scalar>;
    const Eigen::Index n = data.size();
    if (n <= 1) return;
    if ((n & (n - 1)) != 0) {
        VecC<Scalar> out(n);
        const Scalar base = Scalar(sign) * Scalar(2) * Scalar(EIGEN_PI) / Scalar(n);
        for (Eigen::Index q = 0; q < n; ++q) {
            Cplx acc(0, 0);
            for (Eigen::Index k = 0; k < n; ++k)
                acc += data[k] * std::polar(Scalar(1), base * Scalar(q) * Scalar(k));
            out[q] = acc;
        }
        data = std::move(out);
        return;
    }
    for (Eigen::Index i = 1, j = 0; i < n; ++i) {
        Eigen::Index bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }
    for (Eigen::Index len = 2; len <= n; len <<= 1) {
        const Scalar angle = Scalar(sign) * Scalar(2) * Scalar(EIGEN_PI) / Scalar(len);
        const Cplx wstep = std::polar(Scalar(1), angle);
        for (Eigen::Index i = 0; i < n; i += len) {
            Cplx w(1, 0);
            for (Eigen::Index k = 0; k < len / 2; ++k) {
                const Cplx u = data[i + k];
                const Cplx v = data[i + k + len / 2] * w;
                data[i + k] = u + v;
                data[i + k + len / 2] = u - v;
                w *= wstep;
            }
        }
    }
}

}  // namespace detail

}  // namespace uwisac
