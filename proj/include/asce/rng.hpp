#pragma once
// Deterministic random number generation.
//
// All stochastic pieces of the library (channel draws, training symbols,
// noise) pull from this one generator so that a run is reproducible from a
// single 64-bit seed.  std::normal_distribution is implementation-defined,
// so Gaussians are produced by an explicit Box-Muller transform with a fixed
// consumption pattern; the output stream is therefore identical across
// standard libraries and platforms.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace asce {

// SplitMix64 finalizer.  Used to whiten seeds derived from (base, index)
// pairs so that per-run substreams are decorrelated even for seeds 0,1,2,...
inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Seed for the index-th independent substream of a base seed (one substream
// per Monte-Carlo run, per sweep cell, ...).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    return splitmix64(base + index * 0x9e3779b97f4a7c15ULL);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n).  Rejection sampling keeps the draw unbiased
    // without depending on std::uniform_int_distribution's unspecified
    // algorithm.
    std::uint64_t uniform_below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t r = eng_();
        while (r >= limit) r = eng_();
        return r % n;
    }

    // Standard normal via Box-Muller.  Consumes two uniforms per pair; the
    // second value is cached so consecutive calls use both.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();  // avoid log(0)
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

    // Circularly-symmetric complex normal with E|z|^2 = 1.
    std::complex<double> complex_gaussian() {
        const double re = gaussian();
        const double im = gaussian();
        return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
    }

    // k distinct indices drawn uniformly from {0, ..., n-1}, returned sorted.
    // Partial Fisher-Yates on an index table.
    std::vector<int> sample_indices(int n, int k) {
        std::vector<int> idx(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
        for (int i = 0; i < k; ++i) {
            const int j = i + static_cast<int>(uniform_below(static_cast<std::uint64_t>(n - i)));
            std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
        }
        std::vector<int> out(idx.begin(), idx.begin() + k);
        std::sort(out.begin(), out.end());
        return out;
    }

    // One random bit (for payload bits in the link simulations).
    int bit() { return static_cast<int>(eng_() >> 63); }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace asce
