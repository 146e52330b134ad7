#pragma once

// OFDM/QAM link layer for BER evaluation of channel estimates: Gray-mapped
// constellations, cyclic-prefix OFDM over the FIR MIMO channel, per-subcarrier
// zero-forcing detection, and a seeded BER-vs-SNR sweep harness.

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/LU>

#include "asce/channel.hpp"
#include "asce/experiment.hpp"
#include "asce/rng.hpp"

namespace asce {

enum class Scheme { Psk, Qam };

inline std::string scheme_name(Scheme s) { return s == Scheme::Psk ? "PSK" : "QAM"; }

namespace detail {

inline int int_log2(int v) {
    int b = 0;
    while ((1 << b) < v) ++b;
    if ((1 << b) != v) throw std::invalid_argument("constellation order must be a power of two");
    return b;
}

// binary-reflected Gray code and its inverse
inline unsigned gray_encode(unsigned n) { return n ^ (n >> 1); }
inline unsigned gray_decode(unsigned g) {
    unsigned n = g;
    for (unsigned shift = 1; (g >> shift) != 0; ++shift) n ^= g >> shift;
    return n;
}

}  // namespace detail

// Bit label -> point table with unit average symbol energy. Labels index the
// table directly; adjacent points of square QAM differ in one bit per axis.
struct Constellation {
    Scheme scheme = Scheme::Psk;
    int order = 4;
    int bits_per_symbol = 2;
    std::vector<std::complex<double>> points;

    static Constellation make(Scheme scheme, int order);
};

inline std::string constellation_name(const Constellation& c) {
    if (c.scheme == Scheme::Psk) return c.order == 2 ? "BPSK" : "QPSK";
    return std::to_string(c.order) + "QAM";
}

inline Constellation Constellation::make(Scheme scheme, int order) {
    Constellation c;
    c.scheme = scheme;
    c.order = order;
    c.bits_per_symbol = detail::int_log2(order);
    c.points.resize(static_cast<std::size_t>(order));

    if (scheme == Scheme::Psk) {
        if (order == 2) {
            c.points[0] = {1.0, 0.0};
            c.points[1] = {-1.0, 0.0};
            return c;
        }
        if (order == 4) {
            // first bit selects the I sign, second the Q sign; 0 -> positive
            const double s = 1.0 / std::sqrt(2.0);
            c.points[0] = {s, s};
            c.points[1] = {s, -s};
            c.points[2] = {-s, s};
            c.points[3] = {-s, -s};
            return c;
        }
        throw std::invalid_argument("PSK order " + std::to_string(order) +
                                    " unsupported (supported: 2, 4)");
    }

    if (order == 4 || order == 16 || order == 64) {
        // square QAM: independent Gray-coded amplitude axes, I bits above Q bits
        const int side = static_cast<int>(std::lround(std::sqrt(double(order))));
        const int axis_bits = c.bits_per_symbol / 2;
        const double scale = 1.0 / std::sqrt(2.0 * (order - 1) / 3.0);
        for (int label = 0; label < order; ++label) {
            const unsigned hi = static_cast<unsigned>(label) >> axis_bits;
            const unsigned lo = static_cast<unsigned>(label) & ((1u << axis_bits) - 1u);
            const int ki = static_cast<int>(detail::gray_decode(hi));
            const int kq = static_cast<int>(detail::gray_decode(lo));
            c.points[static_cast<std::size_t>(label)] = {(2 * ki - (side - 1)) * scale,
                                                         (2 * kq - (side - 1)) * scale};
        }
        return c;
    }

    if (order == 128) {
        // cross constellation: a Gray-coded 16x8 rectangle (4 I bits over
        // 3 Q bits, odd-integer levels) whose outer columns |I| in {13,15}
        // fold onto wings above and below the core:
        //   I' = sign(I)*|Q|,  Q' = sign(Q)*(|I|-4)
        // leaving 12x8 core + 8x2 wings on each side (quasi-Gray labeling).
        double energy = 0.0;
        for (int label = 0; label < 128; ++label) {
            const unsigned hi = static_cast<unsigned>(label) >> 3;
            const unsigned lo = static_cast<unsigned>(label) & 7u;
            double i_lvl = 2.0 * static_cast<int>(detail::gray_decode(hi)) - 15.0;
            double q_lvl = 2.0 * static_cast<int>(detail::gray_decode(lo)) - 7.0;
            if (std::abs(i_lvl) > 11.0) {
                const double si = i_lvl < 0 ? -1.0 : 1.0;
                const double sq = q_lvl < 0 ? -1.0 : 1.0;
                const double folded_q = std::abs(i_lvl) - 4.0;
                i_lvl = si * std::abs(q_lvl);
                q_lvl = sq * folded_q;
            }
            c.points[static_cast<std::size_t>(label)] = {i_lvl, q_lvl};
            energy += i_lvl * i_lvl + q_lvl * q_lvl;
        }
        const double scale = 1.0 / std::sqrt(energy / 128.0);
        for (auto& p : c.points) p *= scale;
        return c;
    }

    throw std::invalid_argument("QAM order " + std::to_string(order) +
                                " unsupported (supported: 4, 16, 64, 128)");
}

inline std::vector<std::uint8_t> random_bits(std::size_t count, Rng& rng) {
    std::vector<std::uint8_t> bits(count);
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng.bit());
    return bits;
}

// bits are consumed most-significant-first per symbol label
inline Eigen::VectorXcd modulate(const std::vector<std::uint8_t>& bits, const Constellation& c) {
    const int m = c.bits_per_symbol;
    if (bits.size() % static_cast<std::size_t>(m) != 0)
        throw std::invalid_argument("modulate: bit count " + std::to_string(bits.size()) +
                                    " not divisible by " + std::to_string(m));
    const std::size_t n = bits.size() / static_cast<std::size_t>(m);
    Eigen::VectorXcd symbols(static_cast<Eigen::Index>(n));
    for (std::size_t s = 0; s < n; ++s) {
        unsigned label = 0;
        for (int b = 0; b < m; ++b)
            label = (label << 1) | bits[s * static_cast<std::size_t>(m) + static_cast<std::size_t>(b)];
        symbols[static_cast<Eigen::Index>(s)] = c.points[label];
    }
    return symbols;
}

// nearest-point hard decision; ties resolve to the lowest bit label
inline unsigned nearest_label(std::complex<double> y, const Constellation& c) {
    unsigned best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (unsigned label = 0; label < static_cast<unsigned>(c.order); ++label) {
        const double d = std::norm(y - c.points[label]);
        if (d < best_d) {
            best_d = d;
            best = label;
        }
    }
    return best;
}

inline std::vector<std::uint8_t> demodulate(const Eigen::Ref<const Eigen::VectorXcd>& symbols,
                                            const Constellation& c) {
    const int m = c.bits_per_symbol;
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(symbols.size()) *
                                   static_cast<std::size_t>(m));
    for (Eigen::Index s = 0; s < symbols.size(); ++s) {
        const unsigned label = nearest_label(symbols[s], c);
        for (int b = 0; b < m; ++b)
            bits[static_cast<std::size_t>(s) * static_cast<std::size_t>(m) +
                 static_cast<std::size_t>(b)] =
                static_cast<std::uint8_t>((label >> (m - 1 - b)) & 1u);
    }
    return bits;
}

// Forward/inverse DFT pair. Unitary uses 1/sqrt(K) both ways (energy
// preserving); Literal uses 1/K forward and unscaled inverse. Either way
// inverse(forward(x)) == x and the per-subcarrier channel response is the
// unscaled tap DFT.
enum class DftConvention { Unitary, Literal };

inline Eigen::MatrixXcd dft_matrix(int k, DftConvention conv) {
    if (k < 1) throw std::invalid_argument("dft_matrix: size must be >= 1");
    const double scale = conv == DftConvention::Unitary ? 1.0 / std::sqrt(double(k)) : 1.0 / k;
    Eigen::MatrixXcd f(k, k);
    for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c) {
            const double ang = -2.0 * std::numbers::pi * r * c / k;
            f(r, c) = scale * std::complex<double>(std::cos(ang), std::sin(ang));
        }
    return f;
}

inline Eigen::MatrixXcd idft_matrix(int k, DftConvention conv) {
    const double scale = conv == DftConvention::Unitary ? 1.0 / std::sqrt(double(k)) : 1.0;
    Eigen::MatrixXcd f(k, k);
    for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c) {
            const double ang = 2.0 * std::numbers::pi * r * c / k;
            f(r, c) = scale * std::complex<double>(std::cos(ang), std::sin(ang));
        }
    return f;
}

struct OfdmParams {
    int num_subcarriers = 16;
    int cp_len = 16;
};

struct LinkResult {
    long long bit_errors = 0;
    long long bits_total = 0;
    long long ridge_solves = 0;  // subcarriers whose ZF matrix needed the ridge
};

// One OFDM transmission of `bits` over the true channel, detected with the
// estimate `h_hat` (pass channel.matrix() for perfect CSI). Per block and
// transmit antenna: inverse DFT, cyclic prefix, FIR convolution per link,
// time-domain AWGN with variance set so the mean received symbol energy over
// noise power equals snr_db; receiver strips the prefix, transforms back, and
// zero-forces each subcarrier. Singular subcarrier matrices fall back to a
// ridge (1e-9) and are counted.
inline LinkResult ofdm_link(const std::vector<std::uint8_t>& bits,
                            const MimoChannel<std::complex<double>>& channel,
                            const Eigen::MatrixXcd& h_hat, double snr_db, const Constellation& c,
                            const OfdmParams& params, Rng& rng,
                            DftConvention conv = DftConvention::Unitary) {
    using Cx = std::complex<double>;
    const int k_sub = params.num_subcarriers;
    const int cp = params.cp_len;
    const int n_r = channel.n_r;
    const int n_t = channel.n_t;
    const int len = channel.length;

    if (k_sub < len)
        throw std::invalid_argument("ofdm_link: num_subcarriers >= channel length violated");
    if (cp < len - 1)
        throw std::invalid_argument("ofdm_link: cp_len >= channel length - 1 violated");
    if (n_r < n_t) throw std::invalid_argument("ofdm_link: N_r >= N_t violated");
    if (h_hat.rows() != n_r || h_hat.cols() != Eigen::Index(n_t) * len)
        throw std::invalid_argument("ofdm_link: estimate shape does not match the channel");

    const int m = c.bits_per_symbol;
    const std::size_t block_bits =
        static_cast<std::size_t>(k_sub) * static_cast<std::size_t>(n_t) *
        static_cast<std::size_t>(m);
    if (bits.empty() || bits.size() % block_bits != 0)
        throw std::invalid_argument("ofdm_link: bit count " + std::to_string(bits.size()) +
                                    " is not a positive multiple of " + std::to_string(block_bits));
    const std::size_t blocks = bits.size() / block_bits;

    const Eigen::MatrixXcd fwd = dft_matrix(k_sub, conv);
    const Eigen::MatrixXcd inv = idft_matrix(k_sub, conv);

    // per-subcarrier detection operators from the estimate (unscaled tap DFT)
    LinkResult out;
    out.bits_total = static_cast<long long>(bits.size());
    std::vector<Eigen::MatrixXcd> freq_adj(static_cast<std::size_t>(k_sub));
    std::vector<Eigen::FullPivLU<Eigen::MatrixXcd>> zf(static_cast<std::size_t>(k_sub));
    for (int k = 0; k < k_sub; ++k) {
        Eigen::MatrixXcd hk(n_r, n_t);
        for (int r = 0; r < n_r; ++r)
            for (int t = 0; t < n_t; ++t) {
                Cx acc(0.0, 0.0);
                for (int l = 0; l < len; ++l) {
                    const double ang = -2.0 * std::numbers::pi * k * l / k_sub;
                    acc += h_hat(r, Eigen::Index(t) * len + l) *
                           Cx(std::cos(ang), std::sin(ang));
                }
                hk(r, t) = acc;
            }
        Eigen::MatrixXcd normal = hk.adjoint() * hk;
        zf[static_cast<std::size_t>(k)].compute(normal);
        if (!zf[static_cast<std::size_t>(k)].isInvertible()) {
            normal += 1e-9 * Eigen::MatrixXcd::Identity(n_t, n_t);
            zf[static_cast<std::size_t>(k)].compute(normal);
            ++out.ridge_solves;
        }
        freq_adj[static_cast<std::size_t>(k)] = hk.adjoint();
    }

    // mean received symbol energy across receive antennas sets the noise level
    double row_power = 0.0;
    for (int r = 0; r < n_r; ++r) row_power += channel.row(r).squaredNorm();
    row_power /= n_r;
    const double sigma2 =
        std::isinf(snr_db) ? 0.0 : row_power * std::pow(10.0, -snr_db / 10.0);
    const double sigma_part = std::sqrt(sigma2 / 2.0);

    const Eigen::VectorXcd symbols = modulate(bits, c);

    Eigen::MatrixXcd tx_time(cp + k_sub, n_t);
    Eigen::MatrixXcd rx_time(k_sub, n_r);
    Eigen::MatrixXcd rx_freq(k_sub, n_r);
    Eigen::VectorXcd x_freq(k_sub);
    for (std::size_t b = 0; b < blocks; ++b) {
        const std::size_t sym_base = b * static_cast<std::size_t>(k_sub) *
                                     static_cast<std::size_t>(n_t);
        for (int t = 0; t < n_t; ++t) {
            for (int k = 0; k < k_sub; ++k)
                x_freq[k] = symbols[static_cast<Eigen::Index>(
                    sym_base + static_cast<std::size_t>(k) * static_cast<std::size_t>(n_t) +
                    static_cast<std::size_t>(t))];
            tx_time.col(t).tail(k_sub) = inv * x_freq;
            tx_time.col(t).head(cp) = tx_time.col(t).tail(cp);
        }
        for (int r = 0; r < n_r; ++r) {
            for (int k = 0; k < k_sub; ++k) {
                Cx acc(0.0, 0.0);
                for (int t = 0; t < n_t; ++t) {
                    const auto& taps = channel.link(r, t).taps;
                    const int pos = cp + k;  // >= cp >= len-1, so no block spill-in
                    for (int l = 0; l < len; ++l) acc += taps[l] * tx_time(pos - l, t);
                }
                if (sigma2 > 0.0)
                    acc += Cx(sigma_part * rng.gaussian(), sigma_part * rng.gaussian());
                rx_time(k, r) = acc;
            }
            rx_freq.col(r) = fwd * rx_time.col(r);
        }
        for (int k = 0; k < k_sub; ++k) {
            const Eigen::VectorXcd detected =
                zf[static_cast<std::size_t>(k)].solve(freq_adj[static_cast<std::size_t>(k)] *
                                                      rx_freq.row(k).transpose());
            for (int t = 0; t < n_t; ++t) {
                const unsigned label = nearest_label(detected[t], c);
                const std::size_t bit_base =
                    (sym_base + static_cast<std::size_t>(k) * static_cast<std::size_t>(n_t) +
                     static_cast<std::size_t>(t)) *
                    static_cast<std::size_t>(m);
                for (int bit = 0; bit < m; ++bit) {
                    const std::uint8_t sent = bits[bit_base + static_cast<std::size_t>(bit)];
                    const std::uint8_t got =
                        static_cast<std::uint8_t>((label >> (m - 1 - bit)) & 1u);
                    out.bit_errors += sent != got;
                }
            }
        }
    }
    return out;
}

struct BerPoint {
    double snr_db = 0.0;
    Scheme scheme = Scheme::Qam;
    int order = 0;
    std::string algorithm;
    double ber = 0.0;
    long long errors = 0;
    long long bits = 0;
    long long ridge_solves = 0;
    bool low_confidence = false;  // fewer than 100 errors observed
};

// BER versus SNR for cfg.algo: per grid point and channel realization, adapt
// on training data (stopping rule as configured, C resolved per SNR), then
// transmit fresh payload bits through the true channel and detect with the
// estimate. Channel/adaptation seeds are shared across constellations and
// algorithm choices so comparisons are paired; payload streams are derived
// per constellation. Points with fewer than 100 errors are flagged.
inline std::vector<BerPoint> ber_curve(const RunConfig& cfg,
                                       const std::vector<Constellation>& constellations,
                                       const std::vector<double>& snr_grid,
                                       long long bits_per_point,
                                       const OfdmParams& params = OfdmParams{},
                                       DftConvention conv = DftConvention::Unitary) {
    using Cx = std::complex<double>;
    cfg.validate();
    if (constellations.empty()) throw std::invalid_argument("ber_curve: no constellations");
    if (snr_grid.empty()) throw std::invalid_argument("ber_curve: empty SNR grid");
    if (bits_per_point < 1) throw std::invalid_argument("ber_curve: bits_per_point >= 1 violated");

    const std::size_t n_points = snr_grid.size() * constellations.size();
    std::vector<BerPoint> points(n_points);

    auto run_point = [&](std::size_t pi) {
        const std::size_t si = pi / constellations.size();
        const std::size_t ci = pi % constellations.size();
        const double snr = snr_grid[si];
        const Constellation& c = constellations[ci];

        RunConfig rcfg = cfg;
        rcfg.snr_db = snr;
        rcfg.algo = cfg.resolved_algo(snr);
        rcfg.auto_c = false;

        const std::size_t block_bits = static_cast<std::size_t>(params.num_subcarriers) *
                                       static_cast<std::size_t>(cfg.n_t) *
                                       static_cast<std::size_t>(c.bits_per_symbol);
        const long long per_run =
            (bits_per_point + cfg.num_runs - 1) / cfg.num_runs;
        const std::size_t blocks = std::max<std::size_t>(
            1, (static_cast<std::size_t>(per_run) + block_bits - 1) / block_bits);

        BerPoint p;
        p.snr_db = snr;
        p.scheme = c.scheme;
        p.order = c.order;
        p.algorithm = variant_name(cfg.algo.variant);
        for (int r = 0; r < cfg.num_runs; ++r) {
            const std::uint64_t run_seed = derive_seed(
                cfg.seed, static_cast<std::uint64_t>(si) * static_cast<std::uint64_t>(cfg.num_runs) +
                              static_cast<std::uint64_t>(r));
            Rng rng_train(run_seed);
            auto channel = assemble<Cx>(cfg.n_r, cfg.n_t, cfg.length, cfg.sparsity,
                                        cfg.tap_variance, cfg.normalize, rng_train);
            const auto adapted = run_adaptation<Cx>(rcfg, channel, rng_train);

            Rng rng_data(derive_seed(run_seed, 1 + static_cast<std::uint64_t>(ci)));
            const auto bits = random_bits(blocks * block_bits, rng_data);
            const auto res = ofdm_link(bits, channel, adapted.h_hat, snr, c, params,
                                       rng_data, conv);
            p.errors += res.bit_errors;
            p.bits += res.bits_total;
            p.ridge_solves += res.ridge_solves;
        }
        p.ber = static_cast<double>(p.errors) / static_cast<double>(p.bits);
        p.low_confidence = p.errors < 100;
        points[pi] = std::move(p);
    };

    const int workers = std::max(1, std::min<int>(cfg.threads, static_cast<int>(n_points)));
    if (workers == 1) {
        for (std::size_t pi = 0; pi < n_points; ++pi) run_point(pi);
    } else {
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t pi = static_cast<std::size_t>(w); pi < n_points;
                         pi += static_cast<std::size_t>(workers))
                        run_point(pi);
                } catch (...) {
                    errors[static_cast<std::size_t>(w)] = std::current_exception();
                }
            });
        for (auto& t : pool) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    return points;
}

}  // namespace asce
