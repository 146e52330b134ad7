#pragma once
// Sparse multipath MIMO channel simulator.
//
// A channel is an N_r x N_t grid of FIR links, each of length L with exactly
// T nonzero taps at uniformly random positions.  The concatenation of the
// links feeding one receive antenna forms that antenna's MISO row of length
// N_t*L; rows are normalized to unit power (exactly per realization by
// default, or in expectation).  The matching regressor is produced by a bank
// of per-transmit-antenna tap-delay lines stacked in the same order, so
// row.transpose() * x equals the sum of the per-link FIR convolutions.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "asce/rng.hpp"
#include "asce/scalar.hpp"

namespace asce {

enum class Normalization { Exact, Expectation };

template <typename Scalar>
struct SparseLink {
    Vector<Scalar> taps;       // length L, zero outside support
    std::vector<int> support;  // sorted indices of the T nonzero taps
};

template <typename Scalar>
struct MimoChannel {
    int n_r = 0, n_t = 0, length = 0;
    std::vector<SparseLink<Scalar>> links;  // row-major: links[nr * n_t + nt]

    const SparseLink<Scalar>& link(int nr, int nt) const {
        return links[static_cast<std::size_t>(nr * n_t + nt)];
    }
    SparseLink<Scalar>& link(int nr, int nt) {
        return links[static_cast<std::size_t>(nr * n_t + nt)];
    }

    // MISO row for one receive antenna: [h_{nr,1}; h_{nr,2}; ...] stacked.
    Vector<Scalar> row(int nr) const {
        Vector<Scalar> r(static_cast<Eigen::Index>(n_t) * length);
        for (int nt = 0; nt < n_t; ++nt)
            r.segment(static_cast<Eigen::Index>(nt) * length, length) = link(nr, nt).taps;
        return r;
    }

    // Full N_r x (N_t*L) matrix (rows as above).
    Matrix<Scalar> matrix() const {
        Matrix<Scalar> h(n_r, static_cast<Eigen::Index>(n_t) * length);
        for (int nr = 0; nr < n_r; ++nr) h.row(nr) = row(nr).transpose();
        return h;
    }
};

namespace detail {
template <typename Scalar>
Scalar gaussian_tap(Rng& rng, double variance) {
    if constexpr (is_complex_v<Scalar>) {
        return std::sqrt(variance) * rng.complex_gaussian();
    } else {
        return std::sqrt(variance) * rng.gaussian();
    }
}
}  // namespace detail

// One sparse FIR link: T taps at uniform positions, i.i.d. Gaussian values
// (circular complex in complex mode) of the given variance.
template <typename Scalar>
SparseLink<Scalar> generate_link(int length, int sparsity, double tap_variance, Rng& rng) {
    if (sparsity < 1 || sparsity > length)
        throw std::invalid_argument("sparsity T must satisfy 1 ≤ T ≤ L, got T = " +
                                    std::to_string(sparsity) + ", L = " + std::to_string(length));
    SparseLink<Scalar> link;
    link.taps = Vector<Scalar>::Zero(length);
    link.support = rng.sample_indices(length, sparsity);
    for (int idx : link.support) link.taps[idx] = detail::gaussian_tap<Scalar>(rng, tap_variance);
    return link;
}

// Draws the full link grid and normalizes each receive antenna's MISO row to
// unit power: exactly per draw (removes realization-to-realization power
// spread from the Monte-Carlo variance) or only in expectation.
template <typename Scalar>
MimoChannel<Scalar> assemble(int n_r, int n_t, int length, int sparsity, double tap_variance,
                             Normalization norm, Rng& rng) {
    if (n_r < 1 || n_t < 1 || length < 1)
        throw std::invalid_argument("channel dimensions must be ≥ 1");
    MimoChannel<Scalar> ch;
    ch.n_r = n_r;
    ch.n_t = n_t;
    ch.length = length;
    ch.links.reserve(static_cast<std::size_t>(n_r) * n_t);
    for (int nr = 0; nr < n_r; ++nr)
        for (int nt = 0; nt < n_t; ++nt)
            ch.links.push_back(generate_link<Scalar>(length, sparsity, tap_variance, rng));

    for (int nr = 0; nr < n_r; ++nr) {
        double scale;
        if (norm == Normalization::Exact) {
            double power = 0.0;
            for (int nt = 0; nt < n_t; ++nt) power += ch.link(nr, nt).taps.squaredNorm();
            scale = 1.0 / std::sqrt(power);
        } else {
            scale = 1.0 / std::sqrt(static_cast<double>(n_t) * sparsity * tap_variance);
        }
        for (int nt = 0; nt < n_t; ++nt) ch.link(nr, nt).taps *= Scalar(scale);
    }
    return ch;
}

// Per-transmit-antenna tap-delay lines.  Column nt holds the last L samples
// of antenna nt, newest at delay 0; stacked() concatenates the columns in
// antenna order to mirror MimoChannel::row().
template <typename Scalar>
class RegressorBank {
public:
    RegressorBank(int n_t, int length) {
        if (n_t < 1 || length < 1) throw std::invalid_argument("bank dimensions must be ≥ 1");
        lines_ = Matrix<Scalar>::Zero(length, n_t);
    }

    int antennas() const { return static_cast<int>(lines_.cols()); }
    int length() const { return static_cast<int>(lines_.rows()); }

    void push(const Vector<Scalar>& samples) {
        if (samples.size() != lines_.cols())
            throw std::invalid_argument("expected " + std::to_string(lines_.cols()) +
                                        " samples, got " + std::to_string(samples.size()));
        const Eigen::Index l = lines_.rows();
        for (Eigen::Index c = 0; c < lines_.cols(); ++c) {
            for (Eigen::Index i = l - 1; i > 0; --i) lines_(i, c) = lines_(i - 1, c);
            lines_(0, c) = samples[c];
        }
    }

    Vector<Scalar> stacked() const {
        Vector<Scalar> x(lines_.size());
        for (Eigen::Index c = 0; c < lines_.cols(); ++c)
            x.segment(c * lines_.rows(), lines_.rows()) = lines_.col(c);
        return x;
    }

    Vector<Scalar> push_and_stack(const Vector<Scalar>& samples) {
        push(samples);
        return stacked();
    }

private:
    Matrix<Scalar> lines_;
};

struct NoiseSpec {
    double snr_db = 10.0;
    double signal_power = 1.0;

    double variance() const { return signal_power * std::pow(10.0, -snr_db / 10.0); }
    static NoiseSpec noiseless() { return NoiseSpec{std::numeric_limits<double>::infinity(), 1.0}; }
};

namespace detail {
template <typename Scalar>
Scalar noise_sample(Rng& rng, double sigma) {
    if constexpr (is_complex_v<Scalar>) {
        return sigma * rng.complex_gaussian();  // E|z|^2 = sigma^2 total
    } else {
        return sigma * rng.gaussian();
    }
}
}  // namespace detail

// y = H x + z with i.i.d. Gaussian noise of variance sigma_n^2 per entry.
// The matrix overload lets hot loops reuse a prebuilt H.
template <typename Scalar>
Vector<Scalar> observe(const Matrix<Scalar>& h, const Vector<Scalar>& x, const NoiseSpec& noise,
                       Rng& rng) {
    if (h.cols() != x.size())
        throw std::invalid_argument("observe: H has " + std::to_string(h.cols()) +
                                    " columns but x has length " + std::to_string(x.size()));
    Vector<Scalar> y = h * x;
    const double var = noise.variance();
    if (var > 0.0) {
        const double sigma = std::sqrt(var);
        for (Eigen::Index i = 0; i < y.size(); ++i)
            y[i] += detail::noise_sample<Scalar>(rng, sigma);
    }
    return y;
}

template <typename Scalar>
Vector<Scalar> observe(const MimoChannel<Scalar>& ch, const Vector<Scalar>& x,
                       const NoiseSpec& noise, Rng& rng) {
    return observe<Scalar>(ch.matrix(), x, noise, rng);
}

}  // namespace asce
