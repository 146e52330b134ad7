#pragma once
// Adaptation driver and Monte-Carlo harness.
//
// run_adaptation() realizes the benchmark loop: a shared training stream
// drives all transmit antennas, one receive antenna is refined per iteration
// in round-robin order, and the loop stops once the squared change of the
// full estimate matrix falls below a tolerance (evaluated only after every
// antenna has been touched) or an iteration cap is hit.
//
// monte_carlo() averages the per-iteration squared estimation error over
// independent (channel, noise, training) realizations.  Every run draws its
// own generator seed from the batch seed, so any single run can be replayed
// in isolation, and parallel execution reduces in run order so thread count
// never changes the result.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Core>

#include "asce/channel.hpp"
#include "asce/estimators.hpp"
#include "asce/rng.hpp"

namespace asce {

enum class Mode { Real, Complex };
enum class Training { UnitModulus, Gaussian };
enum class StopReason { Tolerance, MaxIter };

inline const char* mode_name(Mode m) { return m == Mode::Real ? "real" : "complex"; }
inline const char* training_name(Training t) {
    return t == Training::UnitModulus ? "unit-modulus" : "gaussian";
}
inline const char* stop_reason_name(StopReason r) {
    return r == StopReason::Tolerance ? "tolerance" : "max_iter";
}
inline const char* normalization_name(Normalization n) {
    return n == Normalization::Exact ? "exact" : "expectation";
}

// The variable-step threshold C is tied to the operating SNR when the user
// does not pin it explicitly: noisier links get a larger threshold (slower,
// steadier steps), cleaner links a smaller one.
inline double resolve_c(double snr_db) { return snr_db < 10.0 ? 1e-4 : 1e-5; }

struct RunConfig {
    int n_t = 2;
    int n_r = 2;
    int length = 16;   // taps per link (L)
    int sparsity = 1;  // nonzero taps per link (T)
    double snr_db = 10.0;
    AlgoConfig algo{};
    bool auto_c = true;  // resolve algo.c from snr_db (cleared by an explicit C)
    int max_iter = 5000;
    double tol = 1e-5;
    int num_runs = 200;
    std::uint64_t seed = 0;
    Mode mode = Mode::Complex;
    Training training = Training::UnitModulus;
    Normalization normalize = Normalization::Exact;
    double tap_variance = 1.0;
    int threads = 1;

    AlgoConfig resolved_algo(double at_snr_db) const {
        AlgoConfig a = algo;
        if (auto_c) a.c = resolve_c(at_snr_db);
        a.validate();
        return a;
    }

    void validate() const {
        if (n_t < 1 || n_r < 1) throw std::invalid_argument("antenna counts must be ≥ 1");
        if (length < 1) throw std::invalid_argument("channel length L must be ≥ 1");
        if (sparsity < 1 || sparsity > length)
            throw std::invalid_argument("sparsity T must satisfy 1 ≤ T ≤ L");
        if (max_iter < 1) throw std::invalid_argument("max_iter ≥ 1 violated");
        if (!(tol > 0.0)) throw std::invalid_argument("tol > 0 violated");
        if (num_runs < 1) throw std::invalid_argument("num_runs ≥ 1 violated");
        if (threads < 1) throw std::invalid_argument("threads ≥ 1 violated");
        if (!(tap_variance > 0.0)) throw std::invalid_argument("tap_variance > 0 violated");
        resolved_algo(snr_db);  // validates algo fields
    }
};

struct MseTrace {
    std::vector<double> mse;  // one value per executed iteration
    int final_iter = 0;
    StopReason stop_reason = StopReason::MaxIter;
};

// Step-sizes actually applied, one entry per iteration, tagged with the
// receive antenna updated at that iteration.
struct StepTrace {
    std::vector<int> antenna;
    std::vector<double> mu;
    int n_r = 0;
    double initial_mu = 0.0;  // value an antenna reports before its first update

    // Carry-forward view: column nr holds antenna nr's current step-size at
    // every iteration (constant between that antenna's own updates).
    Eigen::MatrixXd per_antenna() const {
        Eigen::MatrixXd out(static_cast<Eigen::Index>(mu.size()), n_r);
        Eigen::VectorXd current = Eigen::VectorXd::Constant(n_r, initial_mu);
        for (std::size_t i = 0; i < mu.size(); ++i) {
            current[antenna[i]] = mu[i];
            out.row(static_cast<Eigen::Index>(i)) = current.transpose();
        }
        return out;
    }
};

template <typename Scalar>
struct AdaptationResult {
    Matrix<Scalar> h_hat;  // N_r x (N_t*L) final estimate
    MseTrace trace;
    StepTrace steps;
};

// Squared estimation error summed over every coefficient of the grid.
template <typename Scalar>
double mse(const Matrix<Scalar>& h, const Matrix<Scalar>& h_hat) {
    if (h.rows() != h_hat.rows() || h.cols() != h_hat.cols())
        throw std::invalid_argument("mse: shape mismatch");
    return (h - h_hat).squaredNorm();
}

template <typename Scalar>
double mse(const MimoChannel<Scalar>& ch, const Matrix<Scalar>& h_hat) {
    return mse<Scalar>(ch.matrix(), h_hat);
}

// One fresh transmit sample per antenna.  Unit-modulus training uses random
// fourth-roots of unity (sign bits in real mode) so every regressor entry has
// magnitude exactly 1; the Gaussian option trades that for a rougher spectrum.
template <typename Scalar>
Vector<Scalar> training_samples(int n_t, Training kind, Rng& rng) {
    Vector<Scalar> s(n_t);
    for (int i = 0; i < n_t; ++i) {
        if (kind == Training::UnitModulus) {
            if constexpr (is_complex_v<Scalar>) {
                const double re = rng.bit() ? 1.0 : -1.0;
                const double im = rng.bit() ? 1.0 : -1.0;
                s[i] = Scalar(re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0);
            } else {
                s[i] = rng.bit() ? Scalar(1) : Scalar(-1);
            }
        } else {
            if constexpr (is_complex_v<Scalar>) {
                s[i] = rng.complex_gaussian();
            } else {
                s[i] = rng.gaussian();
            }
        }
    }
    return s;
}

template <typename Scalar>
AdaptationResult<Scalar> run_adaptation(const RunConfig& cfg, const MimoChannel<Scalar>& ch,
                                        Rng& rng) {
    cfg.validate();
    if (ch.n_r != cfg.n_r || ch.n_t != cfg.n_t || ch.length != cfg.length)
        throw std::invalid_argument("run_adaptation: channel does not match config dimensions");

    const AlgoConfig algo = cfg.resolved_algo(cfg.snr_db);
    const Eigen::Index vec_len = static_cast<Eigen::Index>(cfg.n_t) * cfg.length;
    const Matrix<Scalar> h_true = ch.matrix();
    const NoiseSpec noise{cfg.snr_db, 1.0};

    RegressorBank<Scalar> bank(cfg.n_t, cfg.length);
    // Pre-roll one channel-length of training so the delay lines are full
    // when adaptation starts (transmission is continuous; estimation simply
    // begins mid-stream).
    for (int i = 0; i < cfg.length; ++i)
        bank.push(training_samples<Scalar>(cfg.n_t, cfg.training, rng));

    std::vector<FilterState<Scalar>> states;
    states.reserve(static_cast<std::size_t>(cfg.n_r));
    for (int nr = 0; nr < cfg.n_r; ++nr) states.push_back(FilterState<Scalar>::zeros(vec_len));

    AdaptationResult<Scalar> res;
    res.h_hat = Matrix<Scalar>::Zero(cfg.n_r, vec_len);
    res.steps.n_r = cfg.n_r;
    res.steps.initial_mu = uses_variable_step(algo.variant) ? 0.0 : algo.mu;
    res.trace.mse.reserve(static_cast<std::size_t>(cfg.max_iter));
    res.steps.antenna.reserve(static_cast<std::size_t>(cfg.max_iter));
    res.steps.mu.reserve(static_cast<std::size_t>(cfg.max_iter));

    // Per-row squared errors so the full-grid MSE update per iteration stays
    // O(N) (only one row moves at a time).
    std::vector<double> row_err(static_cast<std::size_t>(cfg.n_r));
    double total_err = 0.0;
    for (int nr = 0; nr < cfg.n_r; ++nr) {
        row_err[static_cast<std::size_t>(nr)] = h_true.row(nr).squaredNorm();
        total_err += row_err[static_cast<std::size_t>(nr)];
    }

    res.trace.stop_reason = StopReason::MaxIter;
    res.trace.final_iter = cfg.max_iter;
    for (int it = 1; it <= cfg.max_iter; ++it) {
        const Vector<Scalar> x =
            bank.push_and_stack(training_samples<Scalar>(cfg.n_t, cfg.training, rng));
        const Vector<Scalar> y = observe<Scalar>(h_true, x, noise, rng);
        const int nr = (it - 1) % cfg.n_r;

        const StepOutcome<Scalar> out = step(states[static_cast<std::size_t>(nr)], x, y[nr], algo);
        const Vector<Scalar> new_row = states[static_cast<std::size_t>(nr)].channel_row();
        const double change = (new_row.transpose() - res.h_hat.row(nr)).squaredNorm();
        res.h_hat.row(nr) = new_row.transpose();

        const double nr_err = (h_true.row(nr) - res.h_hat.row(nr)).squaredNorm();
        total_err += nr_err - row_err[static_cast<std::size_t>(nr)];
        row_err[static_cast<std::size_t>(nr)] = nr_err;

        if (!std::isfinite(total_err))
            throw std::runtime_error("estimate diverged (non-finite MSE) at iteration " +
                                     std::to_string(it));

        res.trace.mse.push_back(total_err);
        res.steps.antenna.push_back(nr);
        res.steps.mu.push_back(out.mu_used);

        if (it >= cfg.n_r && change <= cfg.tol) {
            res.trace.stop_reason = StopReason::Tolerance;
            res.trace.final_iter = it;
            break;
        }
    }
    if (res.trace.stop_reason == StopReason::MaxIter) res.trace.final_iter = cfg.max_iter;
    return res;
}

struct RunMeta {
    std::uint64_t seed = 0;
    int iterations = 0;
    StopReason stop_reason = StopReason::MaxIter;
    double final_mse = 0.0;
};

struct MonteCarloResult {
    std::vector<double> avg_mse;  // length max_iter (short runs hold last value)
    std::vector<RunMeta> runs;
};

namespace detail {

inline void pad_trace(std::vector<double>& t, std::size_t len) {
    if (t.empty()) throw std::logic_error("cannot pad an empty trace");
    t.resize(len, t.back());
}

template <typename Scalar>
MseTrace one_mc_run(const RunConfig& cfg, std::uint64_t run_seed) {
    Rng rng(run_seed);
    const MimoChannel<Scalar> ch = assemble<Scalar>(cfg.n_r, cfg.n_t, cfg.length, cfg.sparsity,
                                                    cfg.tap_variance, cfg.normalize, rng);
    return run_adaptation<Scalar>(cfg, ch, rng).trace;
}

template <typename Scalar>
MonteCarloResult monte_carlo_impl(const RunConfig& cfg) {
    cfg.validate();
    const std::size_t runs = static_cast<std::size_t>(cfg.num_runs);
    std::vector<MseTrace> traces(runs);
    std::vector<std::exception_ptr> failures(runs);

    auto work = [&](std::size_t begin, std::size_t stride) {
        for (std::size_t r = begin; r < runs; r += stride) {
            try {
                traces[r] = one_mc_run<Scalar>(cfg, derive_seed(cfg.seed, r));
            } catch (...) {
                failures[r] = std::current_exception();
            }
        }
    };

    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(cfg.threads), runs);
    if (workers <= 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back(work, w, workers);
        for (auto& th : pool) th.join();
    }

    for (std::size_t r = 0; r < runs; ++r) {
        if (failures[r]) {
            try {
                std::rethrow_exception(failures[r]);
            } catch (const std::exception& e) {
                throw std::runtime_error("run " + std::to_string(r) + " (seed " +
                                         std::to_string(derive_seed(cfg.seed, r)) +
                                         ") failed: " + e.what());
            }
        }
    }

    MonteCarloResult out;
    out.avg_mse.assign(static_cast<std::size_t>(cfg.max_iter), 0.0);
    out.runs.reserve(runs);
    // Reduction in run order: identical result for any thread count.
    for (std::size_t r = 0; r < runs; ++r) {
        MseTrace& t = traces[r];
        out.runs.push_back(RunMeta{derive_seed(cfg.seed, r), t.final_iter, t.stop_reason,
                                   t.mse.back()});
        pad_trace(t.mse, static_cast<std::size_t>(cfg.max_iter));
        for (std::size_t i = 0; i < t.mse.size(); ++i) out.avg_mse[i] += t.mse[i];
    }
    for (double& v : out.avg_mse) v /= static_cast<double>(runs);
    return out;
}

}  // namespace detail

inline MonteCarloResult monte_carlo(const RunConfig& cfg) {
    return cfg.mode == Mode::Real ? detail::monte_carlo_impl<double>(cfg)
                                  : detail::monte_carlo_impl<std::complex<double>>(cfg);
}

}  // namespace asce
