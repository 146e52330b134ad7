#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <asce/comms.hpp>

#include <cmath>
#include <complex>
#include <set>
#include <vector>

using namespace asce;
using Cx = std::complex<double>;

namespace {

double qfunc(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }
double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

int popcount(unsigned v) {
    int n = 0;
    while (v) {
        n += v & 1u;
        v >>= 1;
    }
    return n;
}

// Exact AWGN bit error rate of square M-QAM with per-axis Gray labels,
// derived from the per-axis PAM decision regions.
double square_qam_ber(int m_order, double esn0_db) {
    const double esn0 = std::pow(10.0, esn0_db / 10.0);
    const int side = static_cast<int>(std::lround(std::sqrt(double(m_order))));
    int axis_bits = 0;
    while ((1 << axis_bits) < side) ++axis_bits;
    const double scale = 1.0 / std::sqrt(2.0 * (m_order - 1) / 3.0);
    const double sigma = std::sqrt(1.0 / (2.0 * esn0));
    double err_bits = 0.0;
    for (int a = 0; a < side; ++a) {
        const double va = (2 * a - side + 1) * scale;
        for (int j = 0; j < side; ++j) {
            if (j == a) continue;
            const double lo = j == 0 ? -1e300 : (2 * j - side) * scale;
            const double hi = j == side - 1 ? 1e300 : (2 * j - side + 2) * scale;
            const double p = phi((hi - va) / sigma) - phi((lo - va) / sigma);
            const unsigned ga = static_cast<unsigned>(a) ^ (static_cast<unsigned>(a) >> 1);
            const unsigned gj = static_cast<unsigned>(j) ^ (static_cast<unsigned>(j) >> 1);
            err_bits += popcount(ga ^ gj) * p;
        }
    }
    return err_bits / (side * axis_bits);
}

MimoChannel<Cx> single_tap_channel() {
    MimoChannel<Cx> ch;
    ch.n_r = 1;
    ch.n_t = 1;
    ch.length = 1;
    ch.links.resize(1);
    ch.links[0].taps = Vector<Cx>::Constant(1, Cx(1.0, 0.0));
    ch.links[0].support = {0};
    return ch;
}

std::vector<std::uint8_t> label_bits(unsigned label, int m) {
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(m));
    for (int b = 0; b < m; ++b)
        bits[static_cast<std::size_t>(b)] =
            static_cast<std::uint8_t>((label >> (m - 1 - b)) & 1u);
    return bits;
}

}  // namespace

TEST_CASE("constellation tables are bijective with unit average energy") {
    const std::vector<Constellation> tables = {
        Constellation::make(Scheme::Psk, 2),  Constellation::make(Scheme::Psk, 4),
        Constellation::make(Scheme::Qam, 4),  Constellation::make(Scheme::Qam, 16),
        Constellation::make(Scheme::Qam, 64), Constellation::make(Scheme::Qam, 128)};
    for (const auto& c : tables) {
        CAPTURE(constellation_name(c));
        REQUIRE(c.points.size() == static_cast<std::size_t>(c.order));
        double energy = 0.0;
        double min_dist = 1e300;
        for (std::size_t i = 0; i < c.points.size(); ++i) {
            energy += std::norm(c.points[i]);
            for (std::size_t j = i + 1; j < c.points.size(); ++j)
                min_dist = std::min(min_dist, std::abs(c.points[i] - c.points[j]));
        }
        CHECK(energy / c.order == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(min_dist > 1e-6);  // all points distinct

        // label -> point -> label round trip for every bit pattern
        std::vector<std::uint8_t> all_bits;
        for (unsigned label = 0; label < static_cast<unsigned>(c.order); ++label) {
            auto lb = label_bits(label, c.bits_per_symbol);
            all_bits.insert(all_bits.end(), lb.begin(), lb.end());
        }
        const auto symbols = modulate(all_bits, c);
        const auto decoded = demodulate(symbols, c);
        CHECK(decoded == all_bits);
    }
}

TEST_CASE("QPSK and BPSK Gray maps match the documented tables") {
    const auto qpsk = Constellation::make(Scheme::Psk, 4);
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(qpsk.points[0] == Cx(s, s));  // bits 00
    CHECK(qpsk.points[1] == Cx(s, -s));
    CHECK(qpsk.points[2] == Cx(-s, s));
    CHECK(qpsk.points[3] == Cx(-s, -s));

    const auto bpsk = Constellation::make(Scheme::Psk, 2);
    CHECK(bpsk.points[0] == Cx(1.0, 0.0));
    CHECK(bpsk.points[1] == Cx(-1.0, 0.0));

    CHECK_THROWS_AS(Constellation::make(Scheme::Psk, 8), std::invalid_argument);
    CHECK_THROWS_AS(Constellation::make(Scheme::Qam, 32), std::invalid_argument);
}

TEST_CASE("square QAM nearest neighbours differ in exactly one bit") {
    for (int order : {16, 64}) {
        const auto c = Constellation::make(Scheme::Qam, order);
        double min_dist = 1e300;
        for (std::size_t i = 0; i < c.points.size(); ++i)
            for (std::size_t j = i + 1; j < c.points.size(); ++j)
                min_dist = std::min(min_dist, std::abs(c.points[i] - c.points[j]));
        for (unsigned i = 0; i < static_cast<unsigned>(order); ++i)
            for (unsigned j = i + 1; j < static_cast<unsigned>(order); ++j)
                if (std::abs(c.points[i] - c.points[j]) < min_dist * 1.001)
                    CHECK(popcount(i ^ j) == 1);
    }
}

TEST_CASE("128-QAM forms the standard cross with distinct points") {
    const auto c = Constellation::make(Scheme::Qam, 128);
    // recover odd-integer lattice levels from the normalized table
    double min_dist = 1e300;
    for (std::size_t i = 0; i < c.points.size(); ++i)
        for (std::size_t j = i + 1; j < c.points.size(); ++j)
            min_dist = std::min(min_dist, std::abs(c.points[i] - c.points[j]));
    const double unit = min_dist / 2.0;
    std::set<std::pair<long, long>> lattice;
    for (const auto& p : c.points) {
        const double fi = p.real() / unit;
        const double fq = p.imag() / unit;
        const long li = std::lround(fi);
        const long lq = std::lround(fq);
        CHECK(std::abs(fi - li) < 1e-9);
        CHECK(std::abs(fq - lq) < 1e-9);
        CHECK((std::labs(li) % 2) == 1);
        CHECK((std::labs(lq) % 2) == 1);
        CHECK(std::labs(li) <= 11);
        CHECK(std::labs(lq) <= 11);
        CHECK_FALSE((std::labs(li) > 7 && std::labs(lq) > 7));  // corners removed
        lattice.emplace(li, lq);
    }
    CHECK(lattice.size() == 128);
}

TEST_CASE("demodulation decides the nearest point and breaks ties low") {
    Rng rng(5);
    for (int order : {16, 128}) {
        const auto c = Constellation::make(Scheme::Qam, order);
        double min_dist = 1e300;
        for (std::size_t i = 0; i < c.points.size(); ++i)
            for (std::size_t j = i + 1; j < c.points.size(); ++j)
                min_dist = std::min(min_dist, std::abs(c.points[i] - c.points[j]));
        for (int trial = 0; trial < 200; ++trial) {
            const unsigned label = static_cast<unsigned>(rng.uniform_below(order));
            const double ang = 2.0 * std::numbers::pi * rng.uniform();
            const Cx y = c.points[label] +
                         0.49 * min_dist * Cx(std::cos(ang), std::sin(ang));
            CHECK(nearest_label(y, c) == label);
        }
    }
    // equidistant inputs resolve to the lowest label
    const auto bpsk = Constellation::make(Scheme::Psk, 2);
    CHECK(nearest_label(Cx(0.0, 0.0), bpsk) == 0);
    const auto qpsk = Constellation::make(Scheme::Psk, 4);
    CHECK(nearest_label(Cx(0.0, 0.0), qpsk) == 0);
}

TEST_CASE("DFT pairs invert and the unitary form preserves energy") {
    for (auto conv : {DftConvention::Unitary, DftConvention::Literal}) {
        const auto fwd = dft_matrix(16, conv);
        const auto inv = idft_matrix(16, conv);
        CHECK((inv * fwd - Eigen::MatrixXcd::Identity(16, 16)).norm() < 1e-12);
    }
    const auto f = dft_matrix(16, DftConvention::Unitary);
    CHECK((f * f.adjoint() - Eigen::MatrixXcd::Identity(16, 16)).norm() < 1e-12);
    Rng rng(11);
    Eigen::VectorXcd x(16);
    for (int i = 0; i < 16; ++i) x[i] = rng.complex_gaussian();
    const Eigen::VectorXcd t = idft_matrix(16, DftConvention::Unitary) * x;
    CHECK(t.squaredNorm() == doctest::Approx(x.squaredNorm()).epsilon(1e-10));
}

TEST_CASE("cyclic prefix makes each subcarrier a flat channel") {
    Rng rng(21);
    const int k_sub = 16, cp = 8, len = 8;
    auto ch = assemble<Cx>(2, 2, len, 3, 1.0, Normalization::Exact, rng);
    const auto qpsk = Constellation::make(Scheme::Psk, 4);
    const auto inv = idft_matrix(k_sub, DftConvention::Unitary);
    const auto fwd = dft_matrix(k_sub, DftConvention::Unitary);

    // random frequency-domain symbols per transmit antenna
    Eigen::MatrixXcd x_freq(k_sub, 2);
    for (int t = 0; t < 2; ++t)
        for (int k = 0; k < k_sub; ++k)
            x_freq(k, t) = qpsk.points[rng.uniform_below(4)];

    // time domain: IDFT, prefix, FIR convolution, prefix removal, DFT
    Eigen::MatrixXcd tx(cp + k_sub, 2);
    for (int t = 0; t < 2; ++t) {
        tx.col(t).tail(k_sub) = inv * x_freq.col(t);
        tx.col(t).head(cp) = tx.col(t).tail(cp);
    }
    Eigen::MatrixXcd y_freq(k_sub, 2);
    for (int r = 0; r < 2; ++r) {
        Eigen::VectorXcd kept(k_sub);
        for (int k = 0; k < k_sub; ++k) {
            Cx acc(0.0, 0.0);
            for (int t = 0; t < 2; ++t)
                for (int l = 0; l < len; ++l) acc += ch.link(r, t).taps[l] * tx(cp + k - l, t);
            kept[k] = acc;
        }
        y_freq.col(r) = fwd * kept;
    }

    // compare against the per-subcarrier matrix model built from raw tap DFTs
    for (int k = 0; k < k_sub; ++k) {
        Eigen::Matrix2cd hk;
        for (int r = 0; r < 2; ++r)
            for (int t = 0; t < 2; ++t) {
                Cx acc(0.0, 0.0);
                for (int l = 0; l < len; ++l) {
                    const double ang = -2.0 * std::numbers::pi * k * l / k_sub;
                    acc += ch.link(r, t).taps[l] * Cx(std::cos(ang), std::sin(ang));
                }
                hk(r, t) = acc;
            }
        const Eigen::Vector2cd expect = hk * x_freq.row(k).transpose();
        const Eigen::Vector2cd got(y_freq(k, 0), y_freq(k, 1));
        CHECK((expect - got).norm() < 1e-9);
    }
}

TEST_CASE("noiseless transmission with perfect estimates is error free") {
    Rng rng(31);
    auto ch = assemble<Cx>(2, 2, 8, 2, 1.0, Normalization::Exact, rng);
    OfdmParams params;
    params.num_subcarriers = 16;
    params.cp_len = 8;
    const double inf = std::numeric_limits<double>::infinity();
    for (int order : {4, 16, 64, 128}) {
        const auto c = Constellation::make(Scheme::Qam, order);
        auto bits = random_bits(static_cast<std::size_t>(16 * 2 * c.bits_per_symbol) * 5, rng);
        for (auto conv : {DftConvention::Unitary, DftConvention::Literal}) {
            Rng noise_rng(7);
            const auto res = ofdm_link(bits, ch, ch.matrix(), inf, c, params, noise_rng, conv);
            CHECK(res.bit_errors == 0);
            CHECK(res.bits_total == static_cast<long long>(bits.size()));
            CHECK(res.ridge_solves == 0);
        }
    }
}

TEST_CASE("single-tap link reproduces closed-form AWGN bit error rates") {
    const auto ch = single_tap_channel();
    OfdmParams params;
    params.num_subcarriers = 16;
    params.cp_len = 2;

    // oracle self-check: QAM4 reduces to the QPSK Q-function expression
    CHECK(square_qam_ber(4, 10.0) ==
          doctest::Approx(qfunc(std::sqrt(std::pow(10.0, 1.0)))).epsilon(1e-12));

    SUBCASE("QPSK at 10 dB") {
        const auto qpsk = Constellation::make(Scheme::Psk, 4);
        Rng rng(101);
        const auto bits = random_bits(8'000'000, rng);
        Rng link_rng(102);
        const auto res = ofdm_link(bits, ch, ch.matrix(), 10.0, qpsk, params, link_rng);
        const double measured = double(res.bit_errors) / double(res.bits_total);
        const double expected = qfunc(std::sqrt(10.0));  // 7.83e-4
        CHECK(std::abs(measured - expected) / expected < 0.10);
    }
    SUBCASE("16-QAM at 12 dB") {
        const auto qam = Constellation::make(Scheme::Qam, 16);
        Rng rng(103);
        const auto bits = random_bits(2'000'000, rng);
        Rng link_rng(104);
        const auto res = ofdm_link(bits, ch, ch.matrix(), 12.0, qam, params, link_rng);
        const double measured = double(res.bit_errors) / double(res.bits_total);
        const double expected = square_qam_ber(16, 12.0);
        CHECK(std::abs(measured - expected) / expected < 0.10);
    }
}

TEST_CASE("estimated CSI never beats perfect CSI beyond counting noise") {
    RunConfig cfg;
    cfg.n_r = 2;
    cfg.n_t = 2;
    cfg.length = 8;
    cfg.sparsity = 1;
    cfg.snr_db = 12.0;
    cfg.mode = Mode::Complex;
    cfg.algo = default_config(Variant::ZaVssNlms);

    Rng rng(55);
    auto ch = assemble<Cx>(2, 2, 8, 1, 1.0, Normalization::Exact, rng);
    const auto adapted = run_adaptation<Cx>(cfg, ch, rng);

    OfdmParams params;
    params.num_subcarriers = 16;
    params.cp_len = 8;
    const auto qam = Constellation::make(Scheme::Qam, 16);
    Rng bits_rng(56);
    const auto bits = random_bits(static_cast<std::size_t>(16 * 2 * 4) * 2000, bits_rng);

    Rng link_a(57), link_b(57);  // identical payload noise for a paired test
    const auto perfect = ofdm_link(bits, ch, ch.matrix(), 12.0, qam, params, link_a);
    const auto estimated = ofdm_link(bits, ch, adapted.h_hat, 12.0, qam, params, link_b);

    const double p_hat = double(perfect.bit_errors + estimated.bit_errors) /
                         double(perfect.bits_total + estimated.bits_total);
    const double sigma = std::sqrt(std::max(p_hat * (1.0 - p_hat), 1e-12) /
                                   double(perfect.bits_total));
    CHECK(double(perfect.bit_errors) / double(perfect.bits_total) <=
          double(estimated.bit_errors) / double(estimated.bits_total) + 3.0 * sigma);
}

TEST_CASE("ber_curve is deterministic, ordered in SNR, and flags thin points") {
    RunConfig cfg;
    cfg.n_r = 1;
    cfg.n_t = 1;
    cfg.length = 4;
    cfg.sparsity = 1;
    cfg.mode = Mode::Complex;
    cfg.max_iter = 400;
    cfg.num_runs = 4;
    cfg.seed = 9;
    cfg.algo = default_config(Variant::VssNlms);

    OfdmParams params;
    params.num_subcarriers = 8;
    params.cp_len = 4;
    const std::vector<Constellation> cs = {Constellation::make(Scheme::Psk, 4)};
    const std::vector<double> grid = {0.0, 8.0};

    const auto a = ber_curve(cfg, cs, grid, 40'000, params);
    const auto b = ber_curve(cfg, cs, grid, 40'000, params);
    REQUIRE(a.size() == 2);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].ber == b[i].ber);
        CHECK(a[i].errors == b[i].errors);
        CHECK(a[i].bits == b[i].bits);
        CHECK(a[i].bits >= 40'000);
        CHECK(a[i].algorithm == "vss-nlms");
    }
    // more noise, more errors (paired channels; slack for counting noise)
    const double sigma = std::sqrt(a[0].ber * (1.0 - a[0].ber) / double(a[0].bits));
    CHECK(a[1].ber <= a[0].ber + 3.0 * sigma);

    // a few hundred bits at high SNR cannot accumulate 100 errors
    const auto thin = ber_curve(cfg, cs, {20.0}, 1'000, params);
    CHECK(thin[0].low_confidence);

    // thread count does not change the results
    RunConfig threaded = cfg;
    threaded.threads = 2;
    const auto c = ber_curve(threaded, cs, grid, 40'000, params);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].ber == c[i].ber);
        CHECK(a[i].errors == c[i].errors);
    }
}

TEST_CASE("singular subcarrier matrices fall back to the ridge and are counted") {
    MimoChannel<Cx> dead;
    dead.n_r = 1;
    dead.n_t = 1;
    dead.length = 1;
    dead.links.resize(1);
    dead.links[0].taps = Vector<Cx>::Zero(1);
    dead.links[0].support = {0};

    OfdmParams params;
    params.num_subcarriers = 8;
    params.cp_len = 2;
    const auto qpsk = Constellation::make(Scheme::Psk, 4);
    Rng rng(3);
    const auto bits = random_bits(8 * 2 * 4, rng);
    Rng link_rng(4);
    const auto res = ofdm_link(bits, dead, dead.matrix(), 20.0, qpsk, params, link_rng);
    CHECK(res.ridge_solves == 8);  // every subcarrier needed the fallback
    CHECK(res.bits_total == static_cast<long long>(bits.size()));
}

TEST_CASE("link validates geometry and bit counts") {
    Rng rng(77);
    auto ch = assemble<Cx>(2, 2, 8, 2, 1.0, Normalization::Exact, rng);
    const auto qpsk = Constellation::make(Scheme::Psk, 4);
    OfdmParams params;
    params.num_subcarriers = 16;
    params.cp_len = 8;
    Rng link_rng(78);

    // bit count not a multiple of one OFDM block
    auto bits = random_bits(16 * 2 * 2 + 2, rng);
    CHECK_THROWS_AS(ofdm_link(bits, ch, ch.matrix(), 10.0, qpsk, params, link_rng),
                    std::invalid_argument);

    // cyclic prefix shorter than the channel memory
    OfdmParams short_cp;
    short_cp.num_subcarriers = 16;
    short_cp.cp_len = 3;
    auto ok_bits = random_bits(16 * 2 * 2, rng);
    CHECK_THROWS_AS(ofdm_link(ok_bits, ch, ch.matrix(), 10.0, qpsk, short_cp, link_rng),
                    std::invalid_argument);

    // fewer subcarriers than channel taps
    OfdmParams narrow;
    narrow.num_subcarriers = 4;
    narrow.cp_len = 8;
    auto narrow_bits = random_bits(4 * 2 * 2, rng);
    CHECK_THROWS_AS(ofdm_link(narrow_bits, ch, ch.matrix(), 10.0, qpsk, narrow, link_rng),
                    std::invalid_argument);

    // estimate shape mismatch
    auto wrong = Eigen::MatrixXcd::Zero(2, 8);
    auto bits2 = random_bits(16 * 2 * 2, rng);
    CHECK_THROWS_AS(ofdm_link(bits2, ch, wrong, 10.0, qpsk, params, link_rng),
                    std::invalid_argument);
}
