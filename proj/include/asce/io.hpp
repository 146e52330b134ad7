#pragma once
// Serialization helpers: channel realizations to/from JSON (golden-file
// friendly), deterministic number formatting for CSV artifacts, and the
// FNV-1a checksum used by the output manifest.

#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "asce/channel.hpp"
#include "asce/scalar.hpp"

namespace asce {

// Shortest round-trippable decimal form; stable across platforms for the
// byte-identical artifact guarantee.
inline std::string format_double(double v) {
    char best[32];
    std::snprintf(best, sizeof(best), "%.17g", v);
    // Among all precisions that still round-trip, keep the shortest text
    // (so 10.0 prints as "10", not "1e+01").
    for (int prec = 1; prec < 17; ++prec) {
        char probe[32];
        std::snprintf(probe, sizeof(probe), "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(probe, "%lf", &back);
        if (back == v && std::strlen(probe) < std::strlen(best)) std::strcpy(best, probe);
    }
    return best;
}

inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::string& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << data;
    if (!out) throw std::runtime_error("short write to " + path);
}

namespace detail {
inline std::pair<double, double> parts(double v) { return {v, 0.0}; }
inline std::pair<double, double> parts(const std::complex<double>& v) {
    return {v.real(), v.imag()};
}
}  // namespace detail

// Channel as a flat JSON document: dimensions, then one record per link with
// its support and [re, im] tap pairs (imaginary parts are zero in real mode).
template <typename Scalar>
nlohmann::json channel_to_json(const MimoChannel<Scalar>& ch) {
    nlohmann::json doc;
    doc["n_r"] = ch.n_r;
    doc["n_t"] = ch.n_t;
    doc["length"] = ch.length;
    doc["mode"] = is_complex_v<Scalar> ? "complex" : "real";
    doc["links"] = nlohmann::json::array();
    for (int nr = 0; nr < ch.n_r; ++nr) {
        for (int nt = 0; nt < ch.n_t; ++nt) {
            const SparseLink<Scalar>& link = ch.link(nr, nt);
            nlohmann::json rec;
            rec["rx"] = nr;
            rec["tx"] = nt;
            rec["support"] = link.support;
            nlohmann::json taps = nlohmann::json::array();
            for (Eigen::Index i = 0; i < link.taps.size(); ++i) {
                auto [re, im] = detail::parts(link.taps[i]);
                taps.push_back({re, im});
            }
            rec["taps"] = std::move(taps);
            doc["links"].push_back(std::move(rec));
        }
    }
    return doc;
}

template <typename Scalar>
MimoChannel<Scalar> channel_from_json(const nlohmann::json& doc) {
    MimoChannel<Scalar> ch;
    ch.n_r = doc.at("n_r").get<int>();
    ch.n_t = doc.at("n_t").get<int>();
    ch.length = doc.at("length").get<int>();
    if (ch.n_r < 1 || ch.n_t < 1 || ch.length < 1)
        throw std::invalid_argument("channel document has invalid dimensions");
    ch.links.assign(static_cast<std::size_t>(ch.n_r) * ch.n_t, SparseLink<Scalar>{});
    for (const auto& rec : doc.at("links")) {
        const int nr = rec.at("rx").get<int>();
        const int nt = rec.at("tx").get<int>();
        if (nr < 0 || nr >= ch.n_r || nt < 0 || nt >= ch.n_t)
            throw std::invalid_argument("link record out of range");
        SparseLink<Scalar>& link = ch.link(nr, nt);
        link.support = rec.at("support").get<std::vector<int>>();
        const auto& taps = rec.at("taps");
        if (static_cast<int>(taps.size()) != ch.length)
            throw std::invalid_argument("tap array length does not match channel length");
        link.taps = Vector<Scalar>::Zero(ch.length);
        for (int i = 0; i < ch.length; ++i) {
            const double re = taps[static_cast<std::size_t>(i)][0].get<double>();
            const double im = taps[static_cast<std::size_t>(i)][1].get<double>();
            if constexpr (is_complex_v<Scalar>) {
                link.taps[i] = Scalar(re, im);
            } else {
                if (im != 0.0)
                    throw std::invalid_argument(
                        "real-mode channel document has a nonzero imaginary tap");
                link.taps[i] = re;
            }
        }
    }
    return ch;
}

}  // namespace asce
