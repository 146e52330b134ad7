#include "asce/config.hpp"

#include <cctype>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <set>
#include <stdexcept>

#include "asce/io.hpp"
#include "asce/version.hpp"

namespace asce {

namespace {

const std::set<std::string>& accepted_keys() {
    static const std::set<std::string> keys = {
        "algo",        "n_t",        "n_r",
        "length",      "sparsity",   "snr",
        "mu",          "mu_max",     "c",
        "beta",        "gamma_za",   "gamma_rza",
        "epsilon_rza", "max_iter",   "tol",
        "num_runs",    "seed",       "mode",
        "training",    "normalize",  "tap_variance",
        "threads",     "constellations", "bits_per_point",
        "num_subcarriers", "cp_len", "dft",
        "out",         "format"};
    return keys;
}

[[noreturn]] void bad_key(const std::string& key) {
    throw std::invalid_argument("unknown config key \"" + key + "\"");
}

[[noreturn]] void bad_value(const std::string& key, const std::string& why) {
    throw std::invalid_argument("config key \"" + key + "\": " + why);
}

// last-writer-wins view over (file, flags) with provenance bookkeeping
struct MergedConfig {
    const nlohmann::json& file;
    const nlohmann::json& flags;
    std::map<std::string, std::string>& provenance;

    const nlohmann::json* find(const std::string& key, const char** source) const {
        if (flags.contains(key)) {
            *source = "flag";
            return &flags.at(key);
        }
        if (file.contains(key)) {
            *source = "file";
            return &file.at(key);
        }
        *source = "default";
        return nullptr;
    }

    bool has(const std::string& key) const {
        return flags.contains(key) || file.contains(key);
    }

    template <typename T, typename Parse>
    T fetch(const std::string& key, T fallback, Parse parse) {
        const char* source = "default";
        const nlohmann::json* v = find(key, &source);
        provenance[key] = source;
        if (!v) return fallback;
        try {
            return parse(*v);
        } catch (const nlohmann::json::exception& e) {
            bad_value(key, e.what());
        }
    }

    double number(const std::string& key, double fallback) {
        return fetch<double>(key, fallback, [&](const nlohmann::json& v) {
            if (!v.is_number()) bad_value(key, "expected a number");
            return v.get<double>();
        });
    }

    long long integer(const std::string& key, long long fallback) {
        return fetch<long long>(key, fallback, [&](const nlohmann::json& v) {
            if (!v.is_number_integer()) bad_value(key, "expected an integer");
            return v.get<long long>();
        });
    }

    std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
        return fetch<std::uint64_t>(key, fallback, [&](const nlohmann::json& v) {
            if (!v.is_number_unsigned() && !v.is_number_integer())
                bad_value(key, "expected a non-negative integer");
            if (v.is_number_integer() && v.get<long long>() < 0)
                bad_value(key, "expected a non-negative integer");
            return v.get<std::uint64_t>();
        });
    }

    std::string text(const std::string& key, const std::string& fallback) {
        return fetch<std::string>(key, fallback, [&](const nlohmann::json& v) {
            if (!v.is_string()) bad_value(key, "expected a string");
            return v.get<std::string>();
        });
    }

    std::vector<double> number_list(const std::string& key, std::vector<double> fallback) {
        return fetch<std::vector<double>>(key, std::move(fallback), [&](const nlohmann::json& v) {
            std::vector<double> out;
            if (v.is_number()) {
                out.push_back(v.get<double>());
            } else if (v.is_array()) {
                for (const auto& e : v) {
                    if (!e.is_number()) bad_value(key, "expected numbers");
                    out.push_back(e.get<double>());
                }
            } else {
                bad_value(key, "expected a number or an array of numbers");
            }
            if (out.empty()) bad_value(key, "list must not be empty");
            return out;
        });
    }

    std::vector<std::string> name_list(const std::string& key,
                                       std::vector<std::string> fallback) {
        return fetch<std::vector<std::string>>(
            key, std::move(fallback), [&](const nlohmann::json& v) {
                std::vector<std::string> out;
                auto push_split = [&](const std::string& s) {
                    std::size_t start = 0;
                    while (start <= s.size()) {
                        const std::size_t comma = s.find(',', start);
                        const std::string item =
                            s.substr(start, comma == std::string::npos ? std::string::npos
                                                                       : comma - start);
                        if (!item.empty()) out.push_back(item);
                        if (comma == std::string::npos) break;
                        start = comma + 1;
                    }
                };
                if (v.is_string()) {
                    push_split(v.get<std::string>());
                } else if (v.is_array()) {
                    for (const auto& e : v) {
                        if (!e.is_string()) bad_value(key, "expected strings");
                        push_split(e.get<std::string>());
                    }
                } else {
                    bad_value(key, "expected a string or an array of strings");
                }
                if (out.empty()) bad_value(key, "list must not be empty");
                return out;
            });
    }
};

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string csv_of_mse(const MonteCarloResult& mc) {
    std::string out = "iteration,mse\n";
    for (std::size_t i = 0; i < mc.avg_mse.size(); ++i)
        out += std::to_string(i + 1) + "," + format_double(mc.avg_mse[i]) + "\n";
    return out;
}

nlohmann::json json_of_mse(const ExperimentSpec& spec, const RunConfig& cfg,
                           const MonteCarloResult& mc) {
    nlohmann::json j;
    j["spec"] = spec_echo(spec);
    j["algorithm"] = variant_name(cfg.algo.variant);
    j["snr_db"] = cfg.snr_db;
    j["sparsity"] = cfg.sparsity;
    j["final_mse"] = mc.avg_mse.back();
    int by_tol = 0, by_budget = 0;
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& r : mc.runs) {
        (r.stop_reason == StopReason::Tolerance ? by_tol : by_budget) += 1;
        runs.push_back({{"seed", r.seed},
                        {"iterations", r.iterations},
                        {"stop_reason", stop_reason_name(r.stop_reason)},
                        {"final_mse", r.final_mse}});
    }
    j["stop_reasons"] = {{"tolerance", by_tol}, {"max_iter", by_budget}};
    j["runs"] = std::move(runs);
    j["mse"] = mc.avg_mse;
    return j;
}

struct StepAverage {
    std::vector<double> mu;          // averaged interleaved step-size sequence
    Eigen::MatrixXd per_antenna;     // averaged carry-forward view
    std::vector<RunMeta> runs;
};

StepAverage average_steps(const RunConfig& cfg) {
    StepAverage out;
    const auto n = static_cast<std::size_t>(cfg.max_iter);
    out.mu.assign(n, 0.0);
    out.per_antenna = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), cfg.n_r);
    for (int r = 0; r < cfg.num_runs; ++r) {
        const std::uint64_t seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(r));
        Rng rng(seed);
        StepTrace steps;
        MseTrace trace;
        if (cfg.mode == Mode::Real) {
            auto ch = assemble<double>(cfg.n_r, cfg.n_t, cfg.length, cfg.sparsity,
                                       cfg.tap_variance, cfg.normalize, rng);
            auto res = run_adaptation<double>(cfg, ch, rng);
            steps = std::move(res.steps);
            trace = std::move(res.trace);
        } else {
            auto ch = assemble<std::complex<double>>(cfg.n_r, cfg.n_t, cfg.length,
                                                     cfg.sparsity, cfg.tap_variance,
                                                     cfg.normalize, rng);
            auto res = run_adaptation<std::complex<double>>(cfg, ch, rng);
            steps = std::move(res.steps);
            trace = std::move(res.trace);
        }
        out.runs.push_back(RunMeta{seed, trace.final_iter, trace.stop_reason,
                                   trace.mse.back()});
        // hold the final value once a run has stopped, as the MSE traces do
        Eigen::MatrixXd pa = steps.per_antenna();
        const std::size_t executed = steps.mu.size();
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t src = std::min(i, executed - 1);
            out.mu[i] += steps.mu[src];
            out.per_antenna.row(static_cast<Eigen::Index>(i)) +=
                pa.row(static_cast<Eigen::Index>(src));
        }
    }
    for (auto& v : out.mu) v /= cfg.num_runs;
    out.per_antenna /= double(cfg.num_runs);
    return out;
}

std::string csv_of_steps(const StepAverage& avg, int n_r) {
    std::string header = "iteration,mu";
    for (int r = 0; r < n_r; ++r) header += ",mu_rx" + std::to_string(r);
    std::string out = header + "\n";
    for (std::size_t i = 0; i < avg.mu.size(); ++i) {
        out += std::to_string(i + 1) + "," + format_double(avg.mu[i]);
        for (int r = 0; r < n_r; ++r)
            out += "," + format_double(avg.per_antenna(static_cast<Eigen::Index>(i), r));
        out += "\n";
    }
    return out;
}

nlohmann::json json_of_steps(const ExperimentSpec& spec, const RunConfig& cfg,
                             const StepAverage& avg) {
    nlohmann::json j;
    j["spec"] = spec_echo(spec);
    j["algorithm"] = variant_name(cfg.algo.variant);
    j["final_mu"] = avg.mu.back();
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& r : avg.runs)
        runs.push_back({{"seed", r.seed},
                        {"iterations", r.iterations},
                        {"stop_reason", stop_reason_name(r.stop_reason)}});
    j["runs"] = std::move(runs);
    j["mu"] = avg.mu;
    return j;
}

std::string csv_of_ber(const std::vector<BerPoint>& points) {
    std::string out = "snr_db,scheme,order,algorithm,ber,errors,bits,low_confidence,ridge_solves\n";
    for (const auto& p : points) {
        out += format_double(p.snr_db) + "," + scheme_name(p.scheme) + "," +
               std::to_string(p.order) + "," + p.algorithm + "," + format_double(p.ber) +
               "," + std::to_string(p.errors) + "," + std::to_string(p.bits) + "," +
               (p.low_confidence ? "1" : "0") + "," + std::to_string(p.ridge_solves) + "\n";
    }
    return out;
}

nlohmann::json json_of_ber(const ExperimentSpec& spec, const std::vector<BerPoint>& points) {
    nlohmann::json j;
    j["spec"] = spec_echo(spec);
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : points)
        arr.push_back({{"snr_db", p.snr_db},
                       {"scheme", scheme_name(p.scheme)},
                       {"order", p.order},
                       {"algorithm", p.algorithm},
                       {"ber", p.ber},
                       {"errors", p.errors},
                       {"bits", p.bits},
                       {"low_confidence", p.low_confidence},
                       {"ridge_solves", p.ridge_solves}});
    j["points"] = std::move(arr);
    return j;
}

struct SweepRow {
    double snr_db = 0.0;
    int sparsity = 0;
    double steady_state_mse = 0.0;
    double final_mse = 0.0;
};

double steady_state(const std::vector<double>& trace) {
    const std::size_t tail = std::min<std::size_t>(200, trace.size());
    double acc = 0.0;
    for (std::size_t i = trace.size() - tail; i < trace.size(); ++i) acc += trace[i];
    return acc / double(tail);
}

std::string csv_of_sweep(const std::vector<SweepRow>& rows) {
    std::string out = "snr_db,sparsity,steady_state_mse,final_mse\n";
    for (const auto& r : rows)
        out += format_double(r.snr_db) + "," + std::to_string(r.sparsity) + "," +
               format_double(r.steady_state_mse) + "," + format_double(r.final_mse) + "\n";
    return out;
}

nlohmann::json json_of_sweep(const ExperimentSpec& spec, const std::vector<SweepRow>& rows) {
    nlohmann::json j;
    j["spec"] = spec_echo(spec);
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows)
        arr.push_back({{"snr_db", r.snr_db},
                       {"sparsity", r.sparsity},
                       {"steady_state_mse", r.steady_state_mse},
                       {"final_mse", r.final_mse}});
    j["rows"] = std::move(arr);
    return j;
}

}  // namespace

std::string format_name(OutputFormat f) {
    switch (f) {
        case OutputFormat::Csv: return "csv";
        case OutputFormat::Json: return "json";
        case OutputFormat::Both: return "both";
    }
    return "?";
}

Constellation parse_constellation(const std::string& name) {
    std::string up;
    for (char ch : name) up += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    if (up == "BPSK") return Constellation::make(Scheme::Psk, 2);
    if (up == "QPSK") return Constellation::make(Scheme::Psk, 4);
    const auto pos = up.find("QAM");
    if (pos != std::string::npos && pos > 0 && pos + 3 == up.size()) {
        const int order = std::atoi(up.substr(0, pos).c_str());
        if (order == 4 || order == 16 || order == 64 || order == 128)
            return Constellation::make(Scheme::Qam, order);
    }
    throw std::invalid_argument("unknown constellation \"" + name +
                                "\" (supported: BPSK, QPSK, 4QAM, 16QAM, 64QAM, 128QAM)");
}

ExperimentSpec build_spec(const std::string& command, const nlohmann::json& file_cfg,
                          const nlohmann::json& flag_cfg) {
    static const std::set<std::string> commands = {"mse", "ber", "trace-step-size", "sweep"};
    if (!commands.count(command))
        throw std::invalid_argument("unknown command \"" + command +
                                    "\" (expected mse, ber, trace-step-size, or sweep)");
    for (const auto& src : {&file_cfg, &flag_cfg}) {
        if (!src->is_object() && !src->is_null())
            throw std::invalid_argument("config must be a JSON object");
        if (src->is_object())
            for (const auto& [key, value] : src->items())
                if (!accepted_keys().count(key)) bad_key(key);
    }
    static const nlohmann::json empty = nlohmann::json::object();
    const nlohmann::json& file = file_cfg.is_object() ? file_cfg : empty;
    const nlohmann::json& flags = flag_cfg.is_object() ? flag_cfg : empty;

    ExperimentSpec spec;
    spec.command = command;
    MergedConfig m{file, flags, spec.provenance};

    spec.run.n_t = static_cast<int>(m.integer("n_t", spec.run.n_t));
    spec.run.n_r = static_cast<int>(m.integer("n_r", spec.run.n_r));
    spec.run.length = static_cast<int>(m.integer("length", spec.run.length));
    spec.run.max_iter = static_cast<int>(m.integer("max_iter", spec.run.max_iter));
    spec.run.tol = m.number("tol", spec.run.tol);
    spec.run.num_runs = static_cast<int>(m.integer("num_runs", spec.run.num_runs));
    spec.run.seed = m.unsigned_integer("seed", spec.run.seed);
    spec.run.tap_variance = m.number("tap_variance", spec.run.tap_variance);
    spec.run.threads = static_cast<int>(m.integer("threads", spec.run.threads));

    const std::string mode = m.text("mode", "complex");
    if (mode == "real") spec.run.mode = Mode::Real;
    else if (mode == "complex") spec.run.mode = Mode::Complex;
    else bad_value("mode", "expected \"real\" or \"complex\"");

    const std::string training = m.text("training", "qpsk");
    if (training == "qpsk" || training == "binary" || training == "unit-modulus")
        spec.run.training = Training::UnitModulus;
    else if (training == "gaussian") spec.run.training = Training::Gaussian;
    else bad_value("training", "expected \"qpsk\", \"binary\", or \"gaussian\"");

    const std::string norm = m.text("normalize", "exact");
    if (norm == "exact") spec.run.normalize = Normalization::Exact;
    else if (norm == "expectation") spec.run.normalize = Normalization::Expectation;
    else bad_value("normalize", "expected \"exact\" or \"expectation\"");

    // sweep axes: scalars or lists; single-point commands take one entry each
    {
        const auto snr = m.number_list("snr", {10.0});
        spec.snr_grid = snr;
        const auto sp = m.number_list("sparsity", {double(spec.run.sparsity)});
        spec.sparsity_grid.clear();
        for (double v : sp) {
            const int t = static_cast<int>(v);
            if (double(t) != v) bad_value("sparsity", "expected integers");
            spec.sparsity_grid.push_back(t);
        }
    }
    if (command == "mse" || command == "trace-step-size") {
        if (spec.snr_grid.size() != 1)
            throw std::invalid_argument("command \"" + command +
                                        "\" takes a single snr value, got " +
                                        std::to_string(spec.snr_grid.size()));
        if (spec.sparsity_grid.size() != 1)
            throw std::invalid_argument("command \"" + command +
                                        "\" takes a single sparsity value, got " +
                                        std::to_string(spec.sparsity_grid.size()));
    }
    if (command == "ber" && spec.sparsity_grid.size() != 1)
        throw std::invalid_argument("command \"ber\" takes a single sparsity value, got " +
                                    std::to_string(spec.sparsity_grid.size()));
    spec.run.snr_db = spec.snr_grid.front();
    spec.run.sparsity = spec.sparsity_grid.front();

    // algorithms: defaults scale shrinkage with the (possibly overridden) step
    const std::vector<std::string> names = m.name_list(
        "algo", {"iss-nlms", "vss-nlms", "za-vss-nlms", "rza-vss-nlms"});
    const bool has_mu = m.has("mu");
    const bool has_mu_max = m.has("mu_max");
    const double mu = m.number("mu", 0.5);
    const double mu_max = m.number("mu_max", 1.0);
    const bool has_c = m.has("c");
    const double c_val = m.number("c", 1e-5);
    const double beta = m.number("beta", 0.99);
    const bool has_gza = m.has("gamma_za");
    const double gza = m.number("gamma_za", 0.0);
    const bool has_grza = m.has("gamma_rza");
    const double grza = m.number("gamma_rza", 0.0);
    const double eps = m.number("epsilon_rza", kDefaultEpsilonRza);

    spec.run.auto_c = !has_c;
    for (const auto& name : names) {
        AlgoConfig a = default_config(variant_from_name(name));
        if (has_mu) a.mu = mu;
        if (has_mu_max) a.mu_max = mu_max;
        if (has_mu || has_mu_max) {
            const double scale = uses_variable_step(a.variant) ? a.mu_max : a.mu;
            a.gamma_za = kZaGammaScale * scale;
            a.gamma_rza = kRzaGammaScale * scale;
        }
        if (has_gza) a.gamma_za = gza;
        if (has_grza) a.gamma_rza = grza;
        if (has_c) a.c = c_val;
        a.beta = beta;
        a.epsilon_rza = eps;
        spec.algorithms.push_back(a);
    }

    spec.constellations = m.name_list("constellations", {"16QAM"});
    for (const auto& c : spec.constellations) parse_constellation(c);  // validates
    spec.bits_per_point = m.integer("bits_per_point", spec.bits_per_point);
    if (spec.bits_per_point < 1) bad_value("bits_per_point", "must be >= 1");
    spec.ofdm.num_subcarriers =
        static_cast<int>(m.integer("num_subcarriers", spec.ofdm.num_subcarriers));
    spec.ofdm.cp_len = static_cast<int>(m.integer("cp_len", spec.ofdm.cp_len));

    const std::string dft = m.text("dft", "unitary");
    if (dft == "unitary") spec.dft = DftConvention::Unitary;
    else if (dft == "literal") spec.dft = DftConvention::Literal;
    else bad_value("dft", "expected \"unitary\" or \"literal\"");

    spec.output_dir = m.text("out", ".");
    const std::string fmt = m.text("format", "both");
    if (fmt == "csv") spec.format = OutputFormat::Csv;
    else if (fmt == "json") spec.format = OutputFormat::Json;
    else if (fmt == "both") spec.format = OutputFormat::Both;
    else bad_value("format", "expected \"csv\", \"json\", or \"both\"");

    if (command == "ber" && spec.run.mode != Mode::Complex)
        throw std::invalid_argument("command \"ber\" requires complex mode");

    // validate every grid point against every algorithm's invariants
    for (const auto& a : spec.algorithms)
        for (double snr : spec.snr_grid)
            for (int t : spec.sparsity_grid) {
                RunConfig probe = spec.run;
                probe.algo = a;
                probe.snr_db = snr;
                probe.sparsity = t;
                probe.validate();
            }
    return spec;
}

ExperimentSpec parse_config(const std::string& command, const std::string& config_path,
                            const nlohmann::json& flag_cfg) {
    nlohmann::json file_cfg = nlohmann::json::object();
    if (!config_path.empty()) {
        nlohmann::json parsed;
        try {
            parsed = nlohmann::json::parse(read_file(config_path));
        } catch (const nlohmann::json::exception& e) {
            throw std::invalid_argument("config file " + config_path + ": " + e.what());
        }
        if (!parsed.is_object())
            throw std::invalid_argument("config file " + config_path +
                                        ": top level must be a JSON object");
        file_cfg = std::move(parsed);
    }
    return build_spec(command, file_cfg, flag_cfg);
}

nlohmann::json spec_echo(const ExperimentSpec& spec) {
    nlohmann::json j;
    j["command"] = spec.command;
    j["n_t"] = spec.run.n_t;
    j["n_r"] = spec.run.n_r;
    j["length"] = spec.run.length;
    j["snr"] = spec.snr_grid;
    j["sparsity"] = spec.sparsity_grid;
    j["max_iter"] = spec.run.max_iter;
    j["tol"] = spec.run.tol;
    j["num_runs"] = spec.run.num_runs;
    j["seed"] = spec.run.seed;
    j["mode"] = mode_name(spec.run.mode);
    j["training"] = training_name(spec.run.training);
    j["normalize"] = normalization_name(spec.run.normalize);
    j["tap_variance"] = spec.run.tap_variance;
    j["threads"] = spec.run.threads;
    j["c_policy"] = spec.run.auto_c ? "auto" : "explicit";
    nlohmann::json algos = nlohmann::json::array();
    for (const auto& a : spec.algorithms)
        algos.push_back({{"name", variant_name(a.variant)},
                         {"mu", a.mu},
                         {"mu_max", a.mu_max},
                         {"c", a.c},
                         {"beta", a.beta},
                         {"gamma_za", a.gamma_za},
                         {"gamma_rza", a.gamma_rza},
                         {"epsilon_rza", a.epsilon_rza}});
    j["algorithms"] = std::move(algos);
    j["constellations"] = spec.constellations;
    j["bits_per_point"] = spec.bits_per_point;
    j["num_subcarriers"] = spec.ofdm.num_subcarriers;
    j["cp_len"] = spec.ofdm.cp_len;
    j["dft"] = spec.dft == DftConvention::Unitary ? "unitary" : "literal";
    j["out"] = spec.output_dir;
    j["format"] = format_name(spec.format);
    j["provenance"] = spec.provenance;
    return j;
}

int run(const ExperimentSpec& spec) {
    namespace fs = std::filesystem;
    const auto t0 = std::chrono::steady_clock::now();
    std::error_code ec;
    fs::create_directories(spec.output_dir, ec);
    if (ec)
        throw std::runtime_error("cannot create output directory " + spec.output_dir + ": " +
                                 ec.message());

    std::vector<std::pair<std::string, std::string>> artifacts;  // name -> content
    const bool want_csv = spec.format != OutputFormat::Json;
    const bool want_json = spec.format != OutputFormat::Csv;

    for (const auto& algo : spec.algorithms) {
        const std::string name = variant_name(algo.variant);
        RunConfig cfg = spec.run;
        cfg.algo = algo;

        if (spec.command == "mse") {
            const MonteCarloResult mc = monte_carlo(cfg);
            if (want_csv) artifacts.emplace_back("mse_" + name + ".csv", csv_of_mse(mc));
            if (want_json)
                artifacts.emplace_back("mse_" + name + ".json",
                                       json_of_mse(spec, cfg, mc).dump(2) + "\n");
        } else if (spec.command == "trace-step-size") {
            const StepAverage avg = average_steps(cfg);
            if (want_csv)
                artifacts.emplace_back("trace-step-size_" + name + ".csv",
                                       csv_of_steps(avg, cfg.n_r));
            if (want_json)
                artifacts.emplace_back("trace-step-size_" + name + ".json",
                                       json_of_steps(spec, cfg, avg).dump(2) + "\n");
        } else if (spec.command == "ber") {
            std::vector<Constellation> cs;
            for (const auto& cname : spec.constellations)
                cs.push_back(parse_constellation(cname));
            const auto points =
                ber_curve(cfg, cs, spec.snr_grid, spec.bits_per_point, spec.ofdm, spec.dft);
            if (want_csv) artifacts.emplace_back("ber_" + name + ".csv", csv_of_ber(points));
            if (want_json)
                artifacts.emplace_back("ber_" + name + ".json",
                                       json_of_ber(spec, points).dump(2) + "\n");
        } else {  // sweep
            std::vector<SweepRow> rows;
            for (double snr : spec.snr_grid)
                for (int t : spec.sparsity_grid) {
                    RunConfig point = cfg;
                    point.snr_db = snr;
                    point.sparsity = t;
                    const MonteCarloResult mc = monte_carlo(point);
                    rows.push_back(SweepRow{snr, t, steady_state(mc.avg_mse),
                                            mc.avg_mse.back()});
                }
            if (want_csv) artifacts.emplace_back("sweep_" + name + ".csv", csv_of_sweep(rows));
            if (want_json)
                artifacts.emplace_back("sweep_" + name + ".json",
                                       json_of_sweep(spec, rows).dump(2) + "\n");
        }
    }

    nlohmann::json files = nlohmann::json::array();
    for (const auto& [name, content] : artifacts) {
        write_file((fs::path(spec.output_dir) / name).string(), content);
        files.push_back({{"name", name}, {"fnv1a64", hex64(fnv1a64(content))}});
    }

    const auto wall = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
    nlohmann::json manifest;
    manifest["command"] = spec.command;
    manifest["version"] = version();
    manifest["spec"] = spec_echo(spec);
    manifest["files"] = std::move(files);
    manifest["wall_clock_ms"] = wall;
    write_file((fs::path(spec.output_dir) / "manifest.json").string(),
               manifest.dump(2) + "\n");
    return 0;
}

}  // namespace asce
