#include <cstdint>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <asce/config.hpp>
#include <asce/version.hpp>

namespace {

struct CommonOpts {
    std::string config, algo, out, format, mode;
    std::vector<double> snr;
    std::vector<long long> sparsity;
    long long runs = 0;
    std::uint64_t seed = 0;
};

using OptionMap = std::map<std::string, CLI::Option*>;

OptionMap wire_common(CLI::App* cmd, CommonOpts& o) {
    OptionMap m;
    m["config"] = cmd->add_option("--config", o.config, "JSON config file (flat keys)");
    m["algo"] = cmd->add_option("--algo", o.algo,
                                "algorithms, comma separated (iss, vss, za-iss, rza-iss, "
                                "za-vss, rza-vss)");
    m["snr"] = cmd->add_option("--snr", o.snr, "SNR grid in dB")->delimiter(',');
    m["sparsity"] =
        cmd->add_option("--sparsity", o.sparsity, "nonzero taps per link")->delimiter(',');
    m["runs"] = cmd->add_option("--runs", o.runs, "Monte-Carlo runs");
    m["seed"] = cmd->add_option("--seed", o.seed, "base RNG seed");
    m["out"] = cmd->add_option("--out", o.out, "output directory");
    m["format"] = cmd->add_option("--format", o.format, "csv|json|both");
    m["mode"] = cmd->add_option("--mode", o.mode, "real|complex");
    return m;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sparse adaptive channel estimation benchmarks"};
    app.set_version_flag("--version", asce::version());
    app.require_subcommand(1);

    CommonOpts opts;
    std::map<const CLI::App*, OptionMap> wired;
    for (const auto& [name, desc] :
         {std::pair<const char*, const char*>{"mse", "averaged MSE convergence traces"},
          {"ber", "bit error rate versus SNR"},
          {"trace-step-size", "averaged applied step-size traces"},
          {"sweep", "steady-state MSE over the snr x sparsity grid"}}) {
        CLI::App* cmd = app.add_subcommand(name, desc);
        wired[cmd] = wire_common(cmd, opts);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    const CLI::App* cmd = app.get_subcommands().front();
    const OptionMap& m = wired.at(cmd);

    nlohmann::json flags = nlohmann::json::object();
    if (m.at("algo")->count()) flags["algo"] = opts.algo;
    if (m.at("snr")->count()) flags["snr"] = opts.snr;
    if (m.at("sparsity")->count()) flags["sparsity"] = opts.sparsity;
    if (m.at("runs")->count()) flags["num_runs"] = opts.runs;
    if (m.at("seed")->count()) flags["seed"] = opts.seed;
    if (m.at("out")->count()) flags["out"] = opts.out;
    if (m.at("format")->count()) flags["format"] = opts.format;
    if (m.at("mode")->count()) flags["mode"] = opts.mode;

    try {
        const asce::ExperimentSpec spec = asce::parse_config(
            cmd->get_name(), m.at("config")->count() ? opts.config : "", flags);
        return asce::run(spec);
    } catch (const std::exception& e) {
        std::cerr << nlohmann::json{{"error", e.what()}}.dump() << "\n";
        return 1;
    }
}
