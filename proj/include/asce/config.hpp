#pragma once

// Experiment front end: a flat JSON key-value config merged from defaults,
// an optional config file, and command-line flags (in that precedence), with
// per-key provenance; run() executes the experiment and writes CSV/JSON
// artifacts plus a manifest with checksums.

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "asce/comms.hpp"
#include "asce/experiment.hpp"

namespace asce {

enum class OutputFormat { Csv, Json, Both };

std::string format_name(OutputFormat f);

struct ExperimentSpec {
    std::string command;  // mse | ber | trace-step-size | sweep
    RunConfig run;        // snr_db/sparsity mirror the first grid entries
    std::vector<AlgoConfig> algorithms;
    std::vector<double> snr_grid;
    std::vector<int> sparsity_grid;
    std::vector<std::string> constellations;
    long long bits_per_point = 1'000'000;
    OfdmParams ofdm;
    DftConvention dft = DftConvention::Unitary;
    std::string output_dir = ".";
    OutputFormat format = OutputFormat::Both;
    std::map<std::string, std::string> provenance;  // key -> default|file|flag
};

// Merge defaults <- file <- flags. Unknown keys are hard errors naming the
// key; out-of-range values raise the underlying invariant message.
ExperimentSpec build_spec(const std::string& command, const nlohmann::json& file_cfg,
                          const nlohmann::json& flag_cfg);

// Reads the config file (when non-empty) and delegates to build_spec.
ExperimentSpec parse_config(const std::string& command, const std::string& config_path,
                            const nlohmann::json& flag_cfg);

// Fully resolved spec echo (grids, per-algorithm parameters, provenance);
// every artifact is re-derivable from this object alone.
nlohmann::json spec_echo(const ExperimentSpec& spec);

Constellation parse_constellation(const std::string& name);

// Executes the spec and writes one artifact per (command, algorithm) pair
// plus manifest.json; returns 0 on success.
int run(const ExperimentSpec& spec);

}  // namespace asce
