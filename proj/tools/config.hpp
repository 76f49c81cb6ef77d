#pragma once

#include <map>
#include <string>
#include <vector>

#include "nlrtfa/solver.hpp"

namespace nlrtfa::cli {

/// Flat key = value configuration with optional [csr <value>] sections that
/// override base keys for one sensing rate. '#' starts a comment.
struct ConfigFile {
    std::map<std::string, std::string> base;
    std::vector<std::pair<double, std::map<std::string, std::string>>> per_csr;

    static ConfigFile parse_file(const std::string& path);
    static ConfigFile parse_text(const std::string& text);

    /// Base keys merged with the section (if any) matching this csr.
    std::map<std::string, std::string> resolved(double csr) const;
};

/// Apply solver-related keys onto a config (unknown keys are ignored by this
/// function; the sweep parser checks its own keys first).
void apply_solver_keys(const std::map<std::string, std::string>& kv, SolverConfig& cfg);

/// Experiment grid for the sweep command.
struct ExperimentSpec {
    std::vector<std::string> images;
    std::string sensing = "fourier";  // "fourier" | "gaussian"
    std::vector<double> csrs;
    std::vector<double> sigmas{0.0};
    uint64_t master_seed = 0;
    std::string out_dir;
    int crop_size = 0;  // center-crop input images to crop_size^2 when > 0
    ConfigFile config;  // solver keys, resolved per csr

    static ExperimentSpec parse_file(const std::string& path);
};

}  // namespace nlrtfa::cli
