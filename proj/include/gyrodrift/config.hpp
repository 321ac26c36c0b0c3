#pragma once
/// @file config.hpp
/// @brief JSON run configuration: schema, defaults, validation, round-trip.
///
/// Every key is optional; absent keys take the defaults visible in RunConfig.
/// Unknown keys are rejected so typos cannot silently fall back to defaults.
/// The resolved (fully defaulted) config is echoed into the output directory
/// as resolved-config.json, and loading that echo reproduces the run.

#include <cstdint>
#include <string>
#include <vector>

#include "gyrodrift/grid.hpp"
#include "gyrodrift/kinetic.hpp"
#include "gyrodrift/magnetic.hpp"

namespace gyrodrift {

enum class RunMode { kinetic, limit, sweep, compare };

const char* to_string(RunMode m);

struct RunConfig {
    std::string scenario = "default";
    RunMode mode = RunMode::kinetic;

    double L = 8.0;
    int Nx = 64;
    double v_max = 7.5;
    int Nv = 48;

    PhysicsParams params;
    MagneticSpec magnetic;
    InitialCondition init;

    double background_width = 2.5;
    double dt_max = 0.05;
    int snapshots = 5;

    std::vector<double> epsilons; // sweep mode: strictly decreasing, in (0, 1]

    std::string output = "out";
    std::uint64_t seed = 0; // reserved for perturbed initial data
    int threads = 1;
};

/// Parses and validates `path`. Missing file -> IoError naming the path;
/// malformed JSON -> ConfigError with the parser's line/column; schema or
/// invariant violations -> ConfigError naming the offending field.
RunConfig load_config(const std::string& path);

/// The resolved-config.json payload (stable key order, trailing newline).
std::string render_config(const RunConfig& cfg);

/// Writes render_config(cfg) to dir/resolved-config.json.
void write_resolved_config(const RunConfig& cfg, const std::string& dir);

} // namespace gyrodrift
