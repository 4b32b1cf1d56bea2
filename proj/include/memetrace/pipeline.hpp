#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "memetrace/config.hpp"

namespace memetrace {

/// Inputs that only some stages take from the command line.
struct StageArgs {
    std::filesystem::path model;   // hawkes-sim, influence
    std::filesystem::path events;  // influence
    double horizon = 30.0;         // hawkes-sim, in Hawkes time units
};

struct RunContext {
    std::filesystem::path run_dir;
    PipelineConfig config;
    StageArgs args;
};

/// Stage names in chain order.
const std::vector<std::string>& stage_names();

/// Runs one stage: reads its inputs from the run directory (or config
/// paths), writes its artifacts, the resolved config and the manifest.
/// Throws MissingArtifact when an upstream artifact is absent and
/// ConfigError before doing any work when the config is invalid.
void run_stage(std::string_view stage, const RunContext& ctx);

/// Every stage in order; stages whose optional inputs are not configured
/// (kappa without ratings) are skipped.
void run_all(const RunContext& ctx);

/// Rewrites manifest.json: sha256 of every other file in the run directory.
void write_manifest(const std::filesystem::path& run_dir);

std::string sha256_file(const std::filesystem::path& path);

} // namespace memetrace
