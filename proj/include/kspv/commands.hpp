#pragma once

#include <filesystem>
#include <optional>
#include <string_view>

#include "kspv/config.hpp"

namespace kspv {

inline constexpr std::string_view kToolVersion = "0.1.0";

struct CommandContext {
    ExperimentConfig config;
    std::filesystem::path out_dir;
    /// Recompute the exact invariance proximity of pruned results.
    bool audit_exact = false;
    /// Run exact-path diagnostics past the configured dataset-size cap.
    bool force = false;
};

// Each command reads its inputs from out_dir (as produced by earlier
// commands), writes its outputs there, and finishes with a
// manifest_<verb>.json recording the config snapshot, per-stage wall times,
// and content digests of everything written. Outputs are deterministic
// functions of (config, inputs); manifests additionally carry wall times.

void cmd_generate(const CommandContext& ctx);
void cmd_dictionary(const CommandContext& ctx);
void cmd_residual_sweep(const CommandContext& ctx);
void cmd_compare_angles(const CommandContext& ctx);
void cmd_prune(const CommandContext& ctx);
void cmd_predict_error(const CommandContext& ctx,
                       const std::optional<std::filesystem::path>& dictionary_file);

} // namespace kspv
