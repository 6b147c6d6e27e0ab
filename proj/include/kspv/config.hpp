#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kspv/dynamics.hpp"
#include "kspv/kernels.hpp"

namespace kspv {

// Single JSON document, all fields optional with the defaults below. Env vars
// override file values: KSPV_<SECTION>__<KEY>=<json or string>, e.g.
// KSPV_DATA__COUNT=1000 or KSPV_KERNEL__FAMILY=gaussian.

struct SystemConfig {
    std::string name = "duffing"; // duffing | identity | linear
    double dt = 0.01;
    Eigen::MatrixXd matrix;     // linear systems only
    Eigen::MatrixXd box;        // n×2 sampling domain, rows are [lo, hi]
};

struct DataConfig {
    Eigen::Index count = 5000;
    std::uint64_t seed = 0;
};

struct DictionaryConfig {
    Eigen::Index size = 200;
    std::uint64_t seed = 1;
};

struct ExactConfig {
    double lambda_rel = 1e-10;
    double eig_threshold = 1e-8;
    double cosine_slack = 1e-6;
    /// Exact-path commands refuse datasets larger than this unless forced.
    Eigen::Index n_cap = 10000;
};

struct NystromConfig {
    std::vector<Eigen::Index> d_list = {800, 1000, 2000, 3000, 4000};
    std::uint64_t landmark_seed = 2;
    int landmark_seed_count = 5; // independent repeats in residual sweeps
    double lambda_rel = 1e-8;
    double c_v = 1e-3;
    double c_kv = 1e-3;
    double landmark_eig_threshold = 1e-10;
    double cosine_slack = 1e-3;
    Eigen::Index prune_d = 2000; // landmark count for approximate pruning
};

struct PruneCliConfig {
    double epsilon = 0.05;
    std::string mode = "approximate"; // exact | approximate
    Eigen::Index max_iterations = 0;  // 0 means dictionary size
};

struct PredictConfig {
    int steps = 5;
    std::string sort = "unit_distance"; // unit_distance (|λ−1| asc) | magnitude (|λ| desc)
};

struct ExperimentConfig {
    SystemConfig system;
    DataConfig data;
    KernelSpec kernel; // wendland, shape 2.0, smoothness 2
    DictionaryConfig dictionary;
    ExactConfig exact;
    NystromConfig nystrom;
    PruneCliConfig prune;
    PredictConfig predict;
    std::string out_dir = "out";
};

ExperimentConfig default_config();

/// Defaults overlaid with the given document; unknown keys raise ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& j);

nlohmann::ordered_json config_to_json(const ExperimentConfig& config);

/// Applies KSPV_-prefixed environment overrides onto a raw config document.
void apply_env_overrides(nlohmann::json& j, const std::string& prefix = "KSPV_");

/// Load (file or empty document), apply env overrides, parse, validate.
ExperimentConfig resolve_config(const std::optional<std::filesystem::path>& path);

void validate_config(const ExperimentConfig& config);

DiscreteSystem make_system(const ExperimentConfig& config);

} // namespace kspv
