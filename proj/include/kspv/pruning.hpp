#pragma once

#include <Eigen/Dense>

#include <vector>

#include "kspv/dynamics.hpp"
#include "kspv/kernels.hpp"
#include "kspv/nystrom.hpp"
#include "kspv/rkhs_geometry.hpp"

namespace kspv {

enum class PruneMode { exact, approximate };

struct PruneConfig {
    /// Target invariance proximity, in [0, 1).
    double epsilon = 0.05;
    /// Removal budget; 0 means the initial dictionary dimension.
    Eigen::Index max_iterations = 0;
    PruneMode mode = PruneMode::exact;
    ExactOptions exact;
    /// Approximate-mode knobs, mirrored from the Nystrom defaults.
    double approx_lambda_rel = 1e-8;
    double approx_c_v = 1e-3;
    double approx_c_kv = 1e-3;
    double approx_cosine_slack = 1e-3;
};

/// One pass of the loop: the dictionary width entering the pass, the principal
/// angles found, and delta = sin of the largest.
struct PruneIteration {
    Eigen::Index dimension = 0;
    Eigen::VectorXd angles;
    double delta = 0.0;
};

struct PruneReport {
    std::vector<PruneIteration> iterations;
    Eigen::MatrixXd final_w;
    double final_delta = 0.0;
    bool converged = false;
};

/// Drops the principal vector with the largest angle: W' = W · A_V[:, 1..k−1].
/// The retained columns are RKHS-orthonormal, so the next Gram matrix is near
/// identity. Ties at the top angle resolve to the last SVD column.
Eigen::MatrixXd spv_step(const Eigen::MatrixXd& w_v, const PrincipalDecomposition& pd);

/// Iteratively prunes until delta <= epsilon (converged), the subspace cannot
/// shrink further, or the iteration budget runs out.
PruneReport kernel_spv(const Eigen::MatrixXd& w_v, const SnapshotData& data,
                       const KernelSpec& kernel, const PruneConfig& config);

/// Same loop with angles from the Nystrom feature space; delta is the
/// approximate one. Features are built once and reused across iterations.
PruneReport approx_kernel_spv(const Eigen::MatrixXd& w_v, const SnapshotData& data,
                              const NystromModel& model, const PruneConfig& config);

} // namespace kspv
