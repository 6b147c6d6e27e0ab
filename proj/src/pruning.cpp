#include "kspv/pruning.hpp"

#include <functional>
#include <string>

#include "kspv/errors.hpp"

namespace kspv {

namespace {

void check_config(const PruneConfig& config) {
    if (config.epsilon < 0.0 || config.epsilon >= 1.0) {
        throw ConfigError("prune epsilon " + std::to_string(config.epsilon) +
                          " outside [0, 1)");
    }
    if (config.max_iterations < 0) {
        throw ConfigError("max_iterations must be nonnegative");
    }
}

/// Shared loop; `principal` maps the current dictionary to its decomposition.
PruneReport prune_loop(
    Eigen::MatrixXd w, const PruneConfig& config,
    const std::function<PrincipalDecomposition(const Eigen::MatrixXd&)>& principal) {
    check_config(config);

    const Eigen::Index budget =
        config.max_iterations > 0 ? config.max_iterations : w.cols();

    PruneReport report;
    Eigen::Index removals = 0;
    while (true) {
        const PrincipalDecomposition pd = principal(w);
        const double delta = invariance_proximity(pd);
        report.iterations.push_back({w.cols(), pd.angles, delta});
        report.final_delta = delta;

        if (delta <= config.epsilon) {
            report.converged = true;
            break;
        }
        if (pd.pair_count() <= 1 || removals >= budget) break;
        w = spv_step(w, pd);
        ++removals;
    }
    report.final_w = std::move(w);
    return report;
}

} // namespace

Eigen::MatrixXd spv_step(const Eigen::MatrixXd& w_v, const PrincipalDecomposition& pd) {
    const Eigen::Index k = pd.pair_count();
    if (k <= 1) {
        throw SubspaceExhausted("cannot prune a subspace with " + std::to_string(k) +
                                " principal pair(s)");
    }
    if (pd.a_v.rows() != w_v.cols()) {
        throw DimensionMismatch("principal coefficients have " +
                                std::to_string(pd.a_v.rows()) +
                                " rows, dictionary has " + std::to_string(w_v.cols()) +
                                " columns");
    }
    // Angles are sorted nondecreasing; column k-1 carries the largest.
    return w_v * pd.a_v.leftCols(k - 1);
}

PruneReport kernel_spv(const Eigen::MatrixXd& w_v, const SnapshotData& data,
                       const KernelSpec& kernel, const PruneConfig& config) {
    const ExactWorkspace ws = make_exact_workspace(data, kernel, config.exact.lambda_rel);
    return prune_loop(w_v, config, [&](const Eigen::MatrixXd& w) {
        return exact_principal(ws, w, config.exact);
    });
}

PruneReport approx_kernel_spv(const Eigen::MatrixXd& w_v, const SnapshotData& data,
                              const NystromModel& model, const PruneConfig& config) {
    const NystromFeatures features = build_features(model, data);
    const double lambda = default_feature_lambda(features, config.approx_lambda_rel);
    const double tau_v = default_svd_threshold(model, config.approx_c_v);
    const double tau_kv = default_svd_threshold(model, config.approx_c_kv);
    return prune_loop(w_v, config, [&](const Eigen::MatrixXd& w) {
        return approx_principal(features, w, lambda, tau_v, tau_kv,
                                config.approx_cosine_slack);
    });
}

} // namespace kspv
